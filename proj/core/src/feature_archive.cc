// core/src/feature_archive.cc

// Copyright 2026  cpcv authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "cpcv/feature_archive.h"

#include <cstring>
#include <fstream>

namespace cpcv {

namespace {

void PutU32(std::ostream &os, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

void PutU64(std::ostream &os, uint64_t v) {
  PutU32(os, static_cast<uint32_t>(v & 0xffffffffu));
  PutU32(os, static_cast<uint32_t>(v >> 32));
}

uint32_t GetU32(std::istream &is, const char *field) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char *>(b), 4))
    throw FormatError(StrCat("feature archive: truncated ", field));
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

uint64_t GetU64(std::istream &is, const char *field) {
  uint64_t lo = GetU32(is, field);
  uint64_t hi = GetU32(is, field);
  return lo | (hi << 32);
}

}  // namespace

FeatureArchiveWriter::FeatureArchiveWriter(const std::string &path)
    : path_(path) {
  auto *os = new std::ofstream(path, std::ios::binary);
  if (!*os) {
    delete os;
    throw DataError(StrCat("feature archive: cannot open for write: ", path));
  }
  os_ = os;
}

FeatureArchiveWriter::~FeatureArchiveWriter() {
  try {
    Close();
  } catch (...) {
  }
  delete static_cast<std::ofstream *>(os_);
}

void FeatureArchiveWriter::Write(const std::string &utt_id,
                                 const FeatureMatrix &f) {
  auto &os = *static_cast<std::ofstream *>(os_);
  if (!os.is_open()) throw ContractError("feature archive: writer closed");
  for (const auto &e : entries_)
    if (e.id == utt_id)
      throw ContractError(StrCat("feature archive: duplicate id: ", utt_id));
  entries_.push_back({utt_id, static_cast<uint64_t>(os.tellp())});
  PutU32(os, static_cast<uint32_t>(utt_id.size()));
  os.write(utt_id.data(), static_cast<std::streamsize>(utt_id.size()));
  PutU32(os, static_cast<uint32_t>(f.Rows()));
  PutU32(os, static_cast<uint32_t>(f.Cols()));
  char kind = static_cast<char>(f.kind);
  os.write(&kind, 1);
  for (int r = 0; r < f.Rows(); r++)
    for (int c = 0; c < f.Cols(); c++) {
      float v = static_cast<float>(f.values(r, c));
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      PutU32(os, bits);
    }
  if (!os) throw DataError(StrCat("feature archive: write failed: ", path_));
}

void FeatureArchiveWriter::Close() {
  auto &os = *static_cast<std::ofstream *>(os_);
  if (!os.is_open()) return;
  uint64_t table_offset = static_cast<uint64_t>(os.tellp());
  PutU32(os, static_cast<uint32_t>(entries_.size()));
  for (const auto &e : entries_) {
    PutU32(os, static_cast<uint32_t>(e.id.size()));
    os.write(e.id.data(), static_cast<std::streamsize>(e.id.size()));
    PutU64(os, e.offset);
  }
  PutU64(os, table_offset);
  os.write("CPCA", 4);
  os.close();
  if (os.fail()) throw DataError(StrCat("feature archive: close failed: ", path_));

  std::ofstream idx(path_ + ".idx");
  if (!idx) throw DataError(StrCat("feature archive: cannot write index: ",
                                   path_, ".idx"));
  for (const auto &e : entries_) idx << e.id << " " << e.offset << "\n";
}

FeatureArchiveReader::FeatureArchiveReader(const std::string &path)
    : path_(path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError(StrCat("feature archive: cannot open: ", path));
  is.seekg(-12, std::ios::end);
  uint64_t table_offset = GetU64(is, "footer");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "CPCA", 4) != 0)
    throw FormatError(StrCat("feature archive: missing CPCA footer: ", path));
  is.seekg(static_cast<std::streamoff>(table_offset));
  uint32_t count = GetU32(is, "table count");
  for (uint32_t i = 0; i < count; i++) {
    uint32_t len = GetU32(is, "table id");
    std::string id(len, '\0');
    if (!is.read(id.data(), len))
      throw FormatError("feature archive: truncated table id");
    uint64_t off = GetU64(is, "table offset");
    ids_.push_back(id);
    offsets_[id] = off;
  }
}

bool FeatureArchiveReader::Contains(const std::string &utt_id) const {
  return offsets_.count(utt_id) > 0;
}

FeatureMatrix FeatureArchiveReader::Read(const std::string &utt_id) const {
  auto it = offsets_.find(utt_id);
  if (it == offsets_.end())
    throw DataError(StrCat("feature archive: id not found: ", utt_id, " in ",
                           path_));
  std::ifstream is(path_, std::ios::binary);
  if (!is) throw DataError(StrCat("feature archive: cannot open: ", path_));
  is.seekg(static_cast<std::streamoff>(it->second));
  uint32_t len = GetU32(is, "record id");
  std::string id(len, '\0');
  if (!is.read(id.data(), len) || id != utt_id)
    throw FormatError(StrCat("feature archive: record id mismatch at offset ",
                             it->second));
  uint32_t rows = GetU32(is, "rows");
  uint32_t cols = GetU32(is, "cols");
  char kind;
  if (!is.read(&kind, 1)) throw FormatError("feature archive: truncated kind");
  FeatureMatrix f;
  f.kind = static_cast<FeatureKind>(kind);
  f.values.resize(rows, cols);
  for (uint32_t r = 0; r < rows; r++)
    for (uint32_t c = 0; c < cols; c++) {
      uint32_t bits = GetU32(is, "values");
      float v;
      std::memcpy(&v, &bits, 4);
      f.values(r, c) = v;
    }
  return f;
}

}  // namespace cpcv
