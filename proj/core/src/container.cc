// core/src/container.cc

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

#include "cpcv/container.h"

#include <cstring>
#include <fstream>

#include "cpcv/common.h"

namespace cpcv {

namespace {

void PutU32(std::string &out, uint32_t v) {
  char b[4];
  b[0] = static_cast<char>(v & 0xff);
  b[1] = static_cast<char>((v >> 8) & 0xff);
  b[2] = static_cast<char>((v >> 16) & 0xff);
  b[3] = static_cast<char>((v >> 24) & 0xff);
  out.append(b, 4);
}

uint32_t GetU32(const std::string &s, size_t &pos) {
  if (pos + 4 > s.size()) throw FormatError("container: truncated u32 field");
  auto b = reinterpret_cast<const unsigned char *>(s.data() + pos);
  pos += 4;
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

void PutF32(std::string &out, float f) {
  uint32_t v;
  std::memcpy(&v, &f, 4);
  PutU32(out, v);
}

float GetF32(const std::string &s, size_t &pos) {
  uint32_t v = GetU32(s, pos);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

}  // namespace

std::string EncodeContainer(const std::vector<NamedTensor> &tensors) {
  std::string out;
  out.append("CPCV", 4);
  PutU32(out, kContainerVersion);
  for (const auto &t : tensors) {
    PutU32(out, static_cast<uint32_t>(t.name.size()));
    out.append(t.name);
    PutU32(out, static_cast<uint32_t>(t.shape.size()));
    uint64_t numel = 1;
    for (uint32_t d : t.shape) {
      PutU32(out, d);
      numel *= d;
    }
    if (numel != t.values.size())
      throw ContractError(StrCat("container: tensor '", t.name,
                                 "' shape wants ", numel, " values, has ",
                                 t.values.size()));
    for (float f : t.values) PutF32(out, f);
  }
  return out;
}

std::vector<NamedTensor> DecodeContainer(const std::string &bytes) {
  if (bytes.size() < 8 || bytes.compare(0, 4, "CPCV") != 0)
    throw FormatError("container: missing CPCV magic");
  size_t pos = 4;
  uint32_t version = GetU32(bytes, pos);
  if (version != kContainerVersion)
    throw FormatError(StrCat("container: unsupported version ", version));
  std::vector<NamedTensor> out;
  while (pos < bytes.size()) {
    NamedTensor t;
    uint32_t name_len = GetU32(bytes, pos);
    if (pos + name_len > bytes.size())
      throw FormatError("container: truncated tensor name");
    t.name.assign(bytes, pos, name_len);
    pos += name_len;
    uint32_t rank = GetU32(bytes, pos);
    uint64_t numel = 1;
    t.shape.resize(rank);
    for (uint32_t i = 0; i < rank; i++) {
      t.shape[i] = GetU32(bytes, pos);
      numel *= t.shape[i];
    }
    if (pos + 4 * numel > bytes.size())
      throw FormatError(StrCat("container: truncated values for '", t.name, "'"));
    t.values.resize(numel);
    for (uint64_t i = 0; i < numel; i++) t.values[i] = GetF32(bytes, pos);
    out.push_back(std::move(t));
  }
  return out;
}

void WriteContainer(const std::string &path,
                    const std::vector<NamedTensor> &tensors) {
  std::string bytes = EncodeContainer(tensors);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError(StrCat("container: cannot open for write: ", path));
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DataError(StrCat("container: write failed: ", path));
}

std::vector<NamedTensor> ReadContainer(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError(StrCat("container: cannot open: ", path));
  std::string bytes((std::istreambuf_iterator<char>(is)),
                    std::istreambuf_iterator<char>());
  return DecodeContainer(bytes);
}

}  // namespace cpcv
