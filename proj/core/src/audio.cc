// core/src/audio.cc

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

#include "cpcv/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cpcv/common.h"

namespace cpcv {

namespace {

uint32_t ReadU32(std::istream &is, const char *field) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char *>(b), 4))
    throw FormatError(StrCat("wav: truncated while reading ", field));
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t ReadU16(std::istream &is, const char *field) {
  unsigned char b[2];
  if (!is.read(reinterpret_cast<char *>(b), 2))
    throw FormatError(StrCat("wav: truncated while reading ", field));
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void WriteU32(std::ostream &os, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

void WriteU16(std::ostream &os, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  os.write(b, 2);
}

}  // namespace

Waveform LoadWav(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError(StrCat("wav: cannot open: ", path));

  char tag[4];
  if (!is.read(tag, 4) || std::memcmp(tag, "RIFF", 4) != 0)
    throw FormatError(StrCat("wav: missing RIFF tag: ", path));
  ReadU32(is, "riff size");
  if (!is.read(tag, 4) || std::memcmp(tag, "WAVE", 4) != 0)
    throw FormatError(StrCat("wav: missing WAVE tag: ", path));

  Waveform w;
  bool have_fmt = false;
  uint16_t channels = 0, bits = 0;
  // Chunk walk; "fmt " must precede "data".
  while (true) {
    if (!is.read(tag, 4)) throw FormatError(StrCat("wav: no data chunk: ", path));
    uint32_t chunk_size = ReadU32(is, "chunk size");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      uint16_t format = ReadU16(is, "audio format");
      channels = ReadU16(is, "channels");
      w.sample_rate = static_cast<int>(ReadU32(is, "sample rate"));
      ReadU32(is, "byte rate");
      ReadU16(is, "block align");
      bits = ReadU16(is, "bits per sample");
      if (format != 1)
        throw FormatError(StrCat("wav: audio format must be PCM(1), got ",
                                 format, ": ", path));
      if (channels != 1)
        throw FormatError(StrCat("wav: channels must be 1, got ", channels,
                                 ": ", path));
      if (bits != 16)
        throw FormatError(StrCat("wav: bits per sample must be 16, got ", bits,
                                 ": ", path));
      if (w.sample_rate <= 0)
        throw FormatError(StrCat("wav: sample rate must be positive, got ",
                                 w.sample_rate, ": ", path));
      if (chunk_size > 16) is.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt)
        throw FormatError(StrCat("wav: data chunk before fmt chunk: ", path));
      size_t n = chunk_size / 2;
      std::vector<char> raw(chunk_size);
      if (!is.read(raw.data(), chunk_size))
        throw FormatError(StrCat("wav: truncated data chunk: ", path));
      w.samples.resize(n);
      for (size_t i = 0; i < n; i++) {
        int16_t s;
        std::memcpy(&s, raw.data() + 2 * i, 2);
        w.samples[i] = static_cast<double>(s) / 32768.0;
      }
      break;
    } else {
      // Skip unknown chunk (word aligned).
      is.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
      if (!is) throw FormatError(StrCat("wav: truncated chunk list: ", path));
    }
  }
  if (w.samples.empty())
    throw FormatError(StrCat("wav: empty data chunk: ", path));
  return w;
}

void SaveWavPcm16(const std::string &path, const Waveform &w) {
  if (w.samples.empty()) throw ContractError("wav: refusing to write empty waveform");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError(StrCat("wav: cannot open for write: ", path));
  uint32_t data_bytes = static_cast<uint32_t>(w.samples.size() * 2);
  os.write("RIFF", 4);
  WriteU32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  WriteU32(os, 16);
  WriteU16(os, 1);  // PCM
  WriteU16(os, 1);  // mono
  WriteU32(os, static_cast<uint32_t>(w.sample_rate));
  WriteU32(os, static_cast<uint32_t>(w.sample_rate * 2));
  WriteU16(os, 2);
  WriteU16(os, 16);
  os.write("data", 4);
  WriteU32(os, data_bytes);
  for (double v : w.samples) {
    double c = std::clamp(v, -1.0, 1.0);
    int s = static_cast<int>(std::lrint(c * 32768.0));
    s = std::clamp(s, -32768, 32767);
    int16_t s16 = static_cast<int16_t>(s);
    char b[2];
    std::memcpy(b, &s16, 2);
    os.write(b, 2);
  }
  if (!os) throw DataError(StrCat("wav: write failed: ", path));
}

}  // namespace cpcv
