// core/include/cpcv/container.h

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

#ifndef CPCV_CONTAINER_H_
#define CPCV_CONTAINER_H_

#include <cstdint>
#include <string>
#include <vector>

namespace cpcv {

// One named tensor as stored on disk (32-bit floats).
struct NamedTensor {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<float> values;
};

// Versioned binary container for model parameters.
//
//   magic "CPCV" | u32 version | records...
//   record: u32 name_len | name bytes | u32 rank | u32 dims[rank]
//           | f32 values (little endian, row major)
//
// Round trips are bit exact: write(read(file)) reproduces file byte for byte.
void WriteContainer(const std::string &path,
                    const std::vector<NamedTensor> &tensors);
std::vector<NamedTensor> ReadContainer(const std::string &path);

// In-memory encode/decode, used by the file functions and by tests.
std::string EncodeContainer(const std::vector<NamedTensor> &tensors);
std::vector<NamedTensor> DecodeContainer(const std::string &bytes);

constexpr uint32_t kContainerVersion = 1;

}  // namespace cpcv

#endif  // CPCV_CONTAINER_H_
