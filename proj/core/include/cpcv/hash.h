// core/include/cpcv/hash.h

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

#ifndef CPCV_HASH_H_
#define CPCV_HASH_H_

#include <string>

namespace cpcv {

// First 16 bytes of SHA-256, hex encoded (32 characters).
std::string ContentHash(const std::string &bytes);
std::string FileContentHash(const std::string &path);

}  // namespace cpcv

#endif  // CPCV_HASH_H_
