// core/include/cpcv/common.h

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

#ifndef CPCV_COMMON_H_
#define CPCV_COMMON_H_

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cpcv {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Incompatible shapes or dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Bad configuration value or key. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Missing or unusable data (files, manifests, empty sets). Exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (wav headers, containers, archives).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// API contract violation (e.g. backward on a non-scalar loss).
class ContractError : public Error {
 public:
  using Error::Error;
};

namespace internal {
inline void StrAppend(std::ostringstream &) {}
template <typename T, typename... Rest>
void StrAppend(std::ostringstream &os, const T &v, const Rest &...rest) {
  os << v;
  StrAppend(os, rest...);
}
}  // namespace internal

template <typename... Args>
std::string StrCat(const Args &...args) {
  std::ostringstream os;
  internal::StrAppend(os, args...);
  return os.str();
}

// Prints "WARNING (cpcv): ..." on stderr. Warnings never abort.
void Warn(const std::string &msg);

}  // namespace cpcv

#endif  // CPCV_COMMON_H_
