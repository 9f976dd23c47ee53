// core/include/cpcv/rng.h

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

#ifndef CPCV_RNG_H_
#define CPCV_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

namespace cpcv {

// Deterministic seed derivation (splitmix64 finalizer).
uint64_t MixSeed(uint64_t seed, uint64_t stream);

// Seeded random source. All distributions are implemented on top of the raw
// mt19937_64 stream so that sequences are identical across platforms and
// standard-library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed), seed_base_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double Uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Unbiased integer in [0, n). n must be > 0.
  uint64_t UniformInt(uint64_t n);

  // Standard normal via Box-Muller, one spare cached.
  double Normal();

  // Fisher-Yates.
  template <typename T>
  void Shuffle(std::vector<T> &v) {
    if (v.size() < 2) return;
    for (size_t i = v.size() - 1; i > 0; i--) {
      size_t j = static_cast<size_t>(UniformInt(i + 1));
      std::swap(v[i], v[j]);
    }
  }

  // Independent child stream; deterministic function of (this seed, stream).
  Rng Fork(uint64_t stream) const { return Rng(MixSeed(seed_base_, stream)); }

 private:
  std::mt19937_64 gen_;
  uint64_t seed_base_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cpcv

#endif  // CPCV_RNG_H_
