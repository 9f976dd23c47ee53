// core/src/fft.h

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

#ifndef CPCV_SRC_FFT_H_
#define CPCV_SRC_FFT_H_

#include <complex>
#include <vector>

namespace cpcv {

// In-place iterative radix-2 FFT. Size must be a power of two.
void FftPow2(std::vector<std::complex<double>> &a, bool inverse = false);

}  // namespace cpcv

#endif  // CPCV_SRC_FFT_H_
