// core/include/cpcv/optim.h

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

#ifndef CPCV_OPTIM_H_
#define CPCV_OPTIM_H_

#include <vector>

#include "cpcv/tensor.h"

namespace cpcv {

// Adaptive-moment estimation state for a fixed parameter list.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState MakeAdamState(const std::vector<Tensor> &params);

// One update from the accumulated gradients. Bias-corrected moments.
// Zero gradient leaves a parameter bitwise unchanged. Throws NumericError
// when any gradient is non-finite (training diverged).
void AdamStep(std::vector<Tensor> &params, AdamState &state, double lr);

void ZeroGrads(std::vector<Tensor> &params);

}  // namespace cpcv

#endif  // CPCV_OPTIM_H_
