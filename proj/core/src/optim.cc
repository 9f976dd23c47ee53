// core/src/optim.cc

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

#include "cpcv/optim.h"

#include <cmath>

namespace cpcv {

AdamState MakeAdamState(const std::vector<Tensor> &params) {
  AdamState st;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (const auto &p : params) {
    st.m.emplace_back(static_cast<size_t>(p.NumEl()), 0.0);
    st.v.emplace_back(static_cast<size_t>(p.NumEl()), 0.0);
  }
  return st;
}

void AdamStep(std::vector<Tensor> &params, AdamState &state, double lr) {
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw ContractError("AdamStep: state does not match parameter list");
  state.step++;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t pi = 0; pi < params.size(); pi++) {
    Tensor &p = params[pi];
    DoubleVec &g = p.Grad();
    if (g.size() != state.m[pi].size())
      throw ContractError("AdamStep: gradient/state size mismatch");
    double *pv = p.Data();
    double *m = state.m[pi].data();
    double *v = state.v[pi].data();
    for (size_t i = 0; i < g.size(); i++) {
      if (!std::isfinite(g[i]))
        throw NumericError("AdamStep: non-finite gradient (training diverged)");
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      pv[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

void ZeroGrads(std::vector<Tensor> &params) {
  for (auto &p : params) p.ZeroGrad();
}

}  // namespace cpcv
