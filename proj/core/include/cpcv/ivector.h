// core/include/cpcv/ivector.h

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

#ifndef CPCV_IVECTOR_H_
#define CPCV_IVECTOR_H_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cpcv/gmm.h"

namespace cpcv {

// Total-variability model: supervector offset M = m + T w with w ~ N(0, I).
// T stacks per-mixture blocks of F rows each: rows [c*F, (c+1)*F) act on
// mixture c.
struct TotalVariabilityModel {
  DiagGmm ubm;
  Eigen::MatrixXd t;  // [(C*F) x R]
  int Rank() const { return static_cast<int>(t.cols()); }
  void Validate() const;
};

// Plain EM on centered Baum-Welch statistics: posterior estimation of w per
// utterance alternating with a per-mixture least-squares update of T. The
// trace holds the per-iteration evidence sum
//   sum_u 0.5*(w_u' L_u w_u - logdet L_u),
// which is non-decreasing (1e-6 slack). Singular normal equations get a
// ridge of 1e-6 (trace-scaled) with a warning.
TotalVariabilityModel TMatrixEmTrain(const std::vector<SuffStats> &stats,
                                     const DiagGmm &ubm, int rank, int iters,
                                     uint64_t seed,
                                     std::vector<double> *objective_trace =
                                         nullptr);

// Posterior mean of w:
//   w = (I + T' Sigma^-1 N T)^-1 T' Sigma^-1 (F - N m)
// with N expanded block-diagonally over mixtures.
Eigen::VectorXd ExtractIvector(const TotalVariabilityModel &model,
                               const SuffStats &stats);

}  // namespace cpcv

#endif  // CPCV_IVECTOR_H_
