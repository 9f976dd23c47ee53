// core/include/cpcv/gmm.h

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

#ifndef CPCV_GMM_H_
#define CPCV_GMM_H_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace cpcv {

// Diagonal-covariance Gaussian mixture. Rows of means/vars index mixtures.
struct DiagGmm {
  Eigen::VectorXd weights;  // [C], nonnegative, sums to 1
  Eigen::MatrixXd means;    // [C x F]
  Eigen::MatrixXd vars;     // [C x F], floored positive

  int NumMix() const { return static_cast<int>(weights.size()); }
  int Dim() const { return static_cast<int>(means.cols()); }
  void Validate() const;

  // Per-frame log density log p(x) and, optionally, mixture posteriors.
  double LogLikelihood(const Eigen::VectorXd &x,
                       Eigen::VectorXd *posteriors = nullptr) const;
};

// Zeroth/first order Baum-Welch statistics against a UBM.
struct SuffStats {
  Eigen::VectorXd n;        // [C], posterior-weighted counts
  Eigen::MatrixXd f;        // [C x F], posterior-weighted sums
  int64_t num_frames = 0;

  void Add(const SuffStats &other);  // associative merge
};

// Relative variance floor: vars >= kVarFloorScale * global variance.
constexpr double kVarFloorScale = 1e-6;

// EM training with random frames as initial means; the per-iteration total
// log-likelihood trace is non-decreasing (1e-6 slack). A mixture that
// collapses to zero occupancy is re-seeded from the highest-variance one
// with a warning.
DiagGmm GmmEmTrain(const Eigen::MatrixXd &features, int num_mix, int iters,
                   uint64_t seed, std::vector<double> *loglik_trace = nullptr);

// Bayesian (MAP) adaptation of the mixture means only:
// m'_c = a_c E_c + (1-a_c) m_c with a_c = N_c/(N_c + relevance).
// Weights and variances are copied unchanged.
DiagGmm MapAdaptMeans(const DiagGmm &ubm, const Eigen::MatrixXd &enrollment,
                      double relevance);

// Mean per-frame log P(U|GMM) - log P(U|UBM).
double LikelihoodRatio(const Eigen::MatrixXd &utterance,
                       const DiagGmm &speaker_gmm, const DiagGmm &ubm);

// N_c = sum_t gamma_t(c), F_c = sum_t gamma_t(c) x_t with UBM posteriors.
SuffStats AccumulateStats(const DiagGmm &ubm, const Eigen::MatrixXd &features);

// Draws frames from the mixture (for synthetic-data tests and tools).
Eigen::MatrixXd SampleFromGmm(const DiagGmm &gmm, int num_frames,
                              uint64_t seed);

}  // namespace cpcv

#endif  // CPCV_GMM_H_
