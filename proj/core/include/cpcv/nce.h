// core/include/cpcv/nce.h

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

#ifndef CPCV_NCE_H_
#define CPCV_NCE_H_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace cpcv {

// ---- discrete information measures ----------------------------------------

// Joint distribution over an n x m grid; entries >= 0, total 1 (1e-12 slack).
struct DiscreteJoint {
  Eigen::MatrixXd p;
  void Validate() const;

  Eigen::VectorXd MarginalX() const;  // row sums
  Eigen::VectorXd MarginalY() const;  // column sums
};

// All in nats; 0*log(0) is taken as 0.
double Entropy(const Eigen::VectorXd &pmf);
double ConditionalEntropy(const DiscreteJoint &joint);   // H(X|Y)
double MutualInformation(const DiscreteJoint &joint);    // H(X) - H(X|Y)
// Same quantity through the double-sum form sum p(x,y) log(p(x|y)/p(x)).
double MutualInformationDoubleSum(const DiscreteJoint &joint);

// ---- NCE for unnormalized densities ----------------------------------------

// Density estimation by logistic discrimination of data against known noise.
// The model is unnormalized: ln P0_M(x; alpha); the log-partition enters as
// the learned offset c, so the full model is ln P_M = ln P0_M + c.
struct NceProblem {
  std::vector<Eigen::VectorXd> data;    // samples from the unknown density
  std::vector<Eigen::VectorXd> noise;   // samples from the known noise
  std::function<double(const Eigen::VectorXd &, const Eigen::VectorXd &)>
      log_model;  // ln P0_M(x; alpha)
  std::function<Eigen::VectorXd(const Eigen::VectorXd &,
                                const Eigen::VectorXd &)>
      grad_log_model;  // d ln P0_M / d alpha
  std::function<double(const Eigen::VectorXd &)> log_noise;  // ln P_N(x)
  int alpha_dim = 0;

  double Nu() const {  // noise-to-data sample ratio
    return static_cast<double>(noise.size()) / static_cast<double>(data.size());
  }
};

struct NceFit {
  Eigen::VectorXd alpha;
  double c = 0.0;
  std::vector<double> objective_trace;  // J_T per accepted iterate
};

// Maximizes J_T = (1/Tx)[sum ln h(x) + sum ln(1-h(y))] with
// h(u) = P_M / (P_M + nu * P_N) by full-batch gradient ascent with a
// backtracking (Armijo) line search. The trace never decreases.
NceFit NceFitEstimate(const NceProblem &problem, int max_iters,
                      const Eigen::VectorXd &alpha0, double c0 = 0.0);

// ---- InfoNCE mutual-information bound --------------------------------------

struct BoundExperimentResult {
  double mutual_information;  // analytic I of the channel
  double mean_loss;           // batch-softmax loss of the trained scorer
  double bound;               // ln(batch) - mean_loss, a lower bound on I
};

// Builds a discrete context->future channel with known I, trains a tabular
// score table with the batch softmax loss on sampled batches, and evaluates
// the trained loss on fresh batches.
BoundExperimentResult InfoNceBoundExperiment(const DiscreteJoint &channel,
                                             int batch, int train_steps,
                                             int eval_batches, uint64_t seed);

// Channel constructors for experiments.
DiscreteJoint DeterministicChannel(int n_classes);           // u == s
DiscreteJoint IndependentChannel(int n_classes);             // I == 0
DiscreteJoint RandomChannel(int n_classes, uint64_t seed);   // Dirichlet-ish

}  // namespace cpcv

#endif  // CPCV_NCE_H_
