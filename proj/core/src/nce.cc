// core/src/nce.cc

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

#include "cpcv/nce.h"

#include <algorithm>
#include <cmath>

#include "cpcv/common.h"
#include "cpcv/rng.h"

namespace cpcv {

// ---- information measures ---------------------------------------------

void DiscreteJoint::Validate() const {
  double total = 0.0;
  for (int i = 0; i < p.rows(); i++)
    for (int j = 0; j < p.cols(); j++) {
      if (p(i, j) < 0.0)
        throw ContractError(StrCat("DiscreteJoint: negative entry at (", i,
                                   ",", j, ")"));
      total += p(i, j);
    }
  if (std::abs(total - 1.0) > 1e-12)
    throw ContractError(StrCat("DiscreteJoint: total mass ", total,
                               " is not 1"));
}

Eigen::VectorXd DiscreteJoint::MarginalX() const { return p.rowwise().sum(); }
Eigen::VectorXd DiscreteJoint::MarginalY() const {
  return p.colwise().sum().transpose();
}

namespace {
inline double PLogP(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }
}  // namespace

double Entropy(const Eigen::VectorXd &pmf) {
  double h = 0.0;
  for (int i = 0; i < pmf.size(); i++) {
    if (pmf[i] < 0.0)
      throw ContractError("Entropy: negative probability");
    h -= PLogP(pmf[i]);
  }
  return h;
}

double ConditionalEntropy(const DiscreteJoint &joint) {
  joint.Validate();
  // H(X|Y) = -sum_{i,j} p(x_i, y_j) log p(x_i | y_j)
  Eigen::VectorXd py = joint.MarginalY();
  double h = 0.0;
  for (int j = 0; j < joint.p.cols(); j++) {
    if (py[j] <= 0.0) continue;
    for (int i = 0; i < joint.p.rows(); i++) {
      double pij = joint.p(i, j);
      if (pij > 0.0) h -= pij * std::log(pij / py[j]);
    }
  }
  return h;
}

double MutualInformation(const DiscreteJoint &joint) {
  joint.Validate();
  return Entropy(joint.MarginalX()) - ConditionalEntropy(joint);
}

double MutualInformationDoubleSum(const DiscreteJoint &joint) {
  joint.Validate();
  Eigen::VectorXd px = joint.MarginalX();
  Eigen::VectorXd py = joint.MarginalY();
  double mi = 0.0;
  for (int i = 0; i < joint.p.rows(); i++)
    for (int j = 0; j < joint.p.cols(); j++) {
      double pij = joint.p(i, j);
      if (pij > 0.0) mi += pij * std::log(pij / (px[i] * py[j]));
    }
  return mi;
}

// ---- NCE fit -------------------------------------------------------------

namespace {

// J_T and its gradient in theta = [alpha; c].
double NceObjective(const NceProblem &pb, const Eigen::VectorXd &alpha,
                    double c, Eigen::VectorXd *grad) {
  double log_nu = std::log(pb.Nu());
  double tx = static_cast<double>(pb.data.size());
  double obj = 0.0;
  if (grad != nullptr) grad->setZero(pb.alpha_dim + 1);

  auto logistic = [](double g) {
    return g >= 0 ? 1.0 / (1.0 + std::exp(-g))
                  : std::exp(g) / (1.0 + std::exp(g));
  };
  // Numerically stable ln sigmoid(g) = -ln(1 + exp(-g)).
  auto log_sigmoid = [](double g) {
    return g >= 0 ? -std::log1p(std::exp(-g)) : g - std::log1p(std::exp(g));
  };

  for (const auto &x : pb.data) {
    double g = pb.log_model(x, alpha) + c - pb.log_noise(x) - log_nu;
    obj += log_sigmoid(g);
    if (grad != nullptr) {
      double w = 1.0 - logistic(g);  // d ln h / dG
      grad->head(pb.alpha_dim) += w * pb.grad_log_model(x, alpha);
      (*grad)[pb.alpha_dim] += w;
    }
  }
  for (const auto &y : pb.noise) {
    double g = pb.log_model(y, alpha) + c - pb.log_noise(y) - log_nu;
    obj += log_sigmoid(-g);  // ln(1 - h)
    if (grad != nullptr) {
      double w = -logistic(g);  // d ln(1-h) / dG
      grad->head(pb.alpha_dim) += w * pb.grad_log_model(y, alpha);
      (*grad)[pb.alpha_dim] += w;
    }
  }
  if (grad != nullptr) *grad /= tx;
  return obj / tx;
}

}  // namespace

NceFit NceFitEstimate(const NceProblem &problem, int max_iters,
                      const Eigen::VectorXd &alpha0, double c0) {
  if (problem.data.empty() || problem.noise.empty())
    throw DataError("nce_fit: need both data and noise samples");
  if (alpha0.size() != problem.alpha_dim)
    throw ContractError("nce_fit: alpha0 size disagrees with alpha_dim");

  NceFit fit;
  fit.alpha = alpha0;
  fit.c = c0;

  Eigen::VectorXd grad(problem.alpha_dim + 1);
  double obj = NceObjective(problem, fit.alpha, fit.c, &grad);
  if (!std::isfinite(obj))
    throw NumericError("nce_fit: objective not finite at the start");
  fit.objective_trace.push_back(obj);

  double step = 1.0;
  for (int it = 0; it < max_iters; it++) {
    double gnorm2 = grad.squaredNorm();
    if (gnorm2 < 1e-18) break;
    // Backtracking (Armijo) line search along the gradient.
    bool accepted = false;
    for (int bt = 0; bt < 60; bt++) {
      Eigen::VectorXd alpha_try =
          fit.alpha + step * grad.head(problem.alpha_dim);
      double c_try = fit.c + step * grad[problem.alpha_dim];
      double obj_try = NceObjective(problem, alpha_try, c_try, nullptr);
      if (std::isfinite(obj_try) && obj_try >= obj + 1e-4 * step * gnorm2) {
        fit.alpha = alpha_try;
        fit.c = c_try;
        obj = obj_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!std::isfinite(obj))
        throw NumericError(StrCat("nce_fit: diverged at iteration ", it,
                                  "; last finite objective ",
                                  fit.objective_trace.back()));
      break;  // no ascent direction at this scale; converged
    }
    obj = NceObjective(problem, fit.alpha, fit.c, &grad);
    fit.objective_trace.push_back(obj);
    step = std::min(step * 2.0, 1e3);  // allow the step to grow back
  }
  return fit;
}

// ---- InfoNCE bound experiment ---------------------------------------------

DiscreteJoint DeterministicChannel(int n_classes) {
  DiscreteJoint j;
  j.p = Eigen::MatrixXd::Zero(n_classes, n_classes);
  for (int i = 0; i < n_classes; i++) j.p(i, i) = 1.0 / n_classes;
  return j;
}

DiscreteJoint IndependentChannel(int n_classes) {
  DiscreteJoint j;
  j.p = Eigen::MatrixXd::Constant(n_classes, n_classes,
                                  1.0 / (n_classes * n_classes));
  return j;
}

DiscreteJoint RandomChannel(int n_classes, uint64_t seed) {
  Rng rng(seed);
  DiscreteJoint j;
  j.p.resize(n_classes, n_classes);
  // Exponential draws normalized per row give a Dirichlet(1) conditional;
  // a random row weight then forms the joint.
  Eigen::VectorXd ps(n_classes);
  for (int i = 0; i < n_classes; i++) ps[i] = -std::log(1.0 - rng.Uniform());
  ps /= ps.sum();
  for (int i = 0; i < n_classes; i++) {
    Eigen::VectorXd row(n_classes);
    for (int k = 0; k < n_classes; k++) {
      double u = -std::log(1.0 - rng.Uniform());
      // Squaring skews rows away from uniform so channels vary in I.
      row[k] = u * u;
    }
    row /= row.sum();
    j.p.row(i) = ps[i] * row.transpose();
  }
  // Renormalize exactly.
  j.p /= j.p.sum();
  return j;
}

BoundExperimentResult InfoNceBoundExperiment(const DiscreteJoint &channel,
                                             int batch, int train_steps,
                                             int eval_batches, uint64_t seed) {
  channel.Validate();
  if (batch < 2) throw ContractError("bound experiment: batch must be >= 2");
  int ns = static_cast<int>(channel.p.rows());
  int nu = static_cast<int>(channel.p.cols());

  // Flattened CDF for sampling (s, u) pairs.
  std::vector<double> cdf;
  cdf.reserve(ns * nu);
  double acc = 0.0;
  for (int i = 0; i < ns; i++)
    for (int j = 0; j < nu; j++) {
      acc += channel.p(i, j);
      cdf.push_back(acc);
    }
  Rng rng(seed);
  auto sample_pair = [&](int *s, int *u) {
    double r = rng.Uniform() * acc;
    auto it = std::lower_bound(cdf.begin(), cdf.end(), r);
    int idx = static_cast<int>(it - cdf.begin());
    if (idx >= ns * nu) idx = ns * nu - 1;
    *s = idx / nu;
    *u = idx % nu;
  };

  // Tabular score function: logits[s][u].
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(ns, nu);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ns, nu);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(ns, nu);
  const double lr = 0.05, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  std::vector<int> ss(batch), uu(batch);
  Eigen::MatrixXd scores(batch, batch), soft(batch, batch);

  auto batch_loss = [&](bool learn, int64_t step) {
    for (int i = 0; i < batch; i++) sample_pair(&ss[i], &uu[i]);
    for (int i = 0; i < batch; i++)
      for (int j = 0; j < batch; j++) scores(i, j) = logits(ss[i], uu[j]);
    double loss = 0.0;
    for (int i = 0; i < batch; i++) {
      double mx = scores.row(i).maxCoeff();
      double lse = std::log((scores.row(i).array() - mx).exp().sum()) + mx;
      loss += lse - scores(i, i);
      if (learn)
        soft.row(i) = (scores.row(i).array() - lse).exp();
    }
    loss /= batch;
    if (learn) {
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(ns, nu);
      for (int i = 0; i < batch; i++) {
        for (int j = 0; j < batch; j++)
          g(ss[i], uu[j]) += soft(i, j) / batch;
        g(ss[i], uu[i]) -= 1.0 / batch;
      }
      double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      m = beta1 * m + (1.0 - beta1) * g;
      v = beta2 * v.array().matrix() + (1.0 - beta2) * g.cwiseProduct(g);
      logits.array() -=
          lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
    }
    return loss;
  };

  for (int64_t t = 1; t <= train_steps; t++) batch_loss(true, t);
  double mean_loss = 0.0;
  for (int t = 0; t < eval_batches; t++) mean_loss += batch_loss(false, 0);
  mean_loss /= eval_batches;

  BoundExperimentResult r;
  r.mutual_information = MutualInformation(channel);
  r.mean_loss = mean_loss;
  r.bound = std::log(static_cast<double>(batch)) - mean_loss;
  return r;
}

}  // namespace cpcv
