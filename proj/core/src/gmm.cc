// core/src/gmm.cc

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

#include "cpcv/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "cpcv/common.h"
#include "cpcv/rng.h"

namespace cpcv {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

void DiagGmm::Validate() const {
  if (weights.size() == 0) throw ContractError("DiagGmm: empty model");
  if (means.rows() != weights.size() || vars.rows() != weights.size() ||
      means.cols() != vars.cols())
    throw DimensionError("DiagGmm: inconsistent component shapes");
  double total = 0.0;
  for (int c = 0; c < NumMix(); c++) {
    if (weights[c] < 0.0) throw ContractError("DiagGmm: negative weight");
    total += weights[c];
    for (int d = 0; d < Dim(); d++)
      if (vars(c, d) <= 0.0)
        throw ContractError("DiagGmm: non-positive variance");
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ContractError(StrCat("DiagGmm: weights sum to ", total));
}

double DiagGmm::LogLikelihood(const Eigen::VectorXd &x,
                              Eigen::VectorXd *posteriors) const {
  if (x.size() != Dim())
    throw DimensionError(StrCat("DiagGmm: frame dim ", x.size(),
                                " vs model dim ", Dim()));
  int C = NumMix();
  Eigen::VectorXd lj(C);
  for (int c = 0; c < C; c++) {
    double s = weights[c] > 0.0 ? std::log(weights[c])
                                : -std::numeric_limits<double>::infinity();
    for (int d = 0; d < Dim(); d++) {
      double diff = x[d] - means(c, d);
      s += -0.5 * (kLog2Pi + std::log(vars(c, d)) + diff * diff / vars(c, d));
    }
    lj[c] = s;
  }
  double mx = lj.maxCoeff();
  double sum = (lj.array() - mx).exp().sum();
  double ll = mx + std::log(sum);
  if (posteriors != nullptr) *posteriors = (lj.array() - ll).exp();
  return ll;
}

SuffStats AccumulateStats(const DiagGmm &ubm, const Eigen::MatrixXd &features) {
  if (features.cols() != ubm.Dim())
    throw DimensionError(StrCat("accumulate_stats: feature dim ",
                                features.cols(), " vs model dim ", ubm.Dim()));
  SuffStats st;
  st.n = Eigen::VectorXd::Zero(ubm.NumMix());
  st.f = Eigen::MatrixXd::Zero(ubm.NumMix(), ubm.Dim());
  st.num_frames = features.rows();
  Eigen::VectorXd post;
  for (int t = 0; t < features.rows(); t++) {
    Eigen::VectorXd x = features.row(t).transpose();
    ubm.LogLikelihood(x, &post);
    st.n += post;
    st.f += post * x.transpose();
  }
  return st;
}

void SuffStats::Add(const SuffStats &other) {
  if (n.size() != other.n.size() || f.rows() != other.f.rows() ||
      f.cols() != other.f.cols())
    throw DimensionError("SuffStats: cannot merge mismatched stats");
  n += other.n;
  f += other.f;
  num_frames += other.num_frames;
}

DiagGmm GmmEmTrain(const Eigen::MatrixXd &features, int num_mix, int iters,
                   uint64_t seed, std::vector<double> *loglik_trace) {
  int T = static_cast<int>(features.rows());
  int F = static_cast<int>(features.cols());
  if (num_mix < 1) throw ConfigError("gmm_em_train: need at least one mixture");
  if (T < num_mix)
    throw DataError(StrCat("gmm_em_train: ", T, " frames < ", num_mix,
                           " mixtures"));

  Eigen::VectorXd global_mean = features.colwise().mean().transpose();
  Eigen::VectorXd global_var(F);
  for (int d = 0; d < F; d++) {
    double s = 0.0;
    for (int t = 0; t < T; t++) {
      double diff = features(t, d) - global_mean[d];
      s += diff * diff;
    }
    global_var[d] = s / T;
  }
  Eigen::VectorXd var_floor = (global_var.array() * kVarFloorScale)
                                  .max(1e-20)
                                  .matrix();

  DiagGmm gmm;
  gmm.weights = Eigen::VectorXd::Constant(num_mix, 1.0 / num_mix);
  gmm.means.resize(num_mix, F);
  gmm.vars.resize(num_mix, F);
  // Distinct random frames seed the means.
  Rng rng(seed);
  std::set<uint64_t> used;
  for (int c = 0; c < num_mix; c++) {
    uint64_t idx;
    do {
      idx = rng.UniformInt(static_cast<uint64_t>(T));
    } while (!used.insert(idx).second);
    gmm.means.row(c) = features.row(static_cast<int>(idx));
    gmm.vars.row(c) = global_var.cwiseMax(var_floor).transpose();
  }

  if (loglik_trace != nullptr) loglik_trace->clear();
  Eigen::VectorXd post;
  for (int it = 0; it < iters; it++) {
    Eigen::VectorXd n = Eigen::VectorXd::Zero(num_mix);
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(num_mix, F);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(num_mix, F);
    double total_ll = 0.0;
    for (int t = 0; t < T; t++) {
      Eigen::VectorXd x = features.row(t).transpose();
      total_ll += gmm.LogLikelihood(x, &post);
      n += post;
      f += post * x.transpose();
      s2 += post * x.cwiseProduct(x).transpose();
    }
    if (loglik_trace != nullptr) loglik_trace->push_back(total_ll);

    for (int c = 0; c < num_mix; c++) {
      if (n[c] < 1e-8) {
        // Re-seed the empty mixture from the one with the largest variance.
        int h = 0;
        double best = -1.0;
        for (int cc = 0; cc < num_mix; cc++) {
          double tv = gmm.vars.row(cc).sum();
          if (cc != c && n[cc] > 1e-8 && tv > best) {
            best = tv;
            h = cc;
          }
        }
        Warn(StrCat("gmm_em_train: mixture ", c,
                    " went empty; re-seeding from mixture ", h));
        gmm.means.row(c) = gmm.means.row(h) +
                           0.1 * gmm.vars.row(h).cwiseSqrt();
        gmm.vars.row(c) = gmm.vars.row(h);
        gmm.weights[c] = gmm.weights[h] / 2.0;
        gmm.weights[h] /= 2.0;
        continue;
      }
      gmm.weights[c] = n[c] / T;
      gmm.means.row(c) = f.row(c) / n[c];
      Eigen::ArrayXd var = s2.row(c).transpose().array() / n[c] -
                           gmm.means.row(c).transpose().array().square();
      gmm.vars.row(c) = var.max(var_floor.array()).matrix().transpose();
    }
    gmm.weights /= gmm.weights.sum();
  }
  return gmm;
}

DiagGmm MapAdaptMeans(const DiagGmm &ubm, const Eigen::MatrixXd &enrollment,
                      double relevance) {
  if (relevance <= 0.0)
    throw ConfigError("map_adapt_means: relevance must be > 0");
  DiagGmm adapted = ubm;  // weights and variances stay as in the UBM
  if (enrollment.rows() == 0) return adapted;
  SuffStats st = AccumulateStats(ubm, enrollment);
  for (int c = 0; c < ubm.NumMix(); c++) {
    if (st.n[c] <= 0.0) continue;
    double alpha = st.n[c] / (st.n[c] + relevance);
    Eigen::RowVectorXd ec = st.f.row(c) / st.n[c];
    adapted.means.row(c) = alpha * ec + (1.0 - alpha) * ubm.means.row(c);
  }
  return adapted;
}

double LikelihoodRatio(const Eigen::MatrixXd &utterance,
                       const DiagGmm &speaker_gmm, const DiagGmm &ubm) {
  if (utterance.rows() == 0)
    throw DataError("likelihood_ratio: empty utterance");
  if (speaker_gmm.Dim() != ubm.Dim() || utterance.cols() != ubm.Dim())
    throw DimensionError("likelihood_ratio: dimension mismatch");
  double num = 0.0, den = 0.0;
  for (int t = 0; t < utterance.rows(); t++) {
    Eigen::VectorXd x = utterance.row(t).transpose();
    num += speaker_gmm.LogLikelihood(x);
    den += ubm.LogLikelihood(x);
  }
  return (num - den) / utterance.rows();
}

Eigen::MatrixXd SampleFromGmm(const DiagGmm &gmm, int num_frames,
                              uint64_t seed) {
  gmm.Validate();
  Rng rng(seed);
  Eigen::MatrixXd out(num_frames, gmm.Dim());
  std::vector<double> cdf(gmm.NumMix());
  double acc = 0.0;
  for (int c = 0; c < gmm.NumMix(); c++) {
    acc += gmm.weights[c];
    cdf[static_cast<size_t>(c)] = acc;
  }
  for (int t = 0; t < num_frames; t++) {
    double r = rng.Uniform() * acc;
    int c = static_cast<int>(
        std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
    if (c >= gmm.NumMix()) c = gmm.NumMix() - 1;
    for (int d = 0; d < gmm.Dim(); d++)
      out(t, d) = gmm.means(c, d) + std::sqrt(gmm.vars(c, d)) * rng.Normal();
  }
  return out;
}

}  // namespace cpcv
