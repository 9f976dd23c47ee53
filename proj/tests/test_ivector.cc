// tests/test_ivector.cc

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

#include "cpcv/ivector.h"

#include <cmath>

#include "cpcv/common.h"
#include "cpcv/rng.h"
#include "doctest.h"

using namespace cpcv;

namespace {

constexpr int kC = 8, kF = 4, kR = 4;

DiagGmm WellSeparatedUbm(uint64_t seed) {
  Rng rng(seed);
  DiagGmm ubm;
  ubm.weights = Eigen::VectorXd::Constant(kC, 1.0 / kC);
  ubm.means.resize(kC, kF);
  for (int c = 0; c < kC; c++)
    for (int d = 0; d < kF; d++)
      ubm.means(c, d) = 10.0 * ((c >> d) & 1) + 0.5 * rng.Normal();
  ubm.vars = Eigen::MatrixXd::Constant(kC, kF, 1.0);
  return ubm;
}

Eigen::MatrixXd RandomT(int rows, int rank, double scale, uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd t(rows, rank);
  for (int i = 0; i < rows; i++)
    for (int r = 0; r < rank; r++) t(i, r) = scale * rng.Normal();
  return t;
}

// Largest principal angle (radians) between the column spans.
double MaxPrincipalAngle(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qa(a), qb(b);
  Eigen::MatrixXd qa_thin =
      qa.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd qb_thin =
      qb.householderQ() * Eigen::MatrixXd::Identity(b.rows(), b.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa_thin.transpose() * qb_thin);
  double smallest_cos = svd.singularValues().minCoeff();
  return std::acos(std::min(1.0, std::max(-1.0, smallest_cos)));
}

// Noiseless statistics implied by latent w: N fixed, F = N*(m + T w).
SuffStats StatsFromLatent(const DiagGmm &ubm, const Eigen::MatrixXd &t,
                          const Eigen::VectorXd &w, double occupancy) {
  SuffStats st;
  st.n = Eigen::VectorXd::Constant(ubm.NumMix(), occupancy);
  st.f.resize(ubm.NumMix(), ubm.Dim());
  for (int c = 0; c < ubm.NumMix(); c++) {
    Eigen::VectorXd offset =
        t.middleRows(static_cast<Eigen::Index>(c) * ubm.Dim(), ubm.Dim()) * w;
    st.f.row(c) =
        occupancy * (ubm.means.row(c).transpose() + offset).transpose();
  }
  st.num_frames = static_cast<int64_t>(occupancy * ubm.NumMix());
  return st;
}

}  // namespace

TEST_CASE("extract_ivector: zero statistics give the prior mean") {
  TotalVariabilityModel model;
  model.ubm = WellSeparatedUbm(1);
  model.t = RandomT(kC * kF, kR, 0.5, 2);
  SuffStats st;
  st.n = Eigen::VectorXd::Zero(kC);
  st.f = Eigen::MatrixXd::Zero(kC, kF);
  Eigen::VectorXd w = ExtractIvector(model, st);
  CHECK(w.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("extract_ivector: huge noiseless occupancy recovers the latent") {
  TotalVariabilityModel model;
  model.ubm = WellSeparatedUbm(3);
  model.t = RandomT(kC * kF, kR, 0.5, 4);
  Rng rng(5);
  Eigen::VectorXd w_true(kR);
  for (int r = 0; r < kR; r++) w_true[r] = rng.Normal();
  SuffStats st = StatsFromLatent(model.ubm, model.t, w_true, 1e7);
  Eigen::VectorXd w = ExtractIvector(model, st);
  CHECK((w - w_true).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("extract_ivector: posterior shrinks toward the ML solution as stats scale") {
  TotalVariabilityModel model;
  model.ubm = WellSeparatedUbm(7);
  model.t = RandomT(kC * kF, kR, 0.5, 8);
  Rng rng(9);
  Eigen::VectorXd w_true(kR);
  for (int r = 0; r < kR; r++) w_true[r] = rng.Normal();

  double prev_norm = 0.0, prev_dist = 1e300;
  for (double occ : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    SuffStats st = StatsFromLatent(model.ubm, model.t, w_true, occ);
    Eigen::VectorXd w = ExtractIvector(model, st);
    CHECK(w.norm() > prev_norm);
    CHECK((w - w_true).norm() < prev_dist);
    prev_norm = w.norm();
    prev_dist = (w - w_true).norm();
  }
}

TEST_CASE("extract_ivector equals a dense block-expanded solve to 1e-10") {
  TotalVariabilityModel model;
  model.ubm = WellSeparatedUbm(11);
  model.t = RandomT(kC * kF, kR, 0.4, 12);
  Rng rng(13);
  SuffStats st;
  st.n.resize(kC);
  st.f.resize(kC, kF);
  for (int c = 0; c < kC; c++) {
    st.n[c] = 5.0 * rng.Uniform();
    for (int d = 0; d < kF; d++) st.f(c, d) = rng.Normal() * 3.0;
  }

  // Dense oracle: expand N and Sigma block-diagonally over C*F.
  int cf = kC * kF;
  Eigen::MatrixXd n_big = Eigen::MatrixXd::Zero(cf, cf);
  Eigen::MatrixXd sigma_inv = Eigen::MatrixXd::Zero(cf, cf);
  Eigen::VectorXd f_centered(cf);
  for (int c = 0; c < kC; c++)
    for (int d = 0; d < kF; d++) {
      int i = c * kF + d;
      n_big(i, i) = st.n[c];
      sigma_inv(i, i) = 1.0 / model.ubm.vars(c, d);
      f_centered[i] = st.f(c, d) - st.n[c] * model.ubm.means(c, d);
    }
  Eigen::MatrixXd lhs =
      Eigen::MatrixXd::Identity(kR, kR) +
      model.t.transpose() * sigma_inv * n_big * model.t;
  Eigen::VectorXd rhs = model.t.transpose() * sigma_inv * f_centered;
  Eigen::VectorXd oracle = lhs.fullPivLu().solve(rhs);

  Eigen::VectorXd w = ExtractIvector(model, st);
  CHECK((w - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("tmatrix_em_train: rank validation and determinism") {
  DiagGmm ubm = WellSeparatedUbm(17);
  std::vector<SuffStats> stats;
  Eigen::MatrixXd t_star = RandomT(kC * kF, kR, 0.5, 18);
  Rng rng(19);
  for (int u = 0; u < 12; u++) {
    Eigen::VectorXd w(kR);
    for (int r = 0; r < kR; r++) w[r] = rng.Normal();
    stats.push_back(StatsFromLatent(ubm, t_star, w, 20.0));
  }
  CHECK_THROWS_AS(TMatrixEmTrain(stats, ubm, 0, 3, 1), ConfigError);
  CHECK_THROWS_AS(TMatrixEmTrain(stats, ubm, kC * kF, 3, 1), ConfigError);

  TotalVariabilityModel a = TMatrixEmTrain(stats, ubm, kR, 4, 77);
  TotalVariabilityModel b = TMatrixEmTrain(stats, ubm, kR, 4, 77);
  CHECK(a.t == b.t);
}

TEST_CASE("tmatrix_em_train: objective trace is monotone (1e-6 slack)") {
  DiagGmm ubm = WellSeparatedUbm(23);
  Eigen::MatrixXd t_star = RandomT(kC * kF, kR, 0.5, 24);
  Rng rng(25);
  std::vector<SuffStats> stats;
  for (int u = 0; u < 40; u++) {
    Eigen::VectorXd w(kR);
    for (int r = 0; r < kR; r++) w[r] = rng.Normal();
    // Mild noise on the first-order stats.
    SuffStats st = StatsFromLatent(ubm, t_star, w, 30.0);
    for (int c = 0; c < kC; c++)
      for (int d = 0; d < kF; d++) st.f(c, d) += 0.5 * rng.Normal();
    stats.push_back(st);
  }
  std::vector<double> trace;
  TMatrixEmTrain(stats, ubm, kR, 8, 5, &trace);
  REQUIRE(trace.size() == 8);
  for (size_t i = 1; i < trace.size(); i++)
    CHECK(trace[i] >= trace[i - 1] - 1e-6);
}

TEST_CASE("tmatrix_em_train recovers the generating subspace within 5 degrees") {
  DiagGmm ubm = WellSeparatedUbm(29);
  Eigen::MatrixXd t_star = RandomT(kC * kF, kR, 0.5, 30);
  Rng rng(31);
  std::vector<SuffStats> stats;
  for (int u = 0; u < 200; u++) {
    Eigen::VectorXd w(kR);
    for (int r = 0; r < kR; r++) w[r] = rng.Normal();
    // Frames sampled from the utterance-specific model, aligned with the
    // unadapted UBM, reproduce the i-vector training regime.
    DiagGmm shifted = ubm;
    for (int c = 0; c < kC; c++)
      shifted.means.row(c) +=
          (t_star.middleRows(static_cast<Eigen::Index>(c) * kF, kF) * w)
              .transpose();
    Eigen::MatrixXd frames = SampleFromGmm(shifted, 400, MixSeed(32, u));
    stats.push_back(AccumulateStats(ubm, frames));
  }
  TotalVariabilityModel model = TMatrixEmTrain(stats, ubm, kR, 10, 33);
  double angle = MaxPrincipalAngle(model.t, t_star);
  CHECK(angle < 5.0 * M_PI / 180.0);
}
