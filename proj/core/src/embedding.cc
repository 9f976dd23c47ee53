// core/src/embedding.cc

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

#include "cpcv/embedding.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "cpcv/common.h"

namespace cpcv {

int EmbeddingSet::Dim() const {
  if (entries.empty()) throw DataError("EmbeddingSet: empty set");
  return static_cast<int>(entries.begin()->second.size());
}

void EmbeddingSet::Validate() const {
  int d = Dim();
  for (const auto &[id, v] : entries) {
    if (v.size() != d)
      throw DimensionError(StrCat("EmbeddingSet: '", id, "' has dim ",
                                  v.size(), ", expected ", d));
    if (!v.allFinite())
      throw NumericError(StrCat("EmbeddingSet: non-finite entry for '", id,
                                "'"));
  }
}

Eigen::VectorXd AveragePool(const FeatureMatrix &f) {
  if (f.Rows() < 1) throw DataError("average_pool: empty feature matrix");
  return f.values.colwise().mean().transpose();
}

// ---- PCA -------------------------------------------------------------------

PcaModel PcaFit(const Eigen::MatrixXd &frames, int p) {
  int n = static_cast<int>(frames.rows());
  int d = static_cast<int>(frames.cols());
  if (n < 2) throw DataError("pca_fit: need at least two rows");
  if (p < 1 || p > d)
    throw ConfigError(StrCat("pca_fit: P=", p, " outside [1, ", d, "]"));

  PcaModel model;
  model.mean = frames.colwise().mean().transpose();
  Eigen::MatrixXd centered = frames.rowwise() - model.mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw NumericError("pca_fit: eigendecomposition failed");

  // Ascending from Eigen; take from the top.
  Eigen::VectorXd evals = eig.eigenvalues();
  double total = evals.cwiseMax(0.0).sum();
  double eval_floor = std::max(total, 1e-300) * 1e-12;
  int rank = 0;
  for (int i = 0; i < d; i++)
    if (evals[i] > eval_floor) rank++;
  if (p > rank)
    throw ConfigError(StrCat("pca_fit: P=", p,
                             " exceeds the covariance rank ", rank));

  model.basis.resize(d, p);
  double kept = 0.0;
  for (int j = 0; j < p; j++) {
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - j);
    // Deterministic sign: first component of non-negligible size positive.
    for (int i = 0; i < d; i++) {
      if (std::abs(v[i]) > 1e-12) {
        if (v[i] < 0) v = -v;
        break;
      }
    }
    model.basis.col(j) = v;
    kept += std::max(evals[d - 1 - j], 0.0);
  }
  model.explained_ratio = total > 0.0 ? 100.0 * kept / total : 100.0;
  return model;
}

Eigen::MatrixXd PcaTransform(const PcaModel &model, const Eigen::MatrixXd &x) {
  if (x.cols() != model.mean.size())
    throw DimensionError(StrCat("pca_transform: input dim ", x.cols(),
                                " vs model dim ", model.mean.size()));
  return (x.rowwise() - model.mean.transpose()) * model.basis;
}

FeatureMatrix PcaTransform(const PcaModel &model, const FeatureMatrix &f) {
  FeatureMatrix out;
  out.kind = f.kind;
  out.frame_shift_ms = f.frame_shift_ms;
  out.values = PcaTransform(model, f.values);
  return out;
}

// ---- normalization ----------------------------------------------------------

EmbeddingSet MeanLengthNormalize(const EmbeddingSet &set,
                                 const Eigen::VectorXd *mean) {
  set.Validate();
  if (mean == nullptr && set.entries.size() < 2)
    throw DataError("mean_length_normalize: need >= 2 entries to fit a mean");
  Eigen::VectorXd mu;
  if (mean != nullptr) {
    mu = *mean;
  } else {
    mu = Eigen::VectorXd::Zero(set.Dim());
    for (const auto &[id, v] : set.entries) mu += v;
    mu /= static_cast<double>(set.entries.size());
  }
  EmbeddingSet out;
  out.labels = set.labels;
  for (const auto &[id, v] : set.entries) {
    Eigen::VectorXd c = v - mu;
    double norm = c.norm();
    if (norm > 0.0) {
      c /= norm;
    } else {
      Warn(StrCat("mean_length_normalize: '", id,
                  "' is zero after centering; left at zero"));
    }
    out.entries[id] = c;
  }
  return out;
}

// ---- LDA -------------------------------------------------------------------

LdaModel LdaFit(const EmbeddingSet &set, int l) {
  set.Validate();
  int d = set.Dim();
  std::map<std::string, std::vector<const Eigen::VectorXd *>> by_speaker;
  for (const auto &[id, v] : set.entries) {
    auto it = set.labels.find(id);
    if (it == set.labels.end())
      throw DataError(StrCat("lda_fit: no speaker label for '", id, "'"));
    by_speaker[it->second].push_back(&v);
  }
  int s = static_cast<int>(by_speaker.size());
  int max_l = std::min(d, s - 1);
  if (l < 1 || l > max_l)
    throw ConfigError(StrCat("lda_fit: L=", l, " outside [1, ", max_l,
                             "] (dim ", d, ", ", s, " speakers)"));

  Eigen::VectorXd global = Eigen::VectorXd::Zero(d);
  for (const auto &[id, v] : set.entries) global += v;
  global /= static_cast<double>(set.entries.size());

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(d, d);
  for (const auto &[spk, vecs] : by_speaker) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto *v : vecs) mean += *v;
    mean /= static_cast<double>(vecs.size());
    for (const auto *v : vecs) {
      Eigen::VectorXd diff = *v - mean;
      sw.noalias() += diff * diff.transpose();
    }
    Eigen::VectorXd diff = mean - global;
    sb.noalias() += static_cast<double>(vecs.size()) * diff * diff.transpose();
  }
  sw /= static_cast<double>(set.entries.size());
  sb /= static_cast<double>(set.entries.size());
  // Floor the within-class scatter so it is invertible.
  double floor = std::max(sw.trace() / d, 1e-12) * 1e-8;
  sw.diagonal().array() += floor;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(sb, sw);
  if (eig.info() != Eigen::Success)
    throw NumericError("lda_fit: generalized eigendecomposition failed");

  LdaModel model;
  model.basis.resize(d, l);
  model.eigenvalues.resize(l);
  for (int j = 0; j < l; j++) {
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - j);
    for (int i = 0; i < d; i++) {
      if (std::abs(v[i]) > 1e-12) {
        if (v[i] < 0) v = -v;
        break;
      }
    }
    model.basis.col(j) = v;
    model.eigenvalues[j] = eig.eigenvalues()[d - 1 - j];
  }
  return model;
}

Eigen::VectorXd LdaTransform(const LdaModel &model, const Eigen::VectorXd &x) {
  if (x.size() != model.basis.rows())
    throw DimensionError(StrCat("lda_transform: input dim ", x.size(),
                                " vs model dim ", model.basis.rows()));
  return model.basis.transpose() * x;
}

EmbeddingSet LdaTransform(const LdaModel &model, const EmbeddingSet &set) {
  EmbeddingSet out;
  out.labels = set.labels;
  for (const auto &[id, v] : set.entries)
    out.entries[id] = LdaTransform(model, v);
  return out;
}

// ---- PLDA ------------------------------------------------------------------

namespace {

// Floors eigenvalues so the matrix stays positive definite.
bool FloorSpd(Eigen::MatrixXd *m, double rel_floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(*m);
  double mx = eig.eigenvalues().maxCoeff();
  double floor = std::max(mx, 1e-300) * rel_floor;
  if (eig.eigenvalues().minCoeff() >= floor) return false;
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(floor);
  *m = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
  return true;
}

}  // namespace

void PldaModel::FinishScoring() {
  int d = static_cast<int>(mu.size());
  Eigen::MatrixXd bt = between + within;
  Eigen::MatrixXd sigma_same(2 * d, 2 * d), sigma_diff(2 * d, 2 * d);
  sigma_same << bt, between, between, bt;
  sigma_diff << bt, Eigen::MatrixXd::Zero(d, d),
      Eigen::MatrixXd::Zero(d, d), bt;
  Eigen::LDLT<Eigen::MatrixXd> same(sigma_same), diff(sigma_diff);
  if (same.info() != Eigen::Success || diff.info() != Eigen::Success)
    throw NumericError("plda: joint covariance factorization failed");
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2 * d, 2 * d);
  llr_quad = diff.solve(eye) - same.solve(eye);
  double logdet_same = same.vectorD().array().log().sum();
  double logdet_diff = diff.vectorD().array().log().sum();
  llr_offset = 0.5 * (logdet_diff - logdet_same);
  scoring_ready = true;
}

PldaModel PldaFit(const EmbeddingSet &set, int iters) {
  set.Validate();
  int d = set.Dim();
  std::map<std::string, std::vector<const Eigen::VectorXd *>> by_speaker;
  for (const auto &[id, v] : set.entries)
    by_speaker[set.labels.at(id)].push_back(&v);
  int s = static_cast<int>(by_speaker.size());
  if (s < 2) throw DataError("plda_fit: need at least two speakers");
  int multi = 0;
  for (const auto &[spk, vecs] : by_speaker)
    if (vecs.size() >= 2) multi++;
  if (multi < 2)
    throw DataError("plda_fit: need >= 2 speakers with >= 2 utterances each");

  int n_total = static_cast<int>(set.entries.size());
  PldaModel model;
  model.mu = Eigen::VectorXd::Zero(d);
  for (const auto &[id, v] : set.entries) model.mu += v;
  model.mu /= static_cast<double>(n_total);

  // Total scatter seeds both covariances.
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(d, d);
  for (const auto &[id, v] : set.entries) {
    Eigen::VectorXd diff = v - model.mu;
    total.noalias() += diff * diff.transpose();
  }
  total /= static_cast<double>(n_total);
  model.between = 0.5 * total;
  model.within = 0.5 * total;
  FloorSpd(&model.between, 1e-10);
  FloorSpd(&model.within, 1e-10);

  for (int it = 0; it < iters; it++) {
    Eigen::LDLT<Eigen::MatrixXd> winv(model.within);
    Eigen::LDLT<Eigen::MatrixXd> binv(model.between);
    if (winv.info() != Eigen::Success || binv.info() != Eigen::Success)
      throw NumericError("plda_fit: covariance factorization failed");
    Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd w_inv = winv.solve(eye);
    Eigen::MatrixXd b_inv = binv.solve(eye);

    Eigen::MatrixXd b_new = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd w_new = Eigen::MatrixXd::Zero(d, d);
    for (const auto &[spk, vecs] : by_speaker) {
      double ns = static_cast<double>(vecs.size());
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
      for (const auto *v : vecs) sum += *v - model.mu;
      // Posterior of the speaker offset y.
      Eigen::MatrixXd prec = b_inv + ns * w_inv;
      Eigen::LDLT<Eigen::MatrixXd> pl(prec);
      Eigen::MatrixXd cov = pl.solve(eye);
      Eigen::VectorXd yhat = pl.solve(w_inv * sum);
      b_new.noalias() += yhat * yhat.transpose() + cov;
      for (const auto *v : vecs) {
        Eigen::VectorXd r = *v - model.mu - yhat;
        w_new.noalias() += r * r.transpose();
      }
      w_new.noalias() += ns * cov;
    }
    model.between = b_new / static_cast<double>(s);
    model.within = w_new / static_cast<double>(n_total);
    // Keep symmetric against accumulation drift.
    model.between = 0.5 * (model.between + model.between.transpose()).eval();
    model.within = 0.5 * (model.within + model.within.transpose()).eval();
    if (FloorSpd(&model.within, 1e-10))
      Warn(StrCat("plda_fit: within-class covariance floored at iteration ",
                  it));
    FloorSpd(&model.between, 0.0);  // clip tiny negative eigenvalues only
  }
  model.FinishScoring();
  return model;
}

double PldaLlr(const PldaModel &model, const Eigen::VectorXd &enroll,
               const Eigen::VectorXd &test) {
  if (!model.scoring_ready)
    throw ContractError("plda_llr: call FinishScoring() after loading");
  int d = static_cast<int>(model.mu.size());
  if (enroll.size() != d || test.size() != d)
    throw DimensionError(StrCat("plda_llr: input dims ", enroll.size(), "/",
                                test.size(), " vs model dim ", d));
  Eigen::VectorXd z(2 * d);
  z.head(d) = enroll - model.mu;
  z.tail(d) = test - model.mu;
  return 0.5 * z.dot(model.llr_quad * z) + model.llr_offset;
}

}  // namespace cpcv
