// core/include/cpcv/embedding.h

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

#ifndef CPCV_EMBEDDING_H_
#define CPCV_EMBEDDING_H_

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "cpcv/features.h"

namespace cpcv {

// Fixed-length utterance-level vectors with speaker labels.
struct EmbeddingSet {
  std::map<std::string, Eigen::VectorXd> entries;  // utt-id -> vector
  std::map<std::string, std::string> labels;       // utt-id -> speaker

  int Dim() const;
  void Validate() const;  // consistent dims, finite values
};

// Column means of the frame matrix.
Eigen::VectorXd AveragePool(const FeatureMatrix &f);

// ---- PCA -------------------------------------------------------------------

struct PcaModel {
  Eigen::VectorXd mean;    // [D]
  Eigen::MatrixXd basis;   // [D x P], orthonormal columns
  double explained_ratio;  // percent of total variance kept
};

// Top-P eigenvectors of the covariance of the rows of `frames`.
// Throws when P exceeds the covariance rank (the message names the rank).
PcaModel PcaFit(const Eigen::MatrixXd &frames, int p);
Eigen::MatrixXd PcaTransform(const PcaModel &model, const Eigen::MatrixXd &x);
FeatureMatrix PcaTransform(const PcaModel &model, const FeatureMatrix &f);

// ---- normalization ----------------------------------------------------------

// Subtract the set mean, then scale each vector to unit Euclidean norm.
// The mean may also be supplied (for applying training statistics to a
// held-out set). A vector that lands on zero is left at zero with a warning.
EmbeddingSet MeanLengthNormalize(const EmbeddingSet &set,
                                 const Eigen::VectorXd *mean = nullptr);

// ---- LDA -------------------------------------------------------------------

struct LdaModel {
  Eigen::MatrixXd basis;       // [D x L]
  Eigen::VectorXd eigenvalues; // generalized eigenvalues, descending
};

// Generalized eigenvectors of within^-1 * between, top L, deterministic sign
// (first nonzero component positive). L <= min(D, num_speakers - 1).
LdaModel LdaFit(const EmbeddingSet &set, int l);
Eigen::VectorXd LdaTransform(const LdaModel &model, const Eigen::VectorXd &x);
EmbeddingSet LdaTransform(const LdaModel &model, const EmbeddingSet &set);

// ---- PLDA ------------------------------------------------------------------

// Two-covariance PLDA: x = mu + y + e with y ~ N(0, B) between speakers and
// e ~ N(0, W) within speaker.
struct PldaModel {
  Eigen::VectorXd mu;
  Eigen::MatrixXd between;  // B
  Eigen::MatrixXd within;   // W

  // Cached scoring quantities, built by FinishScoring().
  Eigen::MatrixXd llr_quad;  // Sigma_diff^-1 - Sigma_same^-1 over [e;t]
  double llr_offset = 0.0;   // 0.5*(logdet Sigma_diff - logdet Sigma_same)
  bool scoring_ready = false;

  void FinishScoring();
};

// EM fit; needs >= 2 speakers with >= 2 utterances each. W is floored to
// stay positive definite (warned when flooring bites).
PldaModel PldaFit(const EmbeddingSet &set, int iters);

// log N([e;t]; same-speaker joint) - log N([e;t]; different-speaker joint).
double PldaLlr(const PldaModel &model, const Eigen::VectorXd &enroll,
               const Eigen::VectorXd &test);

}  // namespace cpcv

#endif  // CPCV_EMBEDDING_H_
