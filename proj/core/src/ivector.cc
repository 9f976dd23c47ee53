// core/src/ivector.cc

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

namespace cpcv {

void TotalVariabilityModel::Validate() const {
  ubm.Validate();
  int cf = ubm.NumMix() * ubm.Dim();
  if (t.rows() != cf)
    throw DimensionError(StrCat("TotalVariabilityModel: T has ", t.rows(),
                                " rows, expected C*F=", cf));
  if (Rank() < 1 || Rank() >= cf)
    throw ConfigError(StrCat("TotalVariabilityModel: rank ", Rank(),
                             " must lie in [1, C*F)"));
  if (!t.allFinite())
    throw NumericError("TotalVariabilityModel: non-finite T entries");
}

namespace {

// Per-utterance posterior: precision L = I + sum_c N_c T_c' S_c^-1 T_c and
// linear term a = sum_c T_c' S_c^-1 (F_c - N_c m_c).
void UtterancePosterior(const TotalVariabilityModel &model,
                        const SuffStats &st, Eigen::MatrixXd *L,
                        Eigen::VectorXd *a) {
  int C = model.ubm.NumMix(), F = model.ubm.Dim(), R = model.Rank();
  L->setIdentity(R, R);
  a->setZero(R);
  for (int c = 0; c < C; c++) {
    auto tc = model.t.middleRows(static_cast<Eigen::Index>(c) * F, F);
    Eigen::ArrayXd inv_var = model.ubm.vars.row(c).transpose().array().inverse();
    Eigen::VectorXd fc = st.f.row(c).transpose() -
                         st.n[c] * model.ubm.means.row(c).transpose();
    L->noalias() +=
        st.n[c] * tc.transpose() * inv_var.matrix().asDiagonal() * tc;
    a->noalias() += tc.transpose() * (inv_var * fc.array()).matrix();
  }
}

}  // namespace

Eigen::VectorXd ExtractIvector(const TotalVariabilityModel &model,
                               const SuffStats &stats) {
  model.Validate();
  if (stats.n.size() != model.ubm.NumMix() ||
      stats.f.cols() != model.ubm.Dim())
    throw DimensionError("extract_ivector: stats do not match the UBM");
  Eigen::MatrixXd L;
  Eigen::VectorXd a;
  UtterancePosterior(model, stats, &L, &a);
  return L.ldlt().solve(a);
}

TotalVariabilityModel TMatrixEmTrain(const std::vector<SuffStats> &stats,
                                     const DiagGmm &ubm, int rank, int iters,
                                     uint64_t seed,
                                     std::vector<double> *objective_trace) {
  ubm.Validate();
  int C = ubm.NumMix(), F = ubm.Dim();
  int cf = C * F;
  if (rank < 1)
    throw ConfigError(StrCat("tmatrix_em_train: rank must be >= 1, got ",
                             rank));
  if (rank >= cf)
    throw ConfigError(StrCat("tmatrix_em_train: rank ", rank,
                             " must be below C*F=", cf));
  if (stats.empty()) throw DataError("tmatrix_em_train: no statistics");
  if (static_cast<int>(stats.size()) < rank)
    Warn(StrCat("tmatrix_em_train: only ", stats.size(),
                " utterances for rank ", rank, "; recommend at least ", rank));

  TotalVariabilityModel model;
  model.ubm = ubm;
  // Random init scaled to the average feature spread.
  double scale = 0.1 * std::sqrt(ubm.vars.mean());
  Rng rng(seed);
  model.t.resize(cf, rank);
  for (int i = 0; i < cf; i++)
    for (int r = 0; r < rank; r++) model.t(i, r) = scale * rng.Normal();

  if (objective_trace != nullptr) objective_trace->clear();
  size_t U = stats.size();
  std::vector<Eigen::VectorXd> wbar(U);
  std::vector<Eigen::MatrixXd> wsq(U);

  for (int it = 0; it < iters; it++) {
    double objective = 0.0;
    for (size_t u = 0; u < U; u++) {
      Eigen::MatrixXd L;
      Eigen::VectorXd a;
      UtterancePosterior(model, stats[u], &L, &a);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(L);
      wbar[u] = ldlt.solve(a);
      // E[w w'] = L^-1 + wbar wbar'
      wsq[u] = ldlt.solve(Eigen::MatrixXd::Identity(rank, rank));
      wsq[u].noalias() += wbar[u] * wbar[u].transpose();
      // Evidence contribution 0.5*(w'Lw - logdet L) = 0.5*(w'a - logdet L).
      double logdet = 0.0;
      Eigen::VectorXd d = ldlt.vectorD();
      for (int i = 0; i < rank; i++) logdet += std::log(d[i]);
      objective += 0.5 * (wbar[u].dot(a) - logdet);
    }
    if (objective_trace != nullptr) objective_trace->push_back(objective);

    // M-step, one row block of T per mixture: T_c = B_c A_c^-1 with
    // A_c = sum_u N_uc E[w w']_u and B_c = sum_u (F_uc - N_uc m_c) wbar_u'.
    for (int c = 0; c < C; c++) {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rank, rank);
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(F, rank);
      for (size_t u = 0; u < U; u++) {
        A.noalias() += stats[u].n[c] * wsq[u];
        Eigen::VectorXd fc = stats[u].f.row(c).transpose() -
                             stats[u].n[c] * ubm.means.row(c).transpose();
        B.noalias() += fc * wbar[u].transpose();
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      if (ldlt.info() != Eigen::Success ||
          (ldlt.vectorD().array() < 1e-12 * A.trace()).any()) {
        Warn(StrCat("tmatrix_em_train: singular normal equations for mixture ",
                    c, "; adding ridge"));
        A.diagonal().array() += 1e-6 * std::max(A.trace(), 1.0);
        ldlt.compute(A);
      }
      // Solve A X' = B' so that X A = B.
      model.t.middleRows(static_cast<Eigen::Index>(c) * F, F) =
          ldlt.solve(B.transpose()).transpose();
    }
  }
  return model;
}

}  // namespace cpcv
