// tests/test_embedding.cc

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

#include <cmath>

#include "cpcv/common.h"
#include "cpcv/metrics.h"
#include "cpcv/rng.h"
#include "doctest.h"

using namespace cpcv;

namespace {

Eigen::VectorXd RandomVec(int d, Rng &rng, double scale = 1.0) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; i++) v[i] = scale * rng.Normal();
  return v;
}

// Clustered embeddings: per speaker a random center, utterances scattered
// around it.
EmbeddingSet ClusteredSet(int speakers, int utts_per_speaker, int dim,
                          double spread, Rng &rng) {
  EmbeddingSet set;
  for (int s = 0; s < speakers; s++) {
    Eigen::VectorXd center = RandomVec(dim, rng, 3.0);
    for (int u = 0; u < utts_per_speaker; u++) {
      std::string id = StrCat(s + 1, "-", 10 * (s + 1), "-", u);
      set.entries[id] = center + spread * RandomVec(dim, rng);
      set.labels[id] = StrCat(s + 1);
    }
  }
  return set;
}

}  // namespace

TEST_CASE("average pooling: single row, column means, brute force") {
  FeatureMatrix f;
  f.values.resize(1, 3);
  f.values << 1, 2, 3;
  Eigen::VectorXd v = AveragePool(f);
  CHECK(v[0] == 1.0);
  CHECK(v[2] == 3.0);

  f.values.resize(2, 2);
  f.values << 1, 1, 3, 3;
  v = AveragePool(f);
  CHECK(v[0] == doctest::Approx(2.0));

  Rng rng(501);
  f.values = Eigen::MatrixXd::NullaryExpr(7, 5, [&]() { return rng.Normal(); });
  v = AveragePool(f);
  for (int c = 0; c < 5; c++) {
    double sum = 0.0;
    for (int r = 0; r < 7; r++) sum += f.values(r, c);
    CHECK(std::abs(v[c] - sum / 7.0) < 1e-12);
  }

  FeatureMatrix empty;
  empty.values.resize(0, 4);
  CHECK_THROWS_AS(AveragePool(empty), DataError);
}

TEST_CASE("pca: planar data explains 100 percent with two components") {
  Rng rng(503);
  Eigen::MatrixXd basis(5, 2);
  for (int i = 0; i < 5; i++)
    for (int j = 0; j < 2; j++) basis(i, j) = rng.Normal();
  Eigen::MatrixXd coords(200, 2);
  for (int i = 0; i < 200; i++)
    for (int j = 0; j < 2; j++) coords(i, j) = rng.Normal();
  Eigen::MatrixXd frames = coords * basis.transpose();
  PcaModel model = PcaFit(frames, 2);
  CHECK(model.explained_ratio == doctest::Approx(100.0).epsilon(1e-8));
  CHECK((model.basis.transpose() * model.basis -
         Eigen::MatrixXd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  // P above the rank names the rank in the error.
  try {
    PcaFit(frames, 3);
    FAIL("expected ConfigError");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("rank 2") != std::string::npos);
  }
}

TEST_CASE("pca: isotropic Gaussian in 4-D keeps about half the variance with P=2") {
  Rng rng(509);
  Eigen::MatrixXd frames(10000, 4);
  for (int i = 0; i < 10000; i++)
    for (int j = 0; j < 4; j++) frames(i, j) = rng.Normal();
  PcaModel model = PcaFit(frames, 2);
  CHECK(model.explained_ratio > 47.0);
  CHECK(model.explained_ratio < 53.0);
}

TEST_CASE("pca reconstruction error equals the sum of discarded eigenvalues") {
  Rng rng(521);
  // Anisotropic data.
  Eigen::MatrixXd frames(400, 6);
  for (int i = 0; i < 400; i++)
    for (int j = 0; j < 6; j++)
      frames(i, j) = rng.Normal() * (1.0 + j);
  int p = 3;
  PcaModel model = PcaFit(frames, p);
  Eigen::MatrixXd centered = frames.rowwise() - model.mean.transpose();
  Eigen::MatrixXd projected = PcaTransform(model, frames);
  Eigen::MatrixXd restored = projected * model.basis.transpose();
  double residual =
      (centered - restored).squaredNorm() / static_cast<double>(frames.rows());

  // Dense eigendecomposition oracle.
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(frames.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  double discarded = 0.0;
  for (int i = 0; i < 6 - p; i++) discarded += eig.eigenvalues()[i];
  CHECK(residual == doctest::Approx(discarded).epsilon(1e-8));
}

TEST_CASE("mean+length normalization: unit norms, antipodes, nonzero output mean") {
  Rng rng(523);
  EmbeddingSet set = ClusteredSet(3, 4, 6, 0.5, rng);
  EmbeddingSet out = MeanLengthNormalize(set);
  for (const auto &[id, v] : out.entries)
    CHECK(std::abs(v.norm() - 1.0) < 1e-12);

  EmbeddingSet anti;
  anti.entries["1-1-0"] = Eigen::VectorXd::Constant(3, 2.0);
  anti.entries["2-2-0"] = Eigen::VectorXd::Constant(3, -2.0);
  anti.labels["1-1-0"] = "1";
  anti.labels["2-2-0"] = "2";
  EmbeddingSet anti_out = MeanLengthNormalize(anti);
  Eigen::VectorXd a = anti_out.entries["1-1-0"], b = anti_out.entries["2-2-0"];
  CHECK((a + b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(a.norm() - 1.0) < 1e-12);

  // Witness that length normalization breaks centering: three asymmetric
  // points whose normalized versions no longer average to zero.
  EmbeddingSet tri;
  tri.entries["1-1-0"] = (Eigen::VectorXd(2) << 10.0, 0.0).finished();
  tri.entries["2-2-0"] = (Eigen::VectorXd(2) << -0.1, 0.05).finished();
  tri.entries["3-3-0"] = (Eigen::VectorXd(2) << -0.1, -0.05).finished();
  for (auto &[id, v] : tri.entries) tri.labels[id] = id.substr(0, 1);
  EmbeddingSet tri_out = MeanLengthNormalize(tri);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  for (const auto &[id, v] : tri_out.entries) mean += v;
  mean /= 3.0;
  CHECK(mean.norm() > 0.1);
}

TEST_CASE("lda: recovers the separating axis and enforces the rank bound") {
  Rng rng(541);
  EmbeddingSet set;
  for (int s = 0; s < 2; s++)
    for (int u = 0; u < 40; u++) {
      Eigen::VectorXd v(2);
      v << (s == 0 ? -4.0 : 4.0) + 0.3 * rng.Normal(), 2.0 * rng.Normal();
      std::string id = StrCat(s + 1, "-", s + 1, "-", u);
      set.entries[id] = v;
      set.labels[id] = StrCat(s + 1);
    }
  LdaModel model = LdaFit(set, 1);
  Eigen::VectorXd dir = model.basis.col(0).normalized();
  CHECK(std::abs(dir[0]) > 0.99);

  // L = speakers-1 is the admissible maximum; beyond it errors with the max.
  try {
    LdaFit(set, 2);
    FAIL("expected ConfigError");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("[1, 1]") != std::string::npos);
  }
}

TEST_CASE("lda direction agrees with a brute-force Fisher search on 2-D toys") {
  Rng rng(439);
  for (int trial = 0; trial < 10; trial++) {
    // Two tilted classes in the plane.
    double angle = rng.Uniform(0.0, M_PI);
    Eigen::Vector2d axis(std::cos(angle), std::sin(angle));
    EmbeddingSet set;
    for (int s = 0; s < 2; s++)
      for (int u = 0; u < 30; u++) {
        Eigen::Vector2d v = (s == 0 ? -3.0 : 3.0) * axis;
        v += 0.4 * Eigen::Vector2d(rng.Normal(), rng.Normal());
        std::string id = StrCat(s + 1, "-", s + 1, "-", u);
        set.entries[id] = v;
        set.labels[id] = StrCat(s + 1);
      }
    LdaModel model = LdaFit(set, 1);
    Eigen::Vector2d lda_dir = model.basis.col(0).normalized();

    // Brute force over directions: maximize between/within of the projection.
    auto fisher_1d = [&](const Eigen::Vector2d &d) {
      std::map<std::string, std::vector<double>> groups;
      for (const auto &[id, v] : set.entries)
        groups[set.labels.at(id)].push_back(d.dot(v));
      double global = 0.0;
      int n = 0;
      for (auto &[spk, xs] : groups)
        for (double x : xs) {
          global += x;
          n++;
        }
      global /= n;
      double between = 0.0, within = 0.0;
      for (auto &[spk, xs] : groups) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        between += xs.size() * (mean - global) * (mean - global);
        for (double x : xs) within += (x - mean) * (x - mean);
      }
      return between / within;
    };
    double best_ratio = -1.0;
    Eigen::Vector2d best_dir;
    for (int k = 0; k < 3600; k++) {
      double a = k * M_PI / 3600.0;
      Eigen::Vector2d d(std::cos(a), std::sin(a));
      double r = fisher_1d(d);
      if (r > best_ratio) {
        best_ratio = r;
        best_dir = d;
      }
    }
    CHECK(std::abs(lda_dir.dot(best_dir)) > 0.99);
  }
}

TEST_CASE("lda beats random projections of equal rank on the Fisher ratio") {
  Rng rng(547);
  EmbeddingSet set = ClusteredSet(5, 12, 8, 0.6, rng);
  LdaModel model = LdaFit(set, 2);

  auto fisher = [&](const Eigen::MatrixXd &proj) {
    std::map<std::string, std::vector<Eigen::VectorXd>> groups;
    for (const auto &[id, v] : set.entries)
      groups[set.labels.at(id)].push_back(proj.transpose() * v);
    Eigen::VectorXd global = Eigen::VectorXd::Zero(proj.cols());
    int n = 0;
    for (auto &[spk, vecs] : groups)
      for (auto &v : vecs) {
        global += v;
        n++;
      }
    global /= n;
    double between = 0.0, within = 0.0;
    for (auto &[spk, vecs] : groups) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(proj.cols());
      for (auto &v : vecs) mean += v;
      mean /= static_cast<double>(vecs.size());
      between += vecs.size() * (mean - global).squaredNorm();
      for (auto &v : vecs) within += (v - mean).squaredNorm();
    }
    return between / within;
  };

  double lda_ratio = fisher(model.basis);
  for (int trial = 0; trial < 30; trial++) {
    Eigen::MatrixXd rand_proj(8, 2);
    for (int i = 0; i < 8; i++)
      for (int j = 0; j < 2; j++) rand_proj(i, j) = rng.Normal();
    CHECK(lda_ratio > fisher(rand_proj));
  }
}

TEST_CASE("plda: symmetry, self vs antipode, and EER 0 on separable speakers") {
  Rng rng(557);
  EmbeddingSet set = ClusteredSet(6, 8, 5, 0.4, rng);
  PldaModel model = PldaFit(set, 15);

  for (int trial = 0; trial < 50; trial++) {
    Eigen::VectorXd e = RandomVec(5, rng, 2.0);
    Eigen::VectorXd t = RandomVec(5, rng, 2.0);
    CHECK(std::abs(PldaLlr(model, e, t) - PldaLlr(model, t, e)) < 1e-10);
    CHECK(PldaLlr(model, e, e) > PldaLlr(model, e, -e));
  }

  // Separable two-speaker toy: PLDA scores give EER 0 downstream.
  Rng rng2(563);
  EmbeddingSet train = ClusteredSet(2, 10, 4, 0.1, rng2);
  PldaModel plda = PldaFit(train, 15);
  EmbeddingSet test = ClusteredSet(2, 6, 4, 0.1, rng2);
  // The two calls draw different centers; regenerate matching clusters by
  // scoring train vs train instead.
  ScoreSet scores;
  for (const auto &[eid, ev] : train.entries)
    for (const auto &[tid, tv] : train.entries) {
      if (eid >= tid) continue;
      scores.trials.push_back(
          {eid, tid, train.labels.at(eid) == train.labels.at(tid)});
      scores.scores.push_back(PldaLlr(plda, ev, tv));
    }
  (void)test;
  CHECK(ComputeEer(scores) == doctest::Approx(0.0));
}

TEST_CASE("plda is invariant to a common orthogonal transform (1e-8)") {
  Rng rng(569);
  EmbeddingSet set = ClusteredSet(5, 8, 4, 0.5, rng);
  PldaModel plain = PldaFit(set, 10);

  // Random rotation via QR of a Gaussian matrix.
  Eigen::MatrixXd g(4, 4);
  for (int i = 0; i < 4; i++)
    for (int j = 0; j < 4; j++) g(i, j) = rng.Normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();

  EmbeddingSet rotated;
  rotated.labels = set.labels;
  for (const auto &[id, v] : set.entries) rotated.entries[id] = q * v;
  PldaModel rot = PldaFit(rotated, 10);

  for (int trial = 0; trial < 40; trial++) {
    Eigen::VectorXd e = RandomVec(4, rng, 2.0);
    Eigen::VectorXd t = RandomVec(4, rng, 2.0);
    double a = PldaLlr(plain, e, t);
    double b = PldaLlr(rot, q * e, q * t);
    CHECK(std::abs(a - b) < 1e-8);
  }
}

TEST_CASE("plda rejects degenerate training sets") {
  Rng rng(571);
  EmbeddingSet one_speaker = ClusteredSet(1, 5, 3, 0.2, rng);
  CHECK_THROWS_AS(PldaFit(one_speaker, 5), DataError);

  EmbeddingSet singletons;
  for (int s = 0; s < 3; s++) {
    std::string id = StrCat(s + 1, "-", s + 1, "-0");
    singletons.entries[id] = RandomVec(3, rng);
    singletons.labels[id] = StrCat(s + 1);
  }
  CHECK_THROWS_AS(PldaFit(singletons, 5), DataError);
}

TEST_CASE("fuse_concat: dims add, rows truncate, columns keep order") {
  Rng rng(577);
  FeatureMatrix a, b;
  a.kind = FeatureKind::kMfcc;
  a.values = Eigen::MatrixXd::NullaryExpr(98, 24, [&]() { return rng.Normal(); });
  b.kind = FeatureKind::kCpc;
  b.values = Eigen::MatrixXd::NullaryExpr(99, 36, [&]() { return rng.Normal(); });
  FeatureMatrix fused = FuseConcat(a, b);
  CHECK(fused.Cols() == 60);
  CHECK(fused.Rows() == 98);
  CHECK(fused.kind == FeatureKind::kFused);
  // Round trip by splitting the columns.
  CHECK((fused.values.leftCols(24) - a.values.topRows(98)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((fused.values.rightCols(36) - b.values.topRows(98)).cwiseAbs().maxCoeff() ==
        0.0);

  FeatureMatrix wrong_rate = b;
  wrong_rate.frame_shift_ms = 25.0;
  CHECK_THROWS_AS(FuseConcat(a, wrong_rate), DimensionError);
}
