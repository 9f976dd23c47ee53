// tests/test_tensor.cc

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

#include "cpcv/tensor.h"

#include <cmath>
#include <functional>
#include <vector>

#include "cpcv/cpc.h"
#include "cpcv/optim.h"
#include "cpcv/rng.h"
#include "doctest.h"

using namespace cpcv;

namespace {

Tensor RandomTensor(std::vector<int> shape, Rng &rng, bool requires_grad,
                    double scale = 1.0) {
  Tensor t = Tensor::Zeros(std::move(shape), requires_grad);
  for (auto &v : t.Values()) v = rng.Uniform(-scale, scale);
  return t;
}

// Central finite differences against the recorded backward pass. The build
// callback must produce a scalar from the given parameters; it is re-run
// (without a tape) for every perturbed entry.
double MaxGradRelError(const std::function<Tensor(Tape *)> &build,
                       std::vector<Tensor> params, double h = 1e-6) {
  Tape tape;
  Tensor loss = build(&tape);
  REQUIRE(loss.NumEl() == 1);
  for (auto &p : params) p.ZeroGrad();
  tape.Backward(loss);

  double worst = 0.0;
  for (auto &p : params) {
    DoubleVec analytic = p.Grad();
    for (int64_t i = 0; i < p.NumEl(); i++) {
      double keep = p.At(i);
      p.At(i) = keep + h;
      double up = build(nullptr).At(0);
      p.At(i) = keep - h;
      double down = build(nullptr).At(0);
      p.At(i) = keep;
      double fd = (up - down) / (2.0 * h);
      double a = analytic[static_cast<size_t>(i)];
      double rel = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

// Naive sliding-window convolution for one item/channel pair.
std::vector<double> NaiveConv1d(const std::vector<double> &x,
                                const std::vector<double> &k, int stride,
                                int padding) {
  int len = static_cast<int>(x.size());
  int kk = static_cast<int>(k.size());
  int lout = (len + 2 * padding - kk) / stride + 1;
  std::vector<double> y(static_cast<size_t>(lout), 0.0);
  for (int o = 0; o < lout; o++)
    for (int j = 0; j < kk; j++) {
      int src = o * stride + j - padding;
      if (src >= 0 && src < len) y[static_cast<size_t>(o)] += x[static_cast<size_t>(src)] * k[static_cast<size_t>(j)];
    }
  return y;
}

}  // namespace

TEST_CASE("affine identity and hand-computed product") {
  Tensor x = Tensor::FromValues({1, 2}, {1, 2});
  Tensor eye = Tensor::FromValues({2, 2}, {1, 0, 0, 1});
  Tensor y = Affine(nullptr, x, eye);
  CHECK(y.At(0) == doctest::Approx(1.0));
  CHECK(y.At(1) == doctest::Approx(2.0));

  Tensor w = Tensor::FromValues({2, 1}, {3, 4});
  Tensor z = Affine(nullptr, x, w);
  CHECK(z.At(0) == doctest::Approx(11.0));
}

TEST_CASE("affine rejects mismatched shapes naming both") {
  Tensor x = Tensor::FromValues({1, 3}, {1, 2, 3});
  Tensor w = Tensor::FromValues({2, 2}, {1, 2, 3, 4});
  try {
    Affine(nullptr, x, w);
    FAIL("expected DimensionError");
  } catch (const DimensionError &e) {
    std::string msg = e.what();
    CHECK(msg.find("[1x3]") != std::string::npos);
    CHECK(msg.find("[2x2]") != std::string::npos);
  }
}

TEST_CASE("gradient of sum(affine(x,w)) w.r.t. w is the column sums of x") {
  Rng rng(7);
  Tensor x = RandomTensor({5, 3}, rng, false);
  Tensor w = RandomTensor({3, 4}, rng, true);
  Tape tape;
  Tensor loss = SumAll(&tape, Affine(&tape, x, w));
  tape.Backward(loss);
  // d sum(XW) / dW[k,j] = sum_i X[i,k], independent of j.
  for (int k = 0; k < 3; k++) {
    double colsum = 0.0;
    for (int i = 0; i < 5; i++) colsum += x.At(i * 3 + k);
    for (int j = 0; j < 4; j++)
      CHECK(w.Grad()[static_cast<size_t>(k * 4 + j)] ==
            doctest::Approx(colsum).epsilon(1e-12));
  }

  double err = MaxGradRelError(
      [&](Tape *t) { return SumAll(t, Affine(t, x, w)); }, {w});
  CHECK(err < 1e-6);
}

TEST_CASE("conv1d identity kernel") {
  Tensor x = Tensor::FromValues({1, 1, 3}, {1, 2, 3});
  Tensor k = Tensor::FromValues({1, 1, 1}, {1});
  Tensor y = Conv1d(nullptr, x, k, nullptr, 1, 0);
  CHECK(y.Shape() == std::vector<int>{1, 1, 3});
  CHECK(y.At(0) == doctest::Approx(1));
  CHECK(y.At(1) == doctest::Approx(2));
  CHECK(y.At(2) == doctest::Approx(3));
}

TEST_CASE("conv1d output length arithmetic") {
  CHECK(Conv1dOutputLength(20480, 10, 5, 3) == 4096);
  // Chained encoder strides on 20480 samples land on 128 frames.
  int len = 20480;
  for (int l = 0; l < kEncoderLayers; l++)
    len = Conv1dOutputLength(len, kEncoderKernels[l], kEncoderStrides[l],
                             kEncoderPaddings[l]);
  CHECK(len == 128);
  CHECK_THROWS_AS(Conv1dOutputLength(3, 8, 1, 0), DimensionError);
}

TEST_CASE("conv1d forward matches the sliding-window oracle and length formula") {
  Rng rng(11);
  for (int trial = 0; trial < 60; trial++) {
    int len = 1 + static_cast<int>(rng.UniformInt(14));
    int k = 1 + static_cast<int>(rng.UniformInt(5));
    int stride = 1 + static_cast<int>(rng.UniformInt(3));
    int padding = static_cast<int>(rng.UniformInt(4));
    if (len + 2 * padding < k) continue;
    std::vector<double> xv(static_cast<size_t>(len)), kv(static_cast<size_t>(k));
    for (auto &v : xv) v = rng.Uniform(-1, 1);
    for (auto &v : kv) v = rng.Uniform(-1, 1);
    std::vector<double> want = NaiveConv1d(xv, kv, stride, padding);

    Tensor x = Tensor::FromValues({1, 1, len}, xv);
    Tensor kk = Tensor::FromValues({1, 1, k}, kv);
    Tensor y = Conv1d(nullptr, x, kk, nullptr, stride, padding);
    REQUIRE(y.Dim(2) == static_cast<int>(want.size()));
    for (size_t i = 0; i < want.size(); i++)
      CHECK(y.At(static_cast<int64_t>(i)) ==
            doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv1d gradients match finite differences") {
  Rng rng(13);
  Tensor x = RandomTensor({2, 3, 8}, rng, true);
  Tensor k = RandomTensor({4, 3, 3}, rng, true);
  Tensor b = RandomTensor({4}, rng, true);
  Tensor r = RandomTensor({2, 4, 4}, rng, false);  // random projection
  auto build = [&](Tape *t) {
    Tensor y = Conv1d(t, x, k, &b, 2, 1);
    return SumAll(t, Mul(t, y, r));
  };
  CHECK(MaxGradRelError(build, {x, k, b}) < 1e-6);
}

TEST_CASE("gru_cell fixed point at zero and saturation bound") {
  int in = 3, hid = 4, batch = 2;
  GruLayerParams p;
  p.w_ih = Tensor::Zeros({3 * hid, in});
  p.w_hh = Tensor::Zeros({3 * hid, hid});
  p.b_ih = Tensor::Zeros({3 * hid});
  p.b_hh = Tensor::Zeros({3 * hid});
  Tensor x = Tensor::Zeros({batch, in});
  Tensor h = Tensor::Zeros({batch, hid});
  Tensor out = GruCell(nullptr, x, h, p);
  for (int64_t i = 0; i < out.NumEl(); i++) CHECK(out.At(i) == 0.0);

  // Large random inputs with |h_prev| <= 1 keep |h| <= 1.
  Rng rng(17);
  p.w_ih = RandomTensor({3 * hid, in}, rng, false, 5.0);
  p.w_hh = RandomTensor({3 * hid, hid}, rng, false, 5.0);
  p.b_ih = RandomTensor({3 * hid}, rng, false, 5.0);
  p.b_hh = RandomTensor({3 * hid}, rng, false, 5.0);
  for (int trial = 0; trial < 20; trial++) {
    Tensor xt = RandomTensor({batch, in}, rng, false, 10.0);
    Tensor ht = RandomTensor({batch, hid}, rng, false, 1.0);
    Tensor o = GruCell(nullptr, xt, ht, p);
    for (int64_t i = 0; i < o.NumEl(); i++) CHECK(std::abs(o.At(i)) <= 1.0);
  }
}

TEST_CASE("gru_cell gradients match finite differences") {
  Rng rng(19);
  int in = 3, hid = 4, batch = 2;
  GruLayerParams p;
  p.w_ih = RandomTensor({3 * hid, in}, rng, true);
  p.w_hh = RandomTensor({3 * hid, hid}, rng, true);
  p.b_ih = RandomTensor({3 * hid}, rng, true);
  p.b_hh = RandomTensor({3 * hid}, rng, true);
  Tensor x = RandomTensor({batch, in}, rng, true);
  Tensor h = RandomTensor({batch, hid}, rng, true, 0.5);
  auto build = [&](Tape *t) {
    return SumAll(t, GruCell(t, x, h, p));
  };
  CHECK(MaxGradRelError(build, {p.w_ih, p.w_hh, p.b_ih, p.b_hh, x, h}, 1e-6) <
        1e-5);
}

TEST_CASE("log_softmax uniform row, large-gap stability, normalization") {
  Tensor x = Tensor::Zeros({1, 4});
  Tensor y = LogSoftmaxRows(nullptr, x);
  for (int j = 0; j < 4; j++)
    CHECK(y.At(j) == doctest::Approx(std::log(0.25)).epsilon(1e-12));

  Tensor big = Tensor::FromValues({1, 2}, {1000.0, 0.0});
  Tensor yb = LogSoftmaxRows(nullptr, big);
  CHECK(yb.At(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(yb.At(1) == doctest::Approx(-1000.0).epsilon(1e-12));

  Rng rng(23);
  Tensor r = RandomTensor({5, 7}, rng, false, 3.0);
  Tensor yr = LogSoftmaxRows(nullptr, r);
  for (int i = 0; i < 5; i++) {
    double sum = 0.0;
    for (int j = 0; j < 7; j++) sum += std::exp(yr.At(i * 7 + j));
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }

  Tensor bad = Tensor::FromValues({1, 2}, {std::nan(""), 0.0});
  CHECK_THROWS_AS(LogSoftmaxRows(nullptr, bad), NumericError);
}

TEST_CASE("log_softmax gradient matches finite differences") {
  Rng rng(29);
  Tensor x = RandomTensor({3, 5}, rng, true, 2.0);
  Tensor r = RandomTensor({3, 5}, rng, false);
  auto build = [&](Tape *t) {
    return SumAll(t, Mul(t, LogSoftmaxRows(t, x), r));
  };
  CHECK(MaxGradRelError(build, {x}) < 1e-6);
}

TEST_CASE("elementwise and shape op gradients match finite differences") {
  Rng rng(31);
  Tensor a = RandomTensor({4, 6}, rng, true);
  Tensor b = RandomTensor({4, 6}, rng, true);
  Tensor r = RandomTensor({4, 6}, rng, false);
  auto build = [&](Tape *t) {
    Tensor s = Sigmoid(t, Mul(t, a, b));
    Tensor u = TanhOp(t, Sub(t, s, Scale(t, b, 0.3)));
    Tensor v = Relu(t, Add(t, u, a));
    Tensor w = Reshape(t, v, {6, 4});
    return SumAll(t, Mul(t, Reshape(t, w, {4, 6}), r));
  };
  CHECK(MaxGradRelError(build, {a, b}) < 1e-6);
}

TEST_CASE("slice, diag and time-slice gradients match finite differences") {
  Rng rng(37);
  Tensor x = RandomTensor({3, 4, 5}, rng, true);
  Tensor m = RandomTensor({4, 3}, rng, true);
  auto build = [&](Tape *t) {
    Tensor ts = TimeSlice(t, x, 2);              // [3 x 4]
    Tensor sc = SliceCols(t, ts, 1, 4);          // [3 x 3]
    Tensor mm = MatMul(t, m, sc, false, true);   // [4 x 3]
    Tensor sq = MatMul(t, mm, mm, true, false);  // [3 x 3]
    return MeanAll(t, Diag(t, sq));
  };
  CHECK(MaxGradRelError(build, {x, m}) < 1e-6);
}

TEST_CASE("backward of sum gives all-ones and accumulates across calls") {
  Rng rng(41);
  Tensor x = RandomTensor({3, 3}, rng, true);
  Tape tape;
  Tensor loss = SumAll(&tape, x);
  tape.Backward(loss);
  for (auto g : x.Grad()) CHECK(g == doctest::Approx(1.0).epsilon(1e-15));
  tape.Backward(loss);
  for (auto g : x.Grad()) CHECK(g == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("non-participating parameters keep an exactly zero gradient") {
  Rng rng(61);
  Tensor used = RandomTensor({3, 3}, rng, true);
  Tensor unused = RandomTensor({4, 2}, rng, true);
  Tape tape;
  Tensor loss = SumAll(&tape, Sigmoid(&tape, used));
  tape.Backward(loss);
  for (double g : unused.Grad()) CHECK(g == 0.0);
  for (double g : used.Grad()) CHECK(g != 0.0);
}

TEST_CASE("backward rejects non-scalar losses") {
  Tensor x = Tensor::Zeros({2, 2}, true);
  Tape tape;
  Tensor y = Scale(&tape, x, 2.0);
  CHECK_THROWS_AS(tape.Backward(y), ContractError);
}

TEST_CASE("a tensor feeding two consumers sums both gradient contributions") {
  Rng rng(43);
  Tensor x = RandomTensor({3, 3}, rng, true);
  Tensor r1 = RandomTensor({3, 3}, rng, false);
  Tensor r2 = RandomTensor({3, 3}, rng, false);
  auto build = [&](Tape *t) {
    Tensor branch1 = Mul(t, Sigmoid(t, x), r1);
    Tensor branch2 = MatMul(t, x, r2);
    return Add(t, SumAll(t, branch1), SumAll(t, branch2));
  };
  CHECK(MaxGradRelError(build, {x}) < 1e-6);
}

TEST_CASE("composite conv1d -> gru -> log_softmax graph matches finite differences") {
  Rng rng(47);
  int batch = 3, ch = 4, hid = 5;
  Tensor x = RandomTensor({batch, 1, 320}, rng, false, 0.5);
  Tensor k1 = RandomTensor({ch, 1, 10}, rng, true, 0.4);
  Tensor b1 = RandomTensor({ch}, rng, true, 0.1);
  Tensor k2 = RandomTensor({ch, ch, 8}, rng, true, 0.3);
  Tensor b2 = RandomTensor({ch}, rng, true, 0.1);
  GruLayerParams p;
  p.w_ih = RandomTensor({3 * hid, ch}, rng, true, 0.4);
  p.w_hh = RandomTensor({3 * hid, hid}, rng, true, 0.4);
  p.b_ih = RandomTensor({3 * hid}, rng, true, 0.1);
  p.b_hh = RandomTensor({3 * hid}, rng, true, 0.1);
  Tensor head = RandomTensor({hid, ch}, rng, true, 0.4);

  auto build = [&](Tape *t) {
    Tensor z = Relu(t, Conv1d(t, x, k1, &b1, 5, 3));
    z = Relu(t, Conv1d(t, z, k2, &b2, 4, 2));  // [batch x ch x 16]
    int frames = z.Dim(2);
    Tensor h = Tensor::Zeros({batch, hid});
    for (int f = 0; f < frames - 1; f++)
      h = GruCell(t, TimeSlice(t, z, f), h, p);
    Tensor proj = MatMul(t, h, head);                    // [batch x ch]
    Tensor lat = TimeSlice(t, z, frames - 1);            // [batch x ch]
    Tensor scores = MatMul(t, proj, lat, false, true);   // [batch x batch]
    return Scale(t, MeanAll(t, Diag(t, LogSoftmaxRows(t, scores))), -1.0);
  };
  double err = MaxGradRelError(
      build, {k1, b1, k2, b2, p.w_ih, p.w_hh, p.b_ih, p.b_hh, head}, 1e-5);
  CHECK(err < 1e-6);
}

TEST_CASE("optimizer: zero gradient leaves parameters bitwise unchanged") {
  Rng rng(53);
  std::vector<Tensor> params = {RandomTensor({3, 3}, rng, true)};
  DoubleVec before = params[0].Values();
  AdamState st = MakeAdamState(params);
  params[0].Grad();  // allocate zeros
  AdamStep(params, st, 0.1);
  CHECK(params[0].Values() == before);
}

TEST_CASE("optimizer: quadratic bowl converges from 1 to |w| < 1e-3") {
  std::vector<Tensor> params = {Tensor::FromValues({1}, {1.0}, true)};
  AdamState st = MakeAdamState(params);
  for (int i = 0; i < 200; i++) {
    params[0].ZeroGrad();
    params[0].Grad()[0] = 2.0 * params[0].At(0);  // d(w^2)/dw
    AdamStep(params, st, 0.1);
  }
  CHECK(std::abs(params[0].At(0)) < 1e-3);
}

TEST_CASE("optimizer: identical seeds give bitwise-identical trajectories") {
  auto run = [](uint64_t seed) {
    Rng rng(seed);
    std::vector<Tensor> params = {RandomTensor({4, 4}, rng, true)};
    AdamState st = MakeAdamState(params);
    for (int i = 0; i < 50; i++) {
      params[0].ZeroGrad();
      for (int64_t j = 0; j < 16; j++)
        params[0].Grad()[static_cast<size_t>(j)] =
            std::sin(params[0].At(j) + static_cast<double>(i));
      AdamStep(params, st, 0.01);
    }
    return params[0].Values();
  };
  CHECK(run(99) == run(99));
}

TEST_CASE("optimizer rejects non-finite gradients") {
  std::vector<Tensor> params = {Tensor::FromValues({1}, {1.0}, true)};
  AdamState st = MakeAdamState(params);
  params[0].Grad()[0] = std::nan("");
  CHECK_THROWS_AS(AdamStep(params, st, 0.1), NumericError);
}

TEST_CASE("random-shape gradient sweep over all primitives") {
  Rng rng(59);
  for (int trial = 0; trial < 8; trial++) {
    int n = 1 + static_cast<int>(rng.UniformInt(8));
    int m = 1 + static_cast<int>(rng.UniformInt(8));
    int k = 1 + static_cast<int>(rng.UniformInt(8));
    Tensor a = RandomTensor({n, k}, rng, true);
    Tensor b = RandomTensor({k, m}, rng, true);
    Tensor bias = RandomTensor({m}, rng, true);
    Tensor r = RandomTensor({n, m}, rng, false);
    auto build = [&](Tape *t) {
      Tensor y = Affine(t, a, b, &bias);
      return SumAll(t, Mul(t, TanhOp(t, y), r));
    };
    CHECK(MaxGradRelError(build, {a, b, bias}) < 1e-6);
  }
}
