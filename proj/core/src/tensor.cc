// core/src/tensor.cc

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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>

namespace cpcv {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

namespace {

int64_t ShapeNumEl(const std::vector<int> &shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

void CheckSameShape(const char *op, const Tensor &a, const Tensor &b) {
  if (a.Shape() != b.Shape())
    throw DimensionError(StrCat(op, ": shape mismatch ", a.ShapeStr(), " vs ",
                                b.ShapeStr()));
}

void CheckRank2(const char *op, const Tensor &t) {
  if (t.Rank() != 2)
    throw DimensionError(StrCat(op, ": expected rank-2 tensor, got ",
                                t.ShapeStr()));
}

}  // namespace

Tensor MakeOpOutput(std::vector<int> shape) {
  auto impl = std::make_shared<Tensor::Impl>();
  impl->shape = std::move(shape);
  impl->values.assign(static_cast<size_t>(ShapeNumEl(impl->shape)), 0.0);
  return Tensor(std::move(impl));
}

Tensor Tensor::Zeros(std::vector<int> shape, bool requires_grad) {
  Tensor t = MakeOpOutput(std::move(shape));
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::FromValues(std::vector<int> shape, std::vector<double> values,
                          bool requires_grad) {
  if (ShapeNumEl(shape) != static_cast<int64_t>(values.size()))
    throw DimensionError(StrCat("Tensor::FromValues: shape wants ",
                                ShapeNumEl(shape), " values, got ",
                                values.size()));
  Tensor t = MakeOpOutput(std::move(shape));
  t.impl_->values.assign(values.begin(), values.end());
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::Scalar(double v, bool requires_grad) {
  return FromValues({1}, {v}, requires_grad);
}

Tensor Tensor::UniformInit(std::vector<int> shape, int fan_in, Rng &rng,
                           bool requires_grad) {
  if (fan_in <= 0) throw ContractError("UniformInit: fan_in must be positive");
  Tensor t = Zeros(std::move(shape), requires_grad);
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto &v : t.Values()) v = rng.Uniform(-bound, bound);
  return t;
}

std::string Tensor::ShapeStr() const {
  std::string s = "[";
  for (size_t i = 0; i < impl_->shape.size(); i++) {
    if (i) s += "x";
    s += std::to_string(impl_->shape[i]);
  }
  return s + "]";
}

void Tape::RegisterOutput(const Tensor &t) {
  t.impl()->from_op = true;
  op_outputs_.push_back(t.impl());
}

void Tape::Record(std::function<void()> backward) {
  ops_.push_back(std::move(backward));
}

void Tape::Backward(const Tensor &loss) {
  if (!loss.Defined() || loss.NumEl() != 1)
    throw ContractError(StrCat("Tape::Backward: loss must be a scalar, got ",
                               loss.Defined() ? loss.ShapeStr() : "<null>"));
  if (!loss.impl()->from_op)
    throw ContractError("Tape::Backward: loss was not produced by recorded ops");
  // Gradients of op outputs are transient per pass; leaves accumulate.
  for (auto &impl : op_outputs_) {
    if (!impl->grad.empty()) impl->grad.assign(impl->values.size(), 0.0);
  }
  loss.impl()->EnsureGrad();
  loss.impl()->grad[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

void Tape::Clear() {
  ops_.clear();
  op_outputs_.clear();
}

// ---- helpers shared by op implementations ------------------------------

namespace {

using Impl = Tensor::Impl;
using ImplPtr = std::shared_ptr<Impl>;

// Adds src into the (lazily created) grad buffer of impl.
void AccumulateGrad(const ImplPtr &impl, const double *src) {
  impl->EnsureGrad();
  double *g = impl->grad.data();
  size_t n = impl->grad.size();
  for (size_t i = 0; i < n; i++) g[i] += src[i];
}

Tensor FinishUnary(Tape *tape, Tensor out, std::function<void()> backward) {
  if (tape != nullptr) {
    tape->RegisterOutput(out);
    // No gradient ever reached the output if its buffer is still empty.
    ImplPtr io = out.impl();
    tape->Record([io, backward = std::move(backward)]() {
      if (!io->grad.empty()) backward();
    });
  }
  return out;
}

}  // namespace

// ---- MatMul / Affine ----------------------------------------------------

Tensor MatMul(Tape *tape, const Tensor &a, const Tensor &b, bool trans_a,
              bool trans_b) {
  CheckRank2("MatMul", a);
  CheckRank2("MatMul", b);
  int n = trans_a ? a.Dim(1) : a.Dim(0);
  int ka = trans_a ? a.Dim(0) : a.Dim(1);
  int kb = trans_b ? b.Dim(1) : b.Dim(0);
  int m = trans_b ? b.Dim(0) : b.Dim(1);
  if (ka != kb)
    throw DimensionError(StrCat("MatMul: inner dimensions disagree: ",
                                a.ShapeStr(), (trans_a ? "^T" : ""), " * ",
                                b.ShapeStr(), (trans_b ? "^T" : "")));
  Tensor out = MakeOpOutput({n, m});
  ConstMapMat A(a.Data(), a.Dim(0), a.Dim(1));
  ConstMapMat B(b.Data(), b.Dim(0), b.Dim(1));
  MapMat Y(out.Data(), n, m);
  if (!trans_a && !trans_b) Y.noalias() = A * B;
  else if (trans_a && !trans_b) Y.noalias() = A.transpose() * B;
  else if (!trans_a && trans_b) Y.noalias() = A * B.transpose();
  else Y.noalias() = A.transpose() * B.transpose();

  if (tape != nullptr) {
    tape->RegisterOutput(out);
    ImplPtr ia = a.impl(), ib = b.impl(), io = out.impl();
    tape->Record([ia, ib, io, trans_a, trans_b, n, m]() {
      if (io->grad.empty()) return;
      ConstMapMat dY(io->grad.data(), n, m);
      ConstMapMat A(ia->values.data(), ia->shape[0], ia->shape[1]);
      ConstMapMat B(ib->values.data(), ib->shape[0], ib->shape[1]);
      if (ia->NeedsGrad()) {
        ia->EnsureGrad();
        MapMat dA(ia->grad.data(), ia->shape[0], ia->shape[1]);
        if (!trans_a && !trans_b) dA.noalias() += dY * B.transpose();
        else if (!trans_a && trans_b) dA.noalias() += dY * B;
        else if (trans_a && !trans_b) dA.noalias() += B * dY.transpose();
        else dA.noalias() += B.transpose() * dY.transpose();
      }
      if (ib->NeedsGrad()) {
        ib->EnsureGrad();
        MapMat dB(ib->grad.data(), ib->shape[0], ib->shape[1]);
        if (!trans_a && !trans_b) dB.noalias() += A.transpose() * dY;
        else if (!trans_a && trans_b) dB.noalias() += dY.transpose() * A;
        else if (trans_a && !trans_b) dB.noalias() += A * dY;
        else dB.noalias() += dY.transpose() * A.transpose();
      }
    });
  }
  return out;
}

Tensor AddBiasRow(Tape *tape, const Tensor &x, const Tensor &bias) {
  CheckRank2("AddBiasRow", x);
  if (bias.Rank() != 1 || bias.Dim(0) != x.Dim(1))
    throw DimensionError(StrCat("AddBiasRow: bias ", bias.ShapeStr(),
                                " does not match columns of ", x.ShapeStr()));
  int n = x.Dim(0), m = x.Dim(1);
  Tensor out = MakeOpOutput({n, m});
  const double *xv = x.Data(), *bv = bias.Data();
  double *ov = out.Data();
  for (int i = 0; i < n; i++)
    for (int j = 0; j < m; j++) ov[i * m + j] = xv[i * m + j] + bv[j];

  if (tape != nullptr) {
    tape->RegisterOutput(out);
    ImplPtr ix = x.impl(), ibias = bias.impl(), io = out.impl();
    tape->Record([ix, ibias, io, n, m]() {
      if (io->grad.empty()) return;
      const double *dg = io->grad.data();
      if (ix->NeedsGrad()) AccumulateGrad(ix, dg);
      if (ibias->NeedsGrad()) {
        ibias->EnsureGrad();
        double *db = ibias->grad.data();
        for (int i = 0; i < n; i++)
          for (int j = 0; j < m; j++) db[j] += dg[i * m + j];
      }
    });
  }
  return out;
}

Tensor Affine(Tape *tape, const Tensor &x, const Tensor &w,
              const Tensor *bias) {
  Tensor y = MatMul(tape, x, w);
  if (bias != nullptr) y = AddBiasRow(tape, y, *bias);
  return y;
}

// ---- elementwise --------------------------------------------------------

namespace {

template <typename Fwd>
Tensor BinaryElementwise(Tape *tape, const char *name, const Tensor &a,
                         const Tensor &b, Fwd fwd,
                         std::function<void(const Impl &, Impl &, Impl &)> bwd) {
  CheckSameShape(name, a, b);
  Tensor out = MakeOpOutput(a.Shape());
  const double *av = a.Data(), *bv = b.Data();
  double *ov = out.Data();
  int64_t n = a.NumEl();
  for (int64_t i = 0; i < n; i++) ov[i] = fwd(av[i], bv[i]);
  if (tape != nullptr) {
    tape->RegisterOutput(out);
    ImplPtr ia = a.impl(), ib = b.impl(), io = out.impl();
    tape->Record([ia, ib, io, bwd]() {
      if (!io->grad.empty()) bwd(*io, *ia, *ib);
    });
  }
  return out;
}

}  // namespace

Tensor Add(Tape *tape, const Tensor &a, const Tensor &b) {
  return BinaryElementwise(
      tape, "Add", a, b, [](double x, double y) { return x + y; },
      [](const Impl &o, Impl &ia, Impl &ib) {
        if (ia.NeedsGrad()) {
          ia.EnsureGrad();
          for (size_t i = 0; i < o.grad.size(); i++) ia.grad[i] += o.grad[i];
        }
        if (ib.NeedsGrad()) {
          ib.EnsureGrad();
          for (size_t i = 0; i < o.grad.size(); i++) ib.grad[i] += o.grad[i];
        }
      });
}

Tensor Sub(Tape *tape, const Tensor &a, const Tensor &b) {
  return BinaryElementwise(
      tape, "Sub", a, b, [](double x, double y) { return x - y; },
      [](const Impl &o, Impl &ia, Impl &ib) {
        if (ia.NeedsGrad()) {
          ia.EnsureGrad();
          for (size_t i = 0; i < o.grad.size(); i++) ia.grad[i] += o.grad[i];
        }
        if (ib.NeedsGrad()) {
          ib.EnsureGrad();
          for (size_t i = 0; i < o.grad.size(); i++) ib.grad[i] -= o.grad[i];
        }
      });
}

Tensor Mul(Tape *tape, const Tensor &a, const Tensor &b) {
  CheckSameShape("Mul", a, b);
  Tensor out = MakeOpOutput(a.Shape());
  const double *av = a.Data(), *bv = b.Data();
  double *ov = out.Data();
  int64_t n = a.NumEl();
  for (int64_t i = 0; i < n; i++) ov[i] = av[i] * bv[i];
  if (tape != nullptr) {
    tape->RegisterOutput(out);
    ImplPtr ia = a.impl(), ib = b.impl(), io = out.impl();
    tape->Record([ia, ib, io]() {
      if (io->grad.empty()) return;
      size_t n = io->grad.size();
      if (ia->NeedsGrad()) {
        ia->EnsureGrad();
        for (size_t i = 0; i < n; i++)
          ia->grad[i] += io->grad[i] * ib->values[i];
      }
      if (ib->NeedsGrad()) {
        ib->EnsureGrad();
        for (size_t i = 0; i < n; i++)
          ib->grad[i] += io->grad[i] * ia->values[i];
      }
    });
  }
  return out;
}

Tensor Scale(Tape *tape, const Tensor &a, double s) {
  Tensor out = MakeOpOutput(a.Shape());
  const double *av = a.Data();
  double *ov = out.Data();
  int64_t n = a.NumEl();
  for (int64_t i = 0; i < n; i++) ov[i] = av[i] * s;
  ImplPtr ia = a.impl(), io = out.impl();
  return FinishUnary(tape, out, [ia, io, s]() {
    if (!ia->NeedsGrad()) return;
    ia->EnsureGrad();
    for (size_t i = 0; i < io->grad.size(); i++)
      ia->grad[i] += io->grad[i] * s;
  });
}

Tensor Sigmoid(Tape *tape, const Tensor &x) {
  Tensor out = MakeOpOutput(x.Shape());
  const double *xv = x.Data();
  double *ov = out.Data();
  int64_t n = x.NumEl();
  for (int64_t i = 0; i < n; i++) {
    double v = xv[i];
    // Branch keeps exp() argument non-positive for stability.
    ov[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v))
                   : std::exp(v) / (1.0 + std::exp(v));
  }
  ImplPtr ix = x.impl(), io = out.impl();
  return FinishUnary(tape, out, [ix, io]() {
    if (!ix->NeedsGrad()) return;
    ix->EnsureGrad();
    for (size_t i = 0; i < io->grad.size(); i++) {
      double y = io->values[i];
      ix->grad[i] += io->grad[i] * y * (1.0 - y);
    }
  });
}

Tensor TanhOp(Tape *tape, const Tensor &x) {
  Tensor out = MakeOpOutput(x.Shape());
  const double *xv = x.Data();
  double *ov = out.Data();
  int64_t n = x.NumEl();
  for (int64_t i = 0; i < n; i++) ov[i] = std::tanh(xv[i]);
  ImplPtr ix = x.impl(), io = out.impl();
  return FinishUnary(tape, out, [ix, io]() {
    if (!ix->NeedsGrad()) return;
    ix->EnsureGrad();
    for (size_t i = 0; i < io->grad.size(); i++) {
      double y = io->values[i];
      ix->grad[i] += io->grad[i] * (1.0 - y * y);
    }
  });
}

Tensor Relu(Tape *tape, const Tensor &x) {
  Tensor out = MakeOpOutput(x.Shape());
  const double *xv = x.Data();
  double *ov = out.Data();
  int64_t n = x.NumEl();
  for (int64_t i = 0; i < n; i++) ov[i] = xv[i] > 0 ? xv[i] : 0.0;
  ImplPtr ix = x.impl(), io = out.impl();
  return FinishUnary(tape, out, [ix, io]() {
    if (!ix->NeedsGrad()) return;
    ix->EnsureGrad();
    for (size_t i = 0; i < io->grad.size(); i++)
      if (ix->values[i] > 0) ix->grad[i] += io->grad[i];
  });
}

// ---- conv1d -------------------------------------------------------------

int Conv1dOutputLength(int len, int k, int stride, int padding) {
  if (stride < 1) throw ContractError("Conv1d: stride must be >= 1");
  if (padding < 0) throw ContractError("Conv1d: padding must be >= 0");
  if (len + 2 * padding < k)
    throw DimensionError(StrCat("Conv1d: input too short: len=", len,
                                " padding=", padding, " kernel=", k));
  return (len + 2 * padding - k) / stride + 1;
}

namespace {

// cols is [cin*k x lout]; gathers the padded receptive fields of one item.
void Im2Col(const double *x, int cin, int len, int k, int stride, int padding,
            int lout, double *cols) {
  for (int ci = 0; ci < cin; ci++) {
    const double *xc = x + static_cast<int64_t>(ci) * len;
    for (int kk = 0; kk < k; kk++) {
      double *row = cols + static_cast<int64_t>(ci * k + kk) * lout;
      for (int ol = 0; ol < lout; ol++) {
        int src = ol * stride + kk - padding;
        row[ol] = (src >= 0 && src < len) ? xc[src] : 0.0;
      }
    }
  }
}

// Scatter-add of cols-shaped gradients back onto the input of one item.
void Col2ImAdd(const double *cols, int cin, int len, int k, int stride,
               int padding, int lout, double *dx) {
  for (int ci = 0; ci < cin; ci++) {
    double *dxc = dx + static_cast<int64_t>(ci) * len;
    for (int kk = 0; kk < k; kk++) {
      const double *row = cols + static_cast<int64_t>(ci * k + kk) * lout;
      for (int ol = 0; ol < lout; ol++) {
        int src = ol * stride + kk - padding;
        if (src >= 0 && src < len) dxc[src] += row[ol];
      }
    }
  }
}

}  // namespace

Tensor Conv1d(Tape *tape, const Tensor &x, const Tensor &kernels,
              const Tensor *bias, int stride, int padding) {
  if (x.Rank() != 3)
    throw DimensionError(StrCat("Conv1d: input must be [batch x cin x len], got ",
                                x.ShapeStr()));
  if (kernels.Rank() != 3)
    throw DimensionError(StrCat("Conv1d: kernels must be [cout x cin x k], got ",
                                kernels.ShapeStr()));
  int batch = x.Dim(0), cin = x.Dim(1), len = x.Dim(2);
  int cout = kernels.Dim(0), kcin = kernels.Dim(1), k = kernels.Dim(2);
  if (cin != kcin)
    throw DimensionError(StrCat("Conv1d: channel mismatch: input ", x.ShapeStr(),
                                " vs kernels ", kernels.ShapeStr()));
  if (bias != nullptr && (bias->Rank() != 1 || bias->Dim(0) != cout))
    throw DimensionError(StrCat("Conv1d: bias ", bias->ShapeStr(),
                                " does not match cout=", cout));
  int lout = Conv1dOutputLength(len, k, stride, padding);

  Tensor out = MakeOpOutput({batch, cout, lout});
  ConstMapMat W(kernels.Data(), cout, cin * k);
  DoubleVec cols(static_cast<size_t>(cin) * k * lout);
  for (int b = 0; b < batch; b++) {
    Im2Col(x.Data() + static_cast<int64_t>(b) * cin * len, cin, len, k, stride,
           padding, lout, cols.data());
    ConstMapMat C(cols.data(), cin * k, lout);
    MapMat Y(out.Data() + static_cast<int64_t>(b) * cout * lout, cout, lout);
    Y.noalias() = W * C;
    if (bias != nullptr) Y.colwise() += Eigen::Map<const Eigen::VectorXd>(bias->Data(), cout);
  }

  if (tape != nullptr) {
    tape->RegisterOutput(out);
    ImplPtr ix = x.impl(), iw = kernels.impl(), io = out.impl();
    ImplPtr ibias = bias != nullptr ? bias->impl() : nullptr;
    tape->Record([ix, iw, ibias, io, batch, cin, len, cout, k, stride, padding,
                  lout]() {
      if (io->grad.empty()) return;
      DoubleVec cols(static_cast<size_t>(cin) * k * lout);
      ConstMapMat W(iw->values.data(), cout, cin * k);
      bool need_x = ix->NeedsGrad(), need_w = iw->NeedsGrad();
      bool need_b = ibias != nullptr && ibias->NeedsGrad();
      if (need_x) ix->EnsureGrad();
      if (need_w) iw->EnsureGrad();
      if (need_b) ibias->EnsureGrad();
      for (int b = 0; b < batch; b++) {
        ConstMapMat dY(io->grad.data() + static_cast<int64_t>(b) * cout * lout,
                       cout, lout);
        if (need_w) {
          Im2Col(ix->values.data() + static_cast<int64_t>(b) * cin * len, cin,
                 len, k, stride, padding, lout, cols.data());
          ConstMapMat C(cols.data(), cin * k, lout);
          MapMat dW(iw->grad.data(), cout, cin * k);
          dW.noalias() += dY * C.transpose();
        }
        if (need_x) {
          MapMat G(cols.data(), cin * k, lout);  // reused as scratch
          G.noalias() = W.transpose() * dY;
          Col2ImAdd(cols.data(), cin, len, k, stride, padding, lout,
                    ix->grad.data() + static_cast<int64_t>(b) * cin * len);
        }
        if (need_b) {
          Eigen::Map<Eigen::VectorXd> db(ibias->grad.data(), cout);
          db.noalias() += dY.rowwise().sum();
        }
      }
    });
  }
  return out;
}

// ---- log-softmax ---------------------------------------------------------

Tensor LogSoftmaxRows(Tape *tape, const Tensor &x) {
  CheckRank2("LogSoftmaxRows", x);
  int n = x.Dim(0), m = x.Dim(1);
  const double *xv = x.Data();
  for (int64_t i = 0; i < x.NumEl(); i++)
    if (!std::isfinite(xv[i]))
      throw NumericError("LogSoftmaxRows: non-finite input entry");
  Tensor out = MakeOpOutput({n, m});
  double *ov = out.Data();
  for (int i = 0; i < n; i++) {
    const double *row = xv + static_cast<int64_t>(i) * m;
    double mx = row[0];
    for (int j = 1; j < m; j++) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < m; j++) sum += std::exp(row[j] - mx);
    double lse = mx + std::log(sum);
    for (int j = 0; j < m; j++) ov[static_cast<int64_t>(i) * m + j] = row[j] - lse;
  }
  ImplPtr ix = x.impl(), io = out.impl();
  return FinishUnary(tape, out, [ix, io, n, m]() {
    if (!ix->NeedsGrad()) return;
    ix->EnsureGrad();
    for (int i = 0; i < n; i++) {
      const double *dy = io->grad.data() + static_cast<int64_t>(i) * m;
      const double *y = io->values.data() + static_cast<int64_t>(i) * m;
      double *dx = ix->grad.data() + static_cast<int64_t>(i) * m;
      double s = 0.0;
      for (int j = 0; j < m; j++) s += dy[j];
      for (int j = 0; j < m; j++) dx[j] += dy[j] - std::exp(y[j]) * s;
    }
  });
}

// ---- shape ops -----------------------------------------------------------

Tensor Reshape(Tape *tape, const Tensor &x, std::vector<int> shape) {
  if (ShapeNumEl(shape) != x.NumEl())
    throw DimensionError(StrCat("Reshape: cannot reshape ", x.ShapeStr(),
                                " to ", ShapeNumEl(shape), " elements"));
  Tensor out = MakeOpOutput(std::move(shape));
  out.Values() = x.Values();
  ImplPtr ix = x.impl(), io = out.impl();
  return FinishUnary(tape, out, [ix, io]() {
    if (!ix->NeedsGrad()) return;
    AccumulateGrad(ix, io->grad.data());
  });
}

Tensor TimeSlice(Tape *tape, const Tensor &x, int t) {
  if (x.Rank() != 3)
    throw DimensionError(StrCat("TimeSlice: expected [b x c x T], got ",
                                x.ShapeStr()));
  int b = x.Dim(0), c = x.Dim(1), T = x.Dim(2);
  if (t < 0 || t >= T)
    throw ContractError(StrCat("TimeSlice: t=", t, " out of range [0,", T, ")"));
  Tensor out = MakeOpOutput({b, c});
  for (int i = 0; i < b; i++)
    for (int j = 0; j < c; j++)
      out.At(static_cast<int64_t>(i) * c + j) =
          x.At((static_cast<int64_t>(i) * c + j) * T + t);
  ImplPtr ix = x.impl(), io = out.impl();
  return FinishUnary(tape, out, [ix, io, b, c, T, t]() {
    if (!ix->NeedsGrad()) return;
    ix->EnsureGrad();
    for (int i = 0; i < b; i++)
      for (int j = 0; j < c; j++)
        ix->grad[(static_cast<int64_t>(i) * c + j) * T + t] +=
            io->grad[static_cast<int64_t>(i) * c + j];
  });
}

Tensor SliceCols(Tape *tape, const Tensor &x, int c0, int c1) {
  CheckRank2("SliceCols", x);
  int n = x.Dim(0), m = x.Dim(1);
  if (c0 < 0 || c1 > m || c0 >= c1)
    throw ContractError(StrCat("SliceCols: bad range [", c0, ",", c1,
                               ") for ", x.ShapeStr()));
  int w = c1 - c0;
  Tensor out = MakeOpOutput({n, w});
  for (int i = 0; i < n; i++)
    for (int j = 0; j < w; j++)
      out.At(static_cast<int64_t>(i) * w + j) =
          x.At(static_cast<int64_t>(i) * m + c0 + j);
  ImplPtr ix = x.impl(), io = out.impl();
  return FinishUnary(tape, out, [ix, io, n, m, c0, w]() {
    if (!ix->NeedsGrad()) return;
    ix->EnsureGrad();
    for (int i = 0; i < n; i++)
      for (int j = 0; j < w; j++)
        ix->grad[static_cast<int64_t>(i) * m + c0 + j] +=
            io->grad[static_cast<int64_t>(i) * w + j];
  });
}

Tensor Diag(Tape *tape, const Tensor &x) {
  CheckRank2("Diag", x);
  if (x.Dim(0) != x.Dim(1))
    throw DimensionError(StrCat("Diag: matrix must be square, got ",
                                x.ShapeStr()));
  int n = x.Dim(0);
  Tensor out = MakeOpOutput({n});
  for (int i = 0; i < n; i++)
    out.At(i) = x.At(static_cast<int64_t>(i) * n + i);
  ImplPtr ix = x.impl(), io = out.impl();
  return FinishUnary(tape, out, [ix, io, n]() {
    if (!ix->NeedsGrad()) return;
    ix->EnsureGrad();
    for (int i = 0; i < n; i++)
      ix->grad[static_cast<int64_t>(i) * n + i] += io->grad[i];
  });
}

Tensor SumAll(Tape *tape, const Tensor &x) {
  Tensor out = MakeOpOutput({1});
  double s = 0.0;
  const double *xv = x.Data();
  for (int64_t i = 0; i < x.NumEl(); i++) s += xv[i];
  out.At(0) = s;
  ImplPtr ix = x.impl(), io = out.impl();
  return FinishUnary(tape, out, [ix, io]() {
    if (!ix->NeedsGrad()) return;
    ix->EnsureGrad();
    double g = io->grad[0];
    for (auto &v : ix->grad) v += g;
  });
}

Tensor MeanAll(Tape *tape, const Tensor &x) {
  Tensor out = MakeOpOutput({1});
  double s = 0.0;
  const double *xv = x.Data();
  int64_t n = x.NumEl();
  for (int64_t i = 0; i < n; i++) s += xv[i];
  out.At(0) = s / static_cast<double>(n);
  ImplPtr ix = x.impl(), io = out.impl();
  return FinishUnary(tape, out, [ix, io, n]() {
    if (!ix->NeedsGrad()) return;
    ix->EnsureGrad();
    double g = io->grad[0] / static_cast<double>(n);
    for (auto &v : ix->grad) v += g;
  });
}

}  // namespace cpcv
