// core/include/cpcv/tensor.h

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

#ifndef CPCV_TENSOR_H_
#define CPCV_TENSOR_H_

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "cpcv/common.h"
#include "cpcv/rng.h"

namespace cpcv {

// 64-byte-aligned storage keeps vectorized kernels on the same code path for
// every buffer, so results do not depend on where the allocator happened to
// place the data.
template <typename T, std::size_t Alignment>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U, Alignment> &) {}
  T *allocate(std::size_t n) {
    void *p = std::aligned_alloc(Alignment, ((n * sizeof(T) + Alignment - 1) /
                                             Alignment) * Alignment);
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T *>(p);
  }
  void deallocate(T *p, std::size_t) { std::free(p); }
  template <typename U>
  bool operator==(const AlignedAllocator<U, Alignment> &) const {
    return true;
  }
  template <typename U>
  bool operator!=(const AlignedAllocator<U, Alignment> &) const {
    return false;
  }
  template <typename U>
  struct rebind {
    using other = AlignedAllocator<U, Alignment>;
  };
};

using DoubleVec = std::vector<double, AlignedAllocator<double, 64>>;

// Dense row-major double tensor. Copying a Tensor copies a handle; the
// underlying storage is shared. Leaf tensors created with requires_grad
// accumulate gradients across backward passes; gradients of tensors produced
// by ops are transient per pass.
class Tensor {
 public:
  struct Impl {
    std::vector<int> shape;
    DoubleVec values;
    DoubleVec grad;  // lazily allocated, same length as values
    bool requires_grad = false;
    bool from_op = false;  // produced by a recorded op
    bool NeedsGrad() const { return requires_grad || from_op; }
    void EnsureGrad() {
      if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
    }
  };

  Tensor() = default;

  static Tensor Zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor FromValues(std::vector<int> shape, std::vector<double> values,
                           bool requires_grad = false);
  static Tensor Scalar(double v, bool requires_grad = false);
  // Entries uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static Tensor UniformInit(std::vector<int> shape, int fan_in, Rng &rng,
                            bool requires_grad = true);

  bool Defined() const { return impl_ != nullptr; }
  const std::vector<int> &Shape() const { return impl_->shape; }
  int Rank() const { return static_cast<int>(impl_->shape.size()); }
  int Dim(int i) const { return impl_->shape[static_cast<size_t>(i)]; }
  int64_t NumEl() const { return static_cast<int64_t>(impl_->values.size()); }
  std::string ShapeStr() const;

  double *Data() { return impl_->values.data(); }
  const double *Data() const { return impl_->values.data(); }
  DoubleVec &Values() { return impl_->values; }
  const DoubleVec &Values() const { return impl_->values; }

  double At(int64_t i) const { return impl_->values[static_cast<size_t>(i)]; }
  double &At(int64_t i) { return impl_->values[static_cast<size_t>(i)]; }

  bool RequiresGrad() const { return impl_->requires_grad; }
  bool NeedsGrad() const { return impl_->NeedsGrad(); }
  // Gradient accumulator; allocated (to zeros) on first access.
  DoubleVec &Grad() {
    impl_->EnsureGrad();
    return impl_->grad;
  }
  void ZeroGrad() {
    if (!impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
  }

  std::shared_ptr<Impl> impl() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  friend class Tape;
  friend Tensor MakeOpOutput(std::vector<int> shape);
  std::shared_ptr<Impl> impl_;
};

// Records primitive operations in execution order. Order is topological by
// construction: an op's inputs always exist before the op runs. Backward
// replays the list once in reverse.
class Tape {
 public:
  // Registers a freshly created op output so its transient gradient can be
  // reset at the start of every backward pass.
  void RegisterOutput(const Tensor &t);
  void Record(std::function<void()> backward);

  // Accumulates d(loss)/d(leaf) into every participating leaf's Grad().
  // loss must be scalar and must have been produced on this tape.
  void Backward(const Tensor &loss);

  size_t NumOps() const { return ops_.size(); }
  void Clear();

 private:
  std::vector<std::function<void()>> ops_;
  std::vector<std::shared_ptr<Tensor::Impl>> op_outputs_;
};

// ---- Primitive ops ----------------------------------------------------
// All ops evaluate eagerly. When tape is non-null the backward rule is
// recorded. Gradients propagate to every input with NeedsGrad().

// y = op(a, b) with optional transposes; a is [n x k] (or [k x n] when
// trans_a), b is [k x m] (or [m x k] when trans_b).
Tensor MatMul(Tape *tape, const Tensor &a, const Tensor &b,
              bool trans_a = false, bool trans_b = false);

// x [n x a] times w [a x b] plus optional bias [b] broadcast over rows.
Tensor Affine(Tape *tape, const Tensor &x, const Tensor &w,
              const Tensor *bias = nullptr);

Tensor AddBiasRow(Tape *tape, const Tensor &x, const Tensor &bias);
Tensor Add(Tape *tape, const Tensor &a, const Tensor &b);
Tensor Sub(Tape *tape, const Tensor &a, const Tensor &b);
Tensor Mul(Tape *tape, const Tensor &a, const Tensor &b);
Tensor Scale(Tape *tape, const Tensor &a, double s);

Tensor Sigmoid(Tape *tape, const Tensor &x);
Tensor TanhOp(Tape *tape, const Tensor &x);
Tensor Relu(Tape *tape, const Tensor &x);

// x [batch x cin x len], kernels [cout x cin x k], optional bias [cout].
// Zero padding; lout = floor((len + 2*padding - k)/stride) + 1.
Tensor Conv1d(Tape *tape, const Tensor &x, const Tensor &kernels,
              const Tensor *bias, int stride, int padding);

// Row-wise log-softmax with max subtraction. Input must be finite.
Tensor LogSoftmaxRows(Tape *tape, const Tensor &x);

Tensor Reshape(Tape *tape, const Tensor &x, std::vector<int> shape);

// x [b x c x T] -> [b x c] at time index t.
Tensor TimeSlice(Tape *tape, const Tensor &x, int t);

// Columns [c0, c1) of a [n x m] matrix.
Tensor SliceCols(Tape *tape, const Tensor &x, int c0, int c1);

// Main diagonal of a square matrix -> [n].
Tensor Diag(Tape *tape, const Tensor &x);

Tensor SumAll(Tape *tape, const Tensor &x);
Tensor MeanAll(Tape *tape, const Tensor &x);

// Output length of a 1-d convolution; throws when the input is too short.
int Conv1dOutputLength(int len, int k, int stride, int padding);

}  // namespace cpcv

#endif  // CPCV_TENSOR_H_
