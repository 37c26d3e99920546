// Copyright 2026 The burstkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace burstkit {

// Error taxonomy. The CLI maps these onto stable exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
/// Operand shapes are incompatible with each other or with a weight.
class DimensionError : public Error {
 public:
  using Error::Error;
};
/// A configuration value is outside what an operation supports.
class SpecError : public Error {
 public:
  using Error::Error;
};
/// A caller-side precondition does not hold.
class ContractError : public Error {
 public:
  using Error::Error;
};
/// Misuse of the autodiff tape (double backward, stale graph).
class TapeError : public Error {
 public:
  using Error::Error;
};
/// NaN/Inf where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};

/// NCHW extent of a dense tensor.
struct Shape {
  std::int64_t n = 0;
  std::int64_t c = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;

  constexpr std::int64_t numel() const { return n * c * h * w; }
  constexpr std::int64_t plane() const { return h * w; }
  constexpr std::int64_t sample() const { return c * h * w; }
  auto operator<=>(const Shape&) const = default;
  std::string str() const;
};

template <class T>
struct TensorImpl;

/// Handle to the storage and autodiff state of one node in the graph.
template <class T>
using ImplPtr = std::shared_ptr<TensorImpl<T>>;

template <class T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a gradient reaches this node
  bool requires_grad = false;
  // Set when the node was produced by a recorded op on the live tape.
  bool recorded = false;
  std::uint64_t tape_generation = 0;
  const char* op = "leaf";
  std::vector<ImplPtr<T>> parents;

  std::vector<T>& grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), T(0));
    return grad;
  }
  bool needs_grad() const { return requires_grad || recorded; }
};

/// Dense 4-D float tensor in N x C x H x W layout, W fastest.
///
/// A Tensor is a shared handle: copies alias the same storage and graph node,
/// the way autograd frameworks behave. Use clone() or detach() for an
/// independent value.
template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor();
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  static Tensor zeros(Shape shape) { return Tensor(shape, T(0)); }
  static Tensor ones(Shape shape) { return Tensor(shape, T(1)); }
  static Tensor scalar(T v) { return Tensor(Shape{1, 1, 1, 1}, v); }

  const Shape& shape() const { return impl_->shape; }
  std::int64_t numel() const { return impl_->shape.numel(); }
  bool empty() const { return numel() == 0; }

  std::span<T> data() { return impl_->data; }
  std::span<const T> data() const { return impl_->data; }
  T* ptr() { return impl_->data.data(); }
  const T* ptr() const { return impl_->data.data(); }

  std::int64_t index(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    const Shape& s = impl_->shape;
    return ((n * s.c + c) * s.h + h) * s.w + w;
  }
  T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
    return impl_->data[static_cast<std::size_t>(index(n, c, h, w))];
  }
  T at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return impl_->data[static_cast<std::size_t>(index(n, c, h, w))];
  }
  /// Value of a single-element tensor.
  T item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on = true);
  bool has_grad() const { return !impl_->grad.empty(); }
  /// Accumulated gradient; zeros when nothing has flowed here yet.
  std::span<const T> grad() const;
  Tensor grad_tensor() const;
  void zero_grad() { impl_->grad.clear(); }

  /// Fresh leaf with copied data and no graph history.
  Tensor detach() const;
  /// Same as detach() but keeps the requires_grad flag.
  Tensor clone() const;
  template <class U>
  Tensor<U> cast() const;

  /// Operation name that produced this tensor ("leaf" for inputs).
  const char* op_name() const { return impl_->op; }
  const ImplPtr<T>& impl() const { return impl_; }
  static Tensor from_impl(ImplPtr<T> impl);

  bool all_finite() const;

 private:
  ImplPtr<T> impl_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

/// True when `ancestor` is reachable from `node` through recorded op inputs.
template <class T>
bool depends_on(const Tensor<T>& node, const Tensor<T>& ancestor);

/// Throws NumericError naming `what` if any element is NaN or Inf.
template <class T>
void require_finite(const Tensor<T>& t, const std::string& what);

}  // namespace burstkit
