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

#include "burstkit/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace burstkit {

std::string Shape::str() const {
  std::ostringstream os;
  os << '(' << n << ", " << c << ", " << h << ", " << w << ')';
  return os.str();
}

namespace {

void check_shape(const Shape& s) {
  if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
    throw DimensionError("negative tensor extent " + s.str());
  }
}

}  // namespace

template <class T>
Tensor<T>::Tensor() : impl_(std::make_shared<TensorImpl<T>>()) {}

template <class T>
Tensor<T>::Tensor(Shape shape, T fill) : impl_(std::make_shared<TensorImpl<T>>()) {
  check_shape(shape);
  impl_->shape = shape;
  impl_->data.assign(static_cast<std::size_t>(shape.numel()), fill);
}

template <class T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : impl_(std::make_shared<TensorImpl<T>>()) {
  check_shape(shape);
  if (static_cast<std::int64_t>(values.size()) != shape.numel()) {
    throw DimensionError("tensor data length " + std::to_string(values.size()) +
                         " does not match shape " + shape.str());
  }
  impl_->shape = shape;
  impl_->data = std::move(values);
}

template <class T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape().str());
  return impl_->data[0];
}

template <class T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  return *this;
}

template <class T>
std::span<const T> Tensor<T>::grad() const {
  return impl_->grad_buffer();
}

template <class T>
Tensor<T> Tensor<T>::grad_tensor() const {
  return Tensor(shape(), std::vector<T>(impl_->grad_buffer()));
}

template <class T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(shape(), impl_->data);
}

template <class T>
Tensor<T> Tensor<T>::clone() const {
  Tensor out = detach();
  out.set_requires_grad(requires_grad());
  return out;
}

template <class T>
template <class U>
Tensor<U> Tensor<T>::cast() const {
  std::vector<U> values(impl_->data.begin(), impl_->data.end());
  Tensor<U> out(shape(), std::move(values));
  out.set_requires_grad(requires_grad());
  return out;
}

template <class T>
Tensor<T> Tensor<T>::from_impl(ImplPtr<T> impl) {
  Tensor t;
  t.impl_ = std::move(impl);
  return t;
}

template <class T>
bool Tensor<T>::all_finite() const {
  for (T v : impl_->data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <class T>
bool depends_on(const Tensor<T>& node, const Tensor<T>& ancestor) {
  const TensorImpl<T>* target = ancestor.impl().get();
  std::vector<const TensorImpl<T>*> stack{node.impl().get()};
  std::unordered_set<const TensorImpl<T>*> seen;
  while (!stack.empty()) {
    const TensorImpl<T>* cur = stack.back();
    stack.pop_back();
    if (cur == target) return true;
    if (!seen.insert(cur).second) continue;
    for (const auto& p : cur->parents) stack.push_back(p.get());
  }
  return false;
}

template <class T>
void require_finite(const Tensor<T>& t, const std::string& what) {
  if (!t.all_finite()) throw NumericError("non-finite values in " + what);
}

template class Tensor<float>;
template class Tensor<double>;
template Tensor<double> Tensor<float>::cast<double>() const;
template Tensor<float> Tensor<double>::cast<float>() const;
template Tensor<float> Tensor<float>::cast<float>() const;
template Tensor<double> Tensor<double>::cast<double>() const;
template bool depends_on(const Tensor<float>&, const Tensor<float>&);
template bool depends_on(const Tensor<double>&, const Tensor<double>&);
template void require_finite(const Tensor<float>&, const std::string&);
template void require_finite(const Tensor<double>&, const std::string&);

}  // namespace burstkit
