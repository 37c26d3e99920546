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

#include <string>
#include <utility>
#include <vector>

#include "burstkit/ops.hpp"
#include "burstkit/rng.hpp"
#include "burstkit/tensor.hpp"

namespace burstkit {

/// Ordered, named view of a model's trainable tensors. Entries alias the
/// module tensors, so updates through the set are visible to the model.
template <class T>
class ParamSet {
 public:
  void add(const std::string& name, const Tensor<T>& tensor);
  std::vector<std::pair<std::string, Tensor<T>>>& items() { return items_; }
  const std::vector<std::pair<std::string, Tensor<T>>>& items() const { return items_; }
  /// Throws ContractError when absent.
  Tensor<T> find(const std::string& name) const;
  std::size_t size() const { return items_.size(); }
  std::int64_t element_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor<T>>> items_;
};

/// Convolution layer with PyTorch-style uniform(+-1/sqrt(fan_in)) init.
template <class T>
struct Conv2d {
  ConvSpec spec;
  Tensor<T> weight;
  Tensor<T> bias;

  Conv2d() = default;
  Conv2d(std::int64_t in_channels, std::int64_t out_channels, ConvSpec spec, Rng& rng);

  std::int64_t in_channels() const { return weight.shape().c * spec.groups; }
  std::int64_t out_channels() const { return weight.shape().n; }
  Tensor<T> operator()(const Tensor<T>& x) const { return conv2d(x, weight, bias, spec); }
  void collect(ParamSet<T>& params, const std::string& prefix) const;
  void zero();
};

/// Depth-wise convolution (groups == channels).
template <class T>
Conv2d<T> depthwise(std::int64_t channels, int kernel, bool bias, Rng& rng) {
  return Conv2d<T>(channels, channels, ConvSpec{kernel, 1, (kernel - 1) / 2, 1,
                                                static_cast<int>(channels), bias},
                   rng);
}

template <class T>
Conv2d<T> pointwise(std::int64_t in, std::int64_t out, bool bias, Rng& rng) {
  return Conv2d<T>(in, out, ConvSpec{1, 1, 0, 1, 1, bias}, rng);
}

/// Channel-wise layer norm with learned affine (gamma = 1, beta = 0 at init).
template <class T>
struct LayerNorm2d {
  Tensor<T> gamma;
  Tensor<T> beta;
  T eps = T(1e-6);

  LayerNorm2d() = default;
  explicit LayerNorm2d(std::int64_t channels);
  Tensor<T> operator()(const Tensor<T>& x) const { return layer_norm(x, gamma, beta, eps); }
  void collect(ParamSet<T>& params, const std::string& prefix) const;
};

/// Fills `t` with uniform(-bound, bound) draws.
template <class T>
void uniform_fill(Tensor<T>& t, double bound, Rng& rng);

}  // namespace burstkit
