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

#include "burstkit/nn.hpp"

#include <cmath>

namespace burstkit {

template <class T>
void ParamSet<T>::add(const std::string& name, const Tensor<T>& tensor) {
  for (const auto& [existing, _] : items_) {
    if (existing == name) throw ContractError("duplicate parameter name " + name);
  }
  items_.emplace_back(name, tensor);
}

template <class T>
Tensor<T> ParamSet<T>::find(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return t;
  }
  throw ContractError("no parameter named " + name);
}

template <class T>
std::int64_t ParamSet<T>::element_count() const {
  std::int64_t total = 0;
  for (const auto& item : items_) total += item.second.numel();
  return total;
}

template <class T>
void ParamSet<T>::zero_grad() {
  for (auto& item : items_) item.second.zero_grad();
}

template <class T>
void uniform_fill(Tensor<T>& t, double bound, Rng& rng) {
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <class T>
Conv2d<T>::Conv2d(std::int64_t in_channels, std::int64_t out_channels, ConvSpec s, Rng& rng)
    : spec(s) {
  if (in_channels % s.groups != 0 || out_channels % s.groups != 0) {
    throw DimensionError("Conv2d: channels not divisible by groups");
  }
  weight = Tensor<T>(Shape{out_channels, in_channels / s.groups, s.kernel, s.kernel});
  const double fan_in = double(in_channels / s.groups) * s.kernel * s.kernel;
  const double bound = 1.0 / std::sqrt(fan_in);
  uniform_fill(weight, bound, rng);
  weight.set_requires_grad(true);
  if (s.bias) {
    bias = Tensor<T>(Shape{1, out_channels, 1, 1});
    uniform_fill(bias, bound, rng);
    bias.set_requires_grad(true);
  }
}

template <class T>
void Conv2d<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  params.add(prefix + ".weight", weight);
  if (spec.bias) params.add(prefix + ".bias", bias);
}

template <class T>
void Conv2d<T>::zero() {
  for (auto& v : weight.data()) v = T(0);
  if (spec.bias) {
    for (auto& v : bias.data()) v = T(0);
  }
}

template <class T>
LayerNorm2d<T>::LayerNorm2d(std::int64_t channels)
    : gamma(Tensor<T>::ones(Shape{1, channels, 1, 1})),
      beta(Tensor<T>::zeros(Shape{1, channels, 1, 1})) {
  gamma.set_requires_grad(true);
  beta.set_requires_grad(true);
}

template <class T>
void LayerNorm2d<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  params.add(prefix + ".gamma", gamma);
  params.add(prefix + ".beta", beta);
}

template class ParamSet<float>;
template class ParamSet<double>;
template struct Conv2d<float>;
template struct Conv2d<double>;
template struct LayerNorm2d<float>;
template struct LayerNorm2d<double>;
template void uniform_fill(Tensor<float>&, double, Rng&);
template void uniform_fill(Tensor<double>&, double, Rng&);

}  // namespace burstkit
