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

#include "burstkit/optim.hpp"

#include <cmath>
#include <numbers>

namespace burstkit {

double cosine_lr(std::int64_t step, std::int64_t total, double base, double min) {
  if (total <= 0 || step >= total) return min;
  if (step <= 0) return base;
  const double t = double(step) / double(total);
  return min + 0.5 * (base - min) * (1.0 + std::cos(std::numbers::pi * t));
}

template <class T>
double global_grad_norm(const ParamSet<T>& params) {
  double sq = 0.0;
  for (const auto& [name, p] : params.items()) {
    if (!p.has_grad()) continue;
    for (T g : p.grad()) sq += double(g) * double(g);
  }
  return std::sqrt(sq);
}

template <class T>
Adam<T>::Adam(ParamSet<T>& params, AdamConfig config) : params_(&params), config_(config) {
  for (const auto& [name, p] : params.items()) {
    m_.push_back(Tensor<T>::zeros(p.shape()));
    v_.push_back(Tensor<T>::zeros(p.shape()));
  }
}

template <class T>
double Adam<T>::step() {
  auto& items = params_->items();
  for (const auto& [name, p] : items) {
    if (!p.has_grad()) continue;
    for (T g : p.grad()) {
      if (!std::isfinite(double(g))) throw NumericError("adam: non-finite gradient in " + name);
    }
  }
  const double norm = global_grad_norm(*params_);
  const double clip = (config_.clip_norm > 0.0 && norm > config_.clip_norm) ? config_.clip_norm / norm : 1.0;
  const double lr = current_lr();
  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, double(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, double(step_));
  for (std::size_t i = 0; i < items.size(); ++i) {
    Tensor<T>& p = items[i].second;
    auto m = m_[i].data();
    auto v = v_[i].data();
    auto w = p.data();
    const bool has = p.has_grad();
    const auto g = p.grad();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = has ? double(g[k]) * clip : 0.0;
      const double mk = config_.beta1 * double(m[k]) + (1.0 - config_.beta1) * gk;
      const double vk = config_.beta2 * double(v[k]) + (1.0 - config_.beta2) * gk * gk;
      m[k] = T(mk);
      v[k] = T(vk);
      const double update = lr * (mk / bc1) / (std::sqrt(vk / bc2) + config_.eps);
      w[k] = T(double(w[k]) - update);
    }
  }
  return norm;
}

template double global_grad_norm(const ParamSet<float>&);
template double global_grad_norm(const ParamSet<double>&);
template class Adam<float>;
template class Adam<double>;

}  // namespace burstkit
