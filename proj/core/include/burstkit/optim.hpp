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

#include <cstdint>
#include <vector>

#include "burstkit/nn.hpp"

namespace burstkit {

/// min + 0.5 (base - min)(1 + cos(pi step / total)); steps past `total`
/// return `min`.
double cosine_lr(std::int64_t step, std::int64_t total, double base = 1e-4, double min = 1e-6);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double base_lr = 1e-4;
  double min_lr = 1e-6;
  std::int64_t total_steps = 1;
  double clip_norm = 1.0;  // global gradient norm; <= 0 disables clipping
};

/// L2 norm over every parameter gradient.
template <class T>
double global_grad_norm(const ParamSet<T>& params);

/// Bias-corrected Adam over a ParamSet with cosine learning-rate decay.
template <class T>
class Adam {
 public:
  Adam(ParamSet<T>& params, AdamConfig config);

  /// Clips, updates every parameter from its accumulated gradient and
  /// advances the step counter. Returns the pre-clip gradient norm. Throws
  /// NumericError (leaving parameters untouched) on a non-finite gradient.
  double step();
  double current_lr() const { return cosine_lr(step_, config_.total_steps, config_.base_lr, config_.min_lr); }

  std::int64_t steps_taken() const { return step_; }
  const AdamConfig& config() const { return config_; }
  std::vector<Tensor<T>>& first_moments() { return m_; }
  std::vector<Tensor<T>>& second_moments() { return v_; }
  void set_steps_taken(std::int64_t s) { step_ = s; }

 private:
  ParamSet<T>* params_;
  AdamConfig config_;
  std::vector<Tensor<T>> m_;
  std::vector<Tensor<T>> v_;
  std::int64_t step_ = 0;
};

}  // namespace burstkit
