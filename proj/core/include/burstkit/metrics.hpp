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

#include "burstkit/tensor.hpp"

namespace burstkit {

inline constexpr double kPsnrCap = 100.0;

struct Psnr {
  double db = 0.0;
  bool saturated = false;  // identical inputs; db holds the cap
};

/// 10 log10(max^2 / MSE) over all elements, capped at 100 dB.
template <class T>
Psnr psnr(const Tensor<T>& pred, const Tensor<T>& target, double max_val = 1.0);

/// Mean SSIM over valid 11x11 Gaussian (sigma 1.5) windows, K1 = 0.01,
/// K2 = 0.03, L = 1, averaged over channels and batch items. Throws
/// ContractError when the image is smaller than the window.
template <class T>
double ssim(const Tensor<T>& pred, const Tensor<T>& target);

/// Removes `border` pixels from every side.
template <class T>
Tensor<T> crop_border(const Tensor<T>& x, std::int64_t border);

}  // namespace burstkit
