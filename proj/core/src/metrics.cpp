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

#include "burstkit/metrics.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace burstkit {

namespace {

constexpr int kWindow = 11;

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g[std::size_t(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    total += g[std::size_t(i)];
  }
  for (auto& v : g) v /= total;
  return g;
}

// Valid separable filtering of a plane: (h, w) -> (h - 10, w - 10).
std::vector<double> filter_valid(const std::vector<double>& in, std::int64_t h, std::int64_t w,
                                 const std::array<double, kWindow>& g) {
  const std::int64_t oh = h - kWindow + 1;
  const std::int64_t ow = w - kWindow + 1;
  std::vector<double> rows(std::size_t(h * ow));
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[std::size_t(k)] * in[std::size_t(y * w + x + k)];
      rows[std::size_t(y * ow + x)] = acc;
    }
  }
  std::vector<double> out(std::size_t(oh * ow));
  for (std::int64_t y = 0; y < oh; ++y) {
    for (std::int64_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[std::size_t(k)] * rows[std::size_t((y + k) * ow + x)];
      out[std::size_t(y * ow + x)] = acc;
    }
  }
  return out;
}

}  // namespace

template <class T>
Psnr psnr(const Tensor<T>& pred, const Tensor<T>& target, double max_val) {
  if (pred.shape() != target.shape()) {
    throw DimensionError("psnr: " + pred.shape().str() + " vs " + target.shape().str());
  }
  double se = 0.0;
  const auto a = pred.data();
  const auto b = target.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    se += d * d;
  }
  const double mse = se / double(a.size());
  if (mse == 0.0) return {kPsnrCap, true};
  const double db = 10.0 * std::log10(max_val * max_val / mse);
  if (db >= kPsnrCap) return {kPsnrCap, true};
  return {db, false};
}

template <class T>
double ssim(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.shape() != target.shape()) {
    throw DimensionError("ssim: " + pred.shape().str() + " vs " + target.shape().str());
  }
  const Shape s = pred.shape();
  if (s.h < kWindow || s.w < kWindow) {
    throw ContractError("ssim: image " + s.str() + " smaller than the 11x11 window");
  }
  const double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  const double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  const auto g = gaussian_taps();
  const std::int64_t plane = s.plane();
  double total = 0.0;
  std::int64_t count = 0;
  const auto n = static_cast<std::size_t>(plane);
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::int64_t p = 0; p < s.n * s.c; ++p) {
    for (std::int64_t i = 0; i < plane; ++i) {
      const double a = pred.data()[std::size_t(p * plane + i)];
      const double b = target.data()[std::size_t(p * plane + i)];
      x[std::size_t(i)] = a;
      y[std::size_t(i)] = b;
      xx[std::size_t(i)] = a * a;
      yy[std::size_t(i)] = b * b;
      xy[std::size_t(i)] = a * b;
    }
    const auto mx = filter_valid(x, s.h, s.w, g);
    const auto my = filter_valid(y, s.h, s.w, g);
    const auto sxx = filter_valid(xx, s.h, s.w, g);
    const auto syy = filter_valid(yy, s.h, s.w, g);
    const auto sxy = filter_valid(xy, s.h, s.w, g);
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return total / double(count);
}

template <class T>
Tensor<T> crop_border(const Tensor<T>& x, std::int64_t border) {
  const Shape s = x.shape();
  if (border < 0 || 2 * border >= s.h || 2 * border >= s.w) {
    throw ContractError("crop_border: border " + std::to_string(border) + " too large for " + s.str());
  }
  Tensor<T> out(Shape{s.n, s.c, s.h - 2 * border, s.w - 2 * border});
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t c = 0; c < s.c; ++c) {
      for (std::int64_t yy = 0; yy < out.shape().h; ++yy) {
        for (std::int64_t xx = 0; xx < out.shape().w; ++xx) {
          out.at(n, c, yy, xx) = x.at(n, c, yy + border, xx + border);
        }
      }
    }
  }
  return out;
}

template Psnr psnr(const Tensor<float>&, const Tensor<float>&, double);
template Psnr psnr(const Tensor<double>&, const Tensor<double>&, double);
template double ssim(const Tensor<float>&, const Tensor<float>&);
template double ssim(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> crop_border(const Tensor<float>&, std::int64_t);
template Tensor<double> crop_border(const Tensor<double>&, std::int64_t);

}  // namespace burstkit
