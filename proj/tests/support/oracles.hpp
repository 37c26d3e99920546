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

// Direct-formula reference implementations and a finite-difference gradient
// checker shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "burstkit/autodiff.hpp"
#include "burstkit/ops.hpp"
#include "burstkit/rng.hpp"
#include "burstkit/tensor.hpp"

namespace burstkit::testing {

template <class T = double>
Tensor<T> random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<T> t(s);
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <class T = double>
Tensor<T> random_leaf(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<T> t = random_tensor<T>(s, rng, lo, hi);
  t.set_requires_grad(true);
  return t;
}

template <class T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double m = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(double(a.data()[i]) - double(b.data()[i])));
  return m;
}

// Six nested loops, groups/stride/dilation/zero padding.
template <class T>
Tensor<T> naive_conv(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, const ConvSpec& s) {
  const Shape xs = x.shape(), ws = w.shape();
  const std::int64_t ho = (xs.h + 2 * s.padding - s.dilation * (s.kernel - 1) - 1) / s.stride + 1;
  const std::int64_t wo = (xs.w + 2 * s.padding - s.dilation * (s.kernel - 1) - 1) / s.stride + 1;
  const std::int64_t cin_g = xs.c / s.groups, cout_g = ws.n / s.groups;
  Tensor<T> out(Shape{xs.n, ws.n, ho, wo});
  for (std::int64_t n = 0; n < xs.n; ++n)
    for (std::int64_t co = 0; co < ws.n; ++co)
      for (std::int64_t oy = 0; oy < ho; ++oy)
        for (std::int64_t ox = 0; ox < wo; ++ox) {
          double acc = b.empty() ? 0.0 : double(b.at(0, co, 0, 0));
          const std::int64_t g = co / cout_g;
          for (std::int64_t ci = 0; ci < cin_g; ++ci)
            for (int ky = 0; ky < s.kernel; ++ky)
              for (int kx = 0; kx < s.kernel; ++kx) {
                const std::int64_t iy = oy * s.stride - s.padding + ky * s.dilation;
                const std::int64_t ix = ox * s.stride - s.padding + kx * s.dilation;
                if (iy < 0 || ix < 0 || iy >= xs.h || ix >= xs.w) continue;
                acc += double(w.at(co, ci, ky, kx)) * double(x.at(n, g * cin_g + ci, iy, ix));
              }
          out.at(n, co, oy, ox) = T(acc);
        }
  return out;
}

// Zero-outside bilinear sample at fractional (y, x).
template <class T>
double sample_zero(const Tensor<T>& x, std::int64_t n, std::int64_t c, double y, double xx) {
  const Shape s = x.shape();
  if (y <= -1 || xx <= -1 || y >= s.h || xx >= s.w) return 0.0;
  const double y0 = std::floor(y), x0 = std::floor(xx);
  double acc = 0.0;
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      const std::int64_t iy = std::int64_t(y0) + dy, ix = std::int64_t(x0) + dx;
      if (iy < 0 || ix < 0 || iy >= s.h || ix >= s.w) continue;
      const double wy = dy ? y - y0 : 1.0 - (y - y0);
      const double wx = dx ? xx - x0 : 1.0 - (xx - x0);
      acc += wy * wx * double(x.at(n, c, iy, ix));
    }
  return acc;
}

template <class T>
Tensor<T> naive_deform_conv(const Tensor<T>& x, const Tensor<T>& off, const Tensor<T>& mask,
                            const Tensor<T>& w, const Tensor<T>& b, const DeformSpec& s) {
  const Shape xs = x.shape();
  const std::int64_t ho = off.shape().h, wo = off.shape().w;
  const int kk = s.kernel * s.kernel;
  const std::int64_t per_group = xs.c / s.offset_groups;
  Tensor<T> out(Shape{xs.n, w.shape().n, ho, wo});
  for (std::int64_t n = 0; n < xs.n; ++n)
    for (std::int64_t co = 0; co < w.shape().n; ++co)
      for (std::int64_t oy = 0; oy < ho; ++oy)
        for (std::int64_t ox = 0; ox < wo; ++ox) {
          double acc = b.empty() ? 0.0 : double(b.at(0, co, 0, 0));
          for (std::int64_t ci = 0; ci < xs.c; ++ci) {
            const std::int64_t g = ci / per_group;
            for (int t = 0; t < kk; ++t) {
              const int ky = t / s.kernel, kx = t % s.kernel;
              const double dx = off.at(n, 2 * (g * kk + t), oy, ox);
              const double dy = off.at(n, 2 * (g * kk + t) + 1, oy, ox);
              const double m = mask.at(n, g * kk + t, oy, ox);
              const double py = double(oy * s.stride - s.padding + ky * s.dilation) + dy;
              const double px = double(ox * s.stride - s.padding + kx * s.dilation) + dx;
              acc += double(w.at(co, ci, ky, kx)) * m * sample_zero(x, n, ci, py, px);
            }
          }
          out.at(n, co, oy, ox) = T(acc);
        }
  return out;
}

// Half-pixel bilinear with PyTorch's clamping of negative source coordinates,
// evaluated per output pixel as a 2-D weighted sum.
template <class T>
Tensor<T> naive_bilinear(const Tensor<T>& x, double scale) {
  const Shape s = x.shape();
  const auto ho = std::int64_t(std::llround(s.h * scale)), wo = std::int64_t(std::llround(s.w * scale));
  Tensor<T> out(Shape{s.n, s.c, ho, wo});
  auto coord = [scale](std::int64_t o, std::int64_t in, std::int64_t& i0, std::int64_t& i1, double& f) {
    double src = std::max(0.0, (double(o) + 0.5) / scale - 0.5);
    i0 = std::min<std::int64_t>(std::int64_t(src), in - 1);
    i1 = std::min<std::int64_t>(i0 + 1, in - 1);
    f = src - double(i0);
  };
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t c = 0; c < s.c; ++c)
      for (std::int64_t oy = 0; oy < ho; ++oy)
        for (std::int64_t ox = 0; ox < wo; ++ox) {
          std::int64_t y0, y1, x0, x1;
          double fy, fx;
          coord(oy, s.h, y0, y1, fy);
          coord(ox, s.w, x0, x1, fx);
          out.at(n, c, oy, ox) =
              T((1 - fy) * (1 - fx) * x.at(n, c, y0, x0) + (1 - fy) * fx * x.at(n, c, y0, x1) +
                fy * (1 - fx) * x.at(n, c, y1, x0) + fy * fx * x.at(n, c, y1, x1));
        }
  return out;
}

// Keys cubic convolution kernel with a = -0.75.
inline double keys_cubic(double t) {
  const double a = -0.75;
  t = std::abs(t);
  if (t < 1) return (a + 2) * t * t * t - (a + 3) * t * t + 1;
  if (t < 2) return a * t * t * t - 5 * a * t * t + 8 * a * t - 4 * a;
  return 0.0;
}

// 4x4 taps around every output pixel, border replicated.
template <class T>
Tensor<T> naive_bicubic(const Tensor<T>& x, double scale) {
  const Shape s = x.shape();
  const auto ho = std::int64_t(std::llround(s.h * scale)), wo = std::int64_t(std::llround(s.w * scale));
  Tensor<T> out(Shape{s.n, s.c, ho, wo});
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t c = 0; c < s.c; ++c)
      for (std::int64_t oy = 0; oy < ho; ++oy)
        for (std::int64_t ox = 0; ox < wo; ++ox) {
          const double sy = (oy + 0.5) / scale - 0.5, sx = (ox + 0.5) / scale - 0.5;
          const auto fy = std::int64_t(std::floor(sy)), fx = std::int64_t(std::floor(sx));
          double acc = 0.0;
          for (std::int64_t iy = fy - 1; iy <= fy + 2; ++iy)
            for (std::int64_t ix = fx - 1; ix <= fx + 2; ++ix) {
              const std::int64_t cy = std::clamp<std::int64_t>(iy, 0, s.h - 1);
              const std::int64_t cx = std::clamp<std::int64_t>(ix, 0, s.w - 1);
              acc += keys_cubic(sy - double(iy)) * keys_cubic(sx - double(ix)) * x.at(n, c, cy, cx);
            }
          out.at(n, c, oy, ox) = T(acc);
        }
  return out;
}

// Channel attention with explicit loops over heads, rows and positions.
template <class T>
Tensor<T> naive_channel_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                                  const Tensor<T>& temperature, int heads) {
  const Shape s = q.shape();
  const std::int64_t d = s.c / heads, hw = s.h * s.w;
  Tensor<T> out(v.shape());
  for (std::int64_t n = 0; n < s.n; ++n)
    for (int h = 0; h < heads; ++h) {
      auto norm = [&](const Tensor<T>& t, std::int64_t c) {
        double ss = 0;
        for (std::int64_t p = 0; p < hw; ++p) ss += double(t.data()[(n * s.c + c) * hw + p]) * t.data()[(n * s.c + c) * hw + p];
        return std::max(std::sqrt(ss), 1e-12);
      };
      for (std::int64_t i = 0; i < d; ++i) {
        const std::int64_t ci = h * d + i;
        std::vector<double> logits(d);
        for (std::int64_t j = 0; j < d; ++j) {
          const std::int64_t cj = h * d + j;
          double dot = 0;
          for (std::int64_t p = 0; p < hw; ++p) dot += double(q.data()[(n * s.c + ci) * hw + p]) * k.data()[(n * s.c + cj) * hw + p];
          logits[j] = double(temperature.data()[h]) * dot / (norm(q, ci) * norm(k, cj));
        }
        double mx = *std::max_element(logits.begin(), logits.end()), z = 0;
        for (auto& l : logits) z += (l = std::exp(l - mx));
        for (std::int64_t p = 0; p < hw; ++p) {
          double acc = 0;
          for (std::int64_t j = 0; j < d; ++j) acc += logits[j] / z * v.data()[(n * s.c + h * d + j) * hw + p];
          out.data()[(n * s.c + ci) * hw + p] = T(acc);
        }
      }
    }
  return out;
}

// Two-line PSNR.
template <class T>
double oracle_psnr(const Tensor<T>& a, const Tensor<T>& b) {
  double se = 0;
  for (std::int64_t i = 0; i < a.numel(); ++i) se += std::pow(double(a.data()[i]) - double(b.data()[i]), 2);
  return 10.0 * std::log10(1.0 / (se / double(a.numel())));
}

// Per-window SSIM: every valid 11x11 window evaluated directly with a
// normalized 2-D Gaussian (sigma 1.5), averaged over windows and channels.
template <class T>
double oracle_ssim(const Tensor<T>& a, const Tensor<T>& b) {
  const Shape s = a.shape();
  const int r = 5;
  double g[11][11], gs = 0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) gs += g[y + r][x + r] = std::exp(-(x * x + y * y) / (2 * 1.5 * 1.5));
  for (auto& row : g)
    for (auto& v : row) v /= gs;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0;
  std::int64_t planes = 0;
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t c = 0; c < s.c; ++c, ++planes) {
      double plane_sum = 0;
      std::int64_t windows = 0;
      for (std::int64_t cy = r; cy < s.h - r; ++cy)
        for (std::int64_t cx = r; cx < s.w - r; ++cx, ++windows) {
          double ma = 0, mb = 0;
          for (int y = -r; y <= r; ++y)
            for (int x = -r; x <= r; ++x) {
              ma += g[y + r][x + r] * a.at(n, c, cy + y, cx + x);
              mb += g[y + r][x + r] * b.at(n, c, cy + y, cx + x);
            }
          double va = 0, vb = 0, cov = 0;
          for (int y = -r; y <= r; ++y)
            for (int x = -r; x <= r; ++x) {
              const double da = a.at(n, c, cy + y, cx + x) - ma, db = b.at(n, c, cy + y, cx + x) - mb;
              va += g[y + r][x + r] * da * da;
              vb += g[y + r][x + r] * db * db;
              cov += g[y + r][x + r] * da * db;
            }
          plane_sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
      total += plane_sum / double(windows);
    }
  return total / double(planes);
}

struct GradReport {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  std::size_t kinks = 0;  // coordinates scored against one-sided slopes
};

// Central differences of L = sum(f() * R) for a fixed random R, compared
// with the tape gradient at up to `coords` random entries of every leaf.
// Relative error is |a - n| / max(|a|, |n|, floor).
//
// Bilinear sampling at learned positions is only piecewise smooth. When the
// second difference shows a slope jump inside the stencil, the analytic value
// is compared with the nearer of the two one-sided slopes instead.
inline GradReport grad_check(const std::function<Tensor<double>()>& f, std::vector<Tensor<double>> leaves,
                             std::uint64_t seed, std::size_t coords = 24, double step = 1e-5,
                             double floor = 1e-6) {
  Rng rng(seed);
  Tensor<double> probe;
  auto loss = [&](bool grad) {
    const Tensor<double> out = f();
    if (probe.empty()) probe = random_tensor<double>(out.shape(), rng);
    if (!grad) {
      double acc = 0;
      for (std::int64_t i = 0; i < out.numel(); ++i) acc += out.data()[i] * probe.data()[i];
      return acc;
    }
    const Tensor<double> l = sum(mul(out, probe));
    backward(l);
    return l.item();
  };
  for (auto& leaf : leaves) leaf.zero_grad();
  loss(true);
  std::vector<std::vector<double>> analytic;
  for (auto& leaf : leaves) {
    const auto g = leaf.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(std::size_t(leaf.numel()), 0.0);
  }
  GradReport report;
  NoGradGuard no_grad;
  const double center = loss(false);
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    auto& leaf = leaves[li];
    const auto n = std::size_t(leaf.numel());
    std::vector<std::size_t> idx;
    if (n <= coords) {
      for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    } else {
      for (std::size_t i = 0; i < coords; ++i) idx.push_back(std::size_t(rng.below(n)));
    }
    for (const std::size_t i : idx) {
      const double saved = leaf.data()[i];
      leaf.data()[i] = saved + step;
      const double up = loss(false);
      leaf.data()[i] = saved - step;
      const double down = loss(false);
      leaf.data()[i] = saved;
      const double numeric = (up - down) / (2 * step);
      const double a = analytic[li][i];
      auto rel = [&](double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor}); };
      double err = rel(numeric);
      const double fwd = (up - center) / step, bwd = (center - down) / step;
      if (std::abs(fwd - bwd) > 1e-3 * std::max({std::abs(fwd), std::abs(bwd), floor})) {
        err = std::min({err, rel(fwd), rel(bwd)});
        ++report.kinks;
      }
      report.max_rel_err = std::max(report.max_rel_err, err);
      ++report.checked;
    }
  }
  return report;
}

}  // namespace burstkit::testing
