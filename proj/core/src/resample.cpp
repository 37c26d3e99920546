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

#include <cmath>
#include <string>

#include "burstkit/autodiff.hpp"
#include "burstkit/ops.hpp"

namespace burstkit {

namespace {

constexpr double kCubicA = -0.75;

double cubic_weight(double x) {
  x = std::abs(x);
  if (x <= 1.0) return ((kCubicA + 2.0) * x - (kCubicA + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((kCubicA * x - 5.0 * kCubicA) * x + 8.0 * kCubicA) * x - 4.0 * kCubicA;
  return 0.0;
}

/// Per-output-index source taps along one axis; `width` taps per index.
template <class T>
struct AxisTaps {
  int width = 1;
  std::vector<std::int64_t> index;
  std::vector<T> weight;
};

template <class T>
AxisTaps<T> make_taps(std::int64_t in, std::int64_t out, Ratio r, ResizeMode mode) {
  AxisTaps<T> taps;
  const double inv = double(r.den) / double(r.num);
  auto clamp = [in](std::int64_t i) { return std::min<std::int64_t>(std::max<std::int64_t>(i, 0), in - 1); };
  switch (mode) {
    case ResizeMode::nearest:
      taps.width = 1;
      for (std::int64_t o = 0; o < out; ++o) {
        taps.index.push_back(clamp(static_cast<std::int64_t>(std::floor((double(o) + 0.5) * inv))));
        taps.weight.push_back(T(1));
      }
      break;
    case ResizeMode::bilinear:
      taps.width = 2;
      for (std::int64_t o = 0; o < out; ++o) {
        double src = (double(o) + 0.5) * inv - 0.5;
        if (src < 0) src = 0;
        const std::int64_t i0 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(src)), in - 1);
        const std::int64_t i1 = std::min<std::int64_t>(i0 + 1, in - 1);
        const double l = src - double(i0);
        taps.index.push_back(i0);
        taps.weight.push_back(T(1.0 - l));
        taps.index.push_back(i1);
        taps.weight.push_back(T(l));
      }
      break;
    case ResizeMode::bicubic:
      taps.width = 4;
      for (std::int64_t o = 0; o < out; ++o) {
        const double src = (double(o) + 0.5) * inv - 0.5;
        const std::int64_t i = static_cast<std::int64_t>(std::floor(src));
        const double t = src - double(i);
        const double w[4] = {cubic_weight(t + 1.0), cubic_weight(t), cubic_weight(1.0 - t),
                             cubic_weight(2.0 - t)};
        for (int k = 0; k < 4; ++k) {
          taps.index.push_back(clamp(i - 1 + k));
          taps.weight.push_back(T(w[k]));
        }
      }
      break;
  }
  return taps;
}

std::int64_t scaled_extent(std::int64_t in, Ratio r) {
  if (r.num <= 0 || r.den <= 0) throw SpecError("resize: scale must be positive");
  if ((in * r.num) % r.den != 0) {
    throw SpecError("resize: " + std::to_string(in) + " * " + std::to_string(r.num) + "/" +
                    std::to_string(r.den) + " is not integral");
  }
  return in * r.num / r.den;
}

}  // namespace

template <class T>
Tensor<T> resize(const Tensor<T>& input, Ratio r, ResizeMode mode) {
  const Shape s = input.shape();
  const std::int64_t ho = scaled_extent(s.h, r);
  const std::int64_t wo = scaled_extent(s.w, r);
  if (ho == 0 || wo == 0) throw SpecError("resize: empty output");
  Tensor<T> out(Shape{s.n, s.c, ho, wo});
  if (r.num == r.den) {
    std::copy_n(input.ptr(), input.numel(), out.ptr());
  } else {
    const auto tx = make_taps<T>(s.w, wo, r, mode);
    const auto ty = make_taps<T>(s.h, ho, r, mode);
    const std::int64_t planes = s.n * s.c;
#pragma omp parallel for if (planes * ho * wo > 65536)
    for (std::int64_t p = 0; p < planes; ++p) {
      const T* src = input.ptr() + p * s.h * s.w;
      T* dst = out.ptr() + p * ho * wo;
      std::vector<T> tmp(static_cast<std::size_t>(s.h * wo));
      for (std::int64_t y = 0; y < s.h; ++y) {
        for (std::int64_t x = 0; x < wo; ++x) {
          T acc = 0;
          for (int k = 0; k < tx.width; ++k) {
            acc += tx.weight[x * tx.width + k] * src[y * s.w + tx.index[x * tx.width + k]];
          }
          tmp[y * wo + x] = acc;
        }
      }
      for (std::int64_t y = 0; y < ho; ++y) {
        T* drow = dst + y * wo;
        std::fill_n(drow, wo, T(0));
        for (int k = 0; k < ty.width; ++k) {
          const T wgt = ty.weight[y * ty.width + k];
          const T* trow = tmp.data() + ty.index[y * ty.width + k] * wo;
          for (std::int64_t x = 0; x < wo; ++x) drow[x] += wgt * trow[x];
        }
      }
    }
  }
  if (detail::any_needs_grad<T>({&input})) {
    auto xi = input.impl(), oi = out.impl();
    detail::record(out, "resize", {xi}, [xi, oi, r, mode, ho, wo] {
      if (oi->grad.empty()) return;
      auto& g = xi->grad_buffer();
      const Shape s = xi->shape;
      if (r.num == r.den) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
        return;
      }
      const auto tx = make_taps<T>(s.w, wo, r, mode);
      const auto ty = make_taps<T>(s.h, ho, r, mode);
      const std::int64_t planes = s.n * s.c;
#pragma omp parallel for if (planes * ho * wo > 65536)
      for (std::int64_t p = 0; p < planes; ++p) {
        const T* go = oi->grad.data() + p * ho * wo;
        T* gi = g.data() + p * s.h * s.w;
        std::vector<T> tmp(static_cast<std::size_t>(s.h * wo), T(0));
        for (std::int64_t y = 0; y < ho; ++y) {
          for (int k = 0; k < ty.width; ++k) {
            const T wgt = ty.weight[y * ty.width + k];
            T* trow = tmp.data() + ty.index[y * ty.width + k] * wo;
            for (std::int64_t x = 0; x < wo; ++x) trow[x] += wgt * go[y * wo + x];
          }
        }
        for (std::int64_t y = 0; y < s.h; ++y) {
          for (std::int64_t x = 0; x < wo; ++x) {
            const T v = tmp[y * wo + x];
            for (int k = 0; k < tx.width; ++k) {
              gi[y * s.w + tx.index[x * tx.width + k]] += tx.weight[x * tx.width + k] * v;
            }
          }
        }
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> pixel_shuffle(const Tensor<T>& input, int r) {
  const Shape s = input.shape();
  if (r < 1) throw SpecError("pixel_shuffle: factor must be positive");
  const std::int64_t rr = std::int64_t(r) * r;
  if (s.c % rr != 0) {
    throw SpecError("pixel_shuffle: channels " + std::to_string(s.c) + " not divisible by " +
                    std::to_string(rr));
  }
  const Shape os{s.n, s.c / rr, s.h * r, s.w * r};
  Tensor<T> out(os);
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t c = 0; c < os.c; ++c) {
      for (int a = 0; a < r; ++a) {
        for (int b = 0; b < r; ++b) {
          const T* src = input.ptr() + ((n * s.c) + c * rr + a * r + b) * s.h * s.w;
          for (std::int64_t h = 0; h < s.h; ++h) {
            T* drow = out.ptr() + ((n * os.c + c) * os.h + h * r + a) * os.w + b;
            for (std::int64_t w = 0; w < s.w; ++w) drow[w * r] = src[h * s.w + w];
          }
        }
      }
    }
  }
  if (detail::any_needs_grad<T>({&input})) {
    auto xi = input.impl(), oi = out.impl();
    detail::record(out, "pixel_shuffle", {xi}, [xi, oi, r] {
      if (oi->grad.empty()) return;
      const Shape s = xi->shape;
      const Shape os = oi->shape;
      const std::int64_t rr = std::int64_t(r) * r;
      auto& g = xi->grad_buffer();
      for (std::int64_t n = 0; n < s.n; ++n) {
        for (std::int64_t c = 0; c < os.c; ++c) {
          for (int a = 0; a < r; ++a) {
            for (int b = 0; b < r; ++b) {
              T* dst = g.data() + ((n * s.c) + c * rr + a * r + b) * s.h * s.w;
              for (std::int64_t h = 0; h < s.h; ++h) {
                const T* srow = oi->grad.data() + ((n * os.c + c) * os.h + h * r + a) * os.w + b;
                for (std::int64_t w = 0; w < s.w; ++w) dst[h * s.w + w] += srow[w * r];
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> pixel_unshuffle(const Tensor<T>& input, int r) {
  const Shape s = input.shape();
  if (r < 1) throw SpecError("pixel_unshuffle: factor must be positive");
  if (s.h % r != 0 || s.w % r != 0) {
    throw SpecError("pixel_unshuffle: spatial size " + s.str() + " not divisible by " +
                    std::to_string(r));
  }
  const std::int64_t rr = std::int64_t(r) * r;
  const Shape os{s.n, s.c * rr, s.h / r, s.w / r};
  Tensor<T> out(os);
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t c = 0; c < s.c; ++c) {
      for (int a = 0; a < r; ++a) {
        for (int b = 0; b < r; ++b) {
          T* dst = out.ptr() + ((n * os.c) + c * rr + a * r + b) * os.h * os.w;
          for (std::int64_t h = 0; h < os.h; ++h) {
            const T* srow = input.ptr() + ((n * s.c + c) * s.h + h * r + a) * s.w + b;
            for (std::int64_t w = 0; w < os.w; ++w) dst[h * os.w + w] = srow[w * r];
          }
        }
      }
    }
  }
  if (detail::any_needs_grad<T>({&input})) {
    auto xi = input.impl(), oi = out.impl();
    detail::record(out, "pixel_unshuffle", {xi}, [xi, oi, r] {
      if (oi->grad.empty()) return;
      const Shape s = xi->shape;
      const Shape os = oi->shape;
      const std::int64_t rr = std::int64_t(r) * r;
      auto& g = xi->grad_buffer();
      for (std::int64_t n = 0; n < s.n; ++n) {
        for (std::int64_t c = 0; c < s.c; ++c) {
          for (int a = 0; a < r; ++a) {
            for (int b = 0; b < r; ++b) {
              const T* src = oi->grad.data() + ((n * os.c) + c * rr + a * r + b) * os.h * os.w;
              for (std::int64_t h = 0; h < os.h; ++h) {
                T* drow = g.data() + ((n * s.c + c) * s.h + h * r + a) * s.w + b;
                for (std::int64_t w = 0; w < os.w; ++w) drow[w * r] += src[h * os.w + w];
              }
            }
          }
        }
      }
    });
  }
  return out;
}

#define BURSTKIT_INSTANTIATE(T)                                   \
  template Tensor<T> resize(const Tensor<T>&, Ratio, ResizeMode); \
  template Tensor<T> pixel_shuffle(const Tensor<T>&, int);        \
  template Tensor<T> pixel_unshuffle(const Tensor<T>&, int);

BURSTKIT_INSTANTIATE(float)
BURSTKIT_INSTANTIATE(double)
#undef BURSTKIT_INSTANTIATE

}  // namespace burstkit
