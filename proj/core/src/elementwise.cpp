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
#include <numbers>

#include "burstkit/autodiff.hpp"
#include "burstkit/ops.hpp"

namespace burstkit {

namespace {

template <class T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                         b.shape().str());
  }
}

template <class T>
void accumulate(std::vector<T>& dst, const std::vector<T>& src) {
  const std::int64_t n = static_cast<std::int64_t>(dst.size());
#pragma omp parallel for if (n > 65536)
  for (std::int64_t i = 0; i < n; ++i) dst[i] += src[i];
}

}  // namespace

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  Tensor<T> out(a.shape());
  const std::int64_t n = a.numel();
  const T* pa = a.ptr();
  const T* pb = b.ptr();
  T* po = out.ptr();
#pragma omp parallel for if (n > 65536)
  for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
  if (detail::any_needs_grad<T>({&a, &b})) {
    auto ai = a.impl(), bi = b.impl(), oi = out.impl();
    detail::record(out, "add", {ai, bi}, [ai, bi, oi] {
      if (oi->grad.empty()) return;
      if (ai->needs_grad()) accumulate(ai->grad_buffer(), oi->grad);
      if (bi->needs_grad()) accumulate(bi->grad_buffer(), oi->grad);
    });
  }
  return out;
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  Tensor<T> out(a.shape());
  const std::int64_t n = a.numel();
  const T* pa = a.ptr();
  const T* pb = b.ptr();
  T* po = out.ptr();
#pragma omp parallel for if (n > 65536)
  for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
  if (detail::any_needs_grad<T>({&a, &b})) {
    auto ai = a.impl(), bi = b.impl(), oi = out.impl();
    detail::record(out, "sub", {ai, bi}, [ai, bi, oi] {
      if (oi->grad.empty()) return;
      if (ai->needs_grad()) accumulate(ai->grad_buffer(), oi->grad);
      if (bi->needs_grad()) {
        auto& g = bi->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= oi->grad[i];
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  Tensor<T> out(a.shape());
  const std::int64_t n = a.numel();
  const T* pa = a.ptr();
  const T* pb = b.ptr();
  T* po = out.ptr();
#pragma omp parallel for if (n > 65536)
  for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
  if (detail::any_needs_grad<T>({&a, &b})) {
    auto ai = a.impl(), bi = b.impl(), oi = out.impl();
    detail::record(out, "mul", {ai, bi}, [ai, bi, oi] {
      if (oi->grad.empty()) return;
      const auto& go = oi->grad;
      if (ai->needs_grad()) {
        auto& g = ai->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += go[i] * bi->data[i];
      }
      if (bi->needs_grad()) {
        auto& g = bi->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += go[i] * ai->data[i];
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  Tensor<T> out(a.shape());
  const std::int64_t n = a.numel();
  const T* pa = a.ptr();
  T* po = out.ptr();
  for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] * factor;
  if (detail::any_needs_grad<T>({&a})) {
    auto ai = a.impl(), oi = out.impl();
    detail::record(out, "scale", {ai}, [ai, oi, factor] {
      if (oi->grad.empty()) return;
      auto& g = ai->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * factor;
    });
  }
  return out;
}

template <class T>
Tensor<T> gelu(const Tensor<T>& x) {
  Tensor<T> out(x.shape());
  const std::int64_t n = x.numel();
  const T* px = x.ptr();
  T* po = out.ptr();
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
#pragma omp parallel for if (n > 16384)
  for (std::int64_t i = 0; i < n; ++i) {
    po[i] = T(0.5) * px[i] * (T(1) + std::erf(px[i] * inv_sqrt2));
  }
  if (detail::any_needs_grad<T>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, "gelu", {xi}, [xi, oi, inv_sqrt2] {
      if (oi->grad.empty()) return;
      auto& g = xi->grad_buffer();
      const T inv_sqrt_2pi = T(0.5) * std::numbers::inv_sqrtpi_v<T> * std::numbers::sqrt2_v<T>;
      const std::int64_t count = static_cast<std::int64_t>(g.size());
#pragma omp parallel for if (count > 16384)
      for (std::int64_t i = 0; i < count; ++i) {
        const T v = xi->data[i];
        const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
        const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * v * v);
        g[i] += oi->grad[i] * (cdf + v * pdf);
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  Tensor<T> out(x.shape());
  const std::int64_t n = x.numel();
  const T* px = x.ptr();
  T* po = out.ptr();
  for (std::int64_t i = 0; i < n; ++i) po[i] = T(1) / (T(1) + std::exp(-px[i]));
  if (detail::any_needs_grad<T>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, "sigmoid", {xi}, [xi, oi] {
      if (oi->grad.empty()) return;
      auto& g = xi->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const T s = oi->data[i];
        g[i] += oi->grad[i] * s * (T(1) - s);
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_channels: no inputs");
  Shape s = parts.front().shape();
  std::int64_t channels = 0;
  for (const auto& p : parts) {
    const Shape& ps = p.shape();
    if (ps.n != s.n || ps.h != s.h || ps.w != s.w) {
      throw DimensionError("concat_channels: incompatible " + ps.str() + " vs " + s.str());
    }
    channels += ps.c;
  }
  Shape os{s.n, channels, s.h, s.w};
  Tensor<T> out(os);
  const std::int64_t plane = s.plane();
  for (std::int64_t n = 0; n < s.n; ++n) {
    std::int64_t c0 = 0;
    for (const auto& p : parts) {
      const std::int64_t len = p.shape().c * plane;
      std::copy_n(p.ptr() + n * len, len, out.ptr() + (n * channels + c0) * plane);
      c0 += p.shape().c;
    }
  }
  if (detail::any_needs_grad(parts)) {
    std::vector<ImplPtr<T>> impls;
    for (const auto& p : parts) impls.push_back(p.impl());
    auto oi = out.impl();
    detail::record(out, "concat_channels", impls, [impls, oi, channels, plane] {
      if (oi->grad.empty()) return;
      const std::int64_t batch = oi->shape.n;
      std::int64_t c0 = 0;
      for (const auto& pi : impls) {
        const std::int64_t len = pi->shape.c * plane;
        if (pi->needs_grad()) {
          auto& g = pi->grad_buffer();
          for (std::int64_t n = 0; n < batch; ++n) {
            const T* src = oi->grad.data() + (n * channels + c0) * plane;
            T* dst = g.data() + n * len;
            for (std::int64_t i = 0; i < len; ++i) dst[i] += src[i];
          }
        }
        c0 += pi->shape.c;
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> slice_channels(const Tensor<T>& x, std::int64_t begin, std::int64_t count) {
  const Shape s = x.shape();
  if (begin < 0 || count < 0 || begin + count > s.c) {
    throw DimensionError("slice_channels: range [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + s.str());
  }
  Tensor<T> out(Shape{s.n, count, s.h, s.w});
  const std::int64_t plane = s.plane();
  for (std::int64_t n = 0; n < s.n; ++n) {
    std::copy_n(x.ptr() + (n * s.c + begin) * plane, count * plane, out.ptr() + n * count * plane);
  }
  if (detail::any_needs_grad<T>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, "slice_channels", {xi}, [xi, oi, begin, count, plane] {
      if (oi->grad.empty()) return;
      auto& g = xi->grad_buffer();
      const Shape xs = xi->shape;
      for (std::int64_t n = 0; n < xs.n; ++n) {
        const T* src = oi->grad.data() + n * count * plane;
        T* dst = g.data() + (n * xs.c + begin) * plane;
        for (std::int64_t i = 0; i < count * plane; ++i) dst[i] += src[i];
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> concat_batch(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_batch: no inputs");
  const Shape s = parts.front().shape();
  std::int64_t batch = 0;
  for (const auto& p : parts) {
    const Shape& ps = p.shape();
    if (ps.c != s.c || ps.h != s.h || ps.w != s.w) {
      throw DimensionError("concat_batch: incompatible " + ps.str() + " vs " + s.str());
    }
    batch += ps.n;
  }
  Tensor<T> out(Shape{batch, s.c, s.h, s.w});
  std::int64_t offset = 0;
  for (const auto& p : parts) {
    std::copy_n(p.ptr(), p.numel(), out.ptr() + offset);
    offset += p.numel();
  }
  if (detail::any_needs_grad(parts)) {
    std::vector<ImplPtr<T>> impls;
    for (const auto& p : parts) impls.push_back(p.impl());
    auto oi = out.impl();
    detail::record(out, "concat_batch", impls, [impls, oi] {
      if (oi->grad.empty()) return;
      std::size_t off = 0;
      for (const auto& pi : impls) {
        if (pi->needs_grad()) {
          auto& g = pi->grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[off + i];
        }
        off += pi->data.size();
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> slice_batch(const Tensor<T>& x, std::int64_t begin, std::int64_t count) {
  const Shape s = x.shape();
  if (begin < 0 || count < 0 || begin + count > s.n) {
    throw DimensionError("slice_batch: range outside " + s.str());
  }
  const std::int64_t sample = s.sample();
  Tensor<T> out(Shape{count, s.c, s.h, s.w});
  std::copy_n(x.ptr() + begin * sample, count * sample, out.ptr());
  if (detail::any_needs_grad<T>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, "slice_batch", {xi}, [xi, oi, begin, sample] {
      if (oi->grad.empty()) return;
      auto& g = xi->grad_buffer();
      T* dst = g.data() + begin * sample;
      for (std::size_t i = 0; i < oi->grad.size(); ++i) dst[i] += oi->grad[i];
    });
  }
  return out;
}

template <class T>
Tensor<T> repeat_batch(const Tensor<T>& x, std::int64_t n) {
  const Shape s = x.shape();
  if (s.n != 1) throw DimensionError("repeat_batch expects batch 1, got " + s.str());
  if (n < 1) throw ContractError("repeat_batch: count must be positive");
  const std::int64_t sample = s.sample();
  Tensor<T> out(Shape{n, s.c, s.h, s.w});
  for (std::int64_t b = 0; b < n; ++b) std::copy_n(x.ptr(), sample, out.ptr() + b * sample);
  if (detail::any_needs_grad<T>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, "repeat_batch", {xi}, [xi, oi, n, sample] {
      if (oi->grad.empty()) return;
      auto& g = xi->grad_buffer();
      for (std::int64_t b = 0; b < n; ++b) {
        const T* src = oi->grad.data() + b * sample;
        for (std::int64_t i = 0; i < sample; ++i) g[i] += src[i];
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> mean_batch(const Tensor<T>& x) {
  const Shape s = x.shape();
  if (s.n < 1) throw DimensionError("mean_batch on empty batch");
  const std::int64_t sample = s.sample();
  Tensor<T> out(Shape{1, s.c, s.h, s.w});
  const T inv = T(1) / T(s.n);
  for (std::int64_t i = 0; i < sample; ++i) {
    T acc = 0;
    for (std::int64_t b = 0; b < s.n; ++b) acc += x.ptr()[b * sample + i];
    out.ptr()[i] = acc * inv;
  }
  if (detail::any_needs_grad<T>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, "mean_batch", {xi}, [xi, oi, sample, inv] {
      if (oi->grad.empty()) return;
      auto& g = xi->grad_buffer();
      const std::int64_t batch = xi->shape.n;
      for (std::int64_t b = 0; b < batch; ++b) {
        for (std::int64_t i = 0; i < sample; ++i) g[b * sample + i] += oi->grad[i] * inv;
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  const Shape s = x.shape();
  const std::int64_t plane = s.plane();
  if (plane == 0) throw DimensionError("global_avg_pool on empty plane");
  Tensor<T> out(Shape{s.n, s.c, 1, 1});
  const T inv = T(1) / T(plane);
  for (std::int64_t nc = 0; nc < s.n * s.c; ++nc) {
    T acc = 0;
    const T* p = x.ptr() + nc * plane;
    for (std::int64_t i = 0; i < plane; ++i) acc += p[i];
    out.ptr()[nc] = acc * inv;
  }
  if (detail::any_needs_grad<T>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, "global_avg_pool", {xi}, [xi, oi, plane, inv] {
      if (oi->grad.empty()) return;
      auto& g = xi->grad_buffer();
      const std::int64_t planes = static_cast<std::int64_t>(oi->grad.size());
      for (std::int64_t nc = 0; nc < planes; ++nc) {
        const T v = oi->grad[nc] * inv;
        T* dst = g.data() + nc * plane;
        for (std::int64_t i = 0; i < plane; ++i) dst[i] += v;
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc = 0;
  for (T v : x.data()) acc += v;
  Tensor<T> out = Tensor<T>::scalar(acc);
  if (detail::any_needs_grad<T>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, "sum", {xi}, [xi, oi] {
      if (oi->grad.empty()) return;
      auto& g = xi->grad_buffer();
      const T go = oi->grad[0];
      for (auto& v : g) v += go;
    });
  }
  return out;
}

template <class T>
Tensor<T> mean(const Tensor<T>& x) {
  if (x.numel() == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(x), T(1) / T(x.numel()));
}

template <class T>
Tensor<T> l1_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_shape(pred, target, "l1_loss");
  const std::int64_t n = pred.numel();
  if (n == 0) throw DimensionError("l1_loss of empty tensors");
  T acc = 0;
  for (std::int64_t i = 0; i < n; ++i) acc += std::abs(pred.ptr()[i] - target.ptr()[i]);
  Tensor<T> out = Tensor<T>::scalar(acc / T(n));
  if (detail::any_needs_grad<T>({&pred, &target})) {
    auto pi = pred.impl(), ti = target.impl(), oi = out.impl();
    detail::record(out, "l1_loss", {pi, ti}, [pi, ti, oi, n] {
      if (oi->grad.empty()) return;
      const T go = oi->grad[0] / T(n);
      auto sign = [](T v) { return T((v > 0) - (v < 0)); };
      if (pi->needs_grad()) {
        auto& g = pi->grad_buffer();
        for (std::int64_t i = 0; i < n; ++i) g[i] += go * sign(pi->data[i] - ti->data[i]);
      }
      if (ti->needs_grad()) {
        auto& g = ti->grad_buffer();
        for (std::int64_t i = 0; i < n; ++i) g[i] -= go * sign(pi->data[i] - ti->data[i]);
      }
    });
  }
  return out;
}

#define BURSTKIT_INSTANTIATE(T)                                                          \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> scale(const Tensor<T>&, T);                                         \
  template Tensor<T> gelu(const Tensor<T>&);                                             \
  template Tensor<T> sigmoid(const Tensor<T>&);                                          \
  template Tensor<T> concat_channels(const std::vector<Tensor<T>>&);                     \
  template Tensor<T> slice_channels(const Tensor<T>&, std::int64_t, std::int64_t);       \
  template Tensor<T> concat_batch(const std::vector<Tensor<T>>&);                        \
  template Tensor<T> slice_batch(const Tensor<T>&, std::int64_t, std::int64_t);          \
  template Tensor<T> repeat_batch(const Tensor<T>&, std::int64_t);                       \
  template Tensor<T> mean_batch(const Tensor<T>&);                                       \
  template Tensor<T> global_avg_pool(const Tensor<T>&);                                  \
  template Tensor<T> sum(const Tensor<T>&);                                              \
  template Tensor<T> mean(const Tensor<T>&);                                             \
  template Tensor<T> l1_loss(const Tensor<T>&, const Tensor<T>&);

BURSTKIT_INSTANTIATE(float)
BURSTKIT_INSTANTIATE(double)
#undef BURSTKIT_INSTANTIATE

}  // namespace burstkit
