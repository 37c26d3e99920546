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
#include "burstkit/parallel.hpp"
#include "gemm.hpp"

namespace burstkit {

namespace {

struct DeformGeometry {
  std::int64_t n, c, h, w;
  std::int64_t cout, ho, wo;
  int k, stride, pad, dil, groups;

  std::int64_t taps() const { return std::int64_t(k) * k; }
  std::int64_t plane() const { return ho * wo; }
  std::int64_t col_rows() const { return c * taps(); }
  std::int64_t channels_per_group() const { return c / groups; }
};

/// Bilinear sample with zero outside; optionally returns d/dy and d/dx.
template <class T>
struct Sample {
  T value = 0;
  T dy = 0;
  T dx = 0;
};

template <class T>
Sample<T> bilinear(const T* im, std::int64_t h, std::int64_t w, T y, T x) {
  Sample<T> s;
  if (y <= T(-1) || y >= T(h) || x <= T(-1) || x >= T(w)) return s;
  const std::int64_t y0 = static_cast<std::int64_t>(std::floor(y));
  const std::int64_t x0 = static_cast<std::int64_t>(std::floor(x));
  const std::int64_t y1 = y0 + 1;
  const std::int64_t x1 = x0 + 1;
  const T ly = y - T(y0);
  const T lx = x - T(x0);
  const T hy = T(1) - ly;
  const T hx = T(1) - lx;
  const T v1 = (y0 >= 0 && x0 >= 0) ? im[y0 * w + x0] : T(0);
  const T v2 = (y0 >= 0 && x1 < w) ? im[y0 * w + x1] : T(0);
  const T v3 = (y1 < h && x0 >= 0) ? im[y1 * w + x0] : T(0);
  const T v4 = (y1 < h && x1 < w) ? im[y1 * w + x1] : T(0);
  s.value = hy * hx * v1 + hy * lx * v2 + ly * hx * v3 + ly * lx * v4;
  s.dy = -hx * v1 - lx * v2 + hx * v3 + lx * v4;
  s.dx = -hy * v1 + hy * v2 - ly * v3 + ly * v4;
  return s;
}

template <class T>
void bilinear_scatter(T* im, std::int64_t h, std::int64_t w, T y, T x, T g) {
  if (y <= T(-1) || y >= T(h) || x <= T(-1) || x >= T(w)) return;
  const std::int64_t y0 = static_cast<std::int64_t>(std::floor(y));
  const std::int64_t x0 = static_cast<std::int64_t>(std::floor(x));
  const std::int64_t y1 = y0 + 1;
  const std::int64_t x1 = x0 + 1;
  const T ly = y - T(y0);
  const T lx = x - T(x0);
  const T hy = T(1) - ly;
  const T hx = T(1) - lx;
  if (y0 >= 0 && x0 >= 0) im[y0 * w + x0] += hy * hx * g;
  if (y0 >= 0 && x1 < w) im[y0 * w + x1] += hy * lx * g;
  if (y1 < h && x0 >= 0) im[y1 * w + x0] += ly * hx * g;
  if (y1 < h && x1 < w) im[y1 * w + x1] += ly * lx * g;
}

// Sampling position of tap t at output (oy, ox) for sample-local pointers.
template <class T>
struct TapPosition {
  T y;
  T x;
  T m;
};

template <class T>
TapPosition<T> tap_position(const DeformGeometry& g, const T* off, const T* mask, std::int64_t grp,
                            std::int64_t t, std::int64_t oy, std::int64_t ox) {
  const std::int64_t p = oy * g.wo + ox;
  const std::int64_t ki = t / g.k;
  const std::int64_t kj = t % g.k;
  const std::int64_t oc = 2 * (grp * g.taps() + t);
  const T dx = off[oc * g.plane() + p];
  const T dy = off[(oc + 1) * g.plane() + p];
  const T m = mask[(grp * g.taps() + t) * g.plane() + p];
  return {T(oy * g.stride - g.pad + ki * g.dil) + dy, T(ox * g.stride - g.pad + kj * g.dil) + dx,
          m};
}

template <class T>
void deform_im2col(const DeformGeometry& g, const T* x, const T* off, const T* mask, T* col) {
  const std::int64_t cpg = g.channels_per_group();
#pragma omp parallel for if (g.col_rows() * g.plane() > 131072)
  for (std::int64_t row = 0; row < g.col_rows(); ++row) {
    const std::int64_t c = row / g.taps();
    const std::int64_t t = row % g.taps();
    const std::int64_t grp = c / cpg;
    const T* im = x + c * g.h * g.w;
    T* dst = col + row * g.plane();
    for (std::int64_t oy = 0; oy < g.ho; ++oy) {
      for (std::int64_t ox = 0; ox < g.wo; ++ox) {
        const auto pos = tap_position(g, off, mask, grp, t, oy, ox);
        dst[oy * g.wo + ox] = pos.m * bilinear(im, g.h, g.w, pos.y, pos.x).value;
      }
    }
  }
}

}  // namespace

template <class T>
Tensor<T> deform_conv2d(const Tensor<T>& input, const Tensor<T>& offsets, const Tensor<T>& mask,
                        const Tensor<T>& weight, const Tensor<T>& bias, const DeformSpec& spec) {
  ensure_threads_configured();
  const Shape xs = input.shape();
  const Shape ws = weight.shape();
  if (spec.kernel < 1 || spec.stride < 1 || spec.dilation < 1 || spec.offset_groups < 1) {
    throw SpecError("deform_conv2d: invalid DeformSpec");
  }
  if (xs.c % spec.offset_groups != 0) {
    throw SpecError("deform_conv2d: offset groups " + std::to_string(spec.offset_groups) +
                    " do not divide channels " + std::to_string(xs.c));
  }
  if (ws.c != xs.c || ws.h != spec.kernel || ws.w != spec.kernel) {
    throw DimensionError("deform_conv2d: weight " + ws.str() + " incompatible with input " +
                         xs.str());
  }
  const ConvSpec plain{spec.kernel, spec.stride, spec.padding, spec.dilation, 1, false};
  DeformGeometry g{xs.n,
                   xs.c,
                   xs.h,
                   xs.w,
                   ws.n,
                   plain.out_extent(xs.h),
                   plain.out_extent(xs.w),
                   spec.kernel,
                   spec.stride,
                   spec.padding,
                   spec.dilation,
                   spec.offset_groups};
  if (g.ho <= 0 || g.wo <= 0) throw SpecError("deform_conv2d: non-positive output extent");
  if (offsets.shape() != Shape{g.n, spec.offset_channels(), g.ho, g.wo}) {
    throw SpecError("deform_conv2d: offsets " + offsets.shape().str() + " expected " +
                    Shape{g.n, spec.offset_channels(), g.ho, g.wo}.str());
  }
  if (mask.shape() != Shape{g.n, spec.mask_channels(), g.ho, g.wo}) {
    throw SpecError("deform_conv2d: modulation " + mask.shape().str() + " expected " +
                    Shape{g.n, spec.mask_channels(), g.ho, g.wo}.str());
  }
  const bool has_bias = !bias.empty();
  if (has_bias && bias.shape() != Shape{1, g.cout, 1, 1}) {
    throw DimensionError("deform_conv2d: bias shape " + bias.shape().str());
  }

  Tensor<T> out(Shape{g.n, g.cout, g.ho, g.wo});
  const std::int64_t plane = g.plane();
  const std::int64_t in_sample = g.c * g.h * g.w;
  const std::int64_t off_sample = spec.offset_channels() * plane;
  const std::int64_t mask_sample = spec.mask_channels() * plane;
  std::vector<T> col(static_cast<std::size_t>(g.col_rows() * plane));
  for (std::int64_t n = 0; n < g.n; ++n) {
    deform_im2col(g, input.ptr() + n * in_sample, offsets.ptr() + n * off_sample,
                  mask.ptr() + n * mask_sample, col.data());
    T* y = out.ptr() + n * g.cout * plane;
    detail::gemm<T>(false, false, g.cout, plane, g.col_rows(), weight.ptr(), col.data(), y, false);
    if (has_bias) {
      for (std::int64_t c = 0; c < g.cout; ++c) {
        for (std::int64_t i = 0; i < plane; ++i) y[c * plane + i] += bias.ptr()[c];
      }
    }
  }

  const Tensor<T>* bias_ptr = has_bias ? &bias : nullptr;
  if (detail::any_needs_grad<T>({&input, &offsets, &mask, &weight, bias_ptr})) {
    auto xi = input.impl(), fi = offsets.impl(), mi = mask.impl(), wi = weight.impl();
    auto oi = out.impl();
    ImplPtr<T> bi = has_bias ? bias.impl() : nullptr;
    std::vector<ImplPtr<T>> parents{xi, fi, mi, wi};
    if (bi) parents.push_back(bi);
    detail::record(out, "deform_conv2d", parents,
                   [xi, fi, mi, wi, bi, oi, g, plane, in_sample, off_sample, mask_sample] {
      if (oi->grad.empty()) return;
      const T* gout = oi->grad.data();
      if (bi && bi->needs_grad()) {
        auto& gb = bi->grad_buffer();
        for (std::int64_t n = 0; n < g.n; ++n) {
          for (std::int64_t c = 0; c < g.cout; ++c) {
            T acc = 0;
            for (std::int64_t i = 0; i < plane; ++i) acc += gout[(n * g.cout + c) * plane + i];
            gb[c] += acc;
          }
        }
      }
      const bool want_w = wi->needs_grad();
      const bool want_x = xi->needs_grad();
      const bool want_off = fi->needs_grad();
      const bool want_mask = mi->needs_grad();
      std::vector<T> col(static_cast<std::size_t>(g.col_rows() * plane));
      std::vector<T> dcol(static_cast<std::size_t>(g.col_rows() * plane));
      for (std::int64_t n = 0; n < g.n; ++n) {
        const T* x = xi->data.data() + n * in_sample;
        const T* off = fi->data.data() + n * off_sample;
        const T* msk = mi->data.data() + n * mask_sample;
        const T* go = gout + n * g.cout * plane;
        if (want_w) {
          deform_im2col(g, x, off, msk, col.data());
          detail::gemm<T>(false, true, g.cout, g.col_rows(), plane, go, col.data(),
                          wi->grad_buffer().data(), true);
        }
        if (!(want_x || want_off || want_mask)) continue;
        detail::gemm<T>(true, false, g.col_rows(), plane, g.cout, wi->data.data(), go,
                        dcol.data(), false);
        T* gx = want_x ? xi->grad_buffer().data() + n * in_sample : nullptr;
        T* goff = want_off ? fi->grad_buffer().data() + n * off_sample : nullptr;
        T* gmask = want_mask ? mi->grad_buffer().data() + n * mask_sample : nullptr;
        const std::int64_t cpg = g.channels_per_group();
        // Each offset group owns its channels and its offset/mask planes.
#pragma omp parallel for
        for (std::int64_t grp = 0; grp < g.groups; ++grp) {
          for (std::int64_t c = grp * cpg; c < (grp + 1) * cpg; ++c) {
            const T* im = x + c * g.h * g.w;
            for (std::int64_t t = 0; t < g.taps(); ++t) {
              const T* dc = dcol.data() + (c * g.taps() + t) * plane;
              const std::int64_t oc = 2 * (grp * g.taps() + t);
              const std::int64_t mc = grp * g.taps() + t;
              for (std::int64_t oy = 0; oy < g.ho; ++oy) {
                for (std::int64_t ox = 0; ox < g.wo; ++ox) {
                  const std::int64_t p = oy * g.wo + ox;
                  const T d = dc[p];
                  if (d == T(0)) continue;
                  const auto pos = tap_position(g, off, msk, grp, t, oy, ox);
                  if (gx != nullptr) {
                    bilinear_scatter(gx + c * g.h * g.w, g.h, g.w, pos.y, pos.x, d * pos.m);
                  }
                  if (goff != nullptr || gmask != nullptr) {
                    const auto s = bilinear(im, g.h, g.w, pos.y, pos.x);
                    if (gmask != nullptr) gmask[mc * plane + p] += d * s.value;
                    if (goff != nullptr) {
                      goff[oc * plane + p] += d * pos.m * s.dx;
                      goff[(oc + 1) * plane + p] += d * pos.m * s.dy;
                    }
                  }
                }
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template Tensor<float> deform_conv2d(const Tensor<float>&, const Tensor<float>&,
                                     const Tensor<float>&, const Tensor<float>&,
                                     const Tensor<float>&, const DeformSpec&);
template Tensor<double> deform_conv2d(const Tensor<double>&, const Tensor<double>&,
                                      const Tensor<double>&, const Tensor<double>&,
                                      const Tensor<double>&, const DeformSpec&);

}  // namespace burstkit
