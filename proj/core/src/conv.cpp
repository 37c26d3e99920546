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

#include <algorithm>
#include <string>

#include "burstkit/autodiff.hpp"
#include "burstkit/ops.hpp"
#include "burstkit/parallel.hpp"
#include "gemm.hpp"

namespace burstkit {

namespace {

struct ConvGeometry {
  std::int64_t n, cin, h, w;
  std::int64_t cout, ho, wo;
  std::int64_t groups, cin_g, cout_g;
  int k, stride, pad, dil;

  std::int64_t col_rows() const { return cin_g * k * k; }
  std::int64_t out_plane() const { return ho * wo; }
  bool pointwise() const { return k == 1 && stride == 1 && pad == 0; }
  bool depthwise() const { return groups == cin && cout == cin && cin_g == 1; }
};

template <class T>
ConvGeometry validate(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                      const ConvSpec& spec) {
  const Shape xs = input.shape();
  const Shape ws = weight.shape();
  if (spec.kernel < 1 || spec.stride < 1 || spec.dilation < 1 || spec.padding < 0 ||
      spec.groups < 1) {
    throw SpecError("conv2d: invalid ConvSpec");
  }
  if (xs.c % spec.groups != 0 || ws.n % spec.groups != 0) {
    throw DimensionError("conv2d: channels not divisible by groups=" + std::to_string(spec.groups));
  }
  if (ws.c != xs.c / spec.groups || ws.h != spec.kernel || ws.w != spec.kernel) {
    throw DimensionError("conv2d: weight " + ws.str() + " incompatible with input " + xs.str() +
                         " and kernel " + std::to_string(spec.kernel));
  }
  if (spec.bias) {
    if (bias.shape() != Shape{1, ws.n, 1, 1}) {
      throw DimensionError("conv2d: bias shape " + bias.shape().str() + " expected (1, " +
                           std::to_string(ws.n) + ", 1, 1)");
    }
  }
  ConvGeometry g{};
  g.n = xs.n;
  g.cin = xs.c;
  g.h = xs.h;
  g.w = xs.w;
  g.cout = ws.n;
  g.ho = spec.out_extent(xs.h);
  g.wo = spec.out_extent(xs.w);
  if (g.ho <= 0 || g.wo <= 0) {
    throw SpecError("conv2d: non-positive output extent for input " + xs.str());
  }
  g.groups = spec.groups;
  g.cin_g = xs.c / spec.groups;
  g.cout_g = ws.n / spec.groups;
  g.k = spec.kernel;
  g.stride = spec.stride;
  g.pad = spec.padding;
  g.dil = spec.dilation;
  return g;
}

// Output rows per im2col tile, sized so one column tile stays cache resident.
std::int64_t tile_rows(const ConvGeometry& g) {
  constexpr std::int64_t kTileElements = std::int64_t(1) << 16;
  const std::int64_t per_row = std::max<std::int64_t>(1, g.col_rows() * g.wo);
  return std::clamp<std::int64_t>(kTileElements / per_row, 1, g.ho);
}

// Valid output column range [lo, hi) whose input column ox*stride + off lies in [0, w).
inline void valid_span(std::int64_t off, std::int64_t stride, std::int64_t w, std::int64_t wo,
                       std::int64_t& lo, std::int64_t& hi) {
  lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
  hi = (w - off > 0) ? std::min<std::int64_t>(wo, (w - off + stride - 1) / stride) : 0;
  if (hi < lo) hi = lo;
}

// Columns of output rows [oy0, oy1) for the first cin_g channels at x:
// (cin_g*k*k, (oy1-oy0)*wo), row-major.
template <class T>
void im2col(const ConvGeometry& g, const T* x, T* col, std::int64_t oy0, std::int64_t oy1) {
  const std::int64_t tile = (oy1 - oy0) * g.wo;
  for (std::int64_t row = 0; row < g.col_rows(); ++row) {
    const std::int64_t c = row / (g.k * g.k);
    const int ki = static_cast<int>((row / g.k) % g.k);
    const int kj = static_cast<int>(row % g.k);
    const T* src = x + c * g.h * g.w;
    T* dst = col + row * tile;
    const std::int64_t xoff = std::int64_t(kj) * g.dil - g.pad;
    std::int64_t lo, hi;
    valid_span(xoff, g.stride, g.w, g.wo, lo, hi);
    for (std::int64_t oy = oy0; oy < oy1; ++oy) {
      const std::int64_t iy = oy * g.stride - g.pad + std::int64_t(ki) * g.dil;
      T* drow = dst + (oy - oy0) * g.wo;
      if (iy < 0 || iy >= g.h) {
        std::fill_n(drow, g.wo, T(0));
        continue;
      }
      const T* srow = src + iy * g.w;
      std::fill_n(drow, lo, T(0));
      if (g.stride == 1) {
        std::copy(srow + xoff + lo, srow + xoff + hi, drow + lo);
      } else {
        for (std::int64_t ox = lo; ox < hi; ++ox) drow[ox] = srow[xoff + ox * g.stride];
      }
      std::fill(drow + hi, drow + g.wo, T(0));
    }
  }
}

// Scatter-add of a column tile back into the input-gradient image.
template <class T>
void col2im(const ConvGeometry& g, const T* col, T* dx, std::int64_t oy0, std::int64_t oy1) {
  const std::int64_t tile = (oy1 - oy0) * g.wo;
  for (std::int64_t row = 0; row < g.col_rows(); ++row) {
    const std::int64_t c = row / (g.k * g.k);
    const int ki = static_cast<int>((row / g.k) % g.k);
    const int kj = static_cast<int>(row % g.k);
    T* dst = dx + c * g.h * g.w;
    const T* src = col + row * tile;
    const std::int64_t xoff = std::int64_t(kj) * g.dil - g.pad;
    std::int64_t lo, hi;
    valid_span(xoff, g.stride, g.w, g.wo, lo, hi);
    for (std::int64_t oy = oy0; oy < oy1; ++oy) {
      const std::int64_t iy = oy * g.stride - g.pad + std::int64_t(ki) * g.dil;
      if (iy < 0 || iy >= g.h) continue;
      T* drow = dst + iy * g.w;
      const T* srow = src + (oy - oy0) * g.wo;
      for (std::int64_t ox = lo; ox < hi; ++ox) drow[xoff + ox * g.stride] += srow[ox];
    }
  }
}

template <class T>
void depthwise_forward(const ConvGeometry& g, const T* x, const T* w, T* out) {
#pragma omp parallel for
  for (std::int64_t nc = 0; nc < g.n * g.cin; ++nc) {
    const std::int64_t c = nc % g.cin;
    const T* src = x + nc * g.h * g.w;
    const T* ker = w + c * g.k * g.k;
    T* dst = out + nc * g.out_plane();
    for (std::int64_t oy = 0; oy < g.ho; ++oy) {
      for (std::int64_t ox = 0; ox < g.wo; ++ox) {
        T acc = 0;
        for (int ki = 0; ki < g.k; ++ki) {
          const std::int64_t iy = oy * g.stride - g.pad + std::int64_t(ki) * g.dil;
          if (iy < 0 || iy >= g.h) continue;
          for (int kj = 0; kj < g.k; ++kj) {
            const std::int64_t ix = ox * g.stride - g.pad + std::int64_t(kj) * g.dil;
            if (ix < 0 || ix >= g.w) continue;
            acc += ker[ki * g.k + kj] * src[iy * g.w + ix];
          }
        }
        dst[oy * g.wo + ox] = acc;
      }
    }
  }
}

template <class T>
void depthwise_backward(const ConvGeometry& g, const T* x, const T* w, const T* gout, T* gx,
                        T* gw) {
  const std::int64_t kk = std::int64_t(g.k) * g.k;
  if (gx != nullptr) {
#pragma omp parallel for
    for (std::int64_t nc = 0; nc < g.n * g.cin; ++nc) {
      const std::int64_t c = nc % g.cin;
      const T* ker = w + c * kk;
      const T* go = gout + nc * g.out_plane();
      T* dst = gx + nc * g.h * g.w;
      for (std::int64_t oy = 0; oy < g.ho; ++oy) {
        for (std::int64_t ox = 0; ox < g.wo; ++ox) {
          const T v = go[oy * g.wo + ox];
          for (int ki = 0; ki < g.k; ++ki) {
            const std::int64_t iy = oy * g.stride - g.pad + std::int64_t(ki) * g.dil;
            if (iy < 0 || iy >= g.h) continue;
            for (int kj = 0; kj < g.k; ++kj) {
              const std::int64_t ix = ox * g.stride - g.pad + std::int64_t(kj) * g.dil;
              if (ix < 0 || ix >= g.w) continue;
              dst[iy * g.w + ix] += ker[ki * g.k + kj] * v;
            }
          }
        }
      }
    }
  }
  if (gw != nullptr) {
#pragma omp parallel for
    for (std::int64_t c = 0; c < g.cin; ++c) {
      for (std::int64_t n = 0; n < g.n; ++n) {
        const T* src = x + (n * g.cin + c) * g.h * g.w;
        const T* go = gout + (n * g.cin + c) * g.out_plane();
        for (int ki = 0; ki < g.k; ++ki) {
          for (int kj = 0; kj < g.k; ++kj) {
            T acc = 0;
            for (std::int64_t oy = 0; oy < g.ho; ++oy) {
              const std::int64_t iy = oy * g.stride - g.pad + std::int64_t(ki) * g.dil;
              if (iy < 0 || iy >= g.h) continue;
              for (std::int64_t ox = 0; ox < g.wo; ++ox) {
                const std::int64_t ix = ox * g.stride - g.pad + std::int64_t(kj) * g.dil;
                if (ix < 0 || ix >= g.w) continue;
                acc += go[oy * g.wo + ox] * src[iy * g.w + ix];
              }
            }
            gw[c * kk + ki * g.k + kj] += acc;
          }
        }
      }
    }
  }
}

}  // namespace

template <class T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 const ConvSpec& spec) {
  ensure_threads_configured();
  const ConvGeometry g = validate(input, weight, bias, spec);
  Tensor<T> out(Shape{g.n, g.cout, g.ho, g.wo});
  const std::int64_t in_sample = g.cin * g.h * g.w;
  const std::int64_t out_plane = g.out_plane();
  const std::int64_t wg_size = g.cout_g * g.col_rows();

  if (g.depthwise()) {
    depthwise_forward(g, input.ptr(), weight.ptr(), out.ptr());
  } else {
    const std::int64_t rows = tile_rows(g);
    std::vector<T> col;
    if (!g.pointwise()) col.resize(static_cast<std::size_t>(g.col_rows() * rows * g.wo));
    for (std::int64_t n = 0; n < g.n; ++n) {
      for (std::int64_t grp = 0; grp < g.groups; ++grp) {
        const T* x = input.ptr() + n * in_sample + grp * g.cin_g * g.h * g.w;
        T* y = out.ptr() + (n * g.cout + grp * g.cout_g) * out_plane;
        const T* wg = weight.ptr() + grp * wg_size;
        if (g.pointwise()) {
          detail::gemm<T>(false, false, g.cout_g, out_plane, g.col_rows(), wg, x, y, false);
          continue;
        }
        for (std::int64_t oy0 = 0; oy0 < g.ho; oy0 += rows) {
          const std::int64_t oy1 = std::min(g.ho, oy0 + rows);
          const std::int64_t tile = (oy1 - oy0) * g.wo;
          im2col(g, x, col.data(), oy0, oy1);
          detail::gemm<T>(false, false, g.cout_g, tile, g.col_rows(), wg, g.col_rows(), col.data(),
                          tile, y + oy0 * g.wo, out_plane, false);
        }
      }
    }
  }
  if (spec.bias) {
    for (std::int64_t n = 0; n < g.n; ++n) {
      for (std::int64_t c = 0; c < g.cout; ++c) {
        T* y = out.ptr() + (n * g.cout + c) * out_plane;
        const T b = bias.ptr()[c];
        for (std::int64_t i = 0; i < out_plane; ++i) y[i] += b;
      }
    }
  }

  const Tensor<T>* bias_ptr = spec.bias ? &bias : nullptr;
  if (detail::any_needs_grad<T>({&input, &weight, bias_ptr})) {
    auto xi = input.impl(), wi = weight.impl(), oi = out.impl();
    ImplPtr<T> bi = spec.bias ? bias.impl() : nullptr;
    std::vector<ImplPtr<T>> parents{xi, wi};
    if (bi) parents.push_back(bi);
    detail::record(out, "conv2d", parents, [xi, wi, bi, oi, g, in_sample, out_plane, wg_size] {
      if (oi->grad.empty()) return;
      const T* gout = oi->grad.data();
      if (bi && bi->needs_grad()) {
        auto& gb = bi->grad_buffer();
        for (std::int64_t n = 0; n < g.n; ++n) {
          for (std::int64_t c = 0; c < g.cout; ++c) {
            const T* go = gout + (n * g.cout + c) * out_plane;
            T acc = 0;
            for (std::int64_t i = 0; i < out_plane; ++i) acc += go[i];
            gb[c] += acc;
          }
        }
      }
      const bool want_x = xi->needs_grad();
      const bool want_w = wi->needs_grad();
      if (!want_x && !want_w) return;
      if (g.depthwise()) {
        depthwise_backward(g, xi->data.data(), wi->data.data(), gout,
                           want_x ? xi->grad_buffer().data() : nullptr,
                           want_w ? wi->grad_buffer().data() : nullptr);
        return;
      }
      const std::int64_t rows = tile_rows(g);
      std::vector<T> col;
      std::vector<T> dcol;
      if (!g.pointwise()) {
        const auto size = static_cast<std::size_t>(g.col_rows() * rows * g.wo);
        if (want_w) col.resize(size);
        if (want_x) dcol.resize(size);
      }
      for (std::int64_t n = 0; n < g.n; ++n) {
        for (std::int64_t grp = 0; grp < g.groups; ++grp) {
          const std::int64_t x_off = n * in_sample + grp * g.cin_g * g.h * g.w;
          const T* go = gout + (n * g.cout + grp * g.cout_g) * out_plane;
          const T* wg = wi->data.data() + grp * wg_size;
          const T* x = xi->data.data() + x_off;
          T* gw = want_w ? wi->grad_buffer().data() + grp * wg_size : nullptr;
          T* gx = want_x ? xi->grad_buffer().data() + x_off : nullptr;
          if (g.pointwise()) {
            // dW_g += dY_g * X^T, dX += W_g^T * dY_g
            if (gw) detail::gemm<T>(false, true, g.cout_g, g.col_rows(), out_plane, go, x, gw, true);
            if (gx) detail::gemm<T>(true, false, g.col_rows(), out_plane, g.cout_g, wg, go, gx, true);
            continue;
          }
          for (std::int64_t oy0 = 0; oy0 < g.ho; oy0 += rows) {
            const std::int64_t oy1 = std::min(g.ho, oy0 + rows);
            const std::int64_t tile = (oy1 - oy0) * g.wo;
            const T* go_tile = go + oy0 * g.wo;
            if (gw) {
              im2col(g, x, col.data(), oy0, oy1);
              detail::gemm<T>(false, true, g.cout_g, g.col_rows(), tile, go_tile, out_plane,
                              col.data(), tile, gw, g.col_rows(), true);
            }
            if (gx) {
              detail::gemm<T>(true, false, g.col_rows(), tile, g.cout_g, wg, g.col_rows(), go_tile,
                              out_plane, dcol.data(), tile, false);
              col2im(g, dcol.data(), gx, oy0, oy1);
            }
          }
        }
      }
    });
  }
  return out;
}

template Tensor<float> conv2d(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                              const ConvSpec&);
template Tensor<double> conv2d(const Tensor<double>&, const Tensor<double>&,
                               const Tensor<double>&, const ConvSpec&);

}  // namespace burstkit
