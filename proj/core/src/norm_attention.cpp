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

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "burstkit/autodiff.hpp"
#include "burstkit/ops.hpp"

namespace burstkit {

namespace {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using CMap = Eigen::Map<const Mat<T>>;
template <class T>
using MMap = Eigen::Map<Mat<T>>;

constexpr double kNormEps = 1e-12;

template <class T>
Mat<T> softmax_rows_matrix(const Mat<T>& s) {
  Mat<T> a(s.rows(), s.cols());
  softmax_rows<T>(std::span<const T>(s.data(), static_cast<std::size_t>(s.size())),
                  std::span<T>(a.data(), static_cast<std::size_t>(a.size())), s.rows(), s.cols());
  return a;
}

// Row-wise L2 normalization of a d x P block; returns the clamped norms.
template <class T>
Eigen::Matrix<T, Eigen::Dynamic, 1> normalize_rows(const CMap<T>& x, Mat<T>& out) {
  Eigen::Matrix<T, Eigen::Dynamic, 1> norms(x.rows());
  out.resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    norms(i) = std::max<T>(x.row(i).norm(), T(kNormEps));
    out.row(i) = x.row(i) / norms(i);
  }
  return norms;
}

template <class T>
void normalize_rows_backward(const Mat<T>& xn, const Eigen::Matrix<T, Eigen::Dynamic, 1>& norms,
                             const Mat<T>& dxn, T* dx, Eigen::Index cols) {
  MMap<T> g(dx, xn.rows(), cols);
  for (Eigen::Index i = 0; i < xn.rows(); ++i) {
    if (norms(i) > T(kNormEps)) {
      const T dot = xn.row(i).dot(dxn.row(i));
      g.row(i) += (dxn.row(i) - dot * xn.row(i)) / norms(i);
    } else {
      g.row(i) += dxn.row(i) / norms(i);
    }
  }
}

struct AttentionGeometry {
  std::int64_t n, c, plane, heads, d;
};

template <class T>
AttentionGeometry attention_geometry(const Tensor<T>& q, const Tensor<T>& k,
                                     const Tensor<T>& temperature, int heads) {
  const Shape s = q.shape();
  if (heads < 1 || s.c % heads != 0) {
    throw SpecError("channel_attention: heads=" + std::to_string(heads) +
                    " does not divide channels " + std::to_string(s.c));
  }
  if (k.shape() != s) {
    throw DimensionError("channel_attention: query " + s.str() + " vs key " + k.shape().str());
  }
  if (temperature.shape() != Shape{heads, 1, 1, 1}) {
    throw DimensionError("channel_attention: temperature shape " + temperature.shape().str());
  }
  return {s.n, s.c, s.plane(), heads, s.c / heads};
}

}  // namespace

template <class T>
void softmax_rows(std::span<const T> in, std::span<T> out, std::int64_t rows, std::int64_t cols) {
  if (static_cast<std::int64_t>(in.size()) < rows * cols ||
      static_cast<std::int64_t>(out.size()) < rows * cols) {
    throw DimensionError("softmax_rows: buffer smaller than rows*cols");
  }
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* src = in.data() + r * cols;
    T* dst = out.data() + r * cols;
    const T mx = *std::max_element(src, src + cols);
    T total = 0;
    for (std::int64_t c = 0; c < cols; ++c) {
      dst[c] = std::exp(src[c] - mx);
      total += dst[c];
    }
    for (std::int64_t c = 0; c < cols; ++c) dst[c] /= total;
  }
}

template <class T>
Tensor<T> layer_norm(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  const Shape s = input.shape();
  if (s.c == 0) throw SpecError("layer_norm: zero channels");
  if (gamma.shape() != Shape{1, s.c, 1, 1} || beta.shape() != Shape{1, s.c, 1, 1}) {
    throw DimensionError("layer_norm: affine parameters must be (1, C, 1, 1) for input " + s.str());
  }
  const std::int64_t plane = s.plane();
  Tensor<T> out(s);
  std::vector<T> inv_std(static_cast<std::size_t>(s.n * plane));
  const T inv_c = T(1) / T(s.c);
#pragma omp parallel for if (s.numel() > 65536)
  for (std::int64_t n = 0; n < s.n; ++n) {
    const T* x = input.ptr() + n * s.sample();
    T* y = out.ptr() + n * s.sample();
    std::vector<T> mu(static_cast<std::size_t>(plane), T(0));
    std::vector<T> var(static_cast<std::size_t>(plane), T(0));
    for (std::int64_t c = 0; c < s.c; ++c) {
      for (std::int64_t p = 0; p < plane; ++p) mu[p] += x[c * plane + p];
    }
    for (auto& m : mu) m *= inv_c;
    for (std::int64_t c = 0; c < s.c; ++c) {
      for (std::int64_t p = 0; p < plane; ++p) {
        const T d = x[c * plane + p] - mu[p];
        var[p] += d * d;
      }
    }
    T* is = inv_std.data() + n * plane;
    for (std::int64_t p = 0; p < plane; ++p) is[p] = T(1) / std::sqrt(var[p] * inv_c + eps);
    for (std::int64_t c = 0; c < s.c; ++c) {
      const T gc = gamma.ptr()[c];
      const T bc = beta.ptr()[c];
      for (std::int64_t p = 0; p < plane; ++p) {
        y[c * plane + p] = (x[c * plane + p] - mu[p]) * is[p] * gc + bc;
      }
    }
  }
  if (detail::any_needs_grad<T>({&input, &gamma, &beta})) {
    auto xi = input.impl(), gi = gamma.impl(), bi = beta.impl(), oi = out.impl();
    detail::record(out, "layer_norm", {xi, gi, bi},
                   [xi, gi, bi, oi, inv_std = std::move(inv_std), plane, inv_c] {
      if (oi->grad.empty()) return;
      const Shape s = xi->shape;
      const T* gam = gi->data.data();
      T* ggam = gi->needs_grad() ? gi->grad_buffer().data() : nullptr;
      T* gbet = bi->needs_grad() ? bi->grad_buffer().data() : nullptr;
      T* gx = xi->needs_grad() ? xi->grad_buffer().data() : nullptr;
      std::vector<T> mu(static_cast<std::size_t>(plane));
      std::vector<T> mean_dxhat(static_cast<std::size_t>(plane));
      std::vector<T> mean_dxhat_xhat(static_cast<std::size_t>(plane));
      for (std::int64_t n = 0; n < s.n; ++n) {
        const T* x = xi->data.data() + n * s.sample();
        const T* gy = oi->grad.data() + n * s.sample();
        const T* is = inv_std.data() + n * plane;
        std::fill(mu.begin(), mu.end(), T(0));
        std::fill(mean_dxhat.begin(), mean_dxhat.end(), T(0));
        std::fill(mean_dxhat_xhat.begin(), mean_dxhat_xhat.end(), T(0));
        for (std::int64_t c = 0; c < s.c; ++c) {
          for (std::int64_t p = 0; p < plane; ++p) mu[p] += x[c * plane + p];
        }
        for (auto& m : mu) m *= inv_c;
        for (std::int64_t c = 0; c < s.c; ++c) {
          T acc_g = 0;
          T acc_b = 0;
          for (std::int64_t p = 0; p < plane; ++p) {
            const T xhat = (x[c * plane + p] - mu[p]) * is[p];
            const T dy = gy[c * plane + p];
            acc_g += dy * xhat;
            acc_b += dy;
            const T dxhat = dy * gam[c];
            mean_dxhat[p] += dxhat;
            mean_dxhat_xhat[p] += dxhat * xhat;
          }
          if (ggam != nullptr) ggam[c] += acc_g;
          if (gbet != nullptr) gbet[c] += acc_b;
        }
        if (gx == nullptr) continue;
        for (std::int64_t p = 0; p < plane; ++p) {
          mean_dxhat[p] *= inv_c;
          mean_dxhat_xhat[p] *= inv_c;
        }
        T* g = gx + n * s.sample();
        for (std::int64_t c = 0; c < s.c; ++c) {
          for (std::int64_t p = 0; p < plane; ++p) {
            const T xhat = (x[c * plane + p] - mu[p]) * is[p];
            const T dxhat = gy[c * plane + p] * gam[c];
            g[c * plane + p] += is[p] * (dxhat - mean_dxhat[p] - xhat * mean_dxhat_xhat[p]);
          }
        }
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> channel_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                            const Tensor<T>& temperature, int heads) {
  const AttentionGeometry g = attention_geometry(q, k, temperature, heads);
  if (v.shape() != q.shape()) {
    throw DimensionError("channel_attention: value " + v.shape().str() + " vs query " +
                         q.shape().str());
  }
  Tensor<T> out(q.shape());
  for (std::int64_t n = 0; n < g.n; ++n) {
    for (std::int64_t hd = 0; hd < g.heads; ++hd) {
      const std::int64_t off = (n * g.c + hd * g.d) * g.plane;
      Mat<T> qn, kn;
      normalize_rows(CMap<T>(q.ptr() + off, g.d, g.plane), qn);
      normalize_rows(CMap<T>(k.ptr() + off, g.d, g.plane), kn);
      const Mat<T> s = (qn * kn.transpose()) * temperature.ptr()[hd];
      const Mat<T> a = softmax_rows_matrix(s);
      MMap<T>(out.ptr() + off, g.d, g.plane).noalias() = a * CMap<T>(v.ptr() + off, g.d, g.plane);
    }
  }
  if (detail::any_needs_grad<T>({&q, &k, &v, &temperature})) {
    auto qi = q.impl(), ki = k.impl(), vi = v.impl(), ti = temperature.impl(), oi = out.impl();
    detail::record(out, "channel_attention", {qi, ki, vi, ti}, [qi, ki, vi, ti, oi, g] {
      if (oi->grad.empty()) return;
      for (std::int64_t n = 0; n < g.n; ++n) {
        for (std::int64_t hd = 0; hd < g.heads; ++hd) {
          const std::int64_t off = (n * g.c + hd * g.d) * g.plane;
          const T tau = ti->data[hd];
          Mat<T> qn, kn;
          const auto qnorm = normalize_rows(CMap<T>(qi->data.data() + off, g.d, g.plane), qn);
          const auto knorm = normalize_rows(CMap<T>(ki->data.data() + off, g.d, g.plane), kn);
          const Mat<T> raw = qn * kn.transpose();
          const Mat<T> a = softmax_rows_matrix<T>(raw * tau);
          const CMap<T> dout(oi->grad.data() + off, g.d, g.plane);
          const CMap<T> vm(vi->data.data() + off, g.d, g.plane);
          if (vi->needs_grad()) {
            MMap<T>(vi->grad_buffer().data() + off, g.d, g.plane).noalias() += a.transpose() * dout;
          }
          const Mat<T> da = dout * vm.transpose();
          Mat<T> ds = a.cwiseProduct(da);
          for (Eigen::Index i = 0; i < ds.rows(); ++i) {
            const T row = ds.row(i).sum();
            ds.row(i) -= a.row(i) * row;
          }
          if (ti->needs_grad()) ti->grad_buffer()[hd] += ds.cwiseProduct(raw).sum();
          if (qi->needs_grad()) {
            const Mat<T> dqn = (ds * kn) * tau;
            normalize_rows_backward(qn, qnorm, dqn, qi->grad_buffer().data() + off, g.plane);
          }
          if (ki->needs_grad()) {
            const Mat<T> dkn = (ds.transpose() * qn) * tau;
            normalize_rows_backward(kn, knorm, dkn, ki->grad_buffer().data() + off, g.plane);
          }
        }
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> channel_attention_map(const Tensor<T>& q, const Tensor<T>& k,
                                const Tensor<T>& temperature, int heads) {
  const AttentionGeometry g = attention_geometry(q, k, temperature, heads);
  Tensor<T> out(Shape{g.n, g.heads, g.d, g.d});
  for (std::int64_t n = 0; n < g.n; ++n) {
    for (std::int64_t hd = 0; hd < g.heads; ++hd) {
      const std::int64_t off = (n * g.c + hd * g.d) * g.plane;
      Mat<T> qn, kn;
      normalize_rows(CMap<T>(q.ptr() + off, g.d, g.plane), qn);
      normalize_rows(CMap<T>(k.ptr() + off, g.d, g.plane), kn);
      const Mat<T> a = softmax_rows_matrix<T>((qn * kn.transpose()) * temperature.ptr()[hd]);
      std::copy_n(a.data(), a.size(), out.ptr() + (n * g.heads + hd) * g.d * g.d);
    }
  }
  return out;
}

template <class T>
Tensor<T> reference_softmax_weights(const Tensor<T>& descriptors) {
  const Shape s = descriptors.shape();
  if (s.h != 1 || s.w != 1 || s.n < 1 || s.c < 1) {
    throw DimensionError("reference_softmax_weights expects (B, C, 1, 1), got " + s.str());
  }
  const T inv_sqrt_c = T(1) / std::sqrt(T(s.c));
  std::vector<T> logits(static_cast<std::size_t>(s.n));
  const T* g0 = descriptors.ptr();
  for (std::int64_t b = 0; b < s.n; ++b) {
    T dot = 0;
    for (std::int64_t c = 0; c < s.c; ++c) dot += g0[c] * descriptors.ptr()[b * s.c + c];
    logits[b] = dot * inv_sqrt_c;
  }
  Tensor<T> out(Shape{s.n, 1, 1, 1});
  softmax_rows<T>(logits, out.data(), 1, s.n);
  if (detail::any_needs_grad<T>({&descriptors})) {
    auto gi = descriptors.impl(), oi = out.impl();
    detail::record(out, "reference_softmax_weights", {gi}, [gi, oi, inv_sqrt_c] {
      if (oi->grad.empty()) return;
      const Shape s = gi->shape;
      const auto& w = oi->data;
      const auto& dw = oi->grad;
      T inner = 0;
      for (std::int64_t b = 0; b < s.n; ++b) inner += dw[b] * w[b];
      auto& gg = gi->grad_buffer();
      const T* g = gi->data.data();
      for (std::int64_t b = 0; b < s.n; ++b) {
        const T dlogit = w[b] * (dw[b] - inner) * inv_sqrt_c;
        for (std::int64_t c = 0; c < s.c; ++c) {
          gg[c] += dlogit * g[b * s.c + c];
          gg[b * s.c + c] += dlogit * g[c];
        }
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> weighted_batch_sum(const Tensor<T>& x, const Tensor<T>& weights) {
  const Shape s = x.shape();
  if (weights.shape() != Shape{s.n, 1, 1, 1}) {
    throw DimensionError("weighted_batch_sum: weights " + weights.shape().str() + " for input " +
                         s.str());
  }
  const std::int64_t sample = s.sample();
  Tensor<T> out(Shape{1, s.c, s.h, s.w});
  for (std::int64_t b = 0; b < s.n; ++b) {
    const T wb = weights.ptr()[b];
    const T* src = x.ptr() + b * sample;
    for (std::int64_t i = 0; i < sample; ++i) out.ptr()[i] += wb * src[i];
  }
  if (detail::any_needs_grad<T>({&x, &weights})) {
    auto xi = x.impl(), wi = weights.impl(), oi = out.impl();
    detail::record(out, "weighted_batch_sum", {xi, wi}, [xi, wi, oi, sample] {
      if (oi->grad.empty()) return;
      const std::int64_t batch = xi->shape.n;
      const T* go = oi->grad.data();
      for (std::int64_t b = 0; b < batch; ++b) {
        const T* src = xi->data.data() + b * sample;
        if (wi->needs_grad()) {
          T acc = 0;
          for (std::int64_t i = 0; i < sample; ++i) acc += go[i] * src[i];
          wi->grad_buffer()[b] += acc;
        }
        if (xi->needs_grad()) {
          T* gx = xi->grad_buffer().data() + b * sample;
          const T wb = wi->data[b];
          for (std::int64_t i = 0; i < sample; ++i) gx[i] += wb * go[i];
        }
      }
    });
  }
  return out;
}

#define BURSTKIT_INSTANTIATE(T)                                                                  \
  template void softmax_rows(std::span<const T>, std::span<T>, std::int64_t, std::int64_t);      \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);        \
  template Tensor<T> channel_attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                       const Tensor<T>&, int);                                   \
  template Tensor<T> channel_attention_map(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                           int);                                                 \
  template Tensor<T> reference_softmax_weights(const Tensor<T>&);                                \
  template Tensor<T> weighted_batch_sum(const Tensor<T>&, const Tensor<T>&);

BURSTKIT_INSTANTIATE(float)
BURSTKIT_INSTANTIATE(double)
#undef BURSTKIT_INSTANTIATE

}  // namespace burstkit
