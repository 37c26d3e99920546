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
#include <span>
#include <vector>

#include "burstkit/tensor.hpp"

// Differentiable kernels. Every function records a backward rule on the
// thread's tape when any operand needs a gradient.
namespace burstkit {

/// Square-kernel convolution geometry (cross-correlation, zero padding).
struct ConvSpec {
  int kernel = 3;
  int stride = 1;
  int padding = 0;
  int dilation = 1;
  int groups = 1;
  bool bias = false;

  /// floor((in + 2*pad - dilation*(k-1) - 1) / stride) + 1
  std::int64_t out_extent(std::int64_t in) const {
    const std::int64_t span = std::int64_t(dilation) * (kernel - 1) + 1;
    const std::int64_t padded = in + 2 * std::int64_t(padding) - span;
    if (padded < 0) return 0;
    return padded / stride + 1;
  }
  /// Stride-1 convolution that preserves spatial size.
  static ConvSpec same(int k, int groups = 1, bool bias = true) {
    return ConvSpec{k, 1, (k - 1) / 2, 1, groups, bias};
  }
};

/// Modulated deformable convolution geometry.
struct DeformSpec {
  int kernel = 3;
  int stride = 1;
  int padding = 1;
  int dilation = 1;
  int offset_groups = 1;

  int taps() const { return kernel * kernel; }
  int offset_channels() const { return 2 * taps() * offset_groups; }
  int mask_channels() const { return taps() * offset_groups; }
};

enum class ResizeMode { nearest, bilinear, bicubic };

/// Positive rational scale factor num/den.
struct Ratio {
  std::int64_t num = 1;
  std::int64_t den = 1;
};

// Elementwise and structural ops ---------------------------------------------

template <class T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> scale(const Tensor<T>& a, T factor);
/// Exact erf-form GELU.
template <class T> Tensor<T> gelu(const Tensor<T>& x);
template <class T> Tensor<T> sigmoid(const Tensor<T>& x);

template <class T> Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts);
template <class T> Tensor<T> slice_channels(const Tensor<T>& x, std::int64_t begin, std::int64_t count);
template <class T> Tensor<T> concat_batch(const std::vector<Tensor<T>>& parts);
template <class T> Tensor<T> slice_batch(const Tensor<T>& x, std::int64_t begin, std::int64_t count);
/// (1, C, H, W) broadcast to (n, C, H, W).
template <class T> Tensor<T> repeat_batch(const Tensor<T>& x, std::int64_t n);
/// (B, C, H, W) averaged to (1, C, H, W).
template <class T> Tensor<T> mean_batch(const Tensor<T>& x);
/// Per-sample, per-channel spatial mean: (N, C, 1, 1).
template <class T> Tensor<T> global_avg_pool(const Tensor<T>& x);

/// Scalar sum / mean of all elements as a (1, 1, 1, 1) tensor.
template <class T> Tensor<T> sum(const Tensor<T>& x);
template <class T> Tensor<T> mean(const Tensor<T>& x);
/// Mean absolute error; subgradient 0 where pred == target.
template <class T> Tensor<T> l1_loss(const Tensor<T>& pred, const Tensor<T>& target);

// Convolutions ----------------------------------------------------------------

/// weight: (C_out, C_in / groups, k, k); bias: (1, C_out, 1, 1) or empty.
template <class T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 const ConvSpec& spec);

/// out(p) = sum_tap w_tap * m_tap(p) * x(p + p_tap + dp_tap(p)), bilinear
/// sampling, zero outside the image.
///
/// offsets: (N, 2*k*k*G, Ho, Wo), channel 2*(g*k*k + t) is the x displacement
/// of tap t in group g and the next channel its y displacement.
/// mask: (N, k*k*G, Ho, Wo). weight: (C_out, C_in, k, k). bias as conv2d.
template <class T>
Tensor<T> deform_conv2d(const Tensor<T>& input, const Tensor<T>& offsets, const Tensor<T>& mask,
                        const Tensor<T>& weight, const Tensor<T>& bias, const DeformSpec& spec);

// Resampling ------------------------------------------------------------------

/// Half-pixel resize (align_corners disabled). Bicubic uses a = -0.75.
template <class T> Tensor<T> resize(const Tensor<T>& input, Ratio scale, ResizeMode mode);
/// (N, C*r*r, H, W) -> (N, C, H*r, W*r).
template <class T> Tensor<T> pixel_shuffle(const Tensor<T>& input, int r);
/// Inverse of pixel_shuffle (space-to-depth).
template <class T> Tensor<T> pixel_unshuffle(const Tensor<T>& input, int r);

// Normalization and attention -------------------------------------------------

/// Normalizes across channels at every spatial location, then applies the
/// per-channel affine gamma/beta (each (1, C, 1, 1)).
template <class T>
Tensor<T> layer_norm(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta,
                     T eps = T(1e-6));

/// Row-wise softmax of a rows x cols matrix with max subtraction.
template <class T>
void softmax_rows(std::span<const T> in, std::span<T> out, std::int64_t rows, std::int64_t cols);

/// Channel ("transposed") attention. Per sample and head, with d = C / heads
/// channels of H*W positions each:
///   qn_i = q_i / |q_i|, kn_j = k_j / |k_j|           (L2 over positions)
///   A = softmax_rows(tau_head * qn kn^T)               (d x d)
///   out_i = sum_j A[i, j] v_j
/// temperature: (heads, 1, 1, 1).
template <class T>
Tensor<T> channel_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                            const Tensor<T>& temperature, int heads);

/// Attention maps of channel_attention for inspection: (N, heads, d, d).
template <class T>
Tensor<T> channel_attention_map(const Tensor<T>& q, const Tensor<T>& k,
                                const Tensor<T>& temperature, int heads);

/// Softmax weights of every frame against frame 0:
///   w_b = softmax_b(<g_0, g_b> / sqrt(C)),  g: (B, C, 1, 1) -> (B, 1, 1, 1).
template <class T> Tensor<T> reference_softmax_weights(const Tensor<T>& descriptors);

/// sum_b w_b * x_b: x (B, C, H, W), w (B, 1, 1, 1) -> (1, C, H, W).
template <class T> Tensor<T> weighted_batch_sum(const Tensor<T>& x, const Tensor<T>& weights);

}  // namespace burstkit
