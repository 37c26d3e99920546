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

#include <string>
#include <vector>

#include "burstkit/nn.hpp"

namespace burstkit {

/// Multi-scale gated convolution:
///   out = P1(G1(y)) + P3(G3(y)) + P5(G5(y)),
///   Gk(y) = GELU(DWk_gate(y)) * DWk_value(y)
/// where DW are depth-wise k x k convolutions and P are 1x1 projections.
/// All convolutions are bias-free, so a zero input maps to zero.
template <class T>
struct Msgc {
  static constexpr int kKernels[3] = {1, 3, 5};

  std::vector<Conv2d<T>> gate;
  std::vector<Conv2d<T>> value;
  std::vector<Conv2d<T>> project;

  Msgc() = default;
  Msgc(std::int64_t channels, Rng& rng);
  Tensor<T> operator()(const Tensor<T>& y) const;
  void collect(ParamSet<T>& params, const std::string& prefix) const;
};

/// 1x1 convolution followed by a 3x3 depth-wise convolution, bias-free.
template <class T>
struct Projection {
  Conv2d<T> pw;
  Conv2d<T> dw;

  Projection() = default;
  Projection(std::int64_t channels, Rng& rng);
  Tensor<T> operator()(const Tensor<T>& x) const { return dw(pw(x)); }
  void collect(ParamSet<T>& params, const std::string& prefix) const;
};

/// Transposed (channel) attention with its layer-normalized residual:
///   out = LN(y) + P(TA(Q(LN y), K(LN y), V(LN y)))
/// The attention map is heads x (C/heads)^2 regardless of image size.
template <class T>
struct TransposedAttention {
  int heads = 1;
  LayerNorm2d<T> norm;
  Projection<T> query;
  Projection<T> key;
  Projection<T> value;
  Tensor<T> temperature;  // (heads, 1, 1, 1), init 1/sqrt(C/heads)
  Conv2d<T> project;

  TransposedAttention() = default;
  TransposedAttention(std::int64_t channels, int heads, Rng& rng);
  Tensor<T> operator()(const Tensor<T>& y) const;
  /// Softmax attention maps (N, heads, d, d) for inspection.
  Tensor<T> attention_map(const Tensor<T>& y) const;
  void collect(ParamSet<T>& params, const std::string& prefix) const;
};

/// Multi-kernel gated attention: MSGC then transposed attention.
template <class T>
struct Mkga {
  Msgc<T> msgc;
  TransposedAttention<T> attention;

  Mkga() = default;
  Mkga(std::int64_t channels, int heads, Rng& rng) : msgc(channels, rng), attention(channels, heads, rng) {}
  Tensor<T> operator()(const Tensor<T>& y) const { return attention(msgc(y)); }
  void collect(ParamSet<T>& params, const std::string& prefix) const;
};

/// Restormer-style transformer block reusing TransposedAttention, followed by
/// a gated feed-forward: x + Out(GELU(a) * b), [a, b] = DW(In(LN x)).
template <class T>
struct TransformerBlock {
  TransposedAttention<T> attention;
  LayerNorm2d<T> ffn_norm;
  Conv2d<T> ffn_in;
  Conv2d<T> ffn_dw;
  Conv2d<T> ffn_out;
  std::int64_t hidden = 0;

  TransformerBlock() = default;
  TransformerBlock(std::int64_t channels, int heads, int expansion, Rng& rng);
  Tensor<T> operator()(const Tensor<T>& x) const;
  void collect(ParamSet<T>& params, const std::string& prefix) const;
};

struct AlignConfig {
  std::int64_t channels = 32;
  int levels = 3;
  int heads = 4;
  int offset_groups = 4;
  int ffn_expansion = 2;
  bool use_mkga = true;
  bool use_afe = true;
};

/// Per-level outputs of the bottom-up alignment, coarsest level first.
template <class T>
struct AlignTrace {
  std::vector<Tensor<T>> offset_inputs;  // tensors fed to each offset predictor
  std::vector<Tensor<T>> offsets;        // (B, 2*k*k*G, h, w)
  std::vector<Tensor<T>> modulation;     // (B, k*k*G, h, w), sigmoid-bounded
  std::vector<Tensor<T>> shared_offsets; // upsampled x2 and scaled x2, empty at coarsest
  std::vector<Tensor<T>> aligned;        // per-level aligned features
};

/// Attention-guided deformable alignment with bottom-up offset sharing.
///
/// Coarsest level: offsets from a 3x3 conv on [cur, ref]. Finer levels:
/// offsets from a 3x3 conv on [cur, ref, 2 * up2(coarser offsets)], and the
/// deformably aligned features are fused with up2(coarser aligned) by a 1x1
/// conv. Offset predictors are linear and zero-initialized.
template <class T>
struct Agda {
  std::int64_t channels = 0;
  int levels = 0;
  DeformSpec deform;
  std::vector<Conv2d<T>> offset_conv;  // index = pyramid level
  std::vector<Conv2d<T>> dcn;          // weights of the modulated deformable conv
  std::vector<Conv2d<T>> fuse;         // index = level, unused at the coarsest

  Agda() = default;
  Agda(const AlignConfig& cfg, Rng& rng);
  /// current[l]: (B, C, H/2^l, W/2^l); reference[l]: (1, C, ...).
  /// Returns aligned (B, C, H, W).
  Tensor<T> operator()(const std::vector<Tensor<T>>& current,
                       const std::vector<Tensor<T>>& reference,
                       AlignTrace<T>* trace = nullptr) const;
  void collect(ParamSet<T>& params, const std::string& prefix) const;
};

/// Aligned feature enrichment: back-projection of the residue to the
/// reference through a zero-initialized 3x3 conv, then a transformer block.
template <class T>
struct Afe {
  Conv2d<T> residue_conv;
  TransformerBlock<T> block;

  Afe() = default;
  Afe(const AlignConfig& cfg, Rng& rng);
  /// aligned (B, C, H, W), reference (1, C, H, W).
  Tensor<T> edge_boost(const Tensor<T>& aligned, const Tensor<T>& reference) const;
  Tensor<T> operator()(const Tensor<T>& aligned, const Tensor<T>& reference) const {
    return block(edge_boost(aligned, reference));
  }
  void collect(ParamSet<T>& params, const std::string& prefix) const;
};

template <class T>
struct MbfaTrace {
  Tensor<T> shallow;                  // (B, C, H, W) before alignment
  std::vector<Tensor<T>> pyramid;     // per level, after MKGA
  Tensor<T> aligned;                  // AGDA output
  Tensor<T> enriched;                 // AFE output (the MBFA result)
  AlignTrace<T> align;
};

/// Multi-scale burst feature alignment. Frame 0 is the reference and is
/// aligned to itself through the same path as every other frame.
template <class T>
struct Mbfa {
  AlignConfig config;
  Conv2d<T> shallow;
  std::vector<Conv2d<T>> down;  // level l -> l+1, 3x3 stride 2
  std::vector<Mkga<T>> mkga;    // per level, unshared
  Agda<T> agda;
  Afe<T> afe;

  Mbfa() = default;
  Mbfa(const AlignConfig& cfg, Rng& rng);
  /// burst: (B, 4, H, W) packed RGGB, B >= 2. Returns (B, C, H, W).
  Tensor<T> operator()(const Tensor<T>& burst, MbfaTrace<T>* trace = nullptr) const;
  std::vector<Tensor<T>> pyramid(const Tensor<T>& shallow_features) const;
  void collect(ParamSet<T>& params, const std::string& prefix) const;
};

}  // namespace burstkit
