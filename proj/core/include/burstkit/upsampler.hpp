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

#include <map>
#include <string>
#include <vector>

#include "burstkit/nn.hpp"

namespace burstkit {

/// Feature maps keyed by their resolution factor relative to the merged
/// features: entry i has spatial size (i*H, i*W).
template <class T>
struct Ladder {
  std::vector<int> scales;  // ascending powers of two, starting at 1
  std::vector<Tensor<T>> entries;

  /// Throws ContractError when `scale` is missing.
  const Tensor<T>& at(int scale) const;
};

/// {1, 2, ..., top}; top must be a power of two.
std::vector<int> ladder_scales(int top);

template <class T>
struct RtfuTrace {
  Ladder<T> progressive;  // stage 1
  Ladder<T> transferred;  // stage 2
  Tensor<T> summed;       // stage 3 before the image head
};

/// Three-stage upsampler:
///   1. U_r^{2i} = pixel_shuffle(conv1x1_{C->4C}(U_r^i), 2), U_r^1 = F
///   2. U_s^o = conv1x1(concat_i f_{i->o}(U_r^i)), f = identity, bilinear
///      upsampling (o > i) or a chain of 3x3 stride-2 convs (o < i)
///   3. sum_o bicubic_x2^{log2(top/o)}(U_s^o), then a bias-free 3x3 conv to RGB
template <class T>
struct Rtfu {
  std::int64_t channels = 0;
  std::vector<int> scales;
  std::vector<Conv2d<T>> expand;                  // scales.size() - 1 entries
  std::map<std::pair<int, int>, std::vector<Conv2d<T>>> down;  // (i, o), i > o
  std::vector<Conv2d<T>> fuse;                    // per output scale
  Conv2d<T> head;

  Rtfu() = default;
  /// top: largest ladder factor (2 * task scale for packed RAW input).
  Rtfu(std::int64_t channels, int top, Rng& rng);

  Ladder<T> stage1(const Tensor<T>& merged) const;
  /// f_{i->o}: identity, bilinear x(o/i), or the stride-2 conv chain.
  Tensor<T> branch(const Tensor<T>& u, int i, int o) const;
  Ladder<T> transfer(const Ladder<T>& ladder) const;
  /// Upsampled branch sum, before the image head.
  Tensor<T> reconstruct_features(const Ladder<T>& ladder, int target) const;
  Tensor<T> stage3(const Ladder<T>& ladder, int target) const;
  /// merged (1, C, H, W) -> (1, 3, top*H, top*W).
  Tensor<T> operator()(const Tensor<T>& merged, RtfuTrace<T>* trace = nullptr) const;
  void collect(ParamSet<T>& params, const std::string& prefix) const;
};

/// Ablation baseline: one 3x3 conv to 3*s*s channels and a pixel shuffle.
template <class T>
struct PixelShuffleHead {
  int factor = 1;
  Conv2d<T> conv;

  PixelShuffleHead() = default;
  PixelShuffleHead(std::int64_t channels, int factor, Rng& rng);
  Tensor<T> operator()(const Tensor<T>& merged) const { return pixel_shuffle(conv(merged), factor); }
  void collect(ParamSet<T>& params, const std::string& prefix) const { conv.collect(params, prefix + ".conv"); }
};

}  // namespace burstkit
