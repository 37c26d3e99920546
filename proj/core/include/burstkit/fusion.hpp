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

#include "burstkit/align.hpp"

namespace burstkit {

enum class FusionStreams { both, local_only, global_only };

template <class T>
struct FusionTrace {
  Tensor<T> p1;      // (1, C, H, W), empty when the stream is disabled
  Tensor<T> p2;
  Tensor<T> weights; // (B, 1, 1, 1) frame weights of the global stream
  Tensor<T> merged;
};

/// Burst fusion with two correlation streams merged by a 3x3 conv.
///
/// p1 (local): reference-frame queries attend over the channels of every
/// frame's keys/values; per-frame outputs are averaged and projected.
/// p2 (global): frames are reweighted by the softmax similarity of their
/// spatial-mean descriptors to the reference, then projected.
///
/// The reference takes part in both streams, so duplicating every frame
/// leaves the output unchanged.
template <class T>
struct Tafm {
  FusionStreams streams = FusionStreams::both;
  int heads = 1;
  LayerNorm2d<T> norm;
  Projection<T> query;
  Projection<T> key;
  Projection<T> value;
  Tensor<T> temperature;
  Conv2d<T> p1_project;
  Conv2d<T> p2_project;
  Conv2d<T> merge;  // 3x3, (#streams * C) -> C

  Tafm() = default;
  Tafm(std::int64_t channels, int heads, FusionStreams streams, Rng& rng);

  /// aligned: (B, C, H, W) with frame 0 the reference, B >= 2.
  Tensor<T> local_stream(const Tensor<T>& aligned) const;
  Tensor<T> global_stream(const Tensor<T>& aligned, Tensor<T>* weights = nullptr) const;
  /// Returns (1, C, H, W).
  Tensor<T> operator()(const Tensor<T>& aligned, FusionTrace<T>* trace = nullptr) const;
  void collect(ParamSet<T>& params, const std::string& prefix) const;
};

}  // namespace burstkit
