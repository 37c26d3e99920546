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
#include <string>

#include "burstkit/align.hpp"
#include "burstkit/fusion.hpp"
#include "burstkit/upsampler.hpp"

namespace burstkit {

enum class AlignMode { full, no_mkga, no_afe, none };
enum class FusionMode { tafm, local_only, global_only, mean };
enum class UpsamplerMode { rtfu, pixel_shuffle };

std::string to_string(AlignMode m);
std::string to_string(FusionMode m);
std::string to_string(UpsamplerMode m);
AlignMode parse_align_mode(const std::string& s);
FusionMode parse_fusion_mode(const std::string& s);
UpsamplerMode parse_upsampler_mode(const std::string& s);

/// Architecture and initialization of one network. Every ablation variant is
/// reachable through these fields alone.
struct ModelConfig {
  std::int64_t channels = 32;
  int levels = 3;
  int heads = 4;
  int offset_groups = 4;
  int ffn_expansion = 2;
  int burst_size = 4;  // nominal; the network accepts any B >= 2
  int scale = 4;       // output resolution relative to the RAW mosaic
  AlignMode align = AlignMode::full;
  FusionMode fusion = FusionMode::tafm;
  UpsamplerMode upsampler = UpsamplerMode::rtfu;
  std::uint64_t seed = 0;

  /// Feature-to-image factor: packing halves the mosaic, so 2 * scale.
  int feature_scale() const { return 2 * scale; }
  AlignConfig align_config() const;
  void validate() const;
  /// Canonical JSON text (sorted keys).
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
  /// 16 hex digits, stable across runs and platforms.
  std::string hash() const;
};

template <class T>
struct ModelTrace {
  MbfaTrace<T> align;
  Tensor<T> features;  // (B, C, h, w) handed to fusion
  FusionTrace<T> fusion;
  Tensor<T> merged;
  RtfuTrace<T> upsample;
};

/// Packed RGGB burst (B, 4, h, w) -> linear RGB (1, 3, 2*scale*h, 2*scale*w).
template <class T>
class GmtNet {
 public:
  explicit GmtNet(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }

  Tensor<T> operator()(const Tensor<T>& burst, ModelTrace<T>* trace = nullptr) const;

  const Mbfa<T>& align_stage() const { return mbfa_; }
  const Tafm<T>& fusion_stage() const { return tafm_; }
  const Rtfu<T>& upsampler_stage() const { return rtfu_; }

 private:
  ModelConfig config_;
  Mbfa<T> mbfa_;
  Tafm<T> tafm_;
  Rtfu<T> rtfu_;
  PixelShuffleHead<T> ps_head_;
  ParamSet<T> params_;
};

/// 64-bit FNV-1a digest as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace burstkit
