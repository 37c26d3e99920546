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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "burstkit/synth.hpp"

namespace burstkit {

/// Noise source for generated bursts: sampled per burst, or a gain preset.
struct NoiseMode {
  int gain = 0;  // 0 = train range

  static NoiseMode parse(const std::string& s);  // train-range | gain1 | gain2 | gain4 | gain8
  std::string str() const;
};

struct SynthConfig {
  int burst_size = 4;
  int scale = 4;                 // HR ground truth / RAW mosaic; 1 = denoising
  std::int64_t packed_size = 32; // packed frames are packed_size x packed_size
  double max_translation = 4.0;  // in RAW mosaic pixels
  double max_rotation = 1.0;     // degrees
  NoiseMode noise;

  std::int64_t gt_size() const { return 2 * scale * packed_size; }
  /// Extra HR pixels on every side so warped frames never sample outside.
  std::int64_t margin() const;
  std::int64_t canvas_size() const { return gt_size() + 2 * margin(); }
  void validate() const;
  std::string to_json() const;
  static SynthConfig from_json(const std::string& text);
  std::string hash() const;
};

struct BurstSample {
  Tensor<float> frames;        // (B, 4, h, w) noisy packed RGGB
  Tensor<float> ground_truth;  // (1, 3, 2*scale*h, 2*scale*w) linear RGB
  std::vector<FrameMotion> motions;  // HR pixels; frame 0 is the identity
  NoiseParams noise;
  IspParams isp;
  std::uint64_t seed = 0;
};

/// Runs inverse ISP -> per-frame warp -> crop -> bilinear / scale -> mosaic
/// pack -> noise. `source` is an sRGB image of at least canvas_size() on each
/// side (a random crop is used); without one a procedural scene is drawn.
/// `motions` overrides the random jitter when given (size must be B).
BurstSample make_sample(const SynthConfig& config, std::uint64_t seed,
                        const Tensor<float>* source = nullptr,
                        const std::vector<FrameMotion>* motions = nullptr);

/// Sample i uses seed derive_seed(seed, i) and source i mod |sources|, so
/// the result does not depend on the thread count. Sources that are too small
/// are skipped with a warning on stderr.
std::vector<BurstSample> make_dataset(const SynthConfig& config, int count, std::uint64_t seed,
                                      const std::vector<Tensor<float>>& sources = {});

/// Writes frames.bkt, gt.bkt and meta.json into `dir`.
void write_sample(const std::filesystem::path& dir, const BurstSample& sample,
                  const SynthConfig& config);
BurstSample read_sample(const std::filesystem::path& dir);

struct Dataset {
  SynthConfig config;
  std::uint64_t seed = 0;
  std::vector<BurstSample> samples;
};

/// Layout: <dir>/dataset.json plus one sample_NNNNN directory per sample.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace burstkit
