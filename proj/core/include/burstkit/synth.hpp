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

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "burstkit/rng.hpp"
#include "burstkit/tensor.hpp"

namespace burstkit {

/// Heteroscedastic Gaussian noise: variance sigma_r^2 + sigma_s * x.
struct NoiseParams {
  double sigma_r = 0.0;
  double sigma_s = 0.0;
  int gain = 0;  // preset label (1, 2, 4, 8) or 0 when sampled

  double log_sigma_r() const;
  double log_sigma_s() const;
  double variance(double x) const { return sigma_r * sigma_r + sigma_s * x; }

  /// Preset with fixed (log10 sigma_r, log10 sigma_s). Throws SpecError for
  /// an unknown gain.
  static NoiseParams from_gain(int gain);
};

/// log10 sigma_r ~ U[-3, -1.5], log10 sigma_s ~ U[-4, -2].
NoiseParams sample_noise_params(Rng& rng);
NoiseParams sample_noise_params(std::uint64_t seed);

/// raw + N(0, sigma_r^2 + sigma_s * raw) per element; no clipping.
Tensor<float> add_noise(const Tensor<float>& raw, const NoiseParams& params, std::uint64_t seed);

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Camera pipeline parameters shared by the inverse and forward ISP.
struct IspParams {
  Mat3 rgb_to_cam{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  double red_gain = 1.0;   // white-balance gains the forward pipeline applies
  double blue_gain = 1.0;

  static IspParams identity() { return {}; }
  /// Random CCM from a fixed pool of camera matrices and R/B gains in [1.9, 2.4].
  static IspParams sample(Rng& rng);
};

Mat3 invert(const Mat3& m);

double srgb_to_linear(double v);
double linear_to_srgb(double v);
double smoothstep(double v);
double inverse_smoothstep(double v);

/// sRGB (1, 3, H, W) in [0, 1] -> linear camera RGB: inverse tone curve,
/// inverse gamma, rgb->camera matrix, inverse white balance, clip to [0, 1].
/// Throws ContractError for values outside [0, 1].
Tensor<float> inverse_isp(const Tensor<float>& srgb, const IspParams& params);
/// Matching forward pipeline: white balance, camera->rgb, clip, gamma, tone.
Tensor<float> forward_isp(const Tensor<float>& linear, const IspParams& params);

/// Rigid motion of one frame in pixels of the image it is applied to.
struct FrameMotion {
  double dx = 0.0;
  double dy = 0.0;
  double degrees = 0.0;
};

/// out(p) = bilinear(image, R(theta)(p - c) + c + t), zero outside, with c
/// the image center in pixel-index coordinates.
Tensor<float> warp(const Tensor<float>& image, const FrameMotion& motion);

/// Frame 0 is the identity; the rest draw t ~ U[-max_t, max_t]^2 and
/// theta ~ U[-max_r, max_r] degrees.
std::vector<FrameMotion> sample_motions(int frames, double max_translation, double max_rotation,
                                        Rng& rng);
std::vector<Tensor<float>> jitter_burst(const Tensor<float>& linear, int frames,
                                        double max_translation, double max_rotation,
                                        std::uint64_t seed,
                                        std::vector<FrameMotion>* motions = nullptr);

/// (1, 3, 2h, 2w) -> (1, 4, h, w) with channels R(0,0), G(0,1), G(1,0), B(1,1).
Tensor<float> mosaic_pack(const Tensor<float>& rgb);
/// Inverse lattice placement: (N, 4, h, w) -> (N, 3, 2h, 2w), zero where a
/// colour was not sampled. Both greens land in the green plane.
Tensor<float> mosaic_unpack(const Tensor<float>& packed);

/// Synthetic sRGB test scene: gradients, flat shapes, thin lines and gratings,
/// so that downsampling aliases and the burst carries sub-pixel detail.
Tensor<float> procedural_scene(std::int64_t height, std::int64_t width, Rng& rng);

}  // namespace burstkit
