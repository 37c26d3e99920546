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

#include "burstkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace burstkit {

namespace {

// (log10 sigma_r, log10 sigma_s) per gain preset.
struct GainPreset {
  int gain;
  double log_r;
  double log_s;
};
constexpr GainPreset kGainPresets[] = {
    {1, -2.2, -2.6}, {2, -1.8, -2.2}, {4, -1.4, -1.8}, {8, -1.1, -1.5}};

// XYZ -> camera matrices of four cameras, as used by common unprocessing code.
constexpr Mat3 kXyzToCam[] = {
    {{{1.0234, -0.2969, -0.2266}, {-0.5625, 1.6328, -0.0469}, {-0.0703, 0.2188, 0.6406}}},
    {{{0.4913, -0.0541, -0.0202}, {-0.6130, 1.3513, 0.2906}, {-0.1564, 0.2151, 0.7183}}},
    {{{0.8380, -0.2630, -0.0639}, {-0.2887, 1.0725, 0.2496}, {-0.0627, 0.1427, 0.5438}}},
    {{{0.6596, -0.2079, -0.0562}, {-0.4782, 1.3016, 0.1933}, {-0.0970, 0.1581, 0.5181}}},
};
constexpr Mat3 kRgbToXyz{{{0.4124564, 0.3575761, 0.1804375},
                          {0.2126729, 0.7151522, 0.0721750},
                          {0.0193339, 0.1191920, 0.9503041}}};

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    }
  }
  return r;
}

void require_rgb(const Tensor<float>& t, const char* what) {
  const Shape s = t.shape();
  if (s.n != 1 || s.c != 3) {
    throw DimensionError(std::string(what) + ": expected (1, 3, H, W), got " + s.str());
  }
}

float bilinear_zero(const float* plane, std::int64_t h, std::int64_t w, double y, double x) {
  const double fy = std::floor(y);
  const double fx = std::floor(x);
  const auto y0 = static_cast<std::int64_t>(fy);
  const auto x0 = static_cast<std::int64_t>(fx);
  const double ay = y - fy;
  const double ax = x - fx;
  double acc = 0.0;
  for (int dy = 0; dy < 2; ++dy) {
    const std::int64_t yy = y0 + dy;
    if (yy < 0 || yy >= h) continue;
    const double wy = dy ? ay : 1.0 - ay;
    for (int dx = 0; dx < 2; ++dx) {
      const std::int64_t xx = x0 + dx;
      if (xx < 0 || xx >= w) continue;
      const double wx = dx ? ax : 1.0 - ax;
      if (wy * wx != 0.0) acc += wy * wx * plane[yy * w + xx];
    }
  }
  return static_cast<float>(acc);
}

}  // namespace

double NoiseParams::log_sigma_r() const { return std::log10(sigma_r); }
double NoiseParams::log_sigma_s() const { return std::log10(sigma_s); }

NoiseParams NoiseParams::from_gain(int gain) {
  for (const auto& p : kGainPresets) {
    if (p.gain == gain) return {std::pow(10.0, p.log_r), std::pow(10.0, p.log_s), gain};
  }
  throw SpecError("noise: unknown gain preset " + std::to_string(gain) + " (expected 1, 2, 4 or 8)");
}

NoiseParams sample_noise_params(Rng& rng) {
  const double log_r = rng.uniform(-3.0, -1.5);
  const double log_s = rng.uniform(-4.0, -2.0);
  return {std::pow(10.0, log_r), std::pow(10.0, log_s), 0};
}

NoiseParams sample_noise_params(std::uint64_t seed) {
  Rng rng(seed);
  return sample_noise_params(rng);
}

Tensor<float> add_noise(const Tensor<float>& raw, const NoiseParams& params, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> out(raw.shape());
  const auto in = raw.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double var = std::max(0.0, params.variance(in[i]));
    o[i] = static_cast<float>(in[i] + std::sqrt(var) * rng.normal());
  }
  return out;
}

IspParams IspParams::sample(Rng& rng) {
  constexpr int pool = static_cast<int>(std::size(kXyzToCam));
  double weights[pool];
  double total = 0.0;
  for (auto& w : weights) {
    w = rng.uniform(1e-8, 1.0);
    total += w;
  }
  Mat3 xyz_to_cam{};
  for (int m = 0; m < pool; ++m) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) xyz_to_cam[i][j] += kXyzToCam[m][i][j] * weights[m] / total;
    }
  }
  IspParams p;
  p.rgb_to_cam = matmul(xyz_to_cam, kRgbToXyz);
  // Rows sum to one so that grey stays grey in camera space.
  for (auto& row : p.rgb_to_cam) {
    const double s = row[0] + row[1] + row[2];
    for (auto& v : row) v /= s;
  }
  p.red_gain = rng.uniform(1.9, 2.4);
  p.blue_gain = rng.uniform(1.9, 2.4);
  return p;
}

Mat3 invert(const Mat3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  if (std::abs(det) < 1e-12) throw NumericError("invert: singular 3x3 matrix");
  Mat3 r;
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return r;
}

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) {
  return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

double smoothstep(double v) { return 3.0 * v * v - 2.0 * v * v * v; }

double inverse_smoothstep(double v) {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  return 0.5 - std::sin(std::asin(std::clamp(1.0 - 2.0 * v, -1.0, 1.0)) / 3.0);
}

Tensor<float> inverse_isp(const Tensor<float>& srgb, const IspParams& params) {
  require_rgb(srgb, "inverse_isp");
  for (float v : srgb.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ContractError("inverse_isp: input outside [0, 1]");
  }
  const std::int64_t plane = srgb.shape().plane();
  Tensor<float> out(srgb.shape());
  const float* in = srgb.ptr();
  float* o = out.ptr();
  const double gain[3] = {1.0 / params.red_gain, 1.0, 1.0 / params.blue_gain};
  for (std::int64_t p = 0; p < plane; ++p) {
    double lin[3];
    for (int c = 0; c < 3; ++c) lin[c] = srgb_to_linear(inverse_smoothstep(in[c * plane + p]));
    for (int c = 0; c < 3; ++c) {
      const auto& row = params.rgb_to_cam[c];
      const double cam = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
      o[c * plane + p] = static_cast<float>(std::clamp(cam * gain[c], 0.0, 1.0));
    }
  }
  return out;
}

Tensor<float> forward_isp(const Tensor<float>& linear, const IspParams& params) {
  require_rgb(linear, "forward_isp");
  const std::int64_t plane = linear.shape().plane();
  const Mat3 cam_to_rgb = invert(params.rgb_to_cam);
  Tensor<float> out(linear.shape());
  const float* in = linear.ptr();
  float* o = out.ptr();
  const double gain[3] = {params.red_gain, 1.0, params.blue_gain};
  for (std::int64_t p = 0; p < plane; ++p) {
    double cam[3];
    for (int c = 0; c < 3; ++c) cam[c] = in[c * plane + p] * gain[c];
    for (int c = 0; c < 3; ++c) {
      const auto& row = cam_to_rgb[c];
      const double rgb = std::clamp(row[0] * cam[0] + row[1] * cam[1] + row[2] * cam[2], 0.0, 1.0);
      o[c * plane + p] = static_cast<float>(smoothstep(linear_to_srgb(rgb)));
    }
  }
  return out;
}

Tensor<float> warp(const Tensor<float>& image, const FrameMotion& m) {
  const Shape s = image.shape();
  Tensor<float> out(s);
  const double theta = m.degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cy = 0.5 * double(s.h - 1);
  const double cx = 0.5 * double(s.w - 1);
  for (std::int64_t n = 0; n < s.n * s.c; ++n) {
    const float* src = image.ptr() + n * s.plane();
    float* dst = out.ptr() + n * s.plane();
    for (std::int64_t y = 0; y < s.h; ++y) {
      for (std::int64_t x = 0; x < s.w; ++x) {
        const double px = double(x) - cx;
        const double py = double(y) - cy;
        const double sx = cs * px - sn * py + cx + m.dx;
        const double sy = sn * px + cs * py + cy + m.dy;
        dst[y * s.w + x] = bilinear_zero(src, s.h, s.w, sy, sx);
      }
    }
  }
  return out;
}

std::vector<FrameMotion> sample_motions(int frames, double max_t, double max_r, Rng& rng) {
  if (frames < 1) throw ContractError("jitter: burst size must be at least 1");
  std::vector<FrameMotion> motions(static_cast<std::size_t>(frames));
  for (int b = 1; b < frames; ++b) {
    auto& m = motions[static_cast<std::size_t>(b)];
    m.dx = rng.uniform(-max_t, max_t);
    m.dy = rng.uniform(-max_t, max_t);
    m.degrees = rng.uniform(-max_r, max_r);
  }
  return motions;
}

std::vector<Tensor<float>> jitter_burst(const Tensor<float>& linear, int frames, double max_t,
                                        double max_r, std::uint64_t seed,
                                        std::vector<FrameMotion>* motions) {
  Rng rng(seed);
  const std::vector<FrameMotion> drawn = sample_motions(frames, max_t, max_r, rng);
  std::vector<Tensor<float>> out;
  for (const auto& m : drawn) {
    out.push_back((m.dx == 0.0 && m.dy == 0.0 && m.degrees == 0.0) ? linear.clone() : warp(linear, m));
  }
  if (motions != nullptr) *motions = drawn;
  return out;
}

Tensor<float> mosaic_pack(const Tensor<float>& rgb) {
  require_rgb(rgb, "mosaic_pack");
  const Shape s = rgb.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw SpecError("mosaic_pack: spatial size " + s.str() + " must be even");
  }
  const std::int64_t h = s.h / 2;
  const std::int64_t w = s.w / 2;
  Tensor<float> out(Shape{1, 4, h, w});
  // (source colour, row offset, column offset) per packed channel.
  constexpr int kLattice[4][3] = {{0, 0, 0}, {1, 0, 1}, {1, 1, 0}, {2, 1, 1}};
  for (int ch = 0; ch < 4; ++ch) {
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        out.at(0, ch, y, x) = rgb.at(0, kLattice[ch][0], 2 * y + kLattice[ch][1], 2 * x + kLattice[ch][2]);
      }
    }
  }
  return out;
}

Tensor<float> mosaic_unpack(const Tensor<float>& packed) {
  const Shape s = packed.shape();
  if (s.c != 4) throw DimensionError("mosaic_unpack: expected 4 channels, got " + s.str());
  Tensor<float> out(Shape{s.n, 3, 2 * s.h, 2 * s.w});
  constexpr int kLattice[4][3] = {{0, 0, 0}, {1, 0, 1}, {1, 1, 0}, {2, 1, 1}};
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (int ch = 0; ch < 4; ++ch) {
      for (std::int64_t y = 0; y < s.h; ++y) {
        for (std::int64_t x = 0; x < s.w; ++x) {
          out.at(n, kLattice[ch][0], 2 * y + kLattice[ch][1], 2 * x + kLattice[ch][2]) =
              packed.at(n, ch, y, x);
        }
      }
    }
  }
  return out;
}

Tensor<float> procedural_scene(std::int64_t height, std::int64_t width, Rng& rng) {
  Tensor<float> img(Shape{1, 3, height, width});
  const std::int64_t plane = height * width;
  auto colour = [&rng] {
    return std::array<double, 3>{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95),
                                 rng.uniform(0.05, 0.95)};
  };
  auto put = [&](std::int64_t y, std::int64_t x, const std::array<double, 3>& c, double alpha) {
    for (int ch = 0; ch < 3; ++ch) {
      float& v = img.ptr()[ch * plane + y * width + x];
      v = static_cast<float>((1.0 - alpha) * v + alpha * c[static_cast<std::size_t>(ch)]);
    }
  };

  const auto c0 = colour();
  const auto c1 = colour();
  const double gdir = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      const double t = 0.5 + 0.5 * (std::cos(gdir) * (x / double(width) - 0.5) +
                                    std::sin(gdir) * (y / double(height) - 0.5));
      for (int ch = 0; ch < 3; ++ch) {
        img.ptr()[ch * plane + y * width + x] =
            static_cast<float>((1 - t) * c0[static_cast<std::size_t>(ch)] + t * c1[static_cast<std::size_t>(ch)]);
      }
    }
  }

  const double extent = double(std::min(height, width));
  const int shapes = 10 + static_cast<int>(rng.below(12));
  for (int i = 0; i < shapes; ++i) {
    const auto c = colour();
    const double cx = rng.uniform(0.0, double(width));
    const double cy = rng.uniform(0.0, double(height));
    const double size = rng.uniform(0.05, 0.35) * extent;
    const double angle = rng.uniform(0.0, std::numbers::pi);
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);
    const auto kind = rng.below(4);
    const double aspect = rng.uniform(0.2, 1.0);
    const double period = rng.uniform(2.5, 10.0);
    const double line_width = rng.uniform(0.6, 2.5);
    for (std::int64_t y = 0; y < height; ++y) {
      for (std::int64_t x = 0; x < width; ++x) {
        const double px = x + 0.5 - cx;
        const double py = y + 0.5 - cy;
        const double u = ca * px + sa * py;
        const double v = -sa * px + ca * py;
        switch (kind) {
          case 0:  // rotated rectangle
            if (std::abs(u) < size * 0.5 && std::abs(v) < size * 0.5 * aspect) put(y, x, c, 1.0);
            break;
          case 1:  // disc
            if (px * px + py * py < 0.25 * size * size) put(y, x, c, 1.0);
            break;
          case 2:  // thin line segment
            if (std::abs(v) < line_width * 0.5 && std::abs(u) < size) put(y, x, c, 1.0);
            break;
          default:  // grating patch
            if (std::abs(u) < size * 0.5 && std::abs(v) < size * 0.5) {
              const double g = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * u / period);
              put(y, x, c, g);
            }
            break;
        }
      }
    }
  }
  for (auto& v : img.data()) v = std::clamp(v, 0.0f, 1.0f);
  return img;
}

}  // namespace burstkit
