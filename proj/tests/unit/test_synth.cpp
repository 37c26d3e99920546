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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "burstkit/dataset.hpp"
#include "burstkit/parallel.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace burstkit;
using namespace burstkit::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every file below `dir`, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("burstkit_test_" + name);
  fs::remove_all(p);
  return p;
}

double sample_variance(const Tensor<float>& noisy, double mean) {
  double acc = 0.0;
  for (float v : noisy.data()) acc += (v - mean) * (v - mean);
  return acc / double(noisy.numel());
}

}  // namespace

TEST_CASE("noise presets") {
  const double table[4][3] = {{1, -2.2, -2.6}, {2, -1.8, -2.2}, {4, -1.4, -1.8}, {8, -1.1, -1.5}};
  for (const auto& row : table) {
    const auto p = NoiseParams::from_gain(int(row[0]));
    CHECK(p.gain == int(row[0]));
    CHECK(p.log_sigma_r() == doctest::Approx(row[1]).epsilon(1e-12));
    CHECK(p.log_sigma_s() == doctest::Approx(row[2]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(NoiseParams::from_gain(3), SpecError);
}

TEST_CASE("noise variance") {
  const Tensor<float> flat(Shape{1, 1, 1000, 1000}, 0.25f);
  const auto p = NoiseParams::from_gain(4);
  const auto noisy = add_noise(flat, p, 7);
  const double expected = p.sigma_r * p.sigma_r + 0.25 * p.sigma_s;
  CHECK(std::abs(sample_variance(noisy, 0.25) / expected - 1.0) < 0.01);

  CHECK(max_abs_diff(noisy, add_noise(flat, p, 7)) == 0.0);
  CHECK(max_abs_diff(noisy, add_noise(flat, p, 8)) > 0.0);
  // Signed noise is kept.
  const auto dark = add_noise(Tensor<float>(Shape{1, 1, 100, 100}), p, 1);
  CHECK(*std::min_element(dark.data().begin(), dark.data().end()) < 0.0f);
}

TEST_CASE("noise parameter sampling") {
  Rng rng(9);
  double lo = 0, hi = -10, sum = 0, sum_s = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_noise_params(rng);
    lo = std::min(lo, p.log_sigma_r());
    hi = std::max(hi, p.log_sigma_r());
    sum += p.log_sigma_r();
    sum_s += p.log_sigma_s();
    CHECK_MESSAGE((p.log_sigma_s() >= -4 && p.log_sigma_s() <= -2), "sigma_s out of range");
  }
  CHECK(lo >= -3.0);
  CHECK(hi <= -1.5);
  CHECK(std::abs(sum / n + 2.25) < 0.02);
  CHECK(std::abs(sum_s / n + 3.0) < 0.02);
  const auto a = sample_noise_params(42), b = sample_noise_params(42);
  CHECK(a.sigma_r == b.sigma_r);
  CHECK(a.sigma_s == b.sigma_s);
  CHECK(a.gain == 0);
}

TEST_CASE("isp") {
  CHECK(srgb_to_linear(0.5) == doctest::Approx(0.2140).epsilon(1e-3 / 0.214));
  for (double v : {0.0, 0.003, 0.2, 0.5, 0.9, 1.0}) {
    CHECK(linear_to_srgb(srgb_to_linear(v)) == doctest::Approx(v).epsilon(1e-12));
    CHECK(smoothstep(inverse_smoothstep(v)) == doctest::Approx(v).epsilon(1e-9));
  }
  const auto id = IspParams::identity();
  const Tensor<float> zeros(Shape{1, 3, 4, 4}), ones(Shape{1, 3, 4, 4}, 1.0f), gray(Shape{1, 3, 4, 4}, 0.5f);
  const auto lz = inverse_isp(zeros, id), lo = inverse_isp(ones, id), lg = inverse_isp(gray, id);
  for (float v : lz.data()) CHECK(v == 0.0f);
  for (float v : lo.data()) CHECK(v == doctest::Approx(1.0f));
  // Tone curve is the identity at 0.5, so only the gamma is visible.
  for (float v : lg.data()) CHECK(std::abs(v - 0.2140) < 1e-3);

  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto isp = IspParams::sample(rng);
    CHECK(isp.red_gain >= 1.9);
    CHECK(isp.red_gain <= 2.4);
    CHECK(isp.blue_gain >= 1.9);
    CHECK(isp.blue_gain <= 2.4);
    const auto x = random_tensor<float>(Shape{1, 3, 8, 8}, rng, 0.1, 0.6);
    const auto lin = inverse_isp(x, isp);
    const bool clipped = std::any_of(lin.data().begin(), lin.data().end(), [](float v) { return v <= 0.f || v >= 1.f; });
    if (!clipped) CHECK(max_abs_diff(forward_isp(lin, isp), x) < 1e-4);
  }
  Tensor<float> bad(Shape{1, 3, 2, 2}, 0.5f);
  bad.at(0, 1, 1, 1) = 1.2f;
  CHECK_THROWS_AS(inverse_isp(bad, id), ContractError);
}

TEST_CASE("jitter") {
  Rng rng(4);
  const auto img = random_tensor<float>(Shape{1, 3, 20, 24}, rng, 0, 1);
  const auto still = jitter_burst(img, 5, 0.0, 0.0, 11);
  REQUIRE(still.size() == 5);
  for (const auto& f : still) CHECK(max_abs_diff(f, img) == 0.0);

  const auto shifted = warp(img, FrameMotion{2.0, 0.0, 0.0});
  double worst = 0;
  for (std::int64_t c = 0; c < 3; ++c)
    for (std::int64_t y = 0; y < 20; ++y)
      for (std::int64_t x = 0; x + 2 < 24; ++x) worst = std::max(worst, double(std::abs(shifted.at(0, c, y, x) - img.at(0, c, y, x + 2))));
  CHECK(worst == 0.0);

  std::vector<FrameMotion> m1, m2;
  const auto a = jitter_burst(img, 4, 4.0, 1.0, 5, &m1);
  const auto b = jitter_burst(img, 4, 4.0, 1.0, 5, &m2);
  CHECK(m1[0].dx == 0.0);
  CHECK(m1[0].dy == 0.0);
  CHECK(m1[0].degrees == 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(max_abs_diff(a[i], b[i]) == 0.0);
    CHECK(std::abs(m1[i].dx) <= 4.0);
    CHECK(std::abs(m1[i].degrees) <= 1.0);
    // Recorded motion replays the frame.
    CHECK(max_abs_diff(warp(img, m1[i]), a[i]) == 0.0);
  }
}

TEST_CASE("mosaic") {
  Tensor<float> c(Shape{1, 3, 6, 4});
  for (std::int64_t i = 0; i < 24; ++i) {
    c.at(0, 0, i / 4, i % 4) = 0.1f;
    c.at(0, 1, i / 4, i % 4) = 0.5f;
    c.at(0, 2, i / 4, i % 4) = 0.9f;
  }
  const auto p = mosaic_pack(c);
  CHECK(p.shape() == Shape{1, 4, 3, 2});
  for (std::int64_t i = 0; i < 6; ++i) {
    CHECK(p.at(0, 0, i / 2, i % 2) == 0.1f);
    CHECK(p.at(0, 1, i / 2, i % 2) == 0.5f);
    CHECK(p.at(0, 2, i / 2, i % 2) == 0.5f);
    CHECK(p.at(0, 3, i / 2, i % 2) == 0.9f);
  }

  Tensor<float> tiny(Shape{1, 3, 2, 2});
  for (std::int64_t ch = 0; ch < 3; ++ch)
    for (std::int64_t i = 0; i < 4; ++i) tiny.at(0, ch, i / 2, i % 2) = float(10 * ch + i);
  const auto t = mosaic_pack(tiny);
  CHECK(t.at(0, 0, 0, 0) == 0.0f);   // R at (0,0)
  CHECK(t.at(0, 1, 0, 0) == 11.0f);  // G at (0,1)
  CHECK(t.at(0, 2, 0, 0) == 12.0f);  // G at (1,0)
  CHECK(t.at(0, 3, 0, 0) == 23.0f);  // B at (1,1)

  Rng rng(5);
  const auto x = random_tensor<float>(Shape{1, 3, 8, 10}, rng, 0, 1);
  const auto u = mosaic_unpack(mosaic_pack(x));
  CHECK(u.shape() == x.shape());
  for (std::int64_t y = 0; y < 8; ++y)
    for (std::int64_t xx = 0; xx < 10; ++xx) {
      const int ch = (y % 2 == 0 && xx % 2 == 0) ? 0 : (y % 2 == 1 && xx % 2 == 1) ? 2 : 1;
      for (int k = 0; k < 3; ++k) CHECK(u.at(0, k, y, xx) == (k == ch ? x.at(0, k, y, xx) : 0.0f));
    }
  CHECK_THROWS_AS(mosaic_pack(Tensor<float>(Shape{1, 3, 5, 4})), SpecError);
  CHECK_THROWS_AS(mosaic_pack(Tensor<float>(Shape{1, 3, 4, 7})), SpecError);
}

TEST_CASE("samples") {
  SUBCASE("training geometry") {
    SynthConfig cfg;
    cfg.burst_size = 14;
    cfg.packed_size = 48;
    const auto s = make_sample(cfg, 1);
    CHECK(s.frames.shape() == Shape{14, 4, 48, 48});
    CHECK(s.ground_truth.shape() == Shape{1, 3, 384, 384});
    CHECK(s.motions.size() == 14);
  }
  SUBCASE("denoising geometry") {
    SynthConfig cfg;
    cfg.burst_size = 8;
    cfg.scale = 1;
    cfg.packed_size = 64;
    cfg.noise = NoiseMode::parse("gain8");
    const auto s = make_sample(cfg, 2);
    CHECK(s.frames.shape() == Shape{8, 4, 64, 64});
    CHECK(s.ground_truth.shape() == Shape{1, 3, 128, 128});
    CHECK(s.noise.gain == 8);
  }
  SUBCASE("reference frame and replay") {
    SynthConfig cfg;
    cfg.packed_size = 16;
    const auto s = make_sample(cfg, 3);
    CHECK(s.motions[0].dx == 0.0);
    CHECK(s.motions[0].dy == 0.0);
    CHECK(s.motions[0].degrees == 0.0);
    const auto again = make_sample(cfg, 3, nullptr, &s.motions);
    CHECK(max_abs_diff(again.frames, s.frames) == 0.0);
    CHECK(max_abs_diff(again.ground_truth, s.ground_truth) == 0.0);
    CHECK(s.ground_truth.all_finite());
  }
  SUBCASE("noise mode parsing") {
    CHECK(NoiseMode::parse("train-range").gain == 0);
    CHECK(NoiseMode::parse("gain2").str() == "gain2");
    CHECK_THROWS_AS(NoiseMode::parse("gain3"), SpecError);
  }
  SUBCASE("small sources are skipped") {
    SynthConfig cfg;
    cfg.packed_size = 8;
    const std::vector<Tensor<float>> sources{Tensor<float>(Shape{1, 3, 10, 10}, 0.5f)};
    CHECK(make_dataset(cfg, 2, 1, sources).empty());
  }
}

TEST_CASE("dataset determinism") {
  SynthConfig cfg;
  cfg.packed_size = 8;
  cfg.burst_size = 3;
  const auto a = scratch_dir("ds_a"), b = scratch_dir("ds_b");
  const int before = thread_count();
  write_dataset(a, Dataset{cfg, 17, make_dataset(cfg, 3, 17)});
  set_thread_count(3);
  write_dataset(b, Dataset{cfg, 17, make_dataset(cfg, 3, 17)});
  set_thread_count(before);
  CHECK(tree(a) == tree(b));

  const auto back = read_dataset(a);
  CHECK(back.seed == 17);
  CHECK(back.config.hash() == cfg.hash());
  REQUIRE(back.samples.size() == 3);
  const auto fresh = make_sample(cfg, derive_seed(17, 1));
  CHECK(max_abs_diff(back.samples[1].frames, fresh.frames) == 0.0);
  CHECK(back.samples[1].noise.sigma_r == fresh.noise.sigma_r);
  CHECK(SynthConfig::from_json(cfg.to_json()).hash() == cfg.hash());
  fs::remove_all(a);
  fs::remove_all(b);
}
