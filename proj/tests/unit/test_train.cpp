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

#include <cmath>
#include <filesystem>
#include <numbers>

#include "burstkit/autodiff.hpp"
#include "burstkit/metrics.hpp"
#include "burstkit/train.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace burstkit;
using namespace burstkit::testing;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_model() {
  ModelConfig m;
  m.channels = 8;
  m.levels = 2;
  m.heads = 2;
  m.offset_groups = 2;
  m.burst_size = 3;
  m.scale = 2;
  m.seed = 5;
  return m;
}

std::vector<BurstSample> tiny_data(int count, std::uint64_t seed) {
  SynthConfig s;
  s.burst_size = 3;
  s.scale = 2;
  s.packed_size = 12;
  return make_dataset(s, count, seed);
}

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("burstkit_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("l1 loss") {
  Rng rng(1);
  const auto a = random_tensor<double>(Shape{1, 2, 3, 4}, rng);
  CHECK(l1_loss(a, a).item() == 0.0);
  Tensor<double> shifted = a.clone();
  for (auto& v : shifted.data()) v += 0.5;
  CHECK(l1_loss(shifted, a).item() == doctest::Approx(0.5).epsilon(1e-12));

  auto p = random_leaf(Shape{1, 2, 3, 4}, rng);
  auto t = random_tensor<double>(Shape{1, 2, 3, 4}, rng);
  t.data()[5] = p.data()[5];
  backward(l1_loss(p, t));
  const auto g = p.grad();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = p.data()[i] - t.data()[i];
    const double expected = (d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) / 24.0;
    CHECK(g[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK_THROWS_AS(l1_loss(a, random_tensor<double>(Shape{1, 2, 3, 3}, rng)), DimensionError);
}

TEST_CASE("cosine schedule") {
  CHECK(cosine_lr(0, 1000) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(cosine_lr(1000, 1000) == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(cosine_lr(500, 1000) == doctest::Approx(5.05e-5).epsilon(1e-12));
  CHECK(cosine_lr(1500, 1000) == 1e-6);
  for (std::int64_t s = 0; s < 1000; ++s) CHECK(cosine_lr(s + 1, 1000) <= cosine_lr(s, 1000));
  const double oracle = 1e-6 + 0.5 * (1e-4 - 1e-6) * (1 + std::cos(std::numbers::pi * 317 / 1000));
  CHECK(cosine_lr(317, 1000) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("adam") {
  SUBCASE("first step") {
    ParamSet<double> ps;
    Tensor<double> x(Shape{1, 1, 1, 1}, 0.0);
    x.set_requires_grad(true);
    ps.add("x", x);
    Adam<double> adam(ps, AdamConfig{0.9, 0.999, 1e-8, 0.1, 0.1, 10, 0.0});
    backward(sum(x));
    adam.step();
    CHECK(x.data()[0] == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(adam.steps_taken() == 1);
  }
  SUBCASE("zero gradient") {
    ParamSet<double> ps;
    Rng rng(2);
    auto w = random_leaf(Shape{1, 3, 2, 2}, rng);
    ps.add("w", w);
    const auto before = w.clone();
    Adam<double> adam(ps, AdamConfig{});
    backward(scale(sum(w), 0.0));
    adam.step();
    CHECK(max_abs_diff(w, before) == 0.0);
  }
  SUBCASE("quadratic descent") {
    ParamSet<double> ps;
    Tensor<double> x(Shape{1, 1, 1, 1}, 1.5);
    x.set_requires_grad(true);
    ps.add("x", x);
    Adam<double> adam(ps, AdamConfig{0.9, 0.999, 1e-8, 0.05, 0.05, 10, 0.0});
    double f = 1.5 * 1.5;
    for (int i = 0; i < 2; ++i) {
      ps.zero_grad();
      backward(mul(x, x));
      adam.step();
      const double next = x.data()[0] * x.data()[0];
      CHECK(next < f);
      f = next;
    }
  }
  SUBCASE("clipping and non-finite gradients") {
    ParamSet<double> ps;
    Tensor<double> x(Shape{1, 1, 1, 2}, 0.0);
    x.set_requires_grad(true);
    ps.add("x", x);
    Adam<double> adam(ps, AdamConfig{0.9, 0.999, 1e-8, 0.1, 0.1, 10, 1.0});
    backward(scale(sum(x), 30.0));
    CHECK(global_grad_norm(ps) == doctest::Approx(30.0 * std::sqrt(2.0)));
    CHECK(adam.step() == doctest::Approx(30.0 * std::sqrt(2.0)));

    ps.zero_grad();
    const auto before = x.clone();
    backward(scale(sum(x), std::nan("")));
    CHECK_THROWS_AS(adam.step(), NumericError);
    CHECK(max_abs_diff(x, before) == 0.0);
    CHECK(adam.steps_taken() == 1);
  }
}

TEST_CASE("psnr") {
  Tensor<float> a(Shape{1, 3, 10, 10}, 0.5f), b(Shape{1, 3, 10, 10}, 0.6f);
  CHECK(psnr(a, b).db == doctest::Approx(20.0).epsilon(1e-5));
  CHECK_FALSE(psnr(a, b).saturated);
  const auto same = psnr(a, a);
  CHECK(same.saturated);
  CHECK(same.db == kPsnrCap);

  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_tensor<double>(Shape{1, 3, 16, 16}, rng, 0, 1);
    const auto y = random_tensor<double>(Shape{1, 3, 16, 16}, rng, 0, 1);
    CHECK(std::abs(psnr(x, y).db - oracle_psnr(x, y)) < 1e-9);
  }
}

TEST_CASE("ssim") {
  Rng rng(4);
  const auto x = random_tensor<double>(Shape{1, 3, 24, 20}, rng, 0, 1);
  const auto y = random_tensor<double>(Shape{1, 3, 24, 20}, rng, 0, 1);
  CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ssim(x, y) - ssim(y, x)) < 1e-9);
  CHECK(std::abs(ssim(x, y) - oracle_ssim(x, y)) < 1e-6);

  Tensor<double> neg = x.clone();
  for (auto& v : neg.data()) v = 1.0 - v;
  const double s = ssim(x, neg);
  CHECK(s < -0.5);
  CHECK(std::abs(s - oracle_ssim(x, neg)) < 1e-6);
  CHECK_THROWS_AS(ssim(Tensor<double>(Shape{1, 1, 10, 30}), Tensor<double>(Shape{1, 1, 10, 30})), ContractError);
}

TEST_CASE("scoring") {
  Rng rng(5);
  const auto gt = random_tensor<float>(Shape{1, 3, 40, 40}, rng, 0, 1);
  const auto s = score_pair(gt, gt, 8);
  CHECK(s.saturated);
  CHECK(s.ssim == doctest::Approx(1.0));

  // Prediction is clamped before scoring.
  Tensor<float> over = gt.clone();
  for (auto& v : over.data()) v += 5.0f;
  Tensor<float> ones(gt.shape(), 1.0f);
  CHECK(score_pair(over, gt, 8).psnr == doctest::Approx(score_pair(ones, gt, 8).psnr));
  CHECK(crop_border(gt, 8).shape() == Shape{1, 3, 24, 24});

  MetricReport r = summarize({s, score_pair(ones, gt, 8)});
  r.config_hash = "0123456789abcdef";
  r.seed = 9;
  r.steps = 1234;
  const auto back = MetricReport::from_json(r.to_json());
  CHECK(back.to_json() == r.to_json());
  CHECK(back.samples.size() == 2);
  CHECK(back.samples[0].saturated);
  CHECK(back.psnr == r.psnr);
  CHECK(back.ssim == r.ssim);
}

TEST_CASE("bilinear baseline") {
  // Constant colour burst: the baseline reproduces the colour exactly.
  Tensor<float> frames(Shape{2, 4, 6, 6});
  const float rggb[4] = {0.2f, 0.5f, 0.7f, 0.9f};
  for (std::int64_t c = 0; c < 4; ++c)
    for (std::int64_t i = 0; i < 36; ++i) frames.at(0, c, i / 6, i % 6) = rggb[c];
  const auto b = bilinear_baseline(frames, 4);
  CHECK(b.shape() == Shape{1, 3, 24, 24});
  for (std::int64_t i = 0; i < 24 * 24; ++i) {
    CHECK(b.at(0, 0, i / 24, i % 24) == doctest::Approx(0.2f));
    CHECK(b.at(0, 1, i / 24, i % 24) == doctest::Approx(0.6f));
    CHECK(b.at(0, 2, i / 24, i % 24) == doctest::Approx(0.9f));
  }
}

TEST_CASE("model configuration") {
  ModelConfig m = tiny_model();
  m.align = AlignMode::no_mkga;
  m.fusion = FusionMode::mean;
  m.upsampler = UpsamplerMode::pixel_shuffle;
  const auto back = ModelConfig::from_json(m.to_json());
  CHECK(back.to_json() == m.to_json());
  CHECK(back.hash() == m.hash());
  CHECK(m.hash().size() == 16);
  CHECK(tiny_model().hash() != m.hash());
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");

  for (const auto* name : {"full", "no-mkga", "no-afe", "none"}) CHECK(to_string(parse_align_mode(name)) == name);
  for (const auto* name : {"tafm", "p1", "p2", "mean"}) CHECK(to_string(parse_fusion_mode(name)) == name);
  for (const auto* name : {"rtfu", "pixel-shuffle"}) CHECK(to_string(parse_upsampler_mode(name)) == name);
  CHECK_THROWS_AS(parse_align_mode("half"), SpecError);

  ModelConfig bad = tiny_model();
  bad.heads = 3;
  CHECK_THROWS_AS(bad.validate(), SpecError);
}

TEST_CASE("model variants") {
  Rng rng(6);
  const auto burst = random_tensor<float>(Shape{3, 4, 8, 8}, rng, 0, 1);
  std::size_t full_params = 0;
  for (auto align : {AlignMode::full, AlignMode::no_mkga, AlignMode::no_afe, AlignMode::none})
    for (auto fusion : {FusionMode::tafm, FusionMode::local_only, FusionMode::global_only, FusionMode::mean})
      for (auto up : {UpsamplerMode::rtfu, UpsamplerMode::pixel_shuffle}) {
        ModelConfig m = tiny_model();
        m.align = align;
        m.fusion = fusion;
        m.upsampler = up;
        GmtNet<float> net(m);
        NoGradGuard ng;
        const auto y = net(burst);
        CHECK(y.shape() == Shape{1, 3, 32, 32});
        CHECK(y.all_finite());
        if (align == AlignMode::full && fusion == FusionMode::tafm && up == UpsamplerMode::rtfu) {
          full_params = net.params().size();
        } else {
          CHECK(net.params().size() < full_params);
        }
      }
  GmtNet<float> net(tiny_model());
  NoGradGuard ng;
  CHECK(max_abs_diff(net(burst), GmtNet<float>(tiny_model())(burst)) == 0.0);
  CHECK_THROWS_AS(net(random_tensor<float>(Shape{1, 4, 8, 8}, rng)), ContractError);
}

TEST_CASE("training loop") {
  const auto data = tiny_data(4, 21);
  TrainConfig cfg;
  cfg.model = tiny_model();
  cfg.steps = 200;
  cfg.base_lr = 1e-3;
  cfg.min_lr = 1e-5;
  cfg.seed = 3;

  SUBCASE("overfit") {
    Trainer t(cfg, data);
    t.run();
    const auto& curve = t.curve();
    REQUIRE(curve.size() == 200);
    std::vector<double> windows;
    for (std::size_t w = 0; w < 4; ++w) {
      double acc = 0;
      for (std::size_t i = 50 * w; i < 50 * (w + 1); ++i) acc += curve[i].loss;
      windows.push_back(acc / 50);
    }
    MESSAGE("windowed loss " << windows[0] << " " << windows[1] << " " << windows[2] << " " << windows[3]);
    for (std::size_t w = 1; w < 4; ++w) CHECK(windows[w] < windows[w - 1]);
    CHECK(curve.front().lr == doctest::Approx(1e-3));
  }

  SUBCASE("resume is bit-exact") {
    cfg.steps = 12;
    const auto dir = scratch_dir("resume");
    Trainer straight(cfg, data);
    straight.run();

    Trainer first(cfg, data);
    first.run(5);
    first.save_checkpoint(dir);
    Trainer second(cfg, data);
    second.load_checkpoint(dir);
    CHECK(second.steps_taken() == 5);
    second.run();
    REQUIRE(second.curve().size() == 12);
    for (std::size_t i = 0; i < 12; ++i) CHECK(second.curve()[i].loss == straight.curve()[i].loss);
    const auto& a = straight.model().params().items();
    const auto& b = second.model().params().items();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(max_abs_diff(a[i].second, b[i].second) == 0.0);

    const auto loaded = load_model(dir);
    CHECK(loaded.config().hash() == cfg.model.hash());
    CHECK(checkpoint_config(dir).steps == 12);

    TrainConfig other = cfg;
    other.model.channels = 4;
    Trainer mismatch(other, data);
    CHECK_THROWS_AS(mismatch.load_checkpoint(dir), ContractError);
    fs::remove_all(dir);
  }

  SUBCASE("non-finite loss keeps the last good state") {
    auto bad = data;
    bad[0].ground_truth = bad[0].ground_truth.clone();
    bad[0].ground_truth.data()[0] = std::nanf("");
    for (std::size_t i = 1; i < bad.size(); ++i) bad[i] = bad[0];
    const auto dir = scratch_dir("nan");
    Trainer t(cfg, bad);
    t.set_output_dir(dir);
    CHECK_THROWS_AS(t.run(), NumericError);
    CHECK(fs::exists(dir / "last_good" / "manifest.json"));
    CHECK(t.steps_taken() == 0);
    fs::remove_all(dir);
  }

  SUBCASE("evaluation") {
    GmtNet<float> net(cfg.model);
    const auto r = evaluate(net, data);
    CHECK(r.samples.size() == 4);
    CHECK(r.config_hash == cfg.model.hash());
    CHECK(r.border == 8);
    for (const auto& s : r.samples) {
      CHECK(std::isfinite(s.psnr));
      CHECK(std::isfinite(s.baseline_psnr));
      CHECK(s.ssim <= 1.0);
      CHECK(s.ssim >= -1.0);
    }
    CHECK(evaluate(net, data).to_json() == r.to_json());

    ModelConfig wrong = cfg.model;
    wrong.scale = 4;
    CHECK_THROWS_AS(evaluate(GmtNet<float>(wrong), data), ContractError);
  }
}
