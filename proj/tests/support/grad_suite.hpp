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

// Finite-difference cases for every differentiable op and composed block.

#include <string>
#include <vector>

#include "burstkit/align.hpp"
#include "burstkit/fusion.hpp"
#include "burstkit/upsampler.hpp"
#include "oracles.hpp"

namespace burstkit::testing {

struct GradCase {
  std::string name;
  double tolerance;
  std::function<GradReport(std::uint64_t seed)> run;
};

inline std::vector<Tensor<double>> param_leaves(const ParamSet<double>& params) {
  std::vector<Tensor<double>> out;
  for (const auto& [name, t] : params.items()) out.push_back(t);
  return out;
}

// Module weights drawn away from their zero/identity initializations so that
// every path carries gradient.
template <class T = double, class M>
void perturb(M& module, Rng& rng, double bound = 0.3) {
  ParamSet<T> params;
  module.collect(params, "m");
  for (auto& [name, t] : params.items()) {
    for (auto& v : t.data()) v += static_cast<T>(rng.uniform(-bound, bound));
  }
}

inline std::vector<GradCase> grad_cases() {
  using T = Tensor<double>;
  std::vector<GradCase> cases;
  auto add_case = [&](std::string name, double tol, std::function<GradReport(std::uint64_t)> f) {
    cases.push_back({std::move(name), tol, std::move(f)});
  };
  const Shape s{2, 3, 4, 5};

  add_case("add", 1e-4, [s](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(s, rng), b = random_leaf(s, rng);
    return grad_check([&] { return add(a, b); }, {a, b}, seed);
  });
  add_case("sub", 1e-4, [s](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(s, rng), b = random_leaf(s, rng);
    return grad_check([&] { return sub(a, b); }, {a, b}, seed);
  });
  add_case("mul", 1e-4, [s](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(s, rng), b = random_leaf(s, rng);
    return grad_check([&] { return mul(a, b); }, {a, b}, seed);
  });
  add_case("scale", 1e-4, [s](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(s, rng);
    return grad_check([&] { return scale(a, 1.7); }, {a}, seed);
  });
  add_case("gelu", 1e-4, [s](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(s, rng, -3, 3);
    return grad_check([&] { return gelu(a); }, {a}, seed);
  });
  add_case("sigmoid", 1e-4, [s](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(s, rng, -4, 4);
    return grad_check([&] { return sigmoid(a); }, {a}, seed);
  });
  add_case("concat/slice channels", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(Shape{2, 2, 3, 3}, rng), b = random_leaf(Shape{2, 3, 3, 3}, rng);
    return grad_check([&] { return slice_channels(concat_channels<double>({a, b, a}), 1, 5); }, {a, b}, seed);
  });
  add_case("concat/slice batch", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(Shape{1, 2, 3, 3}, rng), b = random_leaf(Shape{2, 2, 3, 3}, rng);
    return grad_check([&] { return slice_batch(concat_batch<double>({b, a, b}), 1, 3); }, {a, b}, seed);
  });
  add_case("repeat/mean batch", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(Shape{1, 2, 3, 3}, rng), b = random_leaf(Shape{3, 2, 3, 3}, rng);
    return grad_check([&] { return mul(repeat_batch(mean_batch(b), 3), add(b, repeat_batch(a, 3))); }, {a, b},
                      seed);
  });
  add_case("global_avg_pool", 1e-4, [s](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(s, rng);
    return grad_check([&] { return global_avg_pool(a); }, {a}, seed);
  });
  add_case("sum/mean", 1e-4, [s](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(s, rng);
    return grad_check([&] { return add(sum(a), mean(mul(a, a))); }, {a}, seed);
  });
  add_case("l1_loss", 1e-4, [s](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(s, rng), b = random_leaf(s, rng);
    return grad_check([&] { return l1_loss(a, b); }, {a, b}, seed);
  });
  add_case("conv2d", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    GradReport worst;
    for (const ConvSpec spec : {ConvSpec{3, 1, 1, 1, 1, true}, ConvSpec{3, 2, 1, 1, 1, true},
                                ConvSpec{3, 1, 2, 2, 1, false}, ConvSpec{3, 1, 1, 1, 4, false},
                                ConvSpec{1, 1, 0, 1, 2, true}}) {
      auto x = random_leaf(Shape{2, 4, 6, 5}, rng);
      auto w = random_leaf(Shape{4, 4 / spec.groups, spec.kernel, spec.kernel}, rng);
      auto b = spec.bias ? random_leaf(Shape{1, 4, 1, 1}, rng) : T();
      std::vector<T> leaves{x, w};
      if (spec.bias) leaves.push_back(b);
      const auto r = grad_check([&] { return conv2d(x, w, b, spec); }, leaves, seed);
      worst.max_rel_err = std::max(worst.max_rel_err, r.max_rel_err);
      worst.checked += r.checked;
    }
    return worst;
  });
  add_case("deform_conv2d", 1e-3, [](std::uint64_t seed) {
    Rng rng(seed);
    const DeformSpec spec{3, 1, 1, 1, 2};
    auto x = random_leaf(Shape{1, 4, 5, 6}, rng);
    auto off = random_leaf(Shape{1, spec.offset_channels(), 5, 6}, rng, -1.5, 1.5);
    auto m = random_leaf(Shape{1, spec.mask_channels(), 5, 6}, rng, -2, 2);
    auto w = random_leaf(Shape{3, 4, 3, 3}, rng);
    auto b = random_leaf(Shape{1, 3, 1, 1}, rng);
    return grad_check([&] { return deform_conv2d(x, off, sigmoid(m), w, b, spec); }, {x, off, m, w, b}, seed, 40);
  });
  for (auto mode : {ResizeMode::nearest, ResizeMode::bilinear, ResizeMode::bicubic}) {
    const char* label = mode == ResizeMode::nearest ? "resize nearest"
                        : mode == ResizeMode::bilinear ? "resize bilinear"
                                                       : "resize bicubic";
    add_case(label, 1e-4, [mode](std::uint64_t seed) {
      Rng rng(seed);
      auto a = random_leaf(Shape{1, 2, 4, 6}, rng);
      return grad_check([&] { return add(resize(a, Ratio{2, 1}, mode), resize(resize(a, Ratio{1, 2}, mode), Ratio{4, 1}, mode)); },
                        {a}, seed);
    });
  }
  add_case("pixel_shuffle/unshuffle", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    auto a = random_leaf(Shape{1, 8, 3, 2}, rng);
    auto b = random_leaf(Shape{1, 2, 6, 4}, rng);
    return grad_check([&] { return add(pixel_shuffle(a, 2), mul(b, pixel_shuffle(pixel_unshuffle(b, 2), 2))); },
                      {a, b}, seed);
  });
  add_case("layer_norm", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    auto x = random_leaf(Shape{2, 6, 3, 3}, rng, -2, 2);
    auto g = random_leaf(Shape{1, 6, 1, 1}, rng, 0.5, 1.5);
    auto b = random_leaf(Shape{1, 6, 1, 1}, rng);
    return grad_check([&] { return layer_norm(x, g, b); }, {x, g, b}, seed);
  });
  add_case("channel_attention", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    auto q = random_leaf(Shape{2, 6, 3, 3}, rng), k = random_leaf(Shape{2, 6, 3, 3}, rng);
    auto v = random_leaf(Shape{2, 6, 3, 3}, rng);
    auto tau = random_leaf(Shape{2, 1, 1, 1}, rng, 0.5, 3);
    return grad_check([&] { return channel_attention(q, k, v, tau, 2); }, {q, k, v, tau}, seed);
  });
  add_case("reference weights/weighted sum", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    auto x = random_leaf(Shape{3, 4, 3, 3}, rng);
    return grad_check([&] { return weighted_batch_sum(x, reference_softmax_weights(global_avg_pool(x))); }, {x},
                      seed);
  });

  add_case("MKGA", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    Mkga<double> block(4, 2, rng);
    auto x = random_leaf(Shape{2, 4, 6, 6}, rng);
    ParamSet<double> params;
    block.collect(params, "mkga");
    auto leaves = param_leaves(params);
    leaves.push_back(x);
    return grad_check([&] { return block(x); }, leaves, seed, 6);
  });
  add_case("AGDA", 1e-3, [](std::uint64_t seed) {
    Rng rng(seed);
    AlignConfig cfg;
    cfg.channels = 4;
    cfg.levels = 2;
    cfg.heads = 2;
    cfg.offset_groups = 2;
    Agda<double> agda(cfg, rng);
    perturb(agda, rng, 0.05);
    std::vector<T> cur{random_leaf(Shape{2, 4, 6, 6}, rng), random_leaf(Shape{2, 4, 3, 3}, rng)};
    ParamSet<double> params;
    agda.collect(params, "agda");
    auto leaves = param_leaves(params);
    leaves.insert(leaves.end(), cur.begin(), cur.end());
    return grad_check([&] {
      const std::vector<T> r{slice_batch(cur[0], 0, 1), slice_batch(cur[1], 0, 1)};
      return agda(cur, r);
    }, leaves, seed, 6);
  });
  add_case("AFE", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    AlignConfig cfg;
    cfg.channels = 4;
    cfg.heads = 2;
    Afe<double> afe(cfg, rng);
    perturb(afe, rng, 0.1);
    auto aligned = random_leaf(Shape{2, 4, 5, 5}, rng);
    auto ref = random_leaf(Shape{1, 4, 5, 5}, rng);
    ParamSet<double> params;
    afe.collect(params, "afe");
    auto leaves = param_leaves(params);
    leaves.push_back(aligned);
    leaves.push_back(ref);
    return grad_check([&] { return afe(aligned, ref); }, leaves, seed, 6);
  });
  add_case("TAFM", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    Tafm<double> tafm(4, 2, FusionStreams::both, rng);
    auto x = random_leaf(Shape{3, 4, 5, 5}, rng);
    ParamSet<double> params;
    tafm.collect(params, "tafm");
    auto leaves = param_leaves(params);
    leaves.push_back(x);
    return grad_check([&] { return tafm(x); }, leaves, seed, 6);
  });
  add_case("RTFU", 1e-4, [](std::uint64_t seed) {
    Rng rng(seed);
    Rtfu<double> rtfu(4, 4, rng);
    auto x = random_leaf(Shape{1, 4, 4, 4}, rng);
    ParamSet<double> params;
    rtfu.collect(params, "rtfu");
    auto leaves = param_leaves(params);
    leaves.push_back(x);
    return grad_check([&] { return rtfu(x); }, leaves, seed, 6);
  });
  return cases;
}

}  // namespace burstkit::testing
