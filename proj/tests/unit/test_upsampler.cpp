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

#include "burstkit/autodiff.hpp"
#include "burstkit/upsampler.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace burstkit;
using namespace burstkit::testing;

namespace {

void set_identity(Conv2d<double>& conv) {
  auto& w = conv.weight;
  for (auto& v : w.data()) v = 0.0;
  for (std::int64_t o = 0; o < w.shape().n; ++o) w.at(o, o % w.shape().c, 0, 0) = 1.0;
  if (!conv.bias.empty()) {
    for (auto& v : conv.bias.data()) v = 0.0;
  }
}

Ladder<double> random_ladder(const std::vector<int>& scales, std::int64_t c, std::int64_t h, Rng& rng) {
  Ladder<double> l{scales, {}};
  for (int s : scales) l.entries.push_back(random_tensor<double>(Shape{1, c, s * h, s * h}, rng));
  return l;
}

}  // namespace

TEST_CASE("ladder scales") {
  CHECK(ladder_scales(1) == std::vector<int>{1});
  CHECK(ladder_scales(8) == std::vector<int>{1, 2, 4, 8});
  for (int bad : {0, 3, 6, 12, -4}) CHECK_THROWS_AS(ladder_scales(bad), SpecError);
  Rng rng(1);
  CHECK_THROWS_AS(Rtfu<double>(4, 6, rng), SpecError);

  Ladder<double> l{{1, 2}, {Tensor<double>(Shape{1, 1, 2, 2})}};
  CHECK_THROWS_AS(l.at(2), ContractError);
  CHECK_THROWS_AS(l.at(4), ContractError);
}

TEST_CASE("stage1") {
  Rng rng(2);
  SUBCASE("degenerate ladder") {
    Rtfu<double> r(4, 1, rng);
    const auto x = random_tensor<double>(Shape{1, 4, 5, 5}, rng);
    const auto l = r.stage1(x);
    REQUIRE(l.entries.size() == 1);
    CHECK(l.at(1).impl() == x.impl());
  }
  SUBCASE("sizes") {
    Rtfu<double> r(4, 8, rng);
    const auto l = r.stage1(random_tensor<double>(Shape{1, 4, 6, 6}, rng));
    for (int s : {1, 2, 4, 8}) CHECK(l.at(s).shape() == Shape{1, 4, 6 * s, 6 * s});
    CHECK_THROWS_AS(r.stage1(Tensor<double>(Shape{1, 3, 6, 6})), DimensionError);
  }
  SUBCASE("replication init is nearest upsampling") {
    Rtfu<double> r(3, 2, rng);
    auto& w = r.expand[0].weight;
    for (auto& v : w.data()) v = 0.0;
    for (std::int64_t c = 0; c < 3; ++c)
      for (int k = 0; k < 4; ++k) w.at(4 * c + k, c, 0, 0) = 1.0;
    for (auto& v : r.expand[0].bias.data()) v = 0.0;
    const auto x = random_tensor<double>(Shape{1, 3, 5, 4}, rng);
    CHECK(max_abs_diff(r.stage1(x).at(2), resize(x, Ratio{2, 1}, ResizeMode::nearest)) == 0.0);
  }
}

TEST_CASE("resolution transfer") {
  Rng rng(3);
  SUBCASE("single scale identity") {
    Rtfu<double> r(4, 1, rng);
    set_identity(r.fuse[0]);
    const auto x = random_tensor<double>(Shape{1, 4, 5, 5}, rng);
    CHECK(max_abs_diff(r.transfer(r.stage1(x)).at(1), x) < 1e-12);
  }
  SUBCASE("shape algebra for every pair") {
    Rtfu<double> r(4, 8, rng);
    const auto l = random_ladder(r.scales, 4, 3, rng);
    for (int i : r.scales)
      for (int o : r.scales) {
        CAPTURE(i);
        CAPTURE(o);
        CHECK(r.branch(l.at(i), i, o).shape() == Shape{1, 4, 3 * o, 3 * o});
      }
    const auto t = r.transfer(l);
    for (int o : r.scales) CHECK(t.at(o).shape() == Shape{1, 4, 3 * o, 3 * o});
  }
  SUBCASE("constant propagation") {
    Rtfu<double> r(2, 8, rng);
    for (auto& [key, chain] : r.down) {
      for (auto& conv : chain) {
        for (auto& v : conv.weight.data()) v = 0.0;
        for (std::int64_t c = 0; c < 2; ++c)
          for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 3; ++x) conv.weight.at(c, c, y, x) = 1.0 / 9.0;
        for (auto& v : conv.bias.data()) v = 0.0;
      }
    }
    for (auto& f : r.fuse) {
      for (auto& v : f.weight.data()) v = 0.0;
      for (std::int64_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < r.scales.size(); ++i) f.weight.at(c, 2 * std::int64_t(i) + c, 0, 0) = 0.25;
      for (auto& v : f.bias.data()) v = 0.0;
    }
    const double value[2] = {0.7, -1.3};
    Ladder<double> l{r.scales, {}};
    for (int s : r.scales) {
      Tensor<double> e(Shape{1, 2, 16 * s, 16 * s});
      for (std::int64_t c = 0; c < 2; ++c)
        for (std::int64_t y = 0; y < e.shape().h; ++y)
          for (std::int64_t x = 0; x < e.shape().w; ++x) e.at(0, c, y, x) = value[c];
      l.entries.push_back(e);
    }
    // Zero padding in the stride-2 chain darkens the top/left border, so only
    // the interior away from it is compared.
    const auto t = r.transfer(l);
    for (int o : r.scales) {
      const auto& u = t.at(o);
      double worst = 0.0;
      for (std::int64_t c = 0; c < 2; ++c)
        for (std::int64_t y = o; y < u.shape().h; ++y)
          for (std::int64_t x = o; x < u.shape().w; ++x) worst = std::max(worst, std::abs(u.at(0, c, y, x) - value[c]));
      CAPTURE(o);
      CHECK(worst < 1e-12);
    }
  }
  SUBCASE("every output depends on every input") {
    Rtfu<double> r(2, 8, rng);
    auto l = random_ladder(r.scales, 2, 2, rng);
    for (auto& e : l.entries) e.set_requires_grad(true);
    const auto t = r.transfer(l);
    for (int o : r.scales)
      for (int i : r.scales) CHECK(depends_on(t.at(o), l.at(i)));
  }
  SUBCASE("errors") {
    Rtfu<double> r(2, 4, rng);
    Ladder<double> partial{{1, 2, 4}, {Tensor<double>(Shape{1, 2, 2, 2}), Tensor<double>(Shape{1, 2, 4, 4})}};
    CHECK_THROWS_AS(r.transfer(partial), ContractError);
    CHECK_THROWS_AS(r.transfer(random_ladder({1, 2}, 2, 2, rng)), ContractError);
  }
}

TEST_CASE("stage3") {
  Rng rng(4);
  SUBCASE("single scale is the head alone") {
    Rtfu<double> r(4, 1, rng);
    const auto l = random_ladder(r.scales, 4, 5, rng);
    const auto y = r.stage3(l, 1);
    CHECK(max_abs_diff(y, naive_conv(l.at(1), r.head.weight, Tensor<double>(), r.head.spec)) < 1e-12);
  }
  SUBCASE("zero ladder gives a zero image") {
    Rtfu<double> r(4, 8, rng);
    Ladder<double> l{r.scales, {}};
    for (int s : r.scales) l.entries.push_back(Tensor<double>(Shape{1, 4, 2 * s, 2 * s}));
    const auto y = r.stage3(l, 8);
    CHECK(y.shape() == Shape{1, 3, 16, 16});
    for (double v : y.data()) CHECK(v == 0.0);
  }
  SUBCASE("branch sum is linear") {
    Rtfu<double> r(3, 8, rng);
    const auto a = random_ladder(r.scales, 3, 3, rng), b = random_ladder(r.scales, 3, 3, rng);
    Ladder<double> ab{r.scales, {}};
    for (int s : r.scales) ab.entries.push_back(add(a.at(s), b.at(s)));
    const auto lhs = r.reconstruct_features(ab, 8);
    const auto rhs = add(r.reconstruct_features(a, 8), r.reconstruct_features(b, 8));
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
  }
  SUBCASE("progressive bicubic") {
    Rtfu<double> r(2, 4, rng);
    const auto l = random_ladder(r.scales, 2, 3, rng);
    auto expected = naive_bicubic(naive_bicubic(l.at(1), 2), 2);
    expected = add(expected, naive_bicubic(l.at(2), 2));
    expected = add(expected, l.at(4));
    CHECK(max_abs_diff(r.reconstruct_features(l, 4), expected) < 1e-12);
  }
  SUBCASE("target must be the top") {
    Rtfu<double> r(2, 4, rng);
    const auto l = random_ladder(r.scales, 2, 2, rng);
    CHECK_THROWS_AS(r.stage3(l, 2), SpecError);
    CHECK_THROWS_AS(r.stage3(l, 8), SpecError);
  }
}

TEST_CASE("rtfu end to end") {
  Rng rng(5);
  Rtfu<float> r(8, 8, rng);
  const auto x = random_tensor<float>(Shape{1, 8, 48, 48}, rng);
  RtfuTrace<float> trace;
  const auto y = r(x, &trace);
  CHECK(y.shape() == Shape{1, 3, 384, 384});
  CHECK(y.all_finite());
  CHECK(trace.summed.shape() == Shape{1, 8, 384, 384});
  for (int s : {1, 2, 4, 8}) {
    CHECK(trace.progressive.at(s).shape() == Shape{1, 8, 48 * s, 48 * s});
    CHECK(trace.transferred.at(s).shape() == Shape{1, 8, 48 * s, 48 * s});
  }
  Rng again(5);
  Rtfu<float> r2(8, 8, again);
  CHECK(max_abs_diff(r2(random_tensor<float>(Shape{1, 8, 48, 48}, again)), y) == 0.0);

  PixelShuffleHead<float> ps(8, 8, rng);
  CHECK(ps(x).shape() == Shape{1, 3, 384, 384});
}
