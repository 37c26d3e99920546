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

#include <benchmark/benchmark.h>

#include "burstkit/autodiff.hpp"
#include "burstkit/model.hpp"

using namespace burstkit;

namespace {

Tensor<float> filled(Shape s, Rng& rng) {
  Tensor<float> t(s);
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

void BM_Conv3x3(benchmark::State& state) {
  Rng rng(1);
  const std::int64_t c = state.range(0), hw = state.range(1);
  const auto x = filled(Shape{4, c, hw, hw}, rng);
  const auto w = filled(Shape{c, c, 3, 3}, rng);
  const auto b = filled(Shape{1, c, 1, 1}, rng);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w, b, ConvSpec::same(3)));
  state.SetItemsProcessed(state.iterations() * 4 * c * c * 9 * hw * hw);
}
BENCHMARK(BM_Conv3x3)->Args({32, 32})->Args({32, 64})->Args({64, 32})->Unit(benchmark::kMillisecond);

void BM_Conv3x3Backward(benchmark::State& state) {
  Rng rng(2);
  const std::int64_t c = state.range(0), hw = state.range(1);
  const auto x = filled(Shape{4, c, hw, hw}, rng);
  auto w = filled(Shape{c, c, 3, 3}, rng);
  w.set_requires_grad(true);
  for (auto _ : state) {
    backward(sum(conv2d(x, w, Tensor<float>(), ConvSpec::same(3, 1, false))));
    w.zero_grad();
  }
}
BENCHMARK(BM_Conv3x3Backward)->Args({32, 32})->Unit(benchmark::kMillisecond);

void BM_DeformConv(benchmark::State& state) {
  Rng rng(3);
  const std::int64_t c = state.range(0), hw = state.range(1);
  const DeformSpec spec{3, 1, 1, 1, 4};
  const auto x = filled(Shape{4, c, hw, hw}, rng);
  auto off = filled(Shape{4, spec.offset_channels(), hw, hw}, rng);
  for (auto& v : off.data()) v *= 2.0f;
  Tensor<float> mask(Shape{4, spec.mask_channels(), hw, hw}, 0.5f);
  const auto w = filled(Shape{c, c, 3, 3}, rng);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(deform_conv2d(x, off, mask, w, Tensor<float>(), spec));
}
BENCHMARK(BM_DeformConv)->Args({32, 32})->Args({32, 64})->Unit(benchmark::kMillisecond);

void BM_ChannelAttention(benchmark::State& state) {
  Rng rng(4);
  const std::int64_t c = state.range(0), hw = state.range(1);
  const auto q = filled(Shape{4, c, hw, hw}, rng), k = filled(Shape{4, c, hw, hw}, rng);
  const auto v = filled(Shape{4, c, hw, hw}, rng);
  const Tensor<float> tau(Shape{4, 1, 1, 1}, 0.5f);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(channel_attention(q, k, v, tau, 4));
}
BENCHMARK(BM_ChannelAttention)->Args({32, 32})->Args({32, 128})->Unit(benchmark::kMillisecond);

void BM_Resize(benchmark::State& state) {
  Rng rng(5);
  const auto mode = static_cast<ResizeMode>(state.range(0));
  const auto x = filled(Shape{1, 32, 64, 64}, rng);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(resize(x, Ratio{2, 1}, mode));
}
BENCHMARK(BM_Resize)->Arg(int(ResizeMode::nearest))->Arg(int(ResizeMode::bilinear))->Arg(int(ResizeMode::bicubic))
    ->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
  ModelConfig cfg;
  cfg.channels = 32;
  cfg.levels = 3;
  GmtNet<float> net(cfg);
  Rng rng(6);
  const auto burst = filled(Shape{4, 4, state.range(0), state.range(0)}, rng);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(net(burst));
}
BENCHMARK(BM_ModelForward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
