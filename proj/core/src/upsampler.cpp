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

#include "burstkit/upsampler.hpp"

#include <algorithm>
#include <bit>

namespace burstkit {

namespace {

int log2_exact(int v) { return std::countr_zero(static_cast<unsigned>(v)); }

}  // namespace

template <class T>
const Tensor<T>& Ladder<T>::at(int scale) const {
  const auto it = std::find(scales.begin(), scales.end(), scale);
  if (it == scales.end() || entries.size() != scales.size()) {
    throw ContractError("ladder: no entry for x" + std::to_string(scale));
  }
  return entries[static_cast<std::size_t>(it - scales.begin())];
}

std::vector<int> ladder_scales(int top) {
  if (top < 1 || !std::has_single_bit(static_cast<unsigned>(top))) {
    throw SpecError("ladder: top factor " + std::to_string(top) + " is not a power of two");
  }
  std::vector<int> s;
  for (int i = 1; i <= top; i *= 2) s.push_back(i);
  return s;
}

template <class T>
Rtfu<T>::Rtfu(std::int64_t c, int top, Rng& rng)
    : channels(c), scales(ladder_scales(top)), head(c, 3, ConvSpec::same(3, 1, false), rng) {
  for (std::size_t j = 1; j < scales.size(); ++j) {
    expand.push_back(pointwise<T>(c, 4 * c, true, rng));
  }
  for (int o : scales) {
    for (int i : scales) {
      if (i <= o) continue;
      std::vector<Conv2d<T>> chain;
      for (int step = 0; step < log2_exact(i / o); ++step) {
        chain.push_back(Conv2d<T>(c, c, ConvSpec{3, 2, 1, 1, 1, true}, rng));
      }
      down[{i, o}] = std::move(chain);
    }
    fuse.push_back(pointwise<T>(static_cast<std::int64_t>(scales.size()) * c, c, true, rng));
  }
}

template <class T>
Ladder<T> Rtfu<T>::stage1(const Tensor<T>& merged) const {
  if (merged.shape().c != channels) {
    throw DimensionError("rtfu: expected " + std::to_string(channels) + " channels, got " +
                         merged.shape().str());
  }
  Ladder<T> ladder{scales, {merged}};
  for (const auto& conv : expand) ladder.entries.push_back(pixel_shuffle(conv(ladder.entries.back()), 2));
  return ladder;
}

template <class T>
Tensor<T> Rtfu<T>::branch(const Tensor<T>& u, int i, int o) const {
  if (o > i) return resize(u, Ratio{o / i, 1}, ResizeMode::bilinear);
  if (o == i) return u;
  const auto it = down.find({i, o});
  if (it == down.end()) throw ContractError("rtfu: no x" + std::to_string(i) + " -> x" + std::to_string(o) + " path");
  Tensor<T> v = u;
  for (const auto& conv : it->second) v = conv(v);
  return v;
}

template <class T>
Ladder<T> Rtfu<T>::transfer(const Ladder<T>& ladder) const {
  if (ladder.scales != scales) throw ContractError("rtfu: ladder scales do not match the module");
  Ladder<T> out{scales, {}};
  for (std::size_t oi = 0; oi < scales.size(); ++oi) {
    const int o = scales[oi];
    std::vector<Tensor<T>> parts;
    for (int i : scales) parts.push_back(branch(ladder.at(i), i, o));
    out.entries.push_back(fuse[oi](parts.size() == 1 ? parts.front() : concat_channels(parts)));
  }
  return out;
}

template <class T>
Tensor<T> Rtfu<T>::reconstruct_features(const Ladder<T>& ladder, int target) const {
  if (target != scales.back()) {
    throw SpecError("rtfu: reconstruction target x" + std::to_string(target) +
                    " must equal the ladder top x" + std::to_string(scales.back()));
  }
  Tensor<T> total;
  for (int o : scales) {
    Tensor<T> u = ladder.at(o);
    for (int f = o; f < target; f *= 2) u = resize(u, Ratio{2, 1}, ResizeMode::bicubic);
    total = total.empty() ? u : add(total, u);
  }
  return total;
}

template <class T>
Tensor<T> Rtfu<T>::stage3(const Ladder<T>& ladder, int target) const {
  return head(reconstruct_features(ladder, target));
}

template <class T>
Tensor<T> Rtfu<T>::operator()(const Tensor<T>& merged, RtfuTrace<T>* trace) const {
  Ladder<T> progressive = stage1(merged);
  Ladder<T> transferred = transfer(progressive);
  const Tensor<T> summed = reconstruct_features(transferred, scales.back());
  if (trace != nullptr) {
    trace->progressive = progressive;
    trace->transferred = transferred;
    trace->summed = summed;
  }
  return head(summed);
}

template <class T>
void Rtfu<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  for (std::size_t j = 0; j < expand.size(); ++j) {
    expand[j].collect(params, prefix + ".expand" + std::to_string(scales[j]));
  }
  for (const auto& [key, chain] : down) {
    for (std::size_t s = 0; s < chain.size(); ++s) {
      chain[s].collect(params, prefix + ".down" + std::to_string(key.first) + "to" +
                                   std::to_string(key.second) + "_" + std::to_string(s));
    }
  }
  for (std::size_t oi = 0; oi < fuse.size(); ++oi) {
    fuse[oi].collect(params, prefix + ".fuse" + std::to_string(scales[oi]));
  }
  head.collect(params, prefix + ".head");
}

template <class T>
PixelShuffleHead<T>::PixelShuffleHead(std::int64_t channels, int f, Rng& rng)
    : factor(f), conv(channels, 3 * std::int64_t(f) * f, ConvSpec::same(3, 1, false), rng) {
  if (f < 1) throw SpecError("pixel shuffle head: factor must be positive");
}

template struct Ladder<float>;
template struct Ladder<double>;
template struct Rtfu<float>;
template struct Rtfu<double>;
template struct PixelShuffleHead<float>;
template struct PixelShuffleHead<double>;

}  // namespace burstkit
