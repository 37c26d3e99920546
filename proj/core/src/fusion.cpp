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

#include "burstkit/fusion.hpp"

#include <cmath>

namespace burstkit {

namespace {

void require_burst(const Shape& s) {
  if (s.n < 2) throw ContractError("fusion: burst needs at least 2 frames, got " + std::to_string(s.n));
}

}  // namespace

template <class T>
Tafm<T>::Tafm(std::int64_t channels, int h, FusionStreams s, Rng& rng)
    : streams(s),
      heads(h),
      norm(channels),
      query(channels, rng),
      key(channels, rng),
      value(channels, rng),
      temperature(Shape{h, 1, 1, 1}),
      p1_project(pointwise<T>(channels, channels, false, rng)),
      p2_project(pointwise<T>(channels, channels, false, rng)) {
  if (h < 1 || channels % h != 0) {
    throw SpecError("fusion: heads=" + std::to_string(h) + " does not divide channels " +
                    std::to_string(channels));
  }
  const T init = T(1) / std::sqrt(T(channels / h));
  for (auto& v : temperature.data()) v = init;
  temperature.set_requires_grad(true);
  const std::int64_t in = (s == FusionStreams::both) ? 2 * channels : channels;
  merge = Conv2d<T>(in, channels, ConvSpec::same(3, 1, true), rng);
}

template <class T>
Tensor<T> Tafm<T>::local_stream(const Tensor<T>& aligned) const {
  const Shape s = aligned.shape();
  require_burst(s);
  const Tensor<T> n = norm(aligned);
  const Tensor<T> q = repeat_batch(query(slice_batch(n, 0, 1)), s.n);
  const Tensor<T> attended = channel_attention(q, key(n), value(n), temperature, heads);
  return p1_project(mean_batch(attended));
}

template <class T>
Tensor<T> Tafm<T>::global_stream(const Tensor<T>& aligned, Tensor<T>* weights) const {
  require_burst(aligned.shape());
  const Tensor<T> w = reference_softmax_weights(global_avg_pool(aligned));
  if (weights != nullptr) *weights = w;
  return p2_project(weighted_batch_sum(aligned, w));
}

template <class T>
Tensor<T> Tafm<T>::operator()(const Tensor<T>& aligned, FusionTrace<T>* trace) const {
  require_burst(aligned.shape());
  if (aligned.shape().c != merge.out_channels()) {
    throw DimensionError("fusion: expected " + std::to_string(merge.out_channels()) +
                         " channels, got " + aligned.shape().str());
  }
  Tensor<T> p1;
  Tensor<T> p2;
  Tensor<T> weights;
  std::vector<Tensor<T>> parts;
  if (streams != FusionStreams::global_only) {
    p1 = local_stream(aligned);
    parts.push_back(p1);
  }
  if (streams != FusionStreams::local_only) {
    p2 = global_stream(aligned, &weights);
    parts.push_back(p2);
  }
  const Tensor<T> merged = merge(parts.size() == 1 ? parts.front() : concat_channels(parts));
  if (trace != nullptr) {
    trace->p1 = p1;
    trace->p2 = p2;
    trace->weights = weights;
    trace->merged = merged;
  }
  return merged;
}

template <class T>
void Tafm<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  if (streams != FusionStreams::global_only) {
    norm.collect(params, prefix + ".norm");
    query.collect(params, prefix + ".q");
    key.collect(params, prefix + ".k");
    value.collect(params, prefix + ".v");
    params.add(prefix + ".temperature", temperature);
    p1_project.collect(params, prefix + ".p1");
  }
  if (streams != FusionStreams::local_only) p2_project.collect(params, prefix + ".p2");
  merge.collect(params, prefix + ".merge");
}

template struct Tafm<float>;
template struct Tafm<double>;

}  // namespace burstkit
