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

#include "burstkit/align.hpp"

#include <cmath>

namespace burstkit {

template <class T>
Msgc<T>::Msgc(std::int64_t channels, Rng& rng) {
  for (int k : kKernels) {
    gate.push_back(depthwise<T>(channels, k, false, rng));
    value.push_back(depthwise<T>(channels, k, false, rng));
    project.push_back(pointwise<T>(channels, channels, false, rng));
  }
}

template <class T>
Tensor<T> Msgc<T>::operator()(const Tensor<T>& y) const {
  if (y.shape().c != gate.front().out_channels()) {
    throw DimensionError("msgc: input " + y.shape().str() + " does not match " +
                         std::to_string(gate.front().out_channels()) + " channels");
  }
  Tensor<T> out;
  for (std::size_t i = 0; i < gate.size(); ++i) {
    Tensor<T> branch = project[i](mul(gelu(gate[i](y)), value[i](y)));
    out = (i == 0) ? branch : add(out, branch);
  }
  return out;
}

template <class T>
void Msgc<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  for (std::size_t i = 0; i < gate.size(); ++i) {
    const std::string k = std::to_string(kKernels[i]);
    gate[i].collect(params, prefix + ".gate" + k);
    value[i].collect(params, prefix + ".value" + k);
    project[i].collect(params, prefix + ".project" + k);
  }
}

template <class T>
Projection<T>::Projection(std::int64_t channels, Rng& rng)
    : pw(pointwise<T>(channels, channels, false, rng)),
      dw(depthwise<T>(channels, 3, false, rng)) {}

template <class T>
void Projection<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  pw.collect(params, prefix + ".pw");
  dw.collect(params, prefix + ".dw");
}

template <class T>
TransposedAttention<T>::TransposedAttention(std::int64_t channels, int h, Rng& rng)
    : heads(h),
      norm(channels),
      query(channels, rng),
      key(channels, rng),
      value(channels, rng),
      temperature(Shape{h, 1, 1, 1}),
      project(pointwise<T>(channels, channels, false, rng)) {
  if (h < 1 || channels % h != 0) {
    throw SpecError("transposed attention: heads=" + std::to_string(h) +
                    " does not divide channels " + std::to_string(channels));
  }
  const T init = T(1) / std::sqrt(T(channels / h));
  for (auto& v : temperature.data()) v = init;
  temperature.set_requires_grad(true);
}

template <class T>
Tensor<T> TransposedAttention<T>::operator()(const Tensor<T>& y) const {
  const Tensor<T> n = norm(y);
  const Tensor<T> attended = channel_attention(query(n), key(n), value(n), temperature, heads);
  return add(n, project(attended));
}

template <class T>
Tensor<T> TransposedAttention<T>::attention_map(const Tensor<T>& y) const {
  const Tensor<T> n = norm(y);
  return channel_attention_map(query(n), key(n), temperature, heads);
}

template <class T>
void TransposedAttention<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  norm.collect(params, prefix + ".norm");
  query.collect(params, prefix + ".q");
  key.collect(params, prefix + ".k");
  value.collect(params, prefix + ".v");
  params.add(prefix + ".temperature", temperature);
  project.collect(params, prefix + ".project");
}

template <class T>
void Mkga<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  msgc.collect(params, prefix + ".msgc");
  attention.collect(params, prefix + ".ta");
}

template <class T>
TransformerBlock<T>::TransformerBlock(std::int64_t channels, int heads, int expansion, Rng& rng)
    : attention(channels, heads, rng),
      ffn_norm(channels),
      ffn_in(pointwise<T>(channels, 2 * channels * expansion, false, rng)),
      ffn_dw(depthwise<T>(2 * channels * expansion, 3, false, rng)),
      ffn_out(pointwise<T>(channels * expansion, channels, false, rng)),
      hidden(channels * expansion) {}

template <class T>
Tensor<T> TransformerBlock<T>::operator()(const Tensor<T>& x) const {
  const Tensor<T> t = attention(x);
  const Tensor<T> u = ffn_dw(ffn_in(ffn_norm(t)));
  const Tensor<T> gated = mul(gelu(slice_channels(u, 0, hidden)), slice_channels(u, hidden, hidden));
  return add(t, ffn_out(gated));
}

template <class T>
void TransformerBlock<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  attention.collect(params, prefix + ".ta");
  ffn_norm.collect(params, prefix + ".ffn_norm");
  ffn_in.collect(params, prefix + ".ffn_in");
  ffn_dw.collect(params, prefix + ".ffn_dw");
  ffn_out.collect(params, prefix + ".ffn_out");
}

template <class T>
Agda<T>::Agda(const AlignConfig& cfg, Rng& rng)
    : channels(cfg.channels), levels(cfg.levels), deform{3, 1, 1, 1, cfg.offset_groups} {
  if (cfg.channels % cfg.offset_groups != 0) {
    throw SpecError("agda: offset groups must divide channels");
  }
  const std::int64_t c = cfg.channels;
  const std::int64_t predicted = deform.offset_channels() + deform.mask_channels();
  for (int l = 0; l < levels; ++l) {
    const bool coarsest = (l == levels - 1);
    const std::int64_t in = 2 * c + (coarsest ? 0 : deform.offset_channels());
    Conv2d<T> oc(in, predicted, ConvSpec::same(3, 1, true), rng);
    oc.zero();
    offset_conv.push_back(oc);
    dcn.push_back(Conv2d<T>(c, c, ConvSpec::same(3, 1, true), rng));
    Conv2d<T> f(2 * c, c, ConvSpec{1, 1, 0, 1, 1, true}, rng);
    if (!coarsest) {
      // [I | 0]: pass the fine alignment through untouched at init.
      f.zero();
      for (std::int64_t i = 0; i < c; ++i) f.weight.at(i, i, 0, 0) = T(1);
    }
    fuse.push_back(f);
  }
}

template <class T>
Tensor<T> Agda<T>::operator()(const std::vector<Tensor<T>>& current,
                              const std::vector<Tensor<T>>& reference,
                              AlignTrace<T>* trace) const {
  if (static_cast<int>(current.size()) != levels || static_cast<int>(reference.size()) != levels) {
    throw ContractError("agda: expected " + std::to_string(levels) + " pyramid levels, got " +
                        std::to_string(current.size()) + " and " +
                        std::to_string(reference.size()));
  }
  const std::int64_t frames = current.front().shape().n;
  const std::int64_t oc = deform.offset_channels();
  const std::int64_t mc = deform.mask_channels();
  Tensor<T> prev_offsets;
  Tensor<T> prev_aligned;
  for (int l = levels - 1; l >= 0; --l) {
    const Tensor<T>& cur = current[l];
    if (reference[l].shape().n != 1 || reference[l].shape().c != cur.shape().c ||
        reference[l].shape().h != cur.shape().h || reference[l].shape().w != cur.shape().w) {
      throw DimensionError("agda: reference level " + std::to_string(l) + " " +
                           reference[l].shape().str() + " vs current " + cur.shape().str());
    }
    std::vector<Tensor<T>> parts{cur, repeat_batch(reference[l], frames)};
    Tensor<T> shared;
    if (l < levels - 1) {
      shared = scale(resize(prev_offsets, Ratio{2, 1}, ResizeMode::bilinear), T(2));
      parts.push_back(shared);
    }
    const Tensor<T> offset_input = concat_channels(parts);
    const Tensor<T> predicted = offset_conv[l](offset_input);
    const Tensor<T> offsets = slice_channels(predicted, 0, oc);
    const Tensor<T> modulation = sigmoid(slice_channels(predicted, oc, mc));
    Tensor<T> aligned = deform_conv2d(cur, offsets, modulation, dcn[l].weight, dcn[l].bias, deform);
    if (l < levels - 1) {
      aligned = fuse[l](concat_channels<T>(
          {aligned, resize(prev_aligned, Ratio{2, 1}, ResizeMode::bilinear)}));
    }
    if (trace != nullptr) {
      trace->offset_inputs.push_back(offset_input);
      trace->offsets.push_back(offsets);
      trace->modulation.push_back(modulation);
      trace->shared_offsets.push_back(shared);
      trace->aligned.push_back(aligned);
    }
    prev_offsets = offsets;
    prev_aligned = aligned;
  }
  return prev_aligned;
}

template <class T>
void Agda<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  for (int l = 0; l < levels; ++l) {
    const std::string p = prefix + ".l" + std::to_string(l);
    offset_conv[l].collect(params, p + ".offset");
    dcn[l].collect(params, p + ".dcn");
    if (l < levels - 1) fuse[l].collect(params, p + ".fuse");
  }
}

template <class T>
Afe<T>::Afe(const AlignConfig& cfg, Rng& rng)
    : residue_conv(cfg.channels, cfg.channels, ConvSpec::same(3, 1, true), rng),
      block(cfg.channels, cfg.heads, cfg.ffn_expansion, rng) {
  residue_conv.zero();
}

template <class T>
Tensor<T> Afe<T>::edge_boost(const Tensor<T>& aligned, const Tensor<T>& reference) const {
  const Shape a = aligned.shape();
  const Shape r = reference.shape();
  if (r.n != 1 || r.c != a.c || r.h != a.h || r.w != a.w) {
    throw DimensionError("afe: aligned " + a.str() + " vs reference " + r.str());
  }
  const Tensor<T> residue = sub(aligned, repeat_batch(reference, a.n));
  return add(aligned, residue_conv(residue));
}

template <class T>
void Afe<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  residue_conv.collect(params, prefix + ".residue");
  block.collect(params, prefix + ".block");
}

template <class T>
Mbfa<T>::Mbfa(const AlignConfig& cfg, Rng& rng)
    : config(cfg), shallow(4, cfg.channels, ConvSpec::same(3, 1, true), rng) {
  if (cfg.levels < 1) throw SpecError("mbfa: need at least one pyramid level");
  for (int l = 0; l + 1 < cfg.levels; ++l) {
    down.push_back(Conv2d<T>(cfg.channels, cfg.channels, ConvSpec{3, 2, 1, 1, 1, true}, rng));
  }
  if (cfg.use_mkga) {
    for (int l = 0; l < cfg.levels; ++l) mkga.push_back(Mkga<T>(cfg.channels, cfg.heads, rng));
  }
  agda = Agda<T>(cfg, rng);
  if (cfg.use_afe) afe = Afe<T>(cfg, rng);
}

template <class T>
std::vector<Tensor<T>> Mbfa<T>::pyramid(const Tensor<T>& shallow_features) const {
  std::vector<Tensor<T>> raw{shallow_features};
  for (const auto& d : down) raw.push_back(d(raw.back()));
  if (!config.use_mkga) return raw;
  std::vector<Tensor<T>> levels;
  for (std::size_t l = 0; l < raw.size(); ++l) levels.push_back(mkga[l](raw[l]));
  return levels;
}

template <class T>
Tensor<T> Mbfa<T>::operator()(const Tensor<T>& burst, MbfaTrace<T>* trace) const {
  const Shape s = burst.shape();
  if (s.n < 2) throw ContractError("mbfa: burst needs at least 2 frames, got " + std::to_string(s.n));
  if (s.c != 4) throw DimensionError("mbfa: expected packed RGGB (B, 4, H, W), got " + s.str());
  const std::int64_t div = std::int64_t(1) << (config.levels - 1);
  if (s.h % div != 0 || s.w % div != 0) {
    throw SpecError("mbfa: spatial size " + s.str() + " not divisible by " + std::to_string(div));
  }
  const Tensor<T> features = shallow(burst);
  const std::vector<Tensor<T>> levels = pyramid(features);
  std::vector<Tensor<T>> refs;
  for (const auto& lv : levels) refs.push_back(slice_batch(lv, 0, 1));
  const Tensor<T> aligned = agda(levels, refs, trace != nullptr ? &trace->align : nullptr);
  const Tensor<T> enriched = config.use_afe ? afe(aligned, refs.front()) : aligned;
  if (trace != nullptr) {
    trace->shallow = features;
    trace->pyramid = levels;
    trace->aligned = aligned;
    trace->enriched = enriched;
  }
  return enriched;
}

template <class T>
void Mbfa<T>::collect(ParamSet<T>& params, const std::string& prefix) const {
  shallow.collect(params, prefix + ".shallow");
  for (std::size_t l = 0; l < down.size(); ++l) down[l].collect(params, prefix + ".down" + std::to_string(l));
  for (std::size_t l = 0; l < mkga.size(); ++l) mkga[l].collect(params, prefix + ".mkga" + std::to_string(l));
  agda.collect(params, prefix + ".agda");
  if (config.use_afe) afe.collect(params, prefix + ".afe");
}

template struct Msgc<float>;
template struct Msgc<double>;
template struct Projection<float>;
template struct Projection<double>;
template struct TransposedAttention<float>;
template struct TransposedAttention<double>;
template struct Mkga<float>;
template struct Mkga<double>;
template struct TransformerBlock<float>;
template struct TransformerBlock<double>;
template struct Agda<float>;
template struct Agda<double>;
template struct Afe<float>;
template struct Afe<double>;
template struct Mbfa<float>;
template struct Mbfa<double>;

}  // namespace burstkit
