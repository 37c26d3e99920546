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

#include "burstkit/model.hpp"

#include <cstdio>

#include "json.hpp"

namespace burstkit {

namespace {

template <class E, std::size_t N>
E parse_enum(const std::string& s, const std::pair<E, const char*> (&table)[N], const char* what) {
  for (const auto& [value, name] : table) {
    if (s == name) return value;
  }
  std::string options;
  for (const auto& [value, name] : table) options += std::string(options.empty() ? "" : "|") + name;
  throw SpecError(std::string("unknown ") + what + " '" + s + "' (expected " + options + ")");
}

template <class E, std::size_t N>
std::string enum_name(E v, const std::pair<E, const char*> (&table)[N]) {
  for (const auto& [value, name] : table) {
    if (v == value) return name;
  }
  return "?";
}

constexpr std::pair<AlignMode, const char*> kAlignNames[] = {
    {AlignMode::full, "full"}, {AlignMode::no_mkga, "no-mkga"},
    {AlignMode::no_afe, "no-afe"}, {AlignMode::none, "none"}};
constexpr std::pair<FusionMode, const char*> kFusionNames[] = {
    {FusionMode::tafm, "tafm"}, {FusionMode::local_only, "p1"},
    {FusionMode::global_only, "p2"}, {FusionMode::mean, "mean"}};
constexpr std::pair<UpsamplerMode, const char*> kUpsamplerNames[] = {
    {UpsamplerMode::rtfu, "rtfu"}, {UpsamplerMode::pixel_shuffle, "pixel-shuffle"}};

FusionStreams streams_for(FusionMode m) {
  switch (m) {
    case FusionMode::local_only: return FusionStreams::local_only;
    case FusionMode::global_only: return FusionStreams::global_only;
    default: return FusionStreams::both;
  }
}

}  // namespace

std::string to_string(AlignMode m) { return enum_name(m, kAlignNames); }
std::string to_string(FusionMode m) { return enum_name(m, kFusionNames); }
std::string to_string(UpsamplerMode m) { return enum_name(m, kUpsamplerNames); }
AlignMode parse_align_mode(const std::string& s) { return parse_enum(s, kAlignNames, "align mode"); }
FusionMode parse_fusion_mode(const std::string& s) { return parse_enum(s, kFusionNames, "fusion mode"); }
UpsamplerMode parse_upsampler_mode(const std::string& s) {
  return parse_enum(s, kUpsamplerNames, "upsampler mode");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

AlignConfig ModelConfig::align_config() const {
  AlignConfig a;
  a.channels = channels;
  a.levels = levels;
  a.heads = heads;
  a.offset_groups = offset_groups;
  a.ffn_expansion = ffn_expansion;
  a.use_mkga = (align == AlignMode::full || align == AlignMode::no_afe);
  a.use_afe = (align == AlignMode::full || align == AlignMode::no_mkga);
  return a;
}

void ModelConfig::validate() const {
  if (channels < 1 || levels < 1 || heads < 1 || offset_groups < 1 || ffn_expansion < 1) {
    throw SpecError("model config: sizes must be positive");
  }
  if (channels % heads != 0) throw SpecError("model config: heads must divide channels");
  if (channels % offset_groups != 0) throw SpecError("model config: offset groups must divide channels");
  if (scale != 1 && scale != 2 && scale != 4 && scale != 8) {
    throw SpecError("model config: scale must be 1, 2, 4 or 8, got " + std::to_string(scale));
  }
  if (burst_size < 2) throw SpecError("model config: burst size must be at least 2");
}

std::string ModelConfig::to_json() const {
  nlohmann::json j;
  j["channels"] = channels;
  j["levels"] = levels;
  j["heads"] = heads;
  j["offset_groups"] = offset_groups;
  j["ffn_expansion"] = ffn_expansion;
  j["burst_size"] = burst_size;
  j["scale"] = scale;
  j["align"] = to_string(align);
  j["fusion"] = to_string(fusion);
  j["upsampler"] = to_string(upsampler);
  j["seed"] = seed;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("model config: ") + e.what());
  }
  ModelConfig c;
  c.channels = j.value("channels", c.channels);
  c.levels = j.value("levels", c.levels);
  c.heads = j.value("heads", c.heads);
  c.offset_groups = j.value("offset_groups", c.offset_groups);
  c.ffn_expansion = j.value("ffn_expansion", c.ffn_expansion);
  c.burst_size = j.value("burst_size", c.burst_size);
  c.scale = j.value("scale", c.scale);
  c.align = parse_align_mode(j.value("align", to_string(c.align)));
  c.fusion = parse_fusion_mode(j.value("fusion", to_string(c.fusion)));
  c.upsampler = parse_upsampler_mode(j.value("upsampler", to_string(c.upsampler)));
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

std::string ModelConfig::hash() const { return fnv1a_hex(to_json()); }

template <class T>
GmtNet<T>::GmtNet(const ModelConfig& config) : config_(config) {
  config_.validate();
  // Each stage draws from its own stream so toggling one stage leaves the
  // initialization of the others unchanged.
  Rng align_rng(derive_seed(config_.seed, 0, 1));
  Rng fusion_rng(derive_seed(config_.seed, 0, 2));
  Rng up_rng(derive_seed(config_.seed, 0, 3));
  mbfa_ = Mbfa<T>(config_.align_config(), align_rng);
  if (config_.align == AlignMode::none) {
    mbfa_.shallow.collect(params_, "mbfa.shallow");
  } else {
    mbfa_.collect(params_, "mbfa");
  }
  if (config_.fusion != FusionMode::mean) {
    tafm_ = Tafm<T>(config_.channels, config_.heads, streams_for(config_.fusion), fusion_rng);
    tafm_.collect(params_, "tafm");
  }
  if (config_.upsampler == UpsamplerMode::rtfu) {
    rtfu_ = Rtfu<T>(config_.channels, config_.feature_scale(), up_rng);
    rtfu_.collect(params_, "rtfu");
  } else {
    ps_head_ = PixelShuffleHead<T>(config_.channels, config_.feature_scale(), up_rng);
    ps_head_.collect(params_, "ps_head");
  }
}

template <class T>
Tensor<T> GmtNet<T>::operator()(const Tensor<T>& burst, ModelTrace<T>* trace) const {
  const Shape s = burst.shape();
  if (s.n < 2) throw ContractError("model: burst needs at least 2 frames, got " + std::to_string(s.n));
  if (s.c != 4) throw DimensionError("model: expected packed RGGB (B, 4, h, w), got " + s.str());
  Tensor<T> features;
  if (config_.align == AlignMode::none) {
    features = mbfa_.shallow(burst);
    if (trace != nullptr) trace->align.shallow = features;
  } else {
    features = mbfa_(burst, trace != nullptr ? &trace->align : nullptr);
  }
  const Tensor<T> merged = (config_.fusion == FusionMode::mean)
                               ? mean_batch(features)
                               : tafm_(features, trace != nullptr ? &trace->fusion : nullptr);
  const Tensor<T> image = (config_.upsampler == UpsamplerMode::rtfu)
                              ? rtfu_(merged, trace != nullptr ? &trace->upsample : nullptr)
                              : ps_head_(merged);
  if (trace != nullptr) {
    trace->features = features;
    trace->merged = merged;
  }
  return image;
}

template class GmtNet<float>;
template class GmtNet<double>;

}  // namespace burstkit
