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

#include "burstkit/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "burstkit/autodiff.hpp"
#include "burstkit/model.hpp"
#include "burstkit/ops.hpp"
#include "burstkit/tensor_io.hpp"
#include "json.hpp"

namespace burstkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Tensor<float> crop(const Tensor<float>& img, std::int64_t top, std::int64_t left, std::int64_t size) {
  const Shape s = img.shape();
  Tensor<float> out(Shape{s.n, s.c, size, size});
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t c = 0; c < s.c; ++c) {
      for (std::int64_t y = 0; y < size; ++y) {
        for (std::int64_t x = 0; x < size; ++x) out.at(n, c, y, x) = img.at(n, c, top + y, left + x);
      }
    }
  }
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

json parse_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace

NoiseMode NoiseMode::parse(const std::string& s) {
  if (s == "train-range") return {0};
  for (int g : {1, 2, 4, 8}) {
    if (s == "gain" + std::to_string(g)) return {g};
  }
  throw SpecError("unknown noise mode '" + s + "' (expected train-range|gain1|gain2|gain4|gain8)");
}

std::string NoiseMode::str() const { return gain == 0 ? "train-range" : "gain" + std::to_string(gain); }

std::int64_t SynthConfig::margin() const {
  const double half_diag = std::sqrt(2.0) * 0.5 * double(gt_size());
  const double rot = half_diag * std::sin(max_rotation * std::numbers::pi / 180.0);
  return static_cast<std::int64_t>(std::ceil(max_translation * scale + rot)) + 2;
}

void SynthConfig::validate() const {
  if (burst_size < 1) throw SpecError("synth: burst size must be positive");
  if (scale != 1 && scale != 2 && scale != 4 && scale != 8) {
    throw SpecError("synth: scale must be 1, 2, 4 or 8");
  }
  if (packed_size < 1) throw SpecError("synth: packed size must be positive");
  if (max_translation < 0 || max_rotation < 0) throw SpecError("synth: jitter ranges must be >= 0");
  if (noise.gain != 0) NoiseParams::from_gain(noise.gain);
}

std::string SynthConfig::to_json() const {
  json j;
  j["burst_size"] = burst_size;
  j["scale"] = scale;
  j["packed_size"] = packed_size;
  j["max_translation"] = max_translation;
  j["max_rotation"] = max_rotation;
  j["noise"] = noise.str();
  return j.dump();
}

SynthConfig SynthConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SpecError(std::string("synth config: ") + e.what());
  }
  SynthConfig c;
  c.burst_size = j.value("burst_size", c.burst_size);
  c.scale = j.value("scale", c.scale);
  c.packed_size = j.value("packed_size", c.packed_size);
  c.max_translation = j.value("max_translation", c.max_translation);
  c.max_rotation = j.value("max_rotation", c.max_rotation);
  c.noise = NoiseMode::parse(j.value("noise", c.noise.str()));
  c.validate();
  return c;
}

std::string SynthConfig::hash() const { return fnv1a_hex(to_json()); }

BurstSample make_sample(const SynthConfig& config, std::uint64_t seed, const Tensor<float>* source,
                        const std::vector<FrameMotion>* motions) {
  config.validate();
  NoGradGuard no_grad;
  const std::int64_t canvas = config.canvas_size();
  const std::int64_t margin = config.margin();
  const std::int64_t gt = config.gt_size();
  Rng rng(derive_seed(seed, 0, 1));

  Tensor<float> scene;
  if (source != nullptr) {
    const Shape s = source->shape();
    if (s.h < canvas || s.w < canvas) {
      throw ContractError("synth: source " + s.str() + " smaller than required canvas " +
                          std::to_string(canvas) + "x" + std::to_string(canvas));
    }
    const auto top = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(s.h - canvas + 1)));
    const auto left = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(s.w - canvas + 1)));
    scene = crop(*source, top, left, canvas);
  } else {
    Rng scene_rng(derive_seed(seed, 0, 2));
    scene = procedural_scene(canvas, canvas, scene_rng);
  }

  BurstSample sample;
  sample.seed = seed;
  sample.isp = IspParams::sample(rng);
  sample.noise = config.noise.gain != 0 ? NoiseParams::from_gain(config.noise.gain)
                                        : sample_noise_params(rng);
  const Tensor<float> linear = inverse_isp(scene, sample.isp);

  if (motions != nullptr) {
    if (static_cast<int>(motions->size()) != config.burst_size) {
      throw ContractError("synth: expected " + std::to_string(config.burst_size) + " motions");
    }
    sample.motions = *motions;
  } else {
    Rng jitter_rng(derive_seed(seed, 0, 3));
    sample.motions = sample_motions(config.burst_size, config.max_translation * config.scale,
                                    config.max_rotation, jitter_rng);
  }

  sample.ground_truth = crop(linear, margin, margin, gt);
  std::vector<Tensor<float>> frames;
  for (int b = 0; b < config.burst_size; ++b) {
    const FrameMotion& m = sample.motions[static_cast<std::size_t>(b)];
    const bool still = (m.dx == 0.0 && m.dy == 0.0 && m.degrees == 0.0);
    Tensor<float> hr = crop(still ? linear : warp(linear, m), margin, margin, gt);
    if (config.scale > 1) hr = resize(hr, Ratio{1, config.scale}, ResizeMode::bilinear);
    frames.push_back(add_noise(mosaic_pack(hr), sample.noise, derive_seed(seed, std::uint64_t(b), 4)));
  }
  sample.frames = concat_batch(frames);
  return sample;
}

std::vector<BurstSample> make_dataset(const SynthConfig& config, int count, std::uint64_t seed,
                                      const std::vector<Tensor<float>>& sources) {
  config.validate();
  if (count < 0) throw SpecError("dataset: count must be >= 0");
  std::vector<std::optional<BurstSample>> slots(static_cast<std::size_t>(count));
  std::vector<std::string> warnings(slots.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    const Tensor<float>* source = sources.empty() ? nullptr : &sources[std::size_t(i) % sources.size()];
    try {
      slots[std::size_t(i)] = make_sample(config, derive_seed(seed, std::uint64_t(i)), source);
    } catch (const ContractError& e) {
      warnings[std::size_t(i)] = "skipping sample " + std::to_string(i) + ": " + e.what();
    }
  }
  std::vector<BurstSample> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!warnings[i].empty()) std::cerr << "warning: " << warnings[i] << "\n";
    if (slots[i]) out.push_back(std::move(*slots[i]));
  }
  return out;
}

void write_sample(const fs::path& dir, const BurstSample& sample, const SynthConfig& config) {
  fs::create_directories(dir);
  write_tensor(dir / "frames.bkt", sample.frames);
  write_tensor(dir / "gt.bkt", sample.ground_truth);
  json meta;
  json motions = json::array();
  for (const auto& m : sample.motions) motions.push_back({{"dx", m.dx}, {"dy", m.dy}, {"degrees", m.degrees}});
  meta["motions"] = motions;
  meta["noise"] = {{"sigma_r", sample.noise.sigma_r},
                   {"sigma_s", sample.noise.sigma_s},
                   {"log10_sigma_r", sample.noise.log_sigma_r()},
                   {"log10_sigma_s", sample.noise.log_sigma_s()},
                   {"gain", sample.noise.gain}};
  meta["isp"] = {{"rgb_to_cam", sample.isp.rgb_to_cam},
                 {"red_gain", sample.isp.red_gain},
                 {"blue_gain", sample.isp.blue_gain}};
  meta["seed"] = sample.seed;
  meta["config"] = json::parse(config.to_json());
  meta["config_hash"] = config.hash();
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

BurstSample read_sample(const fs::path& dir) {
  BurstSample s;
  s.frames = read_tensor<float>(dir / "frames.bkt");
  s.ground_truth = read_tensor<float>(dir / "gt.bkt");
  const json meta = parse_json(dir / "meta.json");
  try {
    for (const auto& m : meta.at("motions")) {
      s.motions.push_back({m.at("dx").get<double>(), m.at("dy").get<double>(), m.at("degrees").get<double>()});
    }
    const auto& n = meta.at("noise");
    s.noise = {n.at("sigma_r").get<double>(), n.at("sigma_s").get<double>(), n.at("gain").get<int>()};
    const auto& isp = meta.at("isp");
    s.isp.rgb_to_cam = isp.at("rgb_to_cam").get<Mat3>();
    s.isp.red_gain = isp.at("red_gain").get<double>();
    s.isp.blue_gain = isp.at("blue_gain").get<double>();
    s.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw IoError("bad sample metadata in " + dir.string() + ": " + e.what());
  }
  return s;
}

void write_dataset(const fs::path& dir, const Dataset& dataset) {
  fs::create_directories(dir);
  json manifest;
  manifest["config"] = json::parse(dataset.config.to_json());
  manifest["config_hash"] = dataset.config.hash();
  manifest["seed"] = dataset.seed;
  json names = json::array();
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%05zu", i);
    write_sample(dir / name, dataset.samples[i], dataset.config);
    names.push_back(name);
  }
  manifest["samples"] = names;
  write_text(dir / "dataset.json", manifest.dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
  const json manifest = parse_json(dir / "dataset.json");
  Dataset d;
  try {
    d.config = SynthConfig::from_json(manifest.at("config").dump());
    d.seed = manifest.at("seed").get<std::uint64_t>();
    for (const auto& name : manifest.at("samples")) d.samples.push_back(read_sample(dir / name.get<std::string>()));
  } catch (const json::exception& e) {
    throw IoError("bad dataset manifest in " + dir.string() + ": " + e.what());
  }
  return d;
}

}  // namespace burstkit
