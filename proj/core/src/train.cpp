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

#include "burstkit/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "burstkit/autodiff.hpp"
#include "burstkit/metrics.hpp"
#include "burstkit/tensor_io.hpp"
#include "json.hpp"

namespace burstkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCheckpointFormat = "burstkit-checkpoint-1";

json parse_or_throw(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw SpecError(std::string(what) + ": " + e.what());
  }
}

json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot open " + (dir / "manifest.json").string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint manifest in " + dir.string() + ": " + e.what());
  }
}

void load_params(ParamSet<float>& params, const fs::path& dir) {
  for (auto& [name, p] : params.items()) {
    const Tensor<float> stored = read_tensor<float>(dir / (name + ".bkt"));
    if (stored.shape() != p.shape()) {
      throw ContractError("checkpoint: parameter " + name + " has shape " + stored.shape().str() +
                          ", model expects " + p.shape().str());
    }
    std::copy(stored.data().begin(), stored.data().end(), p.data().begin());
  }
}

}  // namespace

std::string TrainConfig::to_json() const {
  json j;
  j["model"] = json::parse(model.to_json());
  j["steps"] = steps;
  j["base_lr"] = base_lr;
  j["min_lr"] = min_lr;
  j["clip_norm"] = clip_norm;
  j["seed"] = seed;
  j["checkpoint_every"] = checkpoint_every;
  return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  const json j = parse_or_throw(text, "train config");
  TrainConfig c;
  if (j.contains("model")) c.model = ModelConfig::from_json(j.at("model").dump());
  c.steps = j.value("steps", c.steps);
  c.base_lr = j.value("base_lr", c.base_lr);
  c.min_lr = j.value("min_lr", c.min_lr);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.seed = j.value("seed", c.seed);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  if (c.steps < 0) throw SpecError("train config: steps must be >= 0");
  return c;
}

void write_loss_csv(const fs::path& path, const std::vector<LossRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,loss,lr\n" << std::setprecision(9);
  for (const auto& r : rows) out << r.step << ',' << r.loss << ',' << r.lr << '\n';
}

Trainer::Trainer(const TrainConfig& config, const std::vector<BurstSample>& data)
    : config_(config),
      data_(&data),
      model_(config.model),
      adam_(model_.params(), AdamConfig{0.9, 0.999, 1e-8, config.base_lr, config.min_lr,
                                        std::max<std::int64_t>(config.steps, 1), config.clip_norm}) {
  if (data.empty()) throw ContractError("train: empty dataset");
}

std::size_t Trainer::sample_index(std::int64_t step) const {
  const std::size_t n = data_->size();
  const auto epoch = static_cast<std::uint64_t>(step) / n;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(config_.seed, epoch, 5));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order[static_cast<std::size_t>(step) % n];
}

LossRow Trainer::step() {
  const std::int64_t s = adam_.steps_taken();
  const BurstSample& sample = (*data_)[sample_index(s)];
  auto& params = model_.params();
  params.zero_grad();
  const Tensor<float> pred = model_(sample.frames);
  if (pred.shape() != sample.ground_truth.shape()) {
    Tape::current().clear();
    throw ContractError("train: model output " + pred.shape().str() + " does not match ground truth " +
                        sample.ground_truth.shape().str());
  }
  const Tensor<float> loss = l1_loss(pred, sample.ground_truth);
  const double value = loss.item();
  if (!std::isfinite(value)) {
    Tape::current().clear();
    if (!out_dir_.empty()) save_checkpoint(out_dir_ / "last_good");
    throw NumericError("train: non-finite loss at step " + std::to_string(s + 1));
  }
  backward(loss);
  const double lr = adam_.current_lr();
  try {
    adam_.step();
  } catch (const NumericError&) {
    if (!out_dir_.empty()) save_checkpoint(out_dir_ / "last_good");
    throw;
  }
  params.zero_grad();
  const LossRow row{s + 1, value, lr};
  curve_.push_back(row);
  return row;
}

void Trainer::run(std::int64_t until, const std::function<void(const LossRow&)>& on_step) {
  if (until < 0) until = config_.steps;
  while (adam_.steps_taken() < until) {
    const LossRow row = step();
    if (on_step) on_step(row);
    if (!out_dir_.empty() && config_.checkpoint_every > 0 && row.step % config_.checkpoint_every == 0 &&
        row.step < until) {
      save_checkpoint(out_dir_ / "checkpoint");
    }
  }
}

void Trainer::save_checkpoint(const fs::path& dir) const {
  fs::create_directories(dir / "params");
  fs::create_directories(dir / "adam_m");
  fs::create_directories(dir / "adam_v");
  auto& adam = const_cast<Adam<float>&>(adam_);
  const auto& items = model_.params().items();
  json names = json::array();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string& name = items[i].first;
    write_tensor(dir / "params" / (name + ".bkt"), items[i].second);
    write_tensor(dir / "adam_m" / (name + ".bkt"), adam.first_moments()[i]);
    write_tensor(dir / "adam_v" / (name + ".bkt"), adam.second_moments()[i]);
    names.push_back(name);
  }
  json curve = json::array();
  for (const auto& r : curve_) curve.push_back({r.step, r.loss, r.lr});
  const AdamConfig& ac = adam_.config();
  json manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["model_config"] = json::parse(config_.model.to_json());
  manifest["config_hash"] = config_.model.hash();
  manifest["train_config"] = json::parse(config_.to_json());
  manifest["step"] = adam_.steps_taken();
  manifest["optimizer"] = {{"beta1", ac.beta1},       {"beta2", ac.beta2},
                           {"eps", ac.eps},           {"base_lr", ac.base_lr},
                           {"min_lr", ac.min_lr},     {"total_steps", ac.total_steps},
                           {"clip_norm", ac.clip_norm}, {"steps_taken", adam_.steps_taken()}};
  manifest["params"] = names;
  manifest["loss_curve"] = curve;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

void Trainer::load_checkpoint(const fs::path& dir) {
  const json manifest = read_manifest(dir);
  if (manifest.value("format", "") != kCheckpointFormat) {
    throw IoError("not a checkpoint: " + dir.string());
  }
  if (manifest.at("config_hash").get<std::string>() != config_.model.hash()) {
    throw ContractError("checkpoint " + dir.string() + " was made for model config " +
                        manifest.at("config_hash").get<std::string>() + ", current is " +
                        config_.model.hash());
  }
  auto& items = model_.params().items();
  load_params(model_.params(), dir / "params");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string& name = items[i].first;
    const Tensor<float> m = read_tensor<float>(dir / "adam_m" / (name + ".bkt"));
    const Tensor<float> v = read_tensor<float>(dir / "adam_v" / (name + ".bkt"));
    std::copy(m.data().begin(), m.data().end(), adam_.first_moments()[i].data().begin());
    std::copy(v.data().begin(), v.data().end(), adam_.second_moments()[i].data().begin());
  }
  adam_.set_steps_taken(manifest.at("step").get<std::int64_t>());
  curve_.clear();
  for (const auto& r : manifest.at("loss_curve")) {
    curve_.push_back({r.at(0).get<std::int64_t>(), r.at(1).get<double>(), r.at(2).get<double>()});
  }
}

TrainConfig checkpoint_config(const fs::path& checkpoint) {
  const json manifest = read_manifest(checkpoint);
  return TrainConfig::from_json(manifest.at("train_config").dump());
}

GmtNet<float> load_model(const fs::path& checkpoint) {
  const json manifest = read_manifest(checkpoint);
  const ModelConfig config = ModelConfig::from_json(manifest.at("model_config").dump());
  if (manifest.at("config_hash").get<std::string>() != config.hash()) {
    throw ContractError("checkpoint " + checkpoint.string() + ": config hash mismatch");
  }
  GmtNet<float> model(config);
  load_params(model.params(), checkpoint / "params");
  return model;
}

Tensor<float> bilinear_baseline(const Tensor<float>& frames, int feature_scale) {
  const Shape s = frames.shape();
  if (s.c != 4) throw DimensionError("baseline: expected packed RGGB frames, got " + s.str());
  NoGradGuard no_grad;
  Tensor<float> rgb(Shape{1, 3, s.h, s.w});
  for (std::int64_t y = 0; y < s.h; ++y) {
    for (std::int64_t x = 0; x < s.w; ++x) {
      rgb.at(0, 0, y, x) = frames.at(0, 0, y, x);
      rgb.at(0, 1, y, x) = 0.5f * (frames.at(0, 1, y, x) + frames.at(0, 2, y, x));
      rgb.at(0, 2, y, x) = frames.at(0, 3, y, x);
    }
  }
  return resize(rgb, Ratio{feature_scale, 1}, ResizeMode::bilinear);
}

SampleScore score_pair(const Tensor<float>& pred, const Tensor<float>& target, std::int64_t border) {
  Tensor<float> clamped = pred.detach();
  for (auto& v : clamped.data()) v = std::clamp(v, 0.0f, 1.0f);
  const Tensor<float> a = border > 0 ? crop_border(clamped, border) : clamped;
  const Tensor<float> b = border > 0 ? crop_border(target, border) : target;
  SampleScore s;
  const Psnr p = psnr(a, b);
  s.psnr = p.db;
  s.saturated = p.saturated;
  s.ssim = ssim(a, b);
  return s;
}

MetricReport summarize(std::vector<SampleScore> scores) {
  MetricReport r;
  for (const auto& s : scores) {
    r.psnr += s.psnr;
    r.ssim += s.ssim;
    r.baseline_psnr += s.baseline_psnr;
    r.baseline_ssim += s.baseline_ssim;
  }
  if (!scores.empty()) {
    const double n = double(scores.size());
    r.psnr /= n;
    r.ssim /= n;
    r.baseline_psnr /= n;
    r.baseline_ssim /= n;
  }
  r.samples = std::move(scores);
  return r;
}

MetricReport evaluate(const GmtNet<float>& model, const std::vector<BurstSample>& data,
                      std::int64_t border) {
  NoGradGuard no_grad;
  std::vector<SampleScore> scores;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const BurstSample& sample = data[i];
    const Tensor<float> pred = model(sample.frames);
    if (pred.shape() != sample.ground_truth.shape()) {
      throw ContractError("evaluate: model output " + pred.shape().str() +
                          " does not match ground truth " + sample.ground_truth.shape().str());
    }
    SampleScore s = score_pair(pred, sample.ground_truth, border);
    const SampleScore base =
        score_pair(bilinear_baseline(sample.frames, model.config().feature_scale()), sample.ground_truth, border);
    s.index = i;
    s.baseline_psnr = base.psnr;
    s.baseline_ssim = base.ssim;
    scores.push_back(s);
  }
  MetricReport r = summarize(std::move(scores));
  r.border = border;
  r.config_hash = model.config().hash();
  r.seed = model.config().seed;
  return r;
}

std::string MetricReport::to_json() const {
  json j;
  j["psnr_db"] = psnr;
  j["ssim"] = ssim;
  j["baseline_psnr_db"] = baseline_psnr;
  j["baseline_ssim"] = baseline_ssim;
  j["border"] = border;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["steps"] = steps;
  j["desk_scale"] = true;
  json per = json::array();
  for (const auto& s : samples) {
    per.push_back({{"index", s.index},
                   {"psnr_db", s.psnr},
                   {"saturated", s.saturated},
                   {"ssim", s.ssim},
                   {"baseline_psnr_db", s.baseline_psnr},
                   {"baseline_ssim", s.baseline_ssim}});
  }
  j["samples"] = per;
  return j.dump(2);
}

MetricReport MetricReport::from_json(const std::string& text) {
  const json j = parse_or_throw(text, "metric report");
  MetricReport r;
  try {
    r.psnr = j.at("psnr_db").get<double>();
    r.ssim = j.at("ssim").get<double>();
    r.baseline_psnr = j.at("baseline_psnr_db").get<double>();
    r.baseline_ssim = j.at("baseline_ssim").get<double>();
    r.border = j.at("border").get<std::int64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.steps = j.at("steps").get<std::int64_t>();
    for (const auto& s : j.at("samples")) {
      r.samples.push_back({s.at("index").get<std::size_t>(), s.at("psnr_db").get<double>(),
                           s.at("saturated").get<bool>(), s.at("ssim").get<double>(),
                           s.at("baseline_psnr_db").get<double>(), s.at("baseline_ssim").get<double>()});
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("metric report: ") + e.what());
  }
  return r;
}

}  // namespace burstkit
