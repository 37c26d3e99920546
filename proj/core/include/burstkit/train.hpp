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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "burstkit/dataset.hpp"
#include "burstkit/model.hpp"
#include "burstkit/optim.hpp"

namespace burstkit {

struct TrainConfig {
  ModelConfig model;
  std::int64_t steps = 2000;
  double base_lr = 1e-4;
  double min_lr = 1e-6;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;            // sample order
  std::int64_t checkpoint_every = 0; // 0: only at the end

  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
};

struct LossRow {
  std::int64_t step = 0;  // 1-based index of the finished update
  double loss = 0.0;
  double lr = 0.0;
};

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossRow>& rows);

/// L1 training of one network on an in-memory set of bursts, one burst per
/// step, in a seeded per-epoch shuffled order.
class Trainer {
 public:
  Trainer(const TrainConfig& config, const std::vector<BurstSample>& data);
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  /// Trains until `until` steps have been taken (default: config.steps).
  /// `on_step` sees every finished row. A non-finite loss saves the
  /// pre-update state to `<out_dir>/last_good` (when out_dir is set) and
  /// throws NumericError.
  void run(std::int64_t until = -1, const std::function<void(const LossRow&)>& on_step = {});
  LossRow step();

  /// Index of the sample used by update `step` (0-based).
  std::size_t sample_index(std::int64_t step) const;

  void save_checkpoint(const std::filesystem::path& dir) const;
  /// Restores parameters, optimizer state and loss curve. Throws
  /// ContractError when the checkpoint was made for another configuration.
  void load_checkpoint(const std::filesystem::path& dir);

  void set_output_dir(const std::filesystem::path& dir) { out_dir_ = dir; }
  const TrainConfig& config() const { return config_; }
  GmtNet<float>& model() { return model_; }
  const std::vector<LossRow>& curve() const { return curve_; }
  std::int64_t steps_taken() const { return adam_.steps_taken(); }

 private:
  TrainConfig config_;
  const std::vector<BurstSample>* data_;
  GmtNet<float> model_;
  Adam<float> adam_;
  std::vector<LossRow> curve_;
  std::filesystem::path out_dir_;
};

/// Loads only the network of a checkpoint directory.
GmtNet<float> load_model(const std::filesystem::path& checkpoint);
/// Model configuration stored in a checkpoint manifest.
TrainConfig checkpoint_config(const std::filesystem::path& checkpoint);

/// Reference frame demosaicked by channel placement (R, mean G, B) and
/// bilinearly upsampled to the ground-truth size.
Tensor<float> bilinear_baseline(const Tensor<float>& frames, int feature_scale);

struct SampleScore {
  std::size_t index = 0;
  double psnr = 0.0;
  bool saturated = false;
  double ssim = 0.0;
  double baseline_psnr = 0.0;
  double baseline_ssim = 0.0;
};

struct MetricReport {
  std::vector<SampleScore> samples;
  double psnr = 0.0;  // means over samples
  double ssim = 0.0;
  double baseline_psnr = 0.0;
  double baseline_ssim = 0.0;
  std::int64_t border = 8;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;

  std::string to_json() const;
  static MetricReport from_json(const std::string& text);
};

/// Scores `pred` against `target` after removing `border` pixels; pred is
/// clamped to [0, 1] first.
SampleScore score_pair(const Tensor<float>& pred, const Tensor<float>& target, std::int64_t border);
MetricReport summarize(std::vector<SampleScore> scores);

/// PSNR/SSIM of the network and of the bilinear baseline on every sample.
MetricReport evaluate(const GmtNet<float>& model, const std::vector<BurstSample>& data,
                      std::int64_t border = 8);

}  // namespace burstkit
