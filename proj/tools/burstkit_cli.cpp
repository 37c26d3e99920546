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

// burstkit command line: generate / train / eval / infer / dump-features.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "burstkit/autodiff.hpp"
#include "burstkit/dataset.hpp"
#include "burstkit/image_io.hpp"
#include "burstkit/model.hpp"
#include "burstkit/parallel.hpp"
#include "burstkit/tensor_io.hpp"
#include "burstkit/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace burstkit;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kNumeric = 4 };

struct GenerateArgs {
  int count = 8;
  int burst_size = 4;
  int scale = 4;
  std::int64_t packed_size = 32;
  double max_translation = 4.0;
  double max_rotation = 1.0;
  std::string noise = "train-range";
  std::uint64_t seed = 0;
  std::string sources;
  std::string out;
};

struct ModelArgs {
  std::int64_t channels = 32;
  int levels = 3;
  int heads = 4;
  int offset_groups = 4;
  int ffn_expansion = 2;
  std::string align = "full";
  std::string fusion = "tafm";
  std::string upsampler = "rtfu";
  std::uint64_t model_seed = 0;
};

struct TrainArgs {
  std::string data;
  std::string out;
  std::int64_t steps = 2000;
  double lr = 1e-4;
  double min_lr = 1e-6;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_every = 0;
  std::string resume;
  bool quiet = false;
};

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
  std::int64_t border = 8;
  bool gt_vs_gt = false;
};

struct InferArgs {
  std::string checkpoint;
  std::string input;
  std::string out;
  std::string linear_out;
};

struct DumpArgs {
  std::string checkpoint;
  std::string input;
  std::string out;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

// Resolved options of the invoked command as a loadable --config file.
std::string run_config(const CLI::App& app, const CLI::App& command) {
  const std::string prefix = command.get_name() + ".";
  std::istringstream all(app.config_to_str(true, false));
  std::string out;
  for (std::string line; std::getline(all, line);) {
    const auto eq = line.find('=');
    const bool global = eq != std::string::npos && line.substr(0, eq).find('.') == std::string::npos;
    if (global || line.rfind(prefix, 0) == 0) out += line + "\n";
  }
  return out;
}

void require_dir(const std::string& path, const char* what) {
  if (!fs::is_directory(path)) throw IoError(std::string(what) + " not found: " + path);
}

std::vector<Tensor<float>> load_sources(const std::string& dir) {
  std::vector<Tensor<float>> sources;
  if (dir.empty()) return sources;
  require_dir(dir, "source directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .png files in " + dir);
  for (const auto& f : files) sources.push_back(read_png(f));
  return sources;
}

int cmd_generate(const GenerateArgs& a, const CLI::App& app, const CLI::App& command) {
  SynthConfig config;
  config.burst_size = a.burst_size;
  config.scale = a.scale;
  config.packed_size = a.packed_size;
  config.max_translation = a.max_translation;
  config.max_rotation = a.max_rotation;
  config.noise = NoiseMode::parse(a.noise);
  config.validate();
  if (a.count < 1) throw SpecError("--count must be positive");
  Dataset d{config, a.seed, make_dataset(config, a.count, a.seed, load_sources(a.sources))};
  if (fs::exists(a.out)) fs::remove_all(a.out);
  write_dataset(a.out, d);
  write_text(fs::path(a.out) / "run.toml", run_config(app, command));
  std::cout << "wrote " << d.samples.size() << " bursts to " << a.out << "\n";
  return kOk;
}

ModelConfig model_config(const ModelArgs& m, const SynthConfig& data) {
  ModelConfig c;
  c.channels = m.channels;
  c.levels = m.levels;
  c.heads = m.heads;
  c.offset_groups = m.offset_groups;
  c.ffn_expansion = m.ffn_expansion;
  c.burst_size = data.burst_size;
  c.scale = data.scale;
  c.align = parse_align_mode(m.align);
  c.fusion = parse_fusion_mode(m.fusion);
  c.upsampler = parse_upsampler_mode(m.upsampler);
  c.seed = m.model_seed;
  c.validate();
  return c;
}

int cmd_train(const TrainArgs& a, const ModelArgs& m, const CLI::App& app, const CLI::App& command) {
  require_dir(a.data, "dataset");
  const Dataset data = read_dataset(a.data);
  TrainConfig tc;
  tc.model = model_config(m, data.config);
  tc.steps = a.steps;
  tc.base_lr = a.lr;
  tc.min_lr = a.min_lr;
  tc.clip_norm = a.clip_norm;
  tc.seed = a.seed;
  tc.checkpoint_every = a.checkpoint_every;
  Trainer trainer(tc, data.samples);
  if (!a.resume.empty()) {
    require_dir(a.resume, "checkpoint");
    trainer.load_checkpoint(a.resume);
  }
  fs::create_directories(a.out);
  trainer.set_output_dir(a.out);
  write_text(fs::path(a.out) / "run.toml", run_config(app, command));
  const std::int64_t report_every = std::max<std::int64_t>(1, a.steps / 20);
  trainer.run(-1, [&](const LossRow& r) {
    if (!a.quiet && (r.step % report_every == 0 || r.step == a.steps)) {
      std::cout << "step " << r.step << " loss " << r.loss << " lr " << r.lr << "\n" << std::flush;
    }
  });
  trainer.save_checkpoint(fs::path(a.out) / "checkpoint");
  write_loss_csv(fs::path(a.out) / "loss.csv", trainer.curve());
  std::cout << "checkpoint written to " << (fs::path(a.out) / "checkpoint").string() << "\n";
  return kOk;
}

int cmd_eval(const EvalArgs& a, const CLI::App& app, const CLI::App& command) {
  require_dir(a.data, "dataset");
  const Dataset data = read_dataset(a.data);
  MetricReport report;
  if (a.gt_vs_gt) {
    std::vector<SampleScore> scores;
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
      const auto& gt = data.samples[i].ground_truth;
      SampleScore s = score_pair(gt, gt, a.border);
      const SampleScore base =
          score_pair(bilinear_baseline(data.samples[i].frames, 2 * data.config.scale), gt, a.border);
      s.index = i;
      s.baseline_psnr = base.psnr;
      s.baseline_ssim = base.ssim;
      scores.push_back(s);
    }
    report = summarize(std::move(scores));
    report.border = a.border;
    report.config_hash = data.config.hash();
    report.seed = data.seed;
  } else {
    if (a.checkpoint.empty()) throw SpecError("eval: --checkpoint is required unless --gt-vs-gt is given");
    require_dir(a.checkpoint, "checkpoint");
    const GmtNet<float> model = load_model(a.checkpoint);
    if (model.config().scale != data.config.scale) {
      throw ContractError("eval: checkpoint scale " + std::to_string(model.config().scale) +
                          " does not match dataset scale " + std::to_string(data.config.scale));
    }
    report = evaluate(model, data.samples, a.border);
    report.steps = checkpoint_config(a.checkpoint).steps;
  }
  auto j = nlohmann::json::parse(report.to_json());
  j["run_config"] = run_config(app, command);
  j["dataset_hash"] = data.config.hash();
  j["dataset_seed"] = data.seed;
  const std::string text = j.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
    write_text(a.out, text);
    std::cout << "psnr " << report.psnr << " dB  ssim " << report.ssim << "  (baseline " << report.baseline_psnr
              << " dB, " << report.baseline_ssim << ")\n";
  }
  return kOk;
}

// A sample directory carries its ISP; a bare tensor file is rendered with the identity ISP.
Tensor<float> load_burst(const std::string& input, IspParams* isp) {
  if (fs::is_directory(input)) {
    const BurstSample s = read_sample(input);
    if (isp) *isp = s.isp;
    return s.frames;
  }
  if (!fs::exists(input)) throw IoError("input not found: " + input);
  if (isp) *isp = IspParams::identity();
  return read_tensor<float>(fs::path(input));
}

int cmd_infer(const InferArgs& a) {
  require_dir(a.checkpoint, "checkpoint");
  const GmtNet<float> model = load_model(a.checkpoint);
  IspParams isp;
  const Tensor<float> burst = load_burst(a.input, &isp);
  NoGradGuard no_grad;
  Tensor<float> linear = model(burst);
  for (auto& v : linear.data()) v = std::clamp(v, 0.0f, 1.0f);
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  write_png(a.out, forward_isp(linear, isp));
  if (!a.linear_out.empty()) write_tensor(fs::path(a.linear_out), linear);
  std::cout << "wrote " << a.out << " (" << linear.shape().w << "x" << linear.shape().h << ")\n";
  return kOk;
}

int cmd_dump(const DumpArgs& a, const CLI::App& app, const CLI::App& command) {
  require_dir(a.checkpoint, "checkpoint");
  const GmtNet<float> model = load_model(a.checkpoint);
  const Tensor<float> burst = load_burst(a.input, nullptr);
  NoGradGuard no_grad;
  ModelTrace<float> trace;
  model(burst, &trace);
  fs::create_directories(a.out);
  std::vector<fs::path> written;
  auto dump = [&](const std::string& name, const Tensor<float>& t) {
    for (auto& p : dump_feature(a.out, name, t)) written.push_back(p);
  };
  dump("mbfa_pre", trace.align.shallow);
  dump("mbfa_post", trace.features);
  if (model.config().upsampler == UpsamplerMode::rtfu) {
    const auto& ur = trace.upsample.progressive;
    const auto& us = trace.upsample.transferred;
    for (std::size_t i = 0; i < ur.scales.size(); ++i) dump("ur_x" + std::to_string(ur.scales[i]), ur.entries[i]);
    for (std::size_t i = 0; i < us.scales.size(); ++i) dump("us_x" + std::to_string(us.scales[i]), us.entries[i]);
  }
  write_text(fs::path(a.out) / "run.toml", run_config(app, command));
  std::cout << "wrote " << written.size() << " files to " << a.out << "\n";
  return kOk;
}

void add_model_options(CLI::App* sub, ModelArgs& m) {
  sub->add_option("--channels", m.channels, "feature channels")->capture_default_str();
  sub->add_option("--levels", m.levels, "pyramid levels")->capture_default_str();
  sub->add_option("--heads", m.heads, "attention heads")->capture_default_str();
  sub->add_option("--offset-groups", m.offset_groups, "deformable offset groups")->capture_default_str();
  sub->add_option("--ffn-expansion", m.ffn_expansion)->capture_default_str();
  sub->add_option("--align", m.align, "full | no-mkga | no-afe | none")->capture_default_str();
  sub->add_option("--fusion", m.fusion, "tafm | p1 | p2 | mean")->capture_default_str();
  sub->add_option("--upsampler", m.upsampler, "rtfu | pixel-shuffle")->capture_default_str();
  sub->add_option("--model-seed", m.model_seed, "weight initialization seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Burst RAW super-resolution toolkit"};
  app.set_config("--config", "", "TOML file with [command] sections; flags override it");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "kernel thread cap (overrides BURSTKIT_THREADS)")->capture_default_str();

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "synthesize a burst dataset");
  g->add_option("--count", gen.count, "number of bursts")->capture_default_str();
  g->add_option("--burst-size", gen.burst_size)->capture_default_str();
  g->add_option("--scale", gen.scale, "HR / RAW factor (1, 2, 4 or 8)")->capture_default_str();
  g->add_option("--packed-size", gen.packed_size, "packed frame side")->capture_default_str();
  g->add_option("--max-translation", gen.max_translation, "RAW pixels")->capture_default_str();
  g->add_option("--max-rotation", gen.max_rotation, "degrees")->capture_default_str();
  g->add_option("--noise", gen.noise, "train-range | gain1 | gain2 | gain4 | gain8")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--sources", gen.sources, "directory of sRGB PNGs (procedural scenes otherwise)");
  g->add_option("--out", gen.out)->required();

  TrainArgs tr;
  ModelArgs model;
  auto* t = app.add_subcommand("train", "train a network on a generated dataset");
  t->add_option("--data", tr.data)->required();
  t->add_option("--out", tr.out)->required();
  t->add_option("--steps", tr.steps)->capture_default_str();
  t->add_option("--lr", tr.lr, "initial learning rate")->capture_default_str();
  t->add_option("--min-lr", tr.min_lr)->capture_default_str();
  t->add_option("--clip-norm", tr.clip_norm)->capture_default_str();
  t->add_option("--seed", tr.seed, "sample order seed")->capture_default_str();
  t->add_option("--checkpoint-every", tr.checkpoint_every)->capture_default_str();
  t->add_option("--resume", tr.resume, "checkpoint directory to continue from");
  t->add_flag("--quiet", tr.quiet);
  add_model_options(t, model);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "PSNR/SSIM of a checkpoint on a dataset");
  e->add_option("--checkpoint", ev.checkpoint);
  e->add_option("--data", ev.data)->required();
  e->add_option("--out", ev.out, "report JSON (stdout when omitted)");
  e->add_option("--border", ev.border)->capture_default_str();
  e->add_flag("--gt-vs-gt", ev.gt_vs_gt, "score ground truth against itself");

  InferArgs inf;
  auto* i = app.add_subcommand("infer", "reconstruct one burst to PNG");
  i->add_option("--checkpoint", inf.checkpoint)->required();
  i->add_option("--input", inf.input, "sample directory or packed-frames tensor file")->required();
  i->add_option("--out", inf.out, "output PNG")->required();
  i->add_option("--linear-out", inf.linear_out, "also write the linear RGB tensor");

  DumpArgs dump;
  auto* d = app.add_subcommand("dump-features", "write MBFA and upsampler feature maps");
  d->add_option("--checkpoint", dump.checkpoint)->required();
  d->add_option("--input", dump.input, "sample directory or packed-frames tensor file")->required();
  d->add_option("--out", dump.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (threads > 0) set_thread_count(threads);
    if (g->parsed()) return cmd_generate(gen, app, *g);
    if (t->parsed()) return cmd_train(tr, model, app, *t);
    if (e->parsed()) return cmd_eval(ev, app, *e);
    if (i->parsed()) return cmd_infer(inf);
    if (d->parsed()) return cmd_dump(dump, app, *d);
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kIo;
  } catch (const NumericError& err) {
    std::cerr << "numeric failure: " << err.what() << "\n";
    return kNumeric;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kIo;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
