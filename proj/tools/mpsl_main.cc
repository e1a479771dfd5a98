// Copyright 2026 The MPSL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// mpsl: train, evaluate and probe multi-path spiking networks.
//
// Exit codes: 0 success, 1 check failure, 2 usage or configuration error,
// 3 numeric abort.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mpsl/checkpoint.h"
#include "mpsl/config.h"
#include "mpsl/data.h"
#include "mpsl/gradcheck.h"
#include "mpsl/metrics.h"
#include "mpsl/trainer.h"

namespace fs = std::filesystem;

namespace mpsl {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

constexpr int kRobustnessSeeds = 5;

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> ParseLevels(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : SplitList(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("--levels: '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

std::vector<double> DefaultLevels(PerturbationKind kind, std::size_t side) {
  switch (kind) {
    case PerturbationKind::kGaussian: return {0.0, 0.1, 0.2, 0.3, 0.4};
    case PerturbationKind::kSaltPepper: return {0.0, 0.05, 0.1, 0.2, 0.3};
    case PerturbationKind::kCenterCrop: {
      std::vector<double> out;
      for (double f : {0.4, 0.55, 0.7, 0.85, 1.0}) {
        out.push_back(std::max(1.0, std::round(f * static_cast<double>(side))));
      }
      return out;
    }
  }
  return {};
}

std::string Percent(double accuracy) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * accuracy);
  return buf;
}

// Network with lambda copied from the checkpoint named in the config.
std::optional<Network> LambdaSource(const TrainConfig& cfg) {
  if (cfg.lambda_mode != LambdaMode::kFrozenLearned) return std::nullopt;
  return LoadCheckpoint(cfg.lambda_source).net;
}

struct Options {
  std::string config;
  std::string checkpoint;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string kinds = "gaussian";
  std::string levels;
  std::string seeds = "1,2,3";
  std::string split = "test";
  bool merged = true;
  bool unmerged = false;
  int trials = 50;
  double corrupt_width = 0.0;
  long samples = 500;
};

int Train(const Options& o) {
  TrainConfig cfg = LoadConfig(o.config);
  if (o.seed) cfg.seed = *o.seed;
  fs::create_directories(o.out_dir);
  const Splits splits = LoadSplits(cfg.dataset, cfg.seed);
  const std::optional<Network> source = LambdaSource(cfg);
  Trainer trainer(cfg, source ? &*source : nullptr);
  const std::string run_id = RunId("train", ConfigHash(cfg));
  std::vector<MetricsRow> rows;
  std::cout << "train: " << splits.train.size() << " train / " << splits.test.size()
            << " test samples, " << cfg.epochs << " epochs, mode " << ToString(cfg.lambda_mode)
            << "\n";
  for (int e = 0; e < cfg.epochs; ++e) {
    const EpochMetrics m = trainer.TrainEpoch(splits.train);
    const auto eval_start = Clock::now();
    const EvalResult ev = Evaluate(trainer.net(), splits.test, cfg.timesteps, true);
    const double eval_seconds = SecondsSince(eval_start);
    const std::vector<double> lambdas = LambdaValues(trainer.net());
    rows.push_back({run_id, "train", ToString(cfg.lambda_mode), cfg.seed, m.epoch, "none", 0.0,
                    "train", m.loss, m.accuracy, 0.0, lambdas, m.seconds});
    rows.push_back({run_id, "train", ToString(cfg.lambda_mode), cfg.seed, m.epoch, "none", 0.0,
                    "test", ev.loss, ev.accuracy, 0.0, lambdas, eval_seconds});
    std::cout << "epoch " << m.epoch << ": train loss " << m.loss << " acc " << Percent(m.accuracy)
              << ", test acc " << Percent(ev.accuracy) << " (" << m.seconds << " s)\n"
              << std::flush;
    WriteMetrics(fs::path(o.out_dir) / "train.csv", rows);
    SaveCheckpoint(fs::path(o.out_dir) / "model.ckpt", trainer);
  }
  if (cfg.epochs == 0) SaveCheckpoint(fs::path(o.out_dir) / "model.ckpt", trainer);
  WriteMetrics(fs::path(o.out_dir) / "train.csv", rows);
  std::cout << "wrote " << (fs::path(o.out_dir) / "train.csv").string() << " and "
            << (fs::path(o.out_dir) / "model.ckpt").string() << "\n";
  return kExitOk;
}

const Dataset& PickSplit(const Splits& splits, const std::string& name) {
  if (name == "test") return splits.test;
  if (name == "train") return splits.train;
  throw ConfigError("--split must be 'train' or 'test', got '" + name + "'");
}

int Eval(const Options& o) {
  const Checkpoint ck = LoadCheckpoint(o.checkpoint);
  const Splits splits = LoadSplits(ck.config.dataset, ck.config.seed);
  const Dataset& data = PickSplit(splits, o.split);
  const bool merged = !o.unmerged;
  const auto start = Clock::now();
  const EvalResult ev = Evaluate(ck.net, data, ck.config.timesteps, merged);
  fs::create_directories(o.out_dir);
  const MetricsRow row{RunId("eval", ConfigHash(ck.config)), "eval",
                       merged ? "merged" : "unmerged", ck.config.seed, ck.epoch, "none", 0.0,
                       o.split, ev.loss, ev.accuracy, 0.0, LambdaValues(ck.net), SecondsSince(start)};
  WriteMetrics(fs::path(o.out_dir) / "eval.csv", {row});
  std::cout << "eval (" << row.mode << ", " << o.split << ", " << data.size()
            << " samples): accuracy " << Percent(ev.accuracy) << ", loss " << ev.loss << "\n";
  return kExitOk;
}

int Robustness(const Options& o) {
  const Checkpoint ck = LoadCheckpoint(o.checkpoint);
  const Splits splits = LoadSplits(ck.config.dataset, ck.config.seed);
  const Dataset& test = splits.test;
  const std::uint64_t base_seed = o.seed.value_or(ck.config.seed);
  const std::string run_id = RunId("robustness", ConfigHash(ck.config));
  std::vector<PerturbationKind> kinds;
  for (const std::string& name : SplitList(o.kinds)) kinds.push_back(ParsePerturbationKind(name));
  MPSL_CHECK(!kinds.empty(), "--kinds: need at least one perturbation kind");
  const std::vector<double> given = ParseLevels(o.levels);
  if (!o.levels.empty()) MPSL_CHECK(!given.empty(), "--levels: need at least one level");

  // Validate every cell before spending time on any of them.
  std::vector<std::pair<PerturbationKind, std::vector<double>>> plan;
  for (PerturbationKind kind : kinds) {
    std::vector<double> levels = given.empty() ? DefaultLevels(kind, std::min(test.width, test.height)) : given;
    std::sort(levels.begin(), levels.end());
    for (double level : levels) PerturbationSpec{kind, level}.Validate(test.width, test.height);
    plan.emplace_back(kind, std::move(levels));
  }

  std::vector<MetricsRow> rows;
  for (const auto& [kind, levels] : plan) {
    for (double level : levels) {
      const auto start = Clock::now();
      std::vector<double> acc;
      double loss = 0.0;
      for (int s = 0; s < kRobustnessSeeds; ++s) {
        const Dataset noisy = PerturbDataset(test, {kind, level}, DeriveSeed(base_seed, 4, static_cast<std::uint64_t>(s)));
        const EvalResult ev = Evaluate(ck.net, noisy, ck.config.timesteps, true);
        acc.push_back(ev.accuracy);
        loss += ev.loss / kRobustnessSeeds;
      }
      double mean = 0.0;
      for (double a : acc) mean += a / kRobustnessSeeds;
      double var = 0.0;
      for (double a : acc) var += (a - mean) * (a - mean) / (kRobustnessSeeds - 1);
      rows.push_back({run_id, "robustness", "merged", base_seed, ck.epoch, ToString(kind), level,
                      "test", loss, mean, std::sqrt(var), LambdaValues(ck.net), SecondsSince(start)});
      std::cout << ToString(kind) << " level " << level << ": accuracy " << Percent(mean) << " +- "
                << Percent(std::sqrt(var)) << "\n" << std::flush;
    }
  }
  fs::create_directories(o.out_dir);
  WriteMetrics(fs::path(o.out_dir) / "robustness.csv", rows);
  return kExitOk;
}

int Ablate(const Options& o) {
  TrainConfig cfg = LoadConfig(o.config);
  std::vector<std::uint64_t> seeds;
  for (const std::string& s : SplitList(o.seeds)) {
    try {
      seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw ConfigError("--seeds: '" + s + "' is not an unsigned integer");
    }
  }
  MPSL_CHECK(!seeds.empty(), "--seeds: need at least one seed");
  // Data is drawn once so every mode and seed sees the same samples.
  const std::uint64_t data_seed = o.seed.value_or(cfg.seed);
  const Splits splits = LoadSplits(cfg.dataset, data_seed);
  const auto start = Clock::now();
  const AblationReport report = RunAblation(cfg, seeds, splits);
  const double seconds = SecondsSince(start);
  const std::string run_id = RunId("ablate", ConfigHash(cfg));
  std::vector<MetricsRow> rows;
  for (const AblationRow& r : report.rows) {
    rows.push_back({run_id, "ablate", ToString(r.mode), r.seed, r.epoch, "none", 0.0, "train",
                    r.loss, r.accuracy, 0.0, r.lambdas, 0.0});
  }
  const auto summary = [&](LambdaMode mode, double mean) {
    double var = 0.0;
    int n = 0;
    for (const AblationRow& r : report.rows) {
      if (r.mode == mode && r.epoch == cfg.epochs) {
        var += (r.accuracy - mean) * (r.accuracy - mean);
        ++n;
      }
    }
    const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    rows.push_back({run_id, "ablate", ToString(mode), 0, cfg.epochs, "seed-mean", 0.0, "train",
                    0.0, mean, sd, {}, seconds});
    std::cout << ToString(mode) << ": final train accuracy " << Percent(mean) << " +- " << Percent(sd)
              << " over " << n << " seeds\n";
  };
  summary(LambdaMode::kFixed, report.fixed_final_mean);
  summary(LambdaMode::kLearnable, report.learnable_final_mean);
  summary(LambdaMode::kFrozenLearned, report.frozen_final_mean);
  std::cout << "learnable >= fixed: " << (report.learnable_at_least_fixed ? "yes" : "no") << "\n";
  fs::create_directories(o.out_dir);
  WriteMetrics(fs::path(o.out_dir) / "ablate.csv", rows);
  return kExitOk;
}

int GradCheck(const Options& o) {
  MPSL_CHECK(o.trials >= 1, "--trials must be at least 1");
  GradCheckOptions options;
  if (o.seed) options.seed = *o.seed;
  options.trials = o.trials;
  options.corrupt_surrogate_width = o.corrupt_width;
  const auto start = Clock::now();
  const GradCheckReport r = RunGradCheck(options);
  std::printf("gradcheck: %d trials, worst relative error %.3e (%s, seed %llu), %.2f s\n",
              r.trials_run, r.worst_error, r.worst_parameter.c_str(),
              static_cast<unsigned long long>(r.worst_seed), SecondsSince(start));
  std::printf("  per group: W1 %.2e  lambda %.2e  eta %.2e  beta %.2e  lambda_f %.2e  lambda_p %.2e\n",
              r.worst_w1, r.worst_lambda, r.worst_eta, r.worst_beta, r.worst_lambda_f,
              r.worst_lambda_p);
  if (!r.passed) {
    std::printf("gradcheck FAILED at seed %llu\n", static_cast<unsigned long long>(r.failing_seed));
    return kExitCheckFailed;
  }
  std::printf("gradcheck passed\n");
  return kExitOk;
}

int ExportFeatures(const Options& o) {
  MPSL_CHECK(o.samples >= 1, "--samples must be at least 1");
  const Checkpoint ck = LoadCheckpoint(o.checkpoint);
  MPSL_CHECK(ck.net.layers.size() >= 2, "export-features: network has no hidden layer");
  const Splits splits = LoadSplits(ck.config.dataset, ck.config.seed);
  std::size_t n = static_cast<std::size_t>(o.samples);
  if (n > splits.test.size()) {
    std::cerr << "warning: requested " << n << " samples but the test split has "
              << splits.test.size() << "; exporting " << splits.test.size() << "\n";
    n = splits.test.size();
  }
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  const InferenceResult r = Infer(ck.net, splits.test.Batch(order, 0, n), ck.config.timesteps, true);
  std::string csv = "label";
  for (std::size_t j = 0; j < r.penultimate_u.cols(); ++j) csv += ",u" + std::to_string(j);
  csv += '\n';
  char buf[40];
  for (std::size_t k = 0; k < n; ++k) {
    csv += std::to_string(splits.test.labels[k]);
    for (double v : r.penultimate_u.row(k)) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      csv += buf;
    }
    csv += '\n';
  }
  fs::create_directories(o.out_dir);
  const fs::path path = fs::path(o.out_dir) / "features.csv";
  WriteFileAtomic(path, csv);
  std::cout << "wrote " << n << " rows x " << (1 + r.penultimate_u.cols()) << " columns to "
            << path.string() << "\n";
  return kExitOk;
}

}  // namespace
}  // namespace mpsl

int main(int argc, char** argv) {
  using namespace mpsl;
  CLI::App app{"Multi-path spiking network trainer"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;

  const auto add_seed = [&](CLI::App* cmd, const std::string& help) {
    cmd->add_option("--seed", seed, help);
  };
  const auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out-dir", o.out_dir, "Directory for metrics and artifacts")->capture_default_str();
  };

  CLI::App* train = app.add_subcommand("train", "Train a network from a config file");
  train->add_option("--config", o.config, "Config JSON")->required();
  add_seed(train, "Override the config seed");
  add_out(train);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  eval->add_option("--split", o.split, "train or test")->capture_default_str();
  auto* merged = eval->add_flag("--merged", o.merged, "Single merged weight per layer (default)");
  auto* unmerged = eval->add_flag("--unmerged", o.unmerged, "Three separate weight paths");
  merged->excludes(unmerged);
  add_out(eval);

  CLI::App* robust = app.add_subcommand("robustness", "Accuracy under input perturbations");
  robust->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  robust->add_option("--kinds", o.kinds, "Comma list: gaussian, salt-pepper, crop")->capture_default_str();
  robust->add_option("--levels", o.levels, "Comma list of levels (default grid per kind)");
  add_seed(robust, "Base seed for the perturbation draws");
  add_out(robust);

  CLI::App* ablate = app.add_subcommand("ablate", "Fixed vs learnable vs frozen-learned fusion");
  ablate->add_option("--config", o.config, "Config JSON")->required();
  ablate->add_option("--seeds", o.seeds, "Comma list of training seeds")->capture_default_str();
  add_seed(ablate, "Seed for the dataset draw (default: config seed)");
  add_out(ablate);

  CLI::App* grad = app.add_subcommand("gradcheck", "Compare backward against the reference");
  grad->add_option("--trials", o.trials, "Random networks to check")->capture_default_str();
  add_seed(grad, "Base seed");
  grad->add_option("--corrupt-surrogate-width", o.corrupt_width,
                   "Test mode: backward uses this surrogate width (expected to fail)");

  CLI::App* features = app.add_subcommand("export-features", "Penultimate membrane potentials as CSV");
  features->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  features->add_option("--samples", o.samples, "Test samples to export")->capture_default_str();
  add_out(features);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  for (CLI::App* cmd : {train, robust, ablate, grad}) {
    if (cmd->parsed() && cmd->count("--seed") > 0) o.seed = seed;
  }

  try {
    if (train->parsed()) return Train(o);
    if (eval->parsed()) return Eval(o);
    if (robust->parsed()) return Robustness(o);
    if (ablate->parsed()) return Ablate(o);
    if (grad->parsed()) return GradCheck(o);
    if (features->parsed()) return ExportFeatures(o);
  } catch (const NumericAbort& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
