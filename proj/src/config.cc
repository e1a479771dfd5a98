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

#include "mpsl/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mpsl {
namespace {

using nlohmann::json;

// Reads typed fields out of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    MPSL_CHECK(obj_.is_object(), Where("") + ": expected an object");
  }

  template <typename T>
  void Get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(Where(key) + ": wrong type");
    }
  }

  const json* Child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string Where(const std::string& key) const {
    return path_.empty() ? key : (key.empty() ? path_ : path_ + "." + key);
  }

  void RejectUnknown() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(Where(item.key()) + ": unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T>
void NonNegativeCount(ObjectReader& r, const char* key, T& out) {
  long long v = static_cast<long long>(out);
  r.Get(key, v);
  MPSL_CHECK(v >= 0, r.Where(key) + ": must be non-negative");
  out = static_cast<T>(v);
}

}  // namespace

std::string ToString(LambdaMode mode) {
  switch (mode) {
    case LambdaMode::kFixed: return "fixed";
    case LambdaMode::kLearnable: return "learnable";
    case LambdaMode::kFrozenLearned: return "frozen-learned";
  }
  return "?";
}

LambdaMode ParseLambdaMode(const std::string& name) {
  if (name == "fixed") return LambdaMode::kFixed;
  if (name == "learnable") return LambdaMode::kLearnable;
  if (name == "frozen-learned") return LambdaMode::kFrozenLearned;
  throw ConfigError("lambda_mode: unknown value '" + name + "'");
}

void TrainConfig::Validate() const {
  MPSL_CHECK(timesteps >= 1, "T: must be at least 1");
  MPSL_CHECK(epochs >= 0, "epochs: must be non-negative");
  MPSL_CHECK(batch_size >= 1, "batch_size: must be at least 1");
  MPSL_CHECK(lr > 0.0, "lr: must be positive");
  MPSL_CHECK(local_lr_scale >= 0.0, "plasticity.lr_scale: must be non-negative");
  MPSL_CHECK(lambda_mode != LambdaMode::kFrozenLearned || !lambda_source.empty(),
             "lambda_source: required when lambda_mode is frozen-learned");
  MPSL_CHECK(network.layer_sizes.size() >= 2, "layers: need at least input and output sizes");
  for (std::size_t n : network.layer_sizes) MPSL_CHECK(n > 0, "layers: sizes must be positive");
  MPSL_CHECK(static_cast<int>(network.layer_sizes.back()) == dataset.num_classes,
             "layers: output size must equal dataset.classes");
  network.lif.Validate();
  network.sbp.Validate();
  MPSL_CHECK(network.local_init_scale >= 0.0, "plasticity.init_scale: must be non-negative");
  if (dataset.kind == DatasetConfig::Kind::kSynthetic) {
    MPSL_CHECK(dataset.blobs.classes >= 2, "dataset.classes: need at least 2");
    MPSL_CHECK(network.layer_sizes.front() == dataset.blobs.width * dataset.blobs.height,
               "layers: input size must equal dataset.width * dataset.height");
    MPSL_CHECK(dataset.blobs.sigma >= 0.0, "dataset.sigma: must be non-negative");
  } else {
    MPSL_CHECK(!dataset.train_images.empty() && !dataset.train_labels.empty() &&
                   !dataset.test_images.empty() && !dataset.test_labels.empty(),
               "dataset: idx datasets need train_images, train_labels, test_images, test_labels");
  }
}

TrainConfig ParseConfig(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  TrainConfig cfg;
  ObjectReader root(doc, "");
  root.Get("T", cfg.timesteps);
  root.Get("epochs", cfg.epochs);
  NonNegativeCount(root, "batch_size", cfg.batch_size);
  root.Get("lr", cfg.lr);
  root.Get("seed", cfg.seed);
  std::string mode = ToString(cfg.lambda_mode);
  root.Get("lambda_mode", mode);
  cfg.lambda_mode = ParseLambdaMode(mode);
  root.Get("lambda_source", cfg.lambda_source);
  std::string schedule = "batch-mean";
  root.Get("schedule", schedule);
  if (schedule == "batch-mean") {
    cfg.schedule = PlasticitySchedule::kBatchMean;
  } else if (schedule == "per-item") {
    cfg.schedule = PlasticitySchedule::kPerItem;
  } else {
    throw ConfigError("schedule: unknown value '" + schedule + "'");
  }
  std::vector<long long> layers;
  root.Get("layers", layers);
  for (long long n : layers) {
    MPSL_CHECK(n > 0, "layers: sizes must be positive");
    cfg.network.layer_sizes.push_back(static_cast<std::size_t>(n));
  }
  std::string init = "kaiming";
  root.Get("init", init);
  if (init == "kaiming") {
    cfg.network.init = InitKind::kKaiming;
  } else if (init == "zero") {
    cfg.network.init = InitKind::kZero;
  } else {
    throw ConfigError("init: unknown value '" + init + "'");
  }

  if (const json* lif = root.Child("lif")) {
    ObjectReader r(*lif, "lif");
    r.Get("v_th", cfg.network.lif.v_th);
    r.Get("rho_m", cfg.network.lif.rho_m);
    r.Get("a", cfg.network.lif.a);
    r.Get("dt", cfg.network.lif.dt);
    r.RejectUnknown();
  }
  if (const json* sbp = root.Child("sbp")) {
    ObjectReader r(*sbp, "sbp");
    r.Get("lambda_f", cfg.network.sbp.lambda_f);
    r.Get("lambda_p", cfg.network.sbp.lambda_p);
    r.Get("tau_w", cfg.network.sbp.tau_w);
    r.RejectUnknown();
  }
  if (const json* p = root.Child("plasticity")) {
    ObjectReader r(*p, "plasticity");
    r.Get("eta", cfg.network.eta_init);
    r.Get("beta", cfg.network.beta_init);
    r.Get("init_scale", cfg.network.local_init_scale);
    r.Get("lr_scale", cfg.local_lr_scale);
    std::string delta = "full";
    r.Get("delta", delta);
    if (delta == "full") {
      cfg.network.delta_mode = DeltaMode::kFullDifference;
    } else if (delta == "increment") {
      cfg.network.delta_mode = DeltaMode::kIncrementOnly;
    } else {
      throw ConfigError("plasticity.delta: unknown value '" + delta + "'");
    }
    r.RejectUnknown();
  }
  if (const json* d = root.Child("dataset")) {
    ObjectReader r(*d, "dataset");
    std::string kind = "synthetic";
    r.Get("kind", kind);
    DatasetConfig& ds = cfg.dataset;
    r.Get("classes", ds.num_classes);
    NonNegativeCount(r, "max_train", ds.max_train);
    NonNegativeCount(r, "max_test", ds.max_test);
    if (kind == "synthetic") {
      ds.kind = DatasetConfig::Kind::kSynthetic;
      NonNegativeCount(r, "n_per_class", ds.blobs.n_per_class);
      NonNegativeCount(r, "test_per_class", ds.test_per_class);
      NonNegativeCount(r, "width", ds.blobs.width);
      NonNegativeCount(r, "height", ds.blobs.height);
      r.Get("sigma", ds.blobs.sigma);
      ds.blobs.classes = ds.num_classes;
    } else if (kind == "idx") {
      ds.kind = DatasetConfig::Kind::kIdx;
      r.Get("train_images", ds.train_images);
      r.Get("train_labels", ds.train_labels);
      r.Get("test_images", ds.test_images);
      r.Get("test_labels", ds.test_labels);
    } else {
      throw ConfigError("dataset.kind: unknown value '" + kind + "'");
    }
    r.RejectUnknown();
  }
  root.RejectUnknown();
  cfg.Validate();
  return cfg;
}

TrainConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  TrainConfig cfg = ParseConfig(text.str());
  // IDX paths are relative to the config file.
  const auto base = path.parent_path();
  for (std::string* p : {&cfg.dataset.train_images, &cfg.dataset.train_labels,
                         &cfg.dataset.test_images, &cfg.dataset.test_labels,
                         &cfg.lambda_source}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return cfg;
}

std::string ToJson(const TrainConfig& cfg) {
  json j;
  j["T"] = cfg.timesteps;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["lr"] = cfg.lr;
  j["seed"] = cfg.seed;
  j["lambda_mode"] = ToString(cfg.lambda_mode);
  j["lambda_source"] = cfg.lambda_source;
  j["schedule"] = cfg.schedule == PlasticitySchedule::kBatchMean ? "batch-mean" : "per-item";
  j["layers"] = cfg.network.layer_sizes;
  j["init"] = cfg.network.init == InitKind::kKaiming ? "kaiming" : "zero";
  j["lif"] = {{"v_th", cfg.network.lif.v_th},
              {"rho_m", cfg.network.lif.rho_m},
              {"a", cfg.network.lif.a},
              {"dt", cfg.network.lif.dt}};
  j["sbp"] = {{"lambda_f", cfg.network.sbp.lambda_f},
              {"lambda_p", cfg.network.sbp.lambda_p},
              {"tau_w", cfg.network.sbp.tau_w}};
  j["plasticity"] = {
      {"eta", cfg.network.eta_init},
      {"beta", cfg.network.beta_init},
      {"init_scale", cfg.network.local_init_scale},
      {"lr_scale", cfg.local_lr_scale},
      {"delta", cfg.network.delta_mode == DeltaMode::kFullDifference ? "full" : "increment"}};
  const DatasetConfig& ds = cfg.dataset;
  json d = {{"classes", ds.num_classes}, {"max_train", ds.max_train}, {"max_test", ds.max_test}};
  if (ds.kind == DatasetConfig::Kind::kSynthetic) {
    d["kind"] = "synthetic";
    d["n_per_class"] = ds.blobs.n_per_class;
    d["test_per_class"] = ds.test_per_class;
    d["width"] = ds.blobs.width;
    d["height"] = ds.blobs.height;
    d["sigma"] = ds.blobs.sigma;
  } else {
    d["kind"] = "idx";
    d["train_images"] = ds.train_images;
    d["train_labels"] = ds.train_labels;
    d["test_images"] = ds.test_images;
    d["test_labels"] = ds.test_labels;
  }
  j["dataset"] = d;
  return j.dump(2);
}

std::uint64_t ConfigHash(const TrainConfig& cfg) {
  // FNV-1a over the canonical text.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : ToJson(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Splits LoadSplits(const DatasetConfig& cfg, std::uint64_t seed) {
  Splits out;
  if (cfg.kind == DatasetConfig::Kind::kSynthetic) {
    // One draw for both splits so they share class means.
    SeededRng rng(DeriveSeed(seed, 2));
    BlobSpec all = cfg.blobs;
    all.n_per_class = cfg.blobs.n_per_class + cfg.test_per_class;
    Dataset full = SyntheticBlobs(rng, all);
    const std::size_t n_train = cfg.blobs.n_per_class * static_cast<std::size_t>(cfg.blobs.classes);
    out.train = full;
    out.train.images.assign(full.images.begin(), full.images.begin() + static_cast<long>(n_train));
    out.train.labels.assign(full.labels.begin(), full.labels.begin() + static_cast<long>(n_train));
    out.test = full;
    out.test.images.assign(full.images.begin() + static_cast<long>(n_train), full.images.end());
    out.test.labels.assign(full.labels.begin() + static_cast<long>(n_train), full.labels.end());
  } else {
    out.train = LoadIdx(cfg.train_images, cfg.train_labels, cfg.num_classes);
    out.test = LoadIdx(cfg.test_images, cfg.test_labels, cfg.num_classes);
  }
  if (cfg.max_train > 0) out.train = out.train.Head(cfg.max_train);
  if (cfg.max_test > 0) out.test = out.test.Head(cfg.max_test);
  return out;
}

}  // namespace mpsl
