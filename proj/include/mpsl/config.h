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

#ifndef MPSL_CONFIG_H_
#define MPSL_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "mpsl/data.h"
#include "mpsl/network.h"

namespace mpsl {

enum class LambdaMode { kFixed, kLearnable, kFrozenLearned };

// When the Hebbian/SBP state is advanced within a batch.
enum class PlasticitySchedule {
  kBatchMean,  // items run in lockstep; increments averaged over the batch
  kPerItem,    // items run one after another, each carrying W2/W3 forward
};

struct DatasetConfig {
  enum class Kind { kSynthetic, kIdx } kind = Kind::kSynthetic;
  std::string train_images, train_labels, test_images, test_labels;
  BlobSpec blobs;
  std::size_t test_per_class = 20;
  std::size_t max_train = 0;  // 0 keeps every sample
  std::size_t max_test = 0;
  int num_classes = 10;
};

struct TrainConfig {
  int timesteps = 8;
  int epochs = 5;
  std::size_t batch_size = 100;
  double lr = 1e-3;
  // Step multiplier for eta and beta. Their effect persists for ~tau_w steps
  // while the gradient only sees one window, so full-size steps overshoot.
  double local_lr_scale = 0.01;
  std::uint64_t seed = 1;
  LambdaMode lambda_mode = LambdaMode::kLearnable;
  std::string lambda_source;  // checkpoint path, frozen-learned mode only
  PlasticitySchedule schedule = PlasticitySchedule::kBatchMean;
  DatasetConfig dataset;
  NetworkSpec network;

  void Validate() const;
};

// Parses a JSON document. Unknown keys and type errors raise ConfigError
// naming the offending field.
TrainConfig ParseConfig(const std::string& json_text);
TrainConfig LoadConfig(const std::filesystem::path& path);

// Canonical JSON (sorted keys) used for hashing and checkpoint embedding.
std::string ToJson(const TrainConfig& cfg);
std::uint64_t ConfigHash(const TrainConfig& cfg);

std::string ToString(LambdaMode mode);
LambdaMode ParseLambdaMode(const std::string& name);

struct Splits {
  Dataset train;
  Dataset test;
};

// Loads or synthesizes the train/test splits named by the config.
Splits LoadSplits(const DatasetConfig& cfg, std::uint64_t seed);

}  // namespace mpsl

#endif  // MPSL_CONFIG_H_
