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

#ifndef MPSL_TRAINER_H_
#define MPSL_TRAINER_H_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpsl/config.h"
#include "mpsl/data.h"
#include "mpsl/forward.h"
#include "mpsl/network.h"
#include "mpsl/tape.h"

namespace mpsl {

// Raised when the loss or a parameter stops being finite.
class NumericAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Adam over the flattened learnable parameters (W1, lambda, eta, beta per
// layer, then lambda_f and lambda_p).
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;
};

std::vector<double> FlattenParameters(const Network& net);
void ScatterParameters(const std::vector<double>& flat, Network& net);
std::vector<double> FlattenGradients(const GradientSet& g);
// 1 where the optimizer may move the entry under `mode`.
std::vector<char> TrainableMask(const Network& net, LambdaMode mode);

// One Adam step on the masked entries, then lambda_f/lambda_p projection.
// eta and beta step with lr * local_lr_scale.
void AdamStep(Network& net, const GradientSet& grads, LambdaMode mode, double lr,
              double local_lr_scale, AdamState& state);

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double seconds = 0.0;
};

struct BatchResult {
  double loss = 0.0;
  int correct = 0;
  GradientSet grads;
};

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;
  std::vector<int> predictions;
};

// Worker cap from MPSL_THREADS, defaulting to the hardware concurrency.
int WorkerCount();

class Trainer {
 public:
  // Builds a fresh network from the config. In frozen-learned mode the
  // fusion coefficients are copied from `lambda_source`.
  explicit Trainer(TrainConfig cfg, const Network* lambda_source = nullptr);
  Trainer(TrainConfig cfg, Network net, AdamState adam, int epoch);

  // Forward window, backward, one optimizer step.
  BatchResult TrainBatch(const DenseMatrix& inputs, const std::vector<int>& labels,
                         std::size_t batch_index = 0, EventLog* log = nullptr);

  // One pass over `train` in a seed- and epoch-derived order.
  EpochMetrics TrainEpoch(const Dataset& train, EventLog* log = nullptr);

  const TrainConfig& config() const { return cfg_; }
  const Network& net() const { return net_; }
  Network& net() { return net_; }
  const AdamState& optimizer() const { return adam_; }
  int epoch() const { return epoch_; }

 private:
  void CheckFinite(double loss, std::size_t batch_index) const;

  TrainConfig cfg_;
  Network net_;
  AdamState adam_;
  int epoch_ = 0;
};

// Plasticity-free classification of `data`. Labels are the argmax of the
// output spike counts; ties go to the larger summed membrane potential.
EvalResult Evaluate(const Network& net, const Dataset& data, int timesteps, bool merged);

std::vector<int> PredictLabels(const InferenceResult& result);

struct AblationRow {
  LambdaMode mode;
  std::uint64_t seed;
  int epoch;
  double loss;
  double accuracy;
  std::vector<double> lambdas;  // layer-major, 3 per layer
};

struct AblationReport {
  std::vector<AblationRow> rows;
  double fixed_final_mean = 0.0;
  double learnable_final_mean = 0.0;
  double frozen_final_mean = 0.0;
  bool learnable_at_least_fixed = false;
};

// Runs learnable, fixed and frozen-learned training on the same data order
// for every seed. Frozen-learned reuses the learnable run's final lambda.
AblationReport RunAblation(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                           const Splits& splits);

std::vector<double> LambdaValues(const Network& net);

}  // namespace mpsl

#endif  // MPSL_TRAINER_H_
