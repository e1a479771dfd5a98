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

#ifndef MPSL_NETWORK_H_
#define MPSL_NETWORK_H_

#include <cstdint>
#include <vector>

#include "mpsl/layer.h"
#include "mpsl/neuron.h"
#include "mpsl/numerics.h"
#include "mpsl/plasticity.h"

namespace mpsl {

enum class InitKind { kKaiming, kZero };

struct NetworkSpec {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., output
  LifConfig lif;
  SbpParams sbp;
  DeltaMode delta_mode = DeltaMode::kFullDifference;
  double eta_init = 1e-3;
  double beta_init = 0.0;
  double local_init_scale = 0.1;  // W2/W3 init relative to W1
  InitKind init = InitKind::kKaiming;
};

// Fully-connected multi-path spiking network. lambda_f and lambda_p (in
// `sbp`) are shared by every layer.
struct Network {
  std::vector<MultiPathLayer> layers;
  LifConfig lif;
  SbpParams sbp;
  DeltaMode delta_mode = DeltaMode::kFullDifference;

  std::size_t input_size() const { return layers.front().fan_in; }
  std::size_t output_size() const { return layers.back().fan_out; }
  void Validate() const;
};

Network BuildNetwork(const NetworkSpec& spec, std::uint64_t seed);

struct InferenceResult {
  DenseMatrix counts;  // [B x classes], spike counts summed over T
  DenseMatrix u_sum;   // [B x classes], output membrane summed over T
  DenseMatrix penultimate_u;  // [B x n], membrane at the final step
};

// Plasticity-free forward over a batch of inputs ([B x input]) presented as
// direct current for `timesteps` steps. `merged` selects the single merged
// weight per layer instead of the three-path fusion.
InferenceResult Infer(const Network& net, const DenseMatrix& inputs,
                      int timesteps, bool merged);

// argmax over each row, first index wins ties.
std::vector<int> ArgmaxRows(const DenseMatrix& m);

}  // namespace mpsl

#endif  // MPSL_NETWORK_H_
