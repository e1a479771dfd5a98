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

#ifndef MPSL_LAYER_H_
#define MPSL_LAYER_H_

#include <array>
#include <cstddef>

#include "mpsl/numerics.h"

namespace mpsl {

inline constexpr std::size_t kNumPaths = 3;

// Path indices into MultiPathLayer::weights and ::lambda.
enum Path : std::size_t {
  kGradientPath = 0,  // W1, trained by surrogate-gradient BPTT
  kHebbianPath = 1,   // W2, local correlation rule
  kSbpPath = 2,       // W3, self-backpropagation rule
};

// One fully-connected layer carrying a weight matrix per plasticity
// mechanism. All matrices are [fan_out x fan_in].
struct MultiPathLayer {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  std::array<DenseMatrix, kNumPaths> weights;
  std::array<double, kNumPaths> lambda = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  double eta = 1e-3;
  double beta = 0.0;
  // Most recent realized change of W2.
  DenseMatrix dw2_last;

  MultiPathLayer() = default;
  MultiPathLayer(std::size_t in, std::size_t out);

  DenseMatrix& w1() { return weights[kGradientPath]; }
  DenseMatrix& w2() { return weights[kHebbianPath]; }
  DenseMatrix& w3() { return weights[kSbpPath]; }
  const DenseMatrix& w1() const { return weights[kGradientPath]; }
  const DenseMatrix& w2() const { return weights[kHebbianPath]; }
  const DenseMatrix& w3() const { return weights[kSbpPath]; }

  // Throws ConfigError when any matrix disagrees with [fan_out x fan_in].
  void Validate() const;
};

struct SbpParams {
  double lambda_f = 0.5;
  double lambda_p = 0.5;
  double tau_w = 40.0;

  static constexpr double kFractionMin = 0.1;
  static constexpr double kFractionMax = 1.0;

  void Validate() const;
  // Clamps both fraction factors into [0.1, 1].
  void Project();
};

}  // namespace mpsl

#endif  // MPSL_LAYER_H_
