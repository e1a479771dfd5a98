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

#ifndef MPSL_TAPE_H_
#define MPSL_TAPE_H_

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "mpsl/layer.h"
#include "mpsl/network.h"
#include "mpsl/numerics.h"

namespace mpsl {

enum class OpKind {
  kParam,
  kConst,
  kFusedLinear,    // Y = X * (sum_k lambda_k W_k)^T
  kMembrane,       // soft-reset leaky integration
  kSpike,          // Heaviside forward, rectangular surrogate backward
  kHebbianStep,    // batched Hebbian update of W2
  kDelta,          // Y = A - c * B
  kSbpModulation,  // diagonal of the SBP modulation matrix
  kSbpStep,        // W3 update
  kAccumulate,     // elementwise sum of inputs
  kSoftmaxXent,    // mean softmax cross-entropy against integer labels
  kSquaredError,   // mean 0.5 * ||Y - target||^2 per row
};

const char* OpName(OpKind kind);

enum class ParamSlot { kW1, kLambda, kEta, kBeta, kLambdaF, kLambdaP };

struct ParamRef {
  ParamSlot slot = ParamSlot::kW1;
  int layer = -1;  // -1 for the shared lambda_f / lambda_p
};

struct TapeNode {
  OpKind kind = OpKind::kConst;
  std::vector<int> inputs;  // -1 stands for an all-zero operand
  DenseMatrix value;
  bool requires_grad = false;
  ParamRef param;           // kParam only
  double coeff = 0.0;       // decay (Hebbian/SBP) or subtraction coefficient
  std::size_t width = 0;    // kSbpModulation output length
  std::vector<int> labels;  // kSoftmaxXent
  DenseMatrix target;       // kSquaredError
  DenseMatrix cache;        // merged weight, softmax probabilities or shares
  double cache_total = 0.0; // kSbpModulation colsum total
  bool degenerate = false;  // kSbpModulation guard fired
};

struct LayerGradients {
  DenseMatrix w1;
  std::array<double, kNumPaths> lambda{};
  double eta = 0.0;
  double beta = 0.0;
};

struct GradientSet {
  std::vector<LayerGradients> layers;
  double lambda_f = 0.0;
  double lambda_p = 0.0;

  static GradientSet ZerosLike(const Network& net);
  // this += scale * other; shapes must match.
  void Accumulate(const GradientSet& other, double scale = 1.0);
  bool AllFinite() const;
};

struct TapeSettings {
  double v_th = 0.3;
  double rho_m = 0.5;
  double surrogate_width = 1.0;
};

class Tape {
 public:
  explicit Tape(TapeSettings settings) : settings_(settings) {}

  int Param(ParamRef ref, DenseMatrix value);
  int Const(DenseMatrix value);
  int FusedLinear(int w1, int w2, int w3, int lambda, int x);
  int Membrane(int u_prev, int s_prev, int input);
  int Spike(int u);
  int HebbianStep(int w2_old, int eta, int beta, int u, int s_prev, double decay);
  int Delta(int updated, int old, double old_coeff);
  int SbpModulation(int lambda_f, int lambda_p, int next_delta, std::size_t width);
  int SbpStep(int w3_old, int diag, int delta, double decay);
  int Accumulate(std::vector<int> terms);
  int SoftmaxXent(int logits, std::vector<int> labels);
  int SquaredError(int prediction, DenseMatrix target);

  std::size_t size() const { return nodes_.size(); }
  const TapeNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const TapeSettings& settings() const { return settings_; }

  // Reverse sweep from `root` seeded with `seed` times the identity. Entry k
  // is the adjoint of node k, empty where no gradient reaches the node.
  // `surrogate_width` overrides the width used at spike nodes.
  std::vector<DenseMatrix> Adjoints(int root, double seed,
                                    std::optional<double> surrogate_width = {}) const;

  // Adjoints of the parameter leaves gathered into a GradientSet shaped after
  // the parameters recorded on this tape.
  GradientSet Backward(int root, double loss_grad = 1.0,
                       std::optional<double> surrogate_width = {}) const;

  // Re-evaluates every node from its inputs in recording order.
  Tape Replay() const;

 private:
  int Push(TapeNode node);
  void Evaluate(TapeNode& node) const;
  const DenseMatrix& ValueOf(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

  TapeSettings settings_;
  std::vector<TapeNode> nodes_;
};

}  // namespace mpsl

#endif  // MPSL_TAPE_H_
