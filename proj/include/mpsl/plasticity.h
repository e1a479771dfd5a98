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

#ifndef MPSL_PLASTICITY_H_
#define MPSL_PLASTICITY_H_

#include "mpsl/layer.h"
#include "mpsl/numerics.h"

namespace mpsl {

// How the Hebbian learning signal consumed by the SBP rule is formed.
enum class DeltaMode {
  kFullDifference,  // dW2 = W2_new - W2_old, decay included
  kIncrementOnly,   // dW2 = eta * s (rho(U) + beta), decay excluded
};

// Bounded nonlinearity applied to postsynaptic potentials: logistic sigmoid.
double Rho(double x);
double RhoPrime(double x);

double DecayFactor(double dt, double tau_w);

// Batched Hebbian step. `u` is [B x fan_out], `s_prev` is [B x fan_in]; the
// increment is averaged over the batch:
//   W2_new = W2_old * decay + (eta / B) * sum_b (rho(u_b) + beta) s_b^T
DenseMatrix HebbianStep(const DenseMatrix& w2_old, double eta, double beta,
                        const DenseMatrix& u, const DenseMatrix& s_prev,
                        double decay);

// Single-sample Hebbian rule on a layer; updates W2 and dw2_last.
void HebbianUpdate(MultiPathLayer& layer, const DenseVector& s_prev,
                   const DenseVector& u, const SbpParams& params, double dt,
                   DeltaMode mode = DeltaMode::kFullDifference);

struct Modulation {
  DenseVector diag;
  bool degenerate = false;
};

// Diagonal of lambda_f * diag(1 + lambda_p * normalize(colsum(A))). A null
// `next_dw2` (top layer) yields lambda_f * 1 of length `fan_out`.
Modulation SbpModulation(const DenseMatrix* next_dw2, const SbpParams& params,
                         std::size_t fan_out);

// Multiplies row j of m by diag[j].
DenseMatrix RowScaled(const DenseVector& diag, const DenseMatrix& m);

// W3_new = W3_old * decay + diag(modulation) * dw2_last.
void SbpUpdate(MultiPathLayer& layer, const DenseMatrix* next_dw2,
               const SbpParams& params, double dt);

// Deploy-time weight: sum_k lambda_k * W_k.
DenseMatrix MergeWeights(const MultiPathLayer& layer);

}  // namespace mpsl

#endif  // MPSL_PLASTICITY_H_
