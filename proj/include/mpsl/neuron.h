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

#ifndef MPSL_NEURON_H_
#define MPSL_NEURON_H_

#include <span>
#include <vector>

#include "mpsl/layer.h"
#include "mpsl/numerics.h"

namespace mpsl {

struct LifConfig {
  double v_th = 0.3;   // firing threshold
  double rho_m = 0.5;  // membrane decay factor
  double a = 1.0;      // surrogate window width
  double dt = 1.0;     // simulation step length

  void Validate() const;
};

// Per-layer, per-timestep trajectories of one episode. Index as [t][l].
struct EpisodeState {
  std::vector<std::vector<DenseVector>> u;
  std::vector<std::vector<DenseVector>> s;
  std::vector<std::vector<DenseVector>> i;
};

// I = sum_k lambda_k * W_k * s_prev.
DenseVector FusedInput(const MultiPathLayer& layer, const DenseVector& s_prev);

// U = rho_m * (U_prev - S_prev * v_th) + I  (soft reset).
DenseVector MembraneStep(const DenseVector& u_prev, const DenseVector& s_prev,
                         const DenseVector& input, const LifConfig& cfg);

// 1 where U >= v_th, else 0.
DenseVector Spike(const DenseVector& u, const LifConfig& cfg);

// (1/a) where |U - v_th| < a/2, else 0.
DenseVector SurrogateGrad(const DenseVector& u, const LifConfig& cfg);

// Elementwise kernels shared by the batched paths. Inputs and outputs are
// flat and of equal length.
void MembraneStepInto(std::span<const double> u_prev,
                      std::span<const double> s_prev,
                      std::span<const double> input, const LifConfig& cfg,
                      std::span<double> out);
void SpikeInto(std::span<const double> u, double v_th, std::span<double> out);
double SurrogateAt(double u, double v_th, double a);

}  // namespace mpsl

#endif  // MPSL_NEURON_H_
