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

#include "mpsl/neuron.h"

#include <algorithm>
#include <cmath>

namespace mpsl {

MultiPathLayer::MultiPathLayer(std::size_t in, std::size_t out)
    : fan_in(in), fan_out(out), dw2_last(out, in) {
  for (auto& w : weights) w = DenseMatrix(out, in);
}

void MultiPathLayer::Validate() const {
  for (const auto& w : weights) {
    MPSL_CHECK(w.rows() == fan_out && w.cols() == fan_in,
               "MultiPathLayer: weight shape " + std::to_string(w.rows()) +
                   "x" + std::to_string(w.cols()) + " != " +
                   std::to_string(fan_out) + "x" + std::to_string(fan_in));
  }
  MPSL_CHECK(dw2_last.SameShape(weights[kHebbianPath]),
             "MultiPathLayer: dW2 shape does not match W2");
}

void SbpParams::Validate() const {
  MPSL_CHECK(lambda_f >= kFractionMin && lambda_f <= kFractionMax,
             "sbp.lambda_f must lie in [0.1, 1]");
  MPSL_CHECK(lambda_p >= kFractionMin && lambda_p <= kFractionMax,
             "sbp.lambda_p must lie in [0.1, 1]");
  MPSL_CHECK(tau_w > 0.0, "sbp.tau_w must be positive");
}

void SbpParams::Project() {
  lambda_f = std::clamp(lambda_f, kFractionMin, kFractionMax);
  lambda_p = std::clamp(lambda_p, kFractionMin, kFractionMax);
}

void LifConfig::Validate() const {
  MPSL_CHECK(v_th > 0.0, "lif.v_th must be positive");
  MPSL_CHECK(rho_m > 0.0 && rho_m <= 1.0, "lif.rho_m must lie in (0, 1]");
  MPSL_CHECK(a > 0.0, "lif.a must be positive");
  MPSL_CHECK(dt > 0.0, "lif.dt must be positive");
}

DenseVector FusedInput(const MultiPathLayer& layer, const DenseVector& s_prev) {
  MPSL_CHECK(s_prev.size() == layer.fan_in,
             "fused_input: input length " + std::to_string(s_prev.size()) +
                 " != fan_in " + std::to_string(layer.fan_in));
  DenseVector out(layer.fan_out);
  for (std::size_t k = 0; k < kNumPaths; ++k) {
    const DenseVector part = Matvec(layer.weights[k], s_prev);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += layer.lambda[k] * part[j];
  }
  return out;
}

void MembraneStepInto(std::span<const double> u_prev,
                      std::span<const double> s_prev,
                      std::span<const double> input, const LifConfig& cfg,
                      std::span<double> out) {
  MPSL_CHECK(u_prev.size() == out.size() && s_prev.size() == out.size() &&
                 input.size() == out.size(),
             "membrane_step: length mismatch");
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = cfg.rho_m * (u_prev[j] - s_prev[j] * cfg.v_th) + input[j];
  }
}

DenseVector MembraneStep(const DenseVector& u_prev, const DenseVector& s_prev,
                         const DenseVector& input, const LifConfig& cfg) {
  DenseVector out(input.size());
  MembraneStepInto(u_prev.span(), s_prev.span(), input.span(), cfg, out.span());
  return out;
}

void SpikeInto(std::span<const double> u, double v_th, std::span<double> out) {
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = u[j] >= v_th ? 1.0 : 0.0;
}

DenseVector Spike(const DenseVector& u, const LifConfig& cfg) {
  DenseVector out(u.size());
  SpikeInto(u.span(), cfg.v_th, out.span());
  return out;
}

double SurrogateAt(double u, double v_th, double a) {
  return std::abs(u - v_th) < 0.5 * a ? 1.0 / a : 0.0;
}

DenseVector SurrogateGrad(const DenseVector& u, const LifConfig& cfg) {
  DenseVector out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = SurrogateAt(u[j], cfg.v_th, cfg.a);
  return out;
}

}  // namespace mpsl
