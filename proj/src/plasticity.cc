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

#include "mpsl/plasticity.h"

#include <cmath>

namespace mpsl {

double Rho(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double RhoPrime(double x) {
  const double r = Rho(x);
  return r * (1.0 - r);
}

double DecayFactor(double dt, double tau_w) { return std::exp(-dt / tau_w); }

DenseMatrix HebbianStep(const DenseMatrix& w2_old, double eta, double beta,
                        const DenseMatrix& u, const DenseMatrix& s_prev,
                        double decay) {
  MPSL_CHECK(u.rows() == s_prev.rows() && u.rows() > 0,
             "hebbian_update: batch size mismatch");
  MPSL_CHECK(w2_old.rows() == u.cols() && w2_old.cols() == s_prev.cols(),
             "hebbian_update: W2 is " + std::to_string(w2_old.rows()) + "x" +
                 std::to_string(w2_old.cols()) + ", activity is " +
                 std::to_string(u.cols()) + "x" + std::to_string(s_prev.cols()));
  DenseMatrix post(u.rows(), u.cols());
  for (std::size_t k = 0; k < u.size(); ++k) post.data()[k] = Rho(u.data()[k]) + beta;
  DenseMatrix out = MatMulTN(post, s_prev);
  const double scale = eta / static_cast<double>(u.rows());
  const double* old = w2_old.data();
  double* dst = out.data();
  for (std::size_t k = 0; k < out.size(); ++k) dst[k] = old[k] * decay + scale * dst[k];
  return out;
}

void HebbianUpdate(MultiPathLayer& layer, const DenseVector& s_prev,
                   const DenseVector& u, const SbpParams& params, double dt,
                   DeltaMode mode) {
  MPSL_CHECK(s_prev.size() == layer.fan_in, "hebbian_update: s_prev length != fan_in");
  MPSL_CHECK(u.size() == layer.fan_out, "hebbian_update: U length != fan_out");
  const double decay = DecayFactor(dt, params.tau_w);
  const DenseMatrix u_row(1, u.size(), u.values());
  const DenseMatrix s_row(1, s_prev.size(), s_prev.values());
  DenseMatrix updated = HebbianStep(layer.w2(), layer.eta, layer.beta, u_row, s_row, decay);
  DenseMatrix delta = updated;
  Axpy(mode == DeltaMode::kFullDifference ? -1.0 : -decay, layer.w2(), delta);
  layer.w2() = std::move(updated);
  layer.dw2_last = std::move(delta);
}

Modulation SbpModulation(const DenseMatrix* next_dw2, const SbpParams& params,
                         std::size_t fan_out) {
  Modulation out{DenseVector(fan_out, params.lambda_f), false};
  if (next_dw2 == nullptr) return out;
  const DenseVector totals = Colsum(*next_dw2);
  MPSL_CHECK(totals.size() == fan_out,
             "sbp_update: colsum of next-layer dW2 has length " +
                 std::to_string(totals.size()) + ", expected " + std::to_string(fan_out));
  const SimplexResult share = NormalizeSimplex(totals);
  out.degenerate = share.degenerate;
  for (std::size_t j = 0; j < fan_out; ++j) {
    out.diag[j] = params.lambda_f * (1.0 + params.lambda_p * share.value[j]);
  }
  return out;
}

DenseMatrix RowScaled(const DenseVector& diag, const DenseMatrix& m) {
  MPSL_CHECK(diag.size() == m.rows(), "RowScaled: diagonal length != rows");
  DenseMatrix out = m;
  for (std::size_t j = 0; j < m.rows(); ++j) {
    for (double& v : out.row(j)) v *= diag[j];
  }
  return out;
}

void SbpUpdate(MultiPathLayer& layer, const DenseMatrix* next_dw2,
               const SbpParams& params, double dt) {
  const Modulation mod = SbpModulation(next_dw2, params, layer.fan_out);
  const double decay = DecayFactor(dt, params.tau_w);
  DenseMatrix updated = RowScaled(mod.diag, layer.dw2_last);
  Axpy(decay, layer.w3(), updated);
  layer.w3() = std::move(updated);
}

DenseMatrix MergeWeights(const MultiPathLayer& layer) {
  DenseMatrix out(layer.fan_out, layer.fan_in);
  for (std::size_t k = 0; k < kNumPaths; ++k) Axpy(layer.lambda[k], layer.weights[k], out);
  return out;
}

}  // namespace mpsl
