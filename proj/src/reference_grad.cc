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

#include "mpsl/reference_grad.h"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace mpsl {
namespace {

// Value and tangent along the one parameter being differentiated.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator/(Dual a, Dual b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
Dual Lift(double c) { return {c, 0.0}; }
Dual Exp(Dual a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}
Dual Log(Dual a) { return {std::log(a.v), a.d / a.v}; }
Dual Sigmoid(Dual a) {
  const double s = 1.0 / (1.0 + std::exp(-a.v));
  return {s, s * (1.0 - s) * a.d};
}

using Vec = std::vector<Dual>;
using Mat = std::vector<Vec>;  // [row][col]

struct DualLayer {
  Mat w1, w2, w3;
  Dual lambda[3];
  Dual eta, beta;
  std::size_t in = 0, out = 0;
};

// Which scalar carries the unit tangent.
struct Seed {
  enum Kind { kNone, kW1, kLambda, kEta, kBeta, kLambdaF, kLambdaP } kind = kNone;
  std::size_t layer = 0, row = 0, col = 0;
};

Mat Lifted(const DenseMatrix& m) {
  Mat out(m.rows(), Vec(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = Lift(m(r, c));
  }
  return out;
}

Dual ScalarForward(const Network& net, const DenseMatrix& inputs,
                   const std::vector<int>& labels, int timesteps, const Seed& seed) {
  const double v_th = net.lif.v_th;
  const double rho_m = net.lif.rho_m;
  const double a = net.lif.a;
  const double decay = std::exp(-net.lif.dt / net.sbp.tau_w);
  const bool full_difference = net.delta_mode == DeltaMode::kFullDifference;
  const std::size_t depth = net.layers.size();
  const std::size_t batch = inputs.rows();

  std::vector<DualLayer> layers(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    const MultiPathLayer& src = net.layers[l];
    DualLayer& dst = layers[l];
    dst.in = src.fan_in;
    dst.out = src.fan_out;
    dst.w1 = Lifted(src.w1());
    dst.w2 = Lifted(src.w2());
    dst.w3 = Lifted(src.w3());
    for (int k = 0; k < 3; ++k) dst.lambda[k] = Lift(src.lambda[static_cast<std::size_t>(k)]);
    dst.eta = Lift(src.eta);
    dst.beta = Lift(src.beta);
  }
  Dual lambda_f = Lift(net.sbp.lambda_f);
  Dual lambda_p = Lift(net.sbp.lambda_p);
  switch (seed.kind) {
    case Seed::kNone: break;
    case Seed::kW1: layers[seed.layer].w1[seed.row][seed.col].d = 1.0; break;
    case Seed::kLambda: layers[seed.layer].lambda[seed.row].d = 1.0; break;
    case Seed::kEta: layers[seed.layer].eta.d = 1.0; break;
    case Seed::kBeta: layers[seed.layer].beta.d = 1.0; break;
    case Seed::kLambdaF: lambda_f.d = 1.0; break;
    case Seed::kLambdaP: lambda_p.d = 1.0; break;
  }

  // Per batch item, per layer state.
  std::vector<std::vector<Vec>> u(batch, std::vector<Vec>(depth));
  std::vector<std::vector<Vec>> s(batch, std::vector<Vec>(depth));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t l = 0; l < depth; ++l) {
      u[b][l].assign(layers[l].out, Lift(0.0));
      s[b][l].assign(layers[l].out, Lift(0.0));
    }
  }
  const std::size_t classes = layers.back().out;
  std::vector<Vec> counts(batch, Vec(classes, Lift(0.0)));
  std::vector<Mat> signal(depth);

  for (int t = 0; t < timesteps; ++t) {
    for (std::size_t l = 0; l < depth; ++l) {
      DualLayer& L = layers[l];
      std::vector<Vec> pre(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        if (l == 0) {
          pre[b].resize(L.in);
          for (std::size_t i = 0; i < L.in; ++i) pre[b][i] = Lift(inputs(b, i));
        } else {
          pre[b] = s[b][l - 1];
        }
      }
      std::vector<Vec> new_u(batch, Vec(L.out));
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < L.out; ++j) {
          Dual p1, p2, p3;
          for (std::size_t i = 0; i < L.in; ++i) {
            p1 = p1 + L.w1[j][i] * pre[b][i];
            p2 = p2 + L.w2[j][i] * pre[b][i];
            p3 = p3 + L.w3[j][i] * pre[b][i];
          }
          const Dual current = L.lambda[0] * p1 + L.lambda[1] * p2 + L.lambda[2] * p3;
          new_u[b][j] = Lift(rho_m) * (u[b][l][j] - s[b][l][j] * Lift(v_th)) + current;
        }
      }
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < L.out; ++j) {
          const Dual& uj = new_u[b][j];
          const double fired = uj.v >= v_th ? 1.0 : 0.0;
          const double slope = std::abs(uj.v - v_th) < a / 2.0 ? 1.0 / a : 0.0;
          s[b][l][j] = {fired, slope * uj.d};
        }
        u[b][l] = new_u[b];
      }
      // Hebbian rule, batch-averaged increment.
      Mat updated(L.out, Vec(L.in));
      signal[l].assign(L.out, Vec(L.in));
      const Dual inv_batch = Lift(1.0 / static_cast<double>(batch));
      for (std::size_t j = 0; j < L.out; ++j) {
        for (std::size_t i = 0; i < L.in; ++i) {
          Dual corr;
          for (std::size_t b = 0; b < batch; ++b) {
            corr = corr + pre[b][i] * (Sigmoid(u[b][l][j]) + L.beta);
          }
          const Dual increment = L.eta * corr * inv_batch;
          updated[j][i] = L.w2[j][i] * Lift(decay) + increment;
          signal[l][j][i] = full_difference ? updated[j][i] - L.w2[j][i] : increment;
        }
      }
      L.w2 = updated;
    }
    // SBP rule, top layer first.
    for (std::size_t l = depth; l-- > 0;) {
      DualLayer& L = layers[l];
      Vec diag(L.out, lambda_f);
      if (l + 1 < depth) {
        const Mat& next = signal[l + 1];
        Vec col(L.out);
        Dual total;
        for (std::size_t k = 0; k < L.out; ++k) {
          for (std::size_t r = 0; r < next.size(); ++r) col[k] = col[k] + next[r][k];
          total = total + col[k];
        }
        for (std::size_t k = 0; k < L.out; ++k) {
          const Dual share = std::abs(total.v) < 1e-8 ? Lift(0.0) : col[k] / total;
          diag[k] = lambda_f * (Lift(1.0) + lambda_p * share);
        }
      }
      for (std::size_t j = 0; j < L.out; ++j) {
        for (std::size_t i = 0; i < L.in; ++i) {
          L.w3[j][i] = L.w3[j][i] * Lift(decay) + diag[j] * signal[l][j][i];
        }
      }
    }
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < classes; ++c) counts[b][c] = counts[b][c] + s[b][depth - 1][c];
    }
  }

  Dual loss;
  for (std::size_t b = 0; b < batch; ++b) {
    double peak = counts[b][0].v;
    for (const Dual& z : counts[b]) peak = std::max(peak, z.v);
    Dual denom;
    for (const Dual& z : counts[b]) denom = denom + Exp(z - Lift(peak));
    const Dual& target = counts[b][static_cast<std::size_t>(labels[b])];
    loss = loss + (Log(denom) - (target - Lift(peak)));
  }
  return loss / Lift(static_cast<double>(batch));
}

}  // namespace

double ReferenceLoss(const Network& net, const DenseMatrix& inputs,
                     const std::vector<int>& labels, int timesteps) {
  return ScalarForward(net, inputs, labels, timesteps, Seed{}).v;
}

GradientSet ReferenceGradients(const Network& net, const DenseMatrix& inputs,
                               const std::vector<int>& labels, int timesteps) {
  MPSL_CHECK(inputs.cols() == net.input_size(), "reference: input width mismatch");
  MPSL_CHECK(labels.size() == inputs.rows(), "reference: one label per row required");
  GradientSet g;
  g.layers.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const MultiPathLayer& layer = net.layers[l];
    LayerGradients& lg = g.layers[l];
    lg.w1 = DenseMatrix(layer.fan_out, layer.fan_in);
    for (std::size_t r = 0; r < layer.fan_out; ++r) {
      for (std::size_t c = 0; c < layer.fan_in; ++c) {
        lg.w1(r, c) = ScalarForward(net, inputs, labels, timesteps, {Seed::kW1, l, r, c}).d;
      }
    }
    for (std::size_t k = 0; k < 3; ++k) {
      lg.lambda[k] = ScalarForward(net, inputs, labels, timesteps, {Seed::kLambda, l, k, 0}).d;
    }
    lg.eta = ScalarForward(net, inputs, labels, timesteps, {Seed::kEta, l, 0, 0}).d;
    lg.beta = ScalarForward(net, inputs, labels, timesteps, {Seed::kBeta, l, 0, 0}).d;
  }
  g.lambda_f = ScalarForward(net, inputs, labels, timesteps, {Seed::kLambdaF, 0, 0, 0}).d;
  g.lambda_p = ScalarForward(net, inputs, labels, timesteps, {Seed::kLambdaP, 0, 0, 0}).d;
  return g;
}

}  // namespace mpsl
