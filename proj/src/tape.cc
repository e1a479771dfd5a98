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

#include "mpsl/tape.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mpsl/neuron.h"
#include "mpsl/plasticity.h"

namespace mpsl {
namespace {

double Scalar(const DenseMatrix& m) { return m(0, 0); }

DenseMatrix ScalarMatrix(double v) { return DenseMatrix(1, 1, v); }

// adj += contribution, adopting the buffer when adj is still empty.
void AddTo(DenseMatrix& adj, DenseMatrix contribution) {
  if (adj.empty()) {
    adj = std::move(contribution);
  } else {
    Axpy(1.0, contribution, adj);
  }
}

DenseMatrix& Slot(std::vector<DenseMatrix>& adj, int id, std::size_t rows, std::size_t cols) {
  DenseMatrix& a = adj[static_cast<std::size_t>(id)];
  if (a.empty()) a = DenseMatrix(rows, cols);
  return a;
}

}  // namespace

const char* OpName(OpKind kind) {
  switch (kind) {
    case OpKind::kParam: return "param";
    case OpKind::kConst: return "const";
    case OpKind::kFusedLinear: return "fused-linear";
    case OpKind::kMembrane: return "membrane";
    case OpKind::kSpike: return "spike";
    case OpKind::kHebbianStep: return "hebbian-step";
    case OpKind::kDelta: return "delta";
    case OpKind::kSbpModulation: return "sbp-modulation";
    case OpKind::kSbpStep: return "sbp-step";
    case OpKind::kAccumulate: return "accumulate";
    case OpKind::kSoftmaxXent: return "softmax-xent";
    case OpKind::kSquaredError: return "squared-error";
  }
  return "?";
}

GradientSet GradientSet::ZerosLike(const Network& net) {
  GradientSet g;
  for (const auto& layer : net.layers) {
    LayerGradients lg;
    lg.w1 = DenseMatrix(layer.fan_out, layer.fan_in);
    g.layers.push_back(std::move(lg));
  }
  return g;
}

void GradientSet::Accumulate(const GradientSet& other, double scale) {
  MPSL_CHECK(layers.size() == other.layers.size(), "GradientSet: layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Axpy(scale, other.layers[l].w1, layers[l].w1);
    for (std::size_t k = 0; k < kNumPaths; ++k) {
      layers[l].lambda[k] += scale * other.layers[l].lambda[k];
    }
    layers[l].eta += scale * other.layers[l].eta;
    layers[l].beta += scale * other.layers[l].beta;
  }
  lambda_f += scale * other.lambda_f;
  lambda_p += scale * other.lambda_p;
}

bool GradientSet::AllFinite() const {
  for (const auto& l : layers) {
    if (!mpsl::AllFinite(l.w1.span()) || !mpsl::AllFinite(l.lambda) ||
        !std::isfinite(l.eta) || !std::isfinite(l.beta)) {
      return false;
    }
  }
  return std::isfinite(lambda_f) && std::isfinite(lambda_p);
}

int Tape::Push(TapeNode node) {
  if (node.kind != OpKind::kParam && node.kind != OpKind::kConst) {
    for (int in : node.inputs) {
      MPSL_CHECK(in < static_cast<int>(nodes_.size()), "tape: input recorded after use");
      if (in >= 0 && nodes_[static_cast<std::size_t>(in)].requires_grad) node.requires_grad = true;
    }
    Evaluate(node);
  }
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::Param(ParamRef ref, DenseMatrix value) {
  TapeNode n;
  n.kind = OpKind::kParam;
  n.param = ref;
  n.value = std::move(value);
  n.requires_grad = true;
  return Push(std::move(n));
}

int Tape::Const(DenseMatrix value) {
  TapeNode n;
  n.kind = OpKind::kConst;
  n.value = std::move(value);
  return Push(std::move(n));
}

int Tape::FusedLinear(int w1, int w2, int w3, int lambda, int x) {
  MPSL_CHECK(ValueOf(lambda).size() == kNumPaths, "fused-linear: lambda must hold 3 values");
  TapeNode n;
  n.kind = OpKind::kFusedLinear;
  n.inputs = {w1, w2, w3, lambda, x};
  return Push(std::move(n));
}

int Tape::Membrane(int u_prev, int s_prev, int input) {
  TapeNode n;
  n.kind = OpKind::kMembrane;
  n.inputs = {u_prev, s_prev, input};
  return Push(std::move(n));
}

int Tape::Spike(int u) {
  TapeNode n;
  n.kind = OpKind::kSpike;
  n.inputs = {u};
  return Push(std::move(n));
}

int Tape::HebbianStep(int w2_old, int eta, int beta, int u, int s_prev, double decay) {
  TapeNode n;
  n.kind = OpKind::kHebbianStep;
  n.inputs = {w2_old, eta, beta, u, s_prev};
  n.coeff = decay;
  return Push(std::move(n));
}

int Tape::Delta(int updated, int old, double old_coeff) {
  TapeNode n;
  n.kind = OpKind::kDelta;
  n.inputs = {updated, old};
  n.coeff = old_coeff;
  return Push(std::move(n));
}

int Tape::SbpModulation(int lambda_f, int lambda_p, int next_delta, std::size_t width) {
  TapeNode n;
  n.kind = OpKind::kSbpModulation;
  n.inputs = {lambda_f, lambda_p, next_delta};
  n.width = width;
  return Push(std::move(n));
}

int Tape::SbpStep(int w3_old, int diag, int delta, double decay) {
  TapeNode n;
  n.kind = OpKind::kSbpStep;
  n.inputs = {w3_old, diag, delta};
  n.coeff = decay;
  return Push(std::move(n));
}

int Tape::Accumulate(std::vector<int> terms) {
  MPSL_CHECK(!terms.empty(), "accumulate: no terms");
  TapeNode n;
  n.kind = OpKind::kAccumulate;
  n.inputs = std::move(terms);
  return Push(std::move(n));
}

int Tape::SoftmaxXent(int logits, std::vector<int> labels) {
  TapeNode n;
  n.kind = OpKind::kSoftmaxXent;
  n.inputs = {logits};
  n.labels = std::move(labels);
  return Push(std::move(n));
}

int Tape::SquaredError(int prediction, DenseMatrix target) {
  TapeNode n;
  n.kind = OpKind::kSquaredError;
  n.inputs = {prediction};
  n.target = std::move(target);
  return Push(std::move(n));
}

void Tape::Evaluate(TapeNode& n) const {
  const auto in = [&](std::size_t k) -> const DenseMatrix& { return ValueOf(n.inputs[k]); };
  switch (n.kind) {
    case OpKind::kParam:
    case OpKind::kConst:
      return;
    case OpKind::kFusedLinear: {
      const DenseMatrix& lambda = in(3);
      DenseMatrix merged(in(0).rows(), in(0).cols());
      for (std::size_t k = 0; k < kNumPaths; ++k) Axpy(lambda.data()[k], in(k), merged);
      n.value = MatMulNT(in(4), merged);
      n.cache = std::move(merged);
      return;
    }
    case OpKind::kMembrane: {
      const DenseMatrix& current = in(2);
      const DenseMatrix zeros(current.rows(), current.cols());
      const DenseMatrix& u_prev = n.inputs[0] < 0 ? zeros : in(0);
      const DenseMatrix& s_prev = n.inputs[1] < 0 ? zeros : in(1);
      MPSL_CHECK(u_prev.SameShape(current) && s_prev.SameShape(current),
                 "membrane: shape mismatch");
      n.value = DenseMatrix(current.rows(), current.cols());
      LifConfig cfg;
      cfg.v_th = settings_.v_th;
      cfg.rho_m = settings_.rho_m;
      MembraneStepInto(u_prev.span(), s_prev.span(), current.span(), cfg, n.value.span());
      return;
    }
    case OpKind::kSpike: {
      n.value = DenseMatrix(in(0).rows(), in(0).cols());
      SpikeInto(in(0).span(), settings_.v_th, n.value.span());
      return;
    }
    case OpKind::kHebbianStep:
      n.value = mpsl::HebbianStep(in(0), Scalar(in(1)), Scalar(in(2)), in(3), in(4), n.coeff);
      return;
    case OpKind::kDelta: {
      MPSL_CHECK(in(0).SameShape(in(1)), "delta: shape mismatch");
      n.value = in(0);
      Axpy(-n.coeff, in(1), n.value);
      return;
    }
    case OpKind::kSbpModulation: {
      const double lf = Scalar(in(0));
      const double lp = Scalar(in(1));
      n.cache = DenseMatrix(1, n.width);
      n.degenerate = false;
      n.cache_total = 0.0;
      if (n.inputs[2] >= 0) {
        const DenseVector totals = Colsum(in(2));
        MPSL_CHECK(totals.size() == n.width,
                   "sbp-modulation: colsum length " + std::to_string(totals.size()) +
                       " != " + std::to_string(n.width));
        const SimplexResult share = NormalizeSimplex(totals);
        n.degenerate = share.degenerate;
        n.cache_total = Sum(totals.span());
        std::copy(share.value.values().begin(), share.value.values().end(), n.cache.data());
      }
      n.value = DenseMatrix(1, n.width);
      for (std::size_t j = 0; j < n.width; ++j) n.value.data()[j] = lf * (1.0 + lp * n.cache.data()[j]);
      return;
    }
    case OpKind::kSbpStep: {
      const DenseVector diag(in(1).values());
      n.value = RowScaled(diag, in(2));
      Axpy(n.coeff, in(0), n.value);
      return;
    }
    case OpKind::kAccumulate: {
      n.value = in(0);
      for (std::size_t k = 1; k < n.inputs.size(); ++k) Axpy(1.0, in(k), n.value);
      return;
    }
    case OpKind::kSoftmaxXent: {
      const DenseMatrix& z = in(0);
      MPSL_CHECK(n.labels.size() == z.rows(), "softmax-xent: one label per row required");
      n.cache = DenseMatrix(z.rows(), z.cols());
      double loss = 0.0;
      for (std::size_t b = 0; b < z.rows(); ++b) {
        const auto row = z.row(b);
        const double peak = *std::max_element(row.begin(), row.end());
        double denom = 0.0;
        for (std::size_t c = 0; c < z.cols(); ++c) {
          n.cache(b, c) = std::exp(row[c] - peak);
          denom += n.cache(b, c);
        }
        for (std::size_t c = 0; c < z.cols(); ++c) n.cache(b, c) /= denom;
        const int y = n.labels[b];
        MPSL_CHECK(y >= 0 && static_cast<std::size_t>(y) < z.cols(), "softmax-xent: label out of range");
        loss += -(row[static_cast<std::size_t>(y)] - peak - std::log(denom));
      }
      n.value = ScalarMatrix(loss / static_cast<double>(z.rows()));
      return;
    }
    case OpKind::kSquaredError: {
      const DenseMatrix& y = in(0);
      MPSL_CHECK(y.SameShape(n.target), "squared-error: shape mismatch");
      double loss = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) {
        const double d = y.data()[k] - n.target.data()[k];
        loss += 0.5 * d * d;
      }
      n.value = ScalarMatrix(loss / static_cast<double>(y.rows()));
      return;
    }
  }
}

std::vector<DenseMatrix> Tape::Adjoints(int root, double seed,
                                        std::optional<double> surrogate_width) const {
  MPSL_CHECK(root >= 0 && static_cast<std::size_t>(root) < nodes_.size(), "backward: bad root");
  const double width = surrogate_width.value_or(settings_.surrogate_width);
  std::vector<DenseMatrix> adj(nodes_.size());
  adj[static_cast<std::size_t>(root)] = DenseMatrix(ValueOf(root).rows(), ValueOf(root).cols(), seed);

  const auto wants = [&](int id) {
    return id >= 0 && nodes_[static_cast<std::size_t>(id)].requires_grad;
  };

  for (int id = root; id >= 0; --id) {
    const TapeNode& n = nodes_[static_cast<std::size_t>(id)];
    const DenseMatrix& g = adj[static_cast<std::size_t>(id)];
    if (g.empty() || !n.requires_grad) continue;
    const auto in = [&](std::size_t k) -> const DenseMatrix& { return ValueOf(n.inputs[k]); };

    switch (n.kind) {
      case OpKind::kParam:
      case OpKind::kConst:
        break;
      case OpKind::kFusedLinear: {
        const int x = n.inputs[4];
        const int lambda = n.inputs[3];
        bool weight_grad = wants(lambda);
        for (std::size_t k = 0; k < kNumPaths; ++k) weight_grad = weight_grad || wants(n.inputs[k]);
        if (weight_grad) {
          const DenseMatrix g_merged = MatMulTN(g, in(4));
          for (std::size_t k = 0; k < kNumPaths; ++k) {
            if (wants(n.inputs[k])) AddTo(adj[static_cast<std::size_t>(n.inputs[k])], Scaled(g_merged, in(3).data()[k]));
          }
          if (wants(lambda)) {
            DenseMatrix& gl = Slot(adj, lambda, 1, kNumPaths);
            for (std::size_t k = 0; k < kNumPaths; ++k) gl.data()[k] += Dot(g_merged.span(), in(k).span());
          }
        }
        if (wants(x)) AddTo(adj[static_cast<std::size_t>(x)], MatMulNN(g, n.cache));
        break;
      }
      case OpKind::kMembrane: {
        const double rho = settings_.rho_m;
        if (wants(n.inputs[0])) AddTo(adj[static_cast<std::size_t>(n.inputs[0])], Scaled(g, rho));
        if (wants(n.inputs[1])) AddTo(adj[static_cast<std::size_t>(n.inputs[1])], Scaled(g, -rho * settings_.v_th));
        if (wants(n.inputs[2])) AddTo(adj[static_cast<std::size_t>(n.inputs[2])], g);
        break;
      }
      case OpKind::kSpike: {
        if (!wants(n.inputs[0])) break;
        const DenseMatrix& u = in(0);
        DenseMatrix gu(u.rows(), u.cols());
        for (std::size_t k = 0; k < u.size(); ++k) {
          gu.data()[k] = g.data()[k] * SurrogateAt(u.data()[k], settings_.v_th, width);
        }
        AddTo(adj[static_cast<std::size_t>(n.inputs[0])], std::move(gu));
        break;
      }
      case OpKind::kHebbianStep: {
        const int w_old = n.inputs[0], eta_id = n.inputs[1], beta_id = n.inputs[2];
        const int u_id = n.inputs[3], s_id = n.inputs[4];
        const double eta = Scalar(in(1));
        const double beta = Scalar(in(2));
        const DenseMatrix& u = in(3);
        const DenseMatrix& s = in(4);
        const double inv_batch = 1.0 / static_cast<double>(u.rows());
        if (wants(w_old)) AddTo(adj[static_cast<std::size_t>(w_old)], Scaled(g, n.coeff));
        const bool need_proj = wants(eta_id) || wants(beta_id) || wants(u_id);
        if (need_proj) {
          // proj[b, j] = sum_i G[j, i] s[b, i]
          const DenseMatrix proj = MatMulNT(s, g);
          if (wants(eta_id) || wants(beta_id)) {
            double g_eta = 0.0, g_beta = 0.0;
            for (std::size_t k = 0; k < proj.size(); ++k) {
              g_eta += proj.data()[k] * (Rho(u.data()[k]) + beta);
              g_beta += proj.data()[k];
            }
            if (wants(eta_id)) Slot(adj, eta_id, 1, 1).data()[0] += g_eta * inv_batch;
            if (wants(beta_id)) Slot(adj, beta_id, 1, 1).data()[0] += g_beta * eta * inv_batch;
          }
          if (wants(u_id)) {
            DenseMatrix gu(u.rows(), u.cols());
            for (std::size_t k = 0; k < u.size(); ++k) {
              gu.data()[k] = eta * inv_batch * proj.data()[k] * RhoPrime(u.data()[k]);
            }
            AddTo(adj[static_cast<std::size_t>(u_id)], std::move(gu));
          }
        }
        if (wants(s_id)) {
          DenseMatrix post(u.rows(), u.cols());
          for (std::size_t k = 0; k < u.size(); ++k) post.data()[k] = Rho(u.data()[k]) + beta;
          AddTo(adj[static_cast<std::size_t>(s_id)], Scaled(MatMulNN(post, g), eta * inv_batch));
        }
        break;
      }
      case OpKind::kDelta: {
        if (wants(n.inputs[0])) AddTo(adj[static_cast<std::size_t>(n.inputs[0])], g);
        if (wants(n.inputs[1])) AddTo(adj[static_cast<std::size_t>(n.inputs[1])], Scaled(g, -n.coeff));
        break;
      }
      case OpKind::kSbpModulation: {
        const double lf = Scalar(in(0));
        const double lp = Scalar(in(1));
        const double* share = n.cache.data();
        if (wants(n.inputs[0])) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n.width; ++j) acc += g.data()[j] * (1.0 + lp * share[j]);
          Slot(adj, n.inputs[0], 1, 1).data()[0] += acc;
        }
        if (wants(n.inputs[1])) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n.width; ++j) acc += g.data()[j] * lf * share[j];
          Slot(adj, n.inputs[1], 1, 1).data()[0] += acc;
        }
        const int next = n.inputs[2];
        if (wants(next) && !n.degenerate) {
          // share_k = c_k / total: d share_i / d c_k = (delta_ik - share_i) / total
          double weighted = 0.0;
          for (std::size_t j = 0; j < n.width; ++j) weighted += g.data()[j] * share[j];
          const double scale = lf * lp / n.cache_total;
          const DenseMatrix& next_value = in(2);
          DenseMatrix& gn = Slot(adj, next, next_value.rows(), next_value.cols());
          for (std::size_t k = 0; k < n.width; ++k) {
            const double gc = scale * (g.data()[k] - weighted);
            for (std::size_t r = 0; r < next_value.rows(); ++r) gn(r, k) += gc;
          }
        }
        break;
      }
      case OpKind::kSbpStep: {
        const DenseMatrix& diag = in(1);
        const DenseMatrix& delta = in(2);
        if (wants(n.inputs[0])) AddTo(adj[static_cast<std::size_t>(n.inputs[0])], Scaled(g, n.coeff));
        if (wants(n.inputs[1])) {
          DenseMatrix& gd = Slot(adj, n.inputs[1], 1, diag.size());
          for (std::size_t j = 0; j < delta.rows(); ++j) gd.data()[j] += Dot(g.row(j), delta.row(j));
        }
        if (wants(n.inputs[2])) AddTo(adj[static_cast<std::size_t>(n.inputs[2])], RowScaled(DenseVector(diag.values()), g));
        break;
      }
      case OpKind::kAccumulate: {
        for (int term : n.inputs) {
          if (wants(term)) AddTo(adj[static_cast<std::size_t>(term)], g);
        }
        break;
      }
      case OpKind::kSoftmaxXent: {
        if (!wants(n.inputs[0])) break;
        const double scale = Scalar(g) / static_cast<double>(n.cache.rows());
        DenseMatrix gz = Scaled(n.cache, scale);
        for (std::size_t b = 0; b < n.labels.size(); ++b) {
          gz(b, static_cast<std::size_t>(n.labels[b])) -= scale;
        }
        AddTo(adj[static_cast<std::size_t>(n.inputs[0])], std::move(gz));
        break;
      }
      case OpKind::kSquaredError: {
        if (!wants(n.inputs[0])) break;
        const DenseMatrix& y = in(0);
        const double scale = Scalar(g) / static_cast<double>(y.rows());
        DenseMatrix gy = y;
        Axpy(-1.0, n.target, gy);
        for (double& v : gy.span()) v *= scale;
        AddTo(adj[static_cast<std::size_t>(n.inputs[0])], std::move(gy));
        break;
      }
    }
  }
  return adj;
}

GradientSet Tape::Backward(int root, double loss_grad,
                           std::optional<double> surrogate_width) const {
  const std::vector<DenseMatrix> adj = Adjoints(root, loss_grad, surrogate_width);
  GradientSet out;
  const auto layer_slot = [&](int layer) -> LayerGradients& {
    if (out.layers.size() <= static_cast<std::size_t>(layer)) out.layers.resize(static_cast<std::size_t>(layer) + 1);
    return out.layers[static_cast<std::size_t>(layer)];
  };
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const TapeNode& n = nodes_[id];
    if (n.kind != OpKind::kParam) continue;
    const DenseMatrix& a = adj[id];
    const auto at = [&](std::size_t k) { return a.empty() ? 0.0 : a.data()[k]; };
    switch (n.param.slot) {
      case ParamSlot::kW1: {
        LayerGradients& lg = layer_slot(n.param.layer);
        lg.w1 = a.empty() ? DenseMatrix(n.value.rows(), n.value.cols()) : a;
        break;
      }
      case ParamSlot::kLambda: {
        LayerGradients& lg = layer_slot(n.param.layer);
        for (std::size_t k = 0; k < kNumPaths; ++k) lg.lambda[k] = at(k);
        break;
      }
      case ParamSlot::kEta: layer_slot(n.param.layer).eta = at(0); break;
      case ParamSlot::kBeta: layer_slot(n.param.layer).beta = at(0); break;
      case ParamSlot::kLambdaF: out.lambda_f = at(0); break;
      case ParamSlot::kLambdaP: out.lambda_p = at(0); break;
    }
  }
  return out;
}

Tape Tape::Replay() const {
  Tape replay(settings_);
  replay.nodes_.reserve(nodes_.size());
  for (const TapeNode& original : nodes_) {
    TapeNode n = original;
    if (n.kind != OpKind::kParam && n.kind != OpKind::kConst) {
      n.value = DenseMatrix();
      n.cache = DenseMatrix();
      replay.Evaluate(n);
    }
    replay.nodes_.push_back(std::move(n));
  }
  return replay;
}

}  // namespace mpsl
