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

#include "mpsl/trainer.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

#include "mpsl/plasticity.h"

namespace mpsl {
namespace {

constexpr std::size_t kEvalChunk = 250;

std::string ParameterNorms(const Network& net) {
  std::ostringstream out;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    out << " layer" << l << "{|W1|=" << FrobeniusNorm(layer.w1())
        << " |W2|=" << FrobeniusNorm(layer.w2()) << " |W3|=" << FrobeniusNorm(layer.w3())
        << " lambda=[" << layer.lambda[0] << "," << layer.lambda[1] << "," << layer.lambda[2]
        << "] eta=" << layer.eta << " beta=" << layer.beta << "}";
  }
  out << " lambda_f=" << net.sbp.lambda_f << " lambda_p=" << net.sbp.lambda_p;
  return out.str();
}

double SoftmaxXentRow(std::span<const double> z, int label) {
  const double peak = *std::max_element(z.begin(), z.end());
  double denom = 0.0;
  for (double v : z) denom += std::exp(v - peak);
  return std::log(denom) - (z[static_cast<std::size_t>(label)] - peak);
}

}  // namespace

std::vector<double> FlattenParameters(const Network& net) {
  std::vector<double> flat;
  for (const auto& layer : net.layers) {
    flat.insert(flat.end(), layer.w1().values().begin(), layer.w1().values().end());
    flat.insert(flat.end(), layer.lambda.begin(), layer.lambda.end());
    flat.push_back(layer.eta);
    flat.push_back(layer.beta);
  }
  flat.push_back(net.sbp.lambda_f);
  flat.push_back(net.sbp.lambda_p);
  return flat;
}

void ScatterParameters(const std::vector<double>& flat, Network& net) {
  std::size_t k = 0;
  for (auto& layer : net.layers) {
    for (double& v : layer.w1().span()) v = flat.at(k++);
    for (double& v : layer.lambda) v = flat.at(k++);
    layer.eta = flat.at(k++);
    layer.beta = flat.at(k++);
  }
  net.sbp.lambda_f = flat.at(k++);
  net.sbp.lambda_p = flat.at(k++);
  MPSL_CHECK(k == flat.size(), "parameter vector length mismatch");
}

std::vector<double> FlattenGradients(const GradientSet& g) {
  std::vector<double> flat;
  for (const auto& layer : g.layers) {
    flat.insert(flat.end(), layer.w1.values().begin(), layer.w1.values().end());
    flat.insert(flat.end(), layer.lambda.begin(), layer.lambda.end());
    flat.push_back(layer.eta);
    flat.push_back(layer.beta);
  }
  flat.push_back(g.lambda_f);
  flat.push_back(g.lambda_p);
  return flat;
}

std::vector<char> TrainableMask(const Network& net, LambdaMode mode) {
  std::vector<char> mask;
  const char lambda_moves = mode == LambdaMode::kLearnable ? 1 : 0;
  for (const auto& layer : net.layers) {
    mask.insert(mask.end(), layer.w1().size(), 1);
    mask.insert(mask.end(), kNumPaths, lambda_moves);
    mask.push_back(1);  // eta
    mask.push_back(1);  // beta
  }
  mask.push_back(1);  // lambda_f
  mask.push_back(1);  // lambda_p
  return mask;
}

void AdamStep(Network& net, const GradientSet& grads, LambdaMode mode, double lr,
              double local_lr_scale, AdamState& state) {
  std::vector<double> params = FlattenParameters(net);
  const std::vector<double> g = FlattenGradients(grads);
  const std::vector<char> mask = TrainableMask(net, mode);
  MPSL_CHECK(g.size() == params.size(), "gradient/parameter length mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  MPSL_CHECK(state.m.size() == params.size(), "optimizer state length mismatch");
  ++state.step;
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, static_cast<double>(state.step));
  std::vector<double> step(params.size(), lr);
  std::size_t pos = 0;
  for (const auto& layer : net.layers) {
    pos += layer.w1().size() + kNumPaths;
    step[pos++] = lr * local_lr_scale;  // eta
    step[pos++] = lr * local_lr_scale;  // beta
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!mask[k]) continue;
    state.m[k] = AdamState::kBeta1 * state.m[k] + (1.0 - AdamState::kBeta1) * g[k];
    state.v[k] = AdamState::kBeta2 * state.v[k] + (1.0 - AdamState::kBeta2) * g[k] * g[k];
    params[k] -= step[k] * (state.m[k] / c1) / (std::sqrt(state.v[k] / c2) + AdamState::kEpsilon);
  }
  ScatterParameters(params, net);
  net.sbp.Project();
}

int WorkerCount() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MPSL_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = n > 0 ? std::min(n, cap) : cap;
  }
  return std::max(n, 1);
}

Trainer::Trainer(TrainConfig cfg, const Network* lambda_source)
    : cfg_(std::move(cfg)), net_(BuildNetwork(cfg_.network, cfg_.seed)) {
  cfg_.Validate();
  if (cfg_.lambda_mode == LambdaMode::kFrozenLearned) {
    MPSL_CHECK(lambda_source != nullptr, "frozen-learned mode needs a source network");
    MPSL_CHECK(lambda_source->layers.size() == net_.layers.size(),
               "lambda_source: layer count differs from config");
    for (std::size_t l = 0; l < net_.layers.size(); ++l) {
      net_.layers[l].lambda = lambda_source->layers[l].lambda;
    }
  }
}

Trainer::Trainer(TrainConfig cfg, Network net, AdamState adam, int epoch)
    : cfg_(std::move(cfg)), net_(std::move(net)), adam_(std::move(adam)), epoch_(epoch) {
  cfg_.Validate();
  net_.Validate();
}

void Trainer::CheckFinite(double loss, std::size_t batch_index) const {
  if (std::isfinite(loss)) return;
  throw NumericAbort("non-finite loss at epoch " + std::to_string(epoch_) + " batch " +
                     std::to_string(batch_index) + ";" + ParameterNorms(net_));
}

BatchResult Trainer::TrainBatch(const DenseMatrix& inputs, const std::vector<int>& labels,
                                std::size_t batch_index, EventLog* log) {
  BatchResult result;
  result.grads = GradientSet::ZerosLike(net_);
  const std::size_t batch = inputs.rows();
  if (cfg_.schedule == PlasticitySchedule::kBatchMean) {
    const ForwardRecord rec = RecordForward(net_, inputs, labels, cfg_.timesteps, log);
    result.loss = rec.loss_value();
    CheckFinite(result.loss, batch_index);
    result.grads = rec.tape.Backward(rec.loss);
    const std::vector<int> predicted = ArgmaxRows(rec.count_values());
    for (std::size_t b = 0; b < batch; ++b) result.correct += predicted[b] == labels[b];
    CommitPlasticity(rec, net_);
  } else {
    const double share = 1.0 / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      const DenseMatrix item(1, inputs.cols(),
                             std::vector<double>(inputs.row(b).begin(), inputs.row(b).end()));
      const ForwardRecord rec = RecordForward(net_, item, {labels[b]}, cfg_.timesteps, log);
      CheckFinite(rec.loss_value(), batch_index);
      result.loss += share * rec.loss_value();
      result.grads.Accumulate(rec.tape.Backward(rec.loss), share);
      result.correct += ArgmaxRows(rec.count_values())[0] == labels[b];
      CommitPlasticity(rec, net_);
    }
  }
  if (!result.grads.AllFinite()) {
    throw NumericAbort("non-finite gradient at epoch " + std::to_string(epoch_) + " batch " +
                       std::to_string(batch_index) + ";" + ParameterNorms(net_));
  }
  AdamStep(net_, result.grads, cfg_.lambda_mode, cfg_.lr, cfg_.local_lr_scale, adam_);
  if (log) log->push_back({EventKind::kGradientStep, -1, -1});
  for (const auto& layer : net_.layers) {
    if (!AllFinite(layer.w2().span()) || !AllFinite(layer.w3().span()) ||
        !AllFinite(layer.w1().span())) {
      throw NumericAbort("non-finite weights after epoch " + std::to_string(epoch_) +
                         " batch " + std::to_string(batch_index) + ";" + ParameterNorms(net_));
    }
  }
  return result;
}

EpochMetrics Trainer::TrainEpoch(const Dataset& train, EventLog* log) {
  MPSL_CHECK(train.pixels() == net_.input_size(),
             "dataset has " + std::to_string(train.pixels()) + " pixels, network expects " +
                 std::to_string(net_.input_size()));
  MPSL_CHECK(train.size() > 0, "empty training set");
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SeededRng rng(DeriveSeed(cfg_.seed, 3, static_cast<std::uint64_t>(epoch_)));
  for (std::size_t k = order.size(); k > 1; --k) {
    std::swap(order[k - 1], order[static_cast<std::size_t>(rng.Below(k))]);
  }
  double loss_sum = 0.0;
  long correct = 0;
  std::size_t batch_index = 0;
  for (std::size_t begin = 0; begin < order.size(); begin += cfg_.batch_size, ++batch_index) {
    const std::size_t end = std::min(order.size(), begin + cfg_.batch_size);
    const BatchResult r = TrainBatch(train.Batch(order, begin, end),
                                     train.BatchLabels(order, begin, end), batch_index, log);
    loss_sum += r.loss * static_cast<double>(end - begin);
    correct += r.correct;
  }
  EpochMetrics m;
  m.epoch = ++epoch_;
  m.loss = loss_sum / static_cast<double>(train.size());
  m.accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

std::vector<int> PredictLabels(const InferenceResult& result) {
  std::vector<int> out(result.counts.rows(), 0);
  for (std::size_t b = 0; b < result.counts.rows(); ++b) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < result.counts.cols(); ++c) {
      const double cc = result.counts(b, c), cb = result.counts(b, best);
      if (cc > cb || (cc == cb && result.u_sum(b, c) > result.u_sum(b, best))) best = c;
    }
    out[b] = static_cast<int>(best);
  }
  return out;
}

EvalResult Evaluate(const Network& net, const Dataset& data, int timesteps, bool merged) {
  MPSL_CHECK(data.pixels() == net.input_size(), "evaluate: dataset/network input mismatch");
  EvalResult out;
  out.predictions.assign(data.size(), 0);
  if (data.size() == 0) return out;
  const std::size_t chunks = (data.size() + kEvalChunk - 1) / kEvalChunk;
  std::vector<double> chunk_loss(chunks, 0.0);
  std::vector<long> chunk_correct(chunks, 0);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      const std::size_t begin = c * kEvalChunk;
      const std::size_t end = std::min(data.size(), begin + kEvalChunk);
      const InferenceResult r = Infer(net, data.Batch(order, begin, end), timesteps, merged);
      const std::vector<int> predicted = PredictLabels(r);
      for (std::size_t b = 0; b < predicted.size(); ++b) {
        out.predictions[begin + b] = predicted[b];
        chunk_correct[c] += predicted[b] == data.labels[begin + b];
        chunk_loss[c] += SoftmaxXentRow(r.counts.row(b), data.labels[begin + b]);
      }
    }
  };
  const int workers = std::min<int>(WorkerCount(), static_cast<int>(chunks));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  double loss = 0.0;
  long correct = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    loss += chunk_loss[c];
    correct += chunk_correct[c];
  }
  out.loss = loss / static_cast<double>(data.size());
  out.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return out;
}

std::vector<double> LambdaValues(const Network& net) {
  std::vector<double> out;
  for (const auto& layer : net.layers) out.insert(out.end(), layer.lambda.begin(), layer.lambda.end());
  return out;
}

AblationReport RunAblation(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                           const Splits& splits) {
  MPSL_CHECK(!seeds.empty(), "ablate: need at least one seed");
  AblationReport report;
  std::vector<AblationRow> fixed, learnable, frozen;
  const auto run = [&](TrainConfig cfg, const Network* source, std::vector<AblationRow>& rows) {
    Trainer trainer(std::move(cfg), source);
    for (int e = 0; e < trainer.config().epochs; ++e) {
      const EpochMetrics m = trainer.TrainEpoch(splits.train);
      rows.push_back({trainer.config().lambda_mode, trainer.config().seed, m.epoch, m.loss,
                      m.accuracy, LambdaValues(trainer.net())});
    }
    return trainer.net();
  };
  for (std::uint64_t seed : seeds) {
    TrainConfig cfg = base;
    cfg.seed = seed;
    cfg.lambda_mode = LambdaMode::kLearnable;
    const Network learned = run(cfg, nullptr, learnable);
    cfg.lambda_mode = LambdaMode::kFixed;
    run(cfg, nullptr, fixed);
    cfg.lambda_mode = LambdaMode::kFrozenLearned;
    cfg.lambda_source = "(in-memory learnable run)";
    run(cfg, &learned, frozen);
  }
  const auto final_mean = [&](const std::vector<AblationRow>& rows) {
    double acc = 0.0;
    int n = 0;
    for (const auto& r : rows) {
      if (r.epoch == base.epochs) {
        acc += r.accuracy;
        ++n;
      }
    }
    return n ? acc / n : 0.0;
  };
  report.fixed_final_mean = final_mean(fixed);
  report.learnable_final_mean = final_mean(learnable);
  report.frozen_final_mean = final_mean(frozen);
  report.learnable_at_least_fixed = report.learnable_final_mean >= report.fixed_final_mean;
  for (auto* rows : {&fixed, &learnable, &frozen}) {
    report.rows.insert(report.rows.end(), rows->begin(), rows->end());
  }
  return report;
}

}  // namespace mpsl
