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

#include "mpsl/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "mpsl/forward.h"
#include "mpsl/network.h"
#include "mpsl/reference_grad.h"

namespace mpsl {
namespace {

std::size_t Between(SeededRng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.Below(hi - lo + 1));
}

// Random small network whose membrane potentials straddle the surrogate
// window often enough for every parameter group to receive gradient.
Network RandomNetwork(std::uint64_t seed) {
  SeededRng rng(seed);
  NetworkSpec spec;
  spec.layer_sizes = {Between(rng, 3, 8), Between(rng, 2, 8), Between(rng, 2, 5)};
  Network net = BuildNetwork(spec, rng.NextU64());
  for (auto& layer : net.layers) {
    for (auto& w : layer.weights) {
      for (double& v : w.span()) v = rng.Uniform(-0.8, 0.8);
    }
    for (double& lam : layer.lambda) lam = rng.Uniform(0.1, 0.9);
    layer.eta = rng.Uniform(0.05, 0.5);
    layer.beta = rng.Uniform(-0.5, 0.5);
  }
  net.sbp.lambda_f = rng.Uniform(0.1, 1.0);
  net.sbp.lambda_p = rng.Uniform(0.1, 1.0);
  net.sbp.tau_w = rng.Uniform(5.0, 60.0);
  return net;
}

void Track(double a, double b, const std::string& name, double& group_worst,
           double& group_peak, GradCheckReport& report, std::uint64_t seed) {
  group_peak = std::max(group_peak, std::abs(b));
  const double err = RelativeError(a, b);
  group_worst = std::max(group_worst, err);
  if (err > report.worst_error) {
    report.worst_error = err;
    report.worst_parameter = name;
    report.worst_seed = seed;
  }
}

}  // namespace

double RelativeError(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

GradCheckReport RunGradCheck(const GradCheckOptions& options) {
  MPSL_CHECK(options.trials >= 1, "gradcheck: trials must be at least 1");
  GradCheckReport report;
  for (int trial = 0; trial < options.trials; ++trial) {
    const std::uint64_t seed = DeriveSeed(options.seed, static_cast<std::uint64_t>(trial));
    const Network net = RandomNetwork(seed);
    SeededRng rng(DeriveSeed(seed, 7));
    DenseMatrix inputs(static_cast<std::size_t>(options.batch), net.input_size());
    for (double& v : inputs.span()) v = rng.Uniform();
    std::vector<int> labels;
    for (int b = 0; b < options.batch; ++b) {
      labels.push_back(static_cast<int>(rng.Below(net.output_size())));
    }

    const ForwardRecord rec = RecordForward(net, inputs, labels, options.timesteps);
    std::optional<double> width;
    if (options.corrupt_surrogate_width > 0.0) width = options.corrupt_surrogate_width;
    const GradientSet tape = rec.tape.Backward(rec.loss, 1.0, width);
    const GradientSet ref = ReferenceGradients(net, inputs, labels, options.timesteps);

    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const std::string prefix = "layer" + std::to_string(l) + ".";
      const auto& a = tape.layers[l];
      const auto& b = ref.layers[l];
      for (std::size_t k = 0; k < a.w1.size(); ++k) {
        Track(a.w1.data()[k], b.w1.data()[k], prefix + "W1[" + std::to_string(k) + "]",
              report.worst_w1, report.peak_w1, report, seed);
      }
      for (std::size_t k = 0; k < kNumPaths; ++k) {
        Track(a.lambda[k], b.lambda[k], prefix + "lambda[" + std::to_string(k) + "]",
              report.worst_lambda, report.peak_lambda, report, seed);
      }
      Track(a.eta, b.eta, prefix + "eta", report.worst_eta, report.peak_eta, report, seed);
      Track(a.beta, b.beta, prefix + "beta", report.worst_beta, report.peak_beta, report, seed);
    }
    Track(tape.lambda_f, ref.lambda_f, "lambda_f", report.worst_lambda_f, report.peak_lambda_f, report, seed);
    Track(tape.lambda_p, ref.lambda_p, "lambda_p", report.worst_lambda_p, report.peak_lambda_p, report, seed);
    ++report.trials_run;
    if (report.worst_error > options.tolerance && report.passed) {
      report.passed = false;
      report.failing_seed = seed;
    }
  }
  return report;
}

}  // namespace mpsl
