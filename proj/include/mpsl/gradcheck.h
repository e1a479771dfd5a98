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

#ifndef MPSL_GRADCHECK_H_
#define MPSL_GRADCHECK_H_

#include <cstdint>
#include <string>

namespace mpsl {

struct GradCheckOptions {
  std::uint64_t seed = 20240601;
  int trials = 50;
  int timesteps = 3;
  int batch = 2;
  double tolerance = 1e-6;
  // Negative control: backward uses this surrogate width instead of the
  // network's, so the comparison is expected to fail.
  double corrupt_surrogate_width = 0.0;
};

struct GradCheckReport {
  bool passed = true;
  double worst_error = 0.0;
  std::string worst_parameter;
  std::uint64_t worst_seed = 0;
  // Per parameter group worst relative error.
  double worst_w1 = 0.0, worst_lambda = 0.0, worst_eta = 0.0, worst_beta = 0.0,
         worst_lambda_f = 0.0, worst_lambda_p = 0.0;
  // Largest reference gradient magnitude per group, so a vacuous all-zero
  // comparison is visible.
  double peak_w1 = 0.0, peak_lambda = 0.0, peak_eta = 0.0, peak_beta = 0.0,
         peak_lambda_f = 0.0, peak_lambda_p = 0.0;
  std::uint64_t failing_seed = 0;
  int trials_run = 0;
};

// |a - b| / max(|a|, |b|, 1e-8).
double RelativeError(double a, double b);

// Builds random two-layer networks (at most 8 neurons per layer) and compares
// the tape gradients with the scalar forward-mode reference.
GradCheckReport RunGradCheck(const GradCheckOptions& options);

}  // namespace mpsl

#endif  // MPSL_GRADCHECK_H_
