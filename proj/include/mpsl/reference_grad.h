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

#ifndef MPSL_REFERENCE_GRAD_H_
#define MPSL_REFERENCE_GRAD_H_

#include <vector>

#include "mpsl/network.h"
#include "mpsl/tape.h"

namespace mpsl {

// Verification oracle: gradients of the windowed training loss obtained by
// forward-mode differentiation over plain scalars, one pass per parameter.
// Spike derivatives use the same rectangular surrogate as the tape. Cost is
// O(#params * forward), so keep networks small.
GradientSet ReferenceGradients(const Network& net, const DenseMatrix& inputs,
                               const std::vector<int>& labels, int timesteps);

// Loss value computed by the same scalar forward pass.
double ReferenceLoss(const Network& net, const DenseMatrix& inputs,
                     const std::vector<int>& labels, int timesteps);

}  // namespace mpsl

#endif  // MPSL_REFERENCE_GRAD_H_
