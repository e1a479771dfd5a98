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

#ifndef MPSL_FORWARD_H_
#define MPSL_FORWARD_H_

#include <string>
#include <utility>
#include <vector>

#include "mpsl/network.h"
#include "mpsl/tape.h"

namespace mpsl {

enum class EventKind { kForward, kHebbian, kSbp, kGradientStep };

struct Event {
  EventKind kind;
  int timestep = -1;  // -1 for per-batch events
  int layer = -1;

  bool operator==(const Event&) const = default;
};

std::string ToString(const Event& e);
using EventLog = std::vector<Event>;

// Recorded forward window over one batch.
struct ForwardRecord {
  explicit ForwardRecord(Tape t) : tape(std::move(t)) {}

  Tape tape;
  int loss = -1;
  int counts = -1;                 // [B x classes] output spike counts
  std::vector<int> final_w2;       // per layer, W2 after the last step
  std::vector<int> final_w3;       // per layer, W3 after the last step
  std::vector<int> final_delta;    // per layer, last Hebbian learning signal

  double loss_value() const { return tape.node(loss).value(0, 0); }
  const DenseMatrix& count_values() const { return tape.node(counts).value; }
};

// Runs T timesteps of the multi-path network on `inputs` ([B x input],
// presented as direct current at every step) while recording every fusion,
// membrane, spike, Hebbian and SBP step. W2/W3 carried in from `net` are
// tape constants; W1, lambda, eta, beta, lambda_f and lambda_p are leaves.
ForwardRecord RecordForward(const Network& net, const DenseMatrix& inputs,
                            const std::vector<int>& labels, int timesteps,
                            EventLog* log = nullptr);

// Copies the final W2, W3 and learning signal of a record into `net`.
void CommitPlasticity(const ForwardRecord& record, Network& net);

}  // namespace mpsl

#endif  // MPSL_FORWARD_H_
