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

#include "mpsl/forward.h"

#include "mpsl/plasticity.h"

namespace mpsl {

std::string ToString(const Event& e) {
  const char* name = "?";
  switch (e.kind) {
    case EventKind::kForward: name = "forward"; break;
    case EventKind::kHebbian: name = "hebbian"; break;
    case EventKind::kSbp: name = "sbp"; break;
    case EventKind::kGradientStep: name = "gradient-step"; break;
  }
  if (e.timestep < 0) return name;
  return std::string(name) + "(t=" + std::to_string(e.timestep) +
         ",l=" + std::to_string(e.layer) + ")";
}

ForwardRecord RecordForward(const Network& net, const DenseMatrix& inputs,
                            const std::vector<int>& labels, int timesteps,
                            EventLog* log) {
  MPSL_CHECK(timesteps >= 1, "T must be at least 1");
  MPSL_CHECK(inputs.cols() == net.input_size(),
             "input width " + std::to_string(inputs.cols()) +
                 " != layer 0 fan_in " + std::to_string(net.input_size()));
  MPSL_CHECK(labels.size() == inputs.rows(), "one label per input row required");

  const std::size_t depth = net.layers.size();
  const double decay = DecayFactor(net.lif.dt, net.sbp.tau_w);
  const double delta_coeff = net.delta_mode == DeltaMode::kFullDifference ? 1.0 : decay;

  ForwardRecord rec(Tape(TapeSettings{net.lif.v_th, net.lif.rho_m, net.lif.a}));
  Tape& tape = rec.tape;

  struct LayerIds {
    int w1, lambda, eta, beta, w2, w3;
    int u = -1, s = -1, delta = -1;
  };
  std::vector<LayerIds> ids(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    const MultiPathLayer& layer = net.layers[l];
    const int li = static_cast<int>(l);
    ids[l].w1 = tape.Param({ParamSlot::kW1, li}, layer.w1());
    ids[l].lambda = tape.Param({ParamSlot::kLambda, li},
                               DenseMatrix(1, kNumPaths, std::vector<double>(layer.lambda.begin(), layer.lambda.end())));
    ids[l].eta = tape.Param({ParamSlot::kEta, li}, DenseMatrix(1, 1, layer.eta));
    ids[l].beta = tape.Param({ParamSlot::kBeta, li}, DenseMatrix(1, 1, layer.beta));
    ids[l].w2 = tape.Const(layer.w2());
    ids[l].w3 = tape.Const(layer.w3());
  }
  const int lambda_f = tape.Param({ParamSlot::kLambdaF, -1}, DenseMatrix(1, 1, net.sbp.lambda_f));
  const int lambda_p = tape.Param({ParamSlot::kLambdaP, -1}, DenseMatrix(1, 1, net.sbp.lambda_p));
  const int x = tape.Const(inputs);

  std::vector<int> output_spikes;
  for (int t = 0; t < timesteps; ++t) {
    int drive = x;
    for (std::size_t l = 0; l < depth; ++l) {
      LayerIds& id = ids[l];
      const int current = tape.FusedLinear(id.w1, id.w2, id.w3, id.lambda, drive);
      const int u = tape.Membrane(id.u, id.s, current);
      const int s = tape.Spike(u);
      if (log) log->push_back({EventKind::kForward, t, static_cast<int>(l)});
      const int w2 = tape.HebbianStep(id.w2, id.eta, id.beta, u, drive, decay);
      id.delta = tape.Delta(w2, id.w2, delta_coeff);
      id.w2 = w2;
      if (log) log->push_back({EventKind::kHebbian, t, static_cast<int>(l)});
      id.u = u;
      id.s = s;
      drive = s;
    }
    for (std::size_t l = depth; l-- > 0;) {
      LayerIds& id = ids[l];
      const int next_delta = l + 1 < depth ? ids[l + 1].delta : -1;
      const int diag = tape.SbpModulation(lambda_f, lambda_p, next_delta, net.layers[l].fan_out);
      id.w3 = tape.SbpStep(id.w3, diag, id.delta, decay);
      if (log) log->push_back({EventKind::kSbp, t, static_cast<int>(l)});
    }
    output_spikes.push_back(ids.back().s);
  }
  rec.counts = tape.Accumulate(output_spikes);
  rec.loss = tape.SoftmaxXent(rec.counts, labels);
  for (const LayerIds& id : ids) {
    rec.final_w2.push_back(id.w2);
    rec.final_w3.push_back(id.w3);
    rec.final_delta.push_back(id.delta);
  }
  return rec;
}

void CommitPlasticity(const ForwardRecord& record, Network& net) {
  MPSL_CHECK(record.final_w2.size() == net.layers.size(), "record/network depth mismatch");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    net.layers[l].w2() = record.tape.node(record.final_w2[l]).value;
    net.layers[l].w3() = record.tape.node(record.final_w3[l]).value;
    net.layers[l].dw2_last = record.tape.node(record.final_delta[l]).value;
  }
}

}  // namespace mpsl
