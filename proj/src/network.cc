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

#include "mpsl/network.h"

namespace mpsl {

void Network::Validate() const {
  MPSL_CHECK(!layers.empty(), "network has no layers");
  lif.Validate();
  sbp.Validate();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].Validate();
    if (l > 0) {
      MPSL_CHECK(layers[l].fan_in == layers[l - 1].fan_out,
                 "layer " + std::to_string(l) + " fan_in does not match previous fan_out");
    }
  }
}

Network BuildNetwork(const NetworkSpec& spec, std::uint64_t seed) {
  MPSL_CHECK(spec.layer_sizes.size() >= 2, "layers: need an input and an output size");
  for (std::size_t n : spec.layer_sizes) MPSL_CHECK(n > 0, "layers: sizes must be positive");
  Network net;
  net.lif = spec.lif;
  net.sbp = spec.sbp;
  net.delta_mode = spec.delta_mode;
  SeededRng rng(DeriveSeed(seed, /*init stream*/ 1));
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const std::size_t in = spec.layer_sizes[l];
    const std::size_t out = spec.layer_sizes[l + 1];
    MultiPathLayer layer(in, out);
    layer.eta = spec.eta_init;
    layer.beta = spec.beta_init;
    if (spec.init == InitKind::kKaiming) {
      layer.w1() = KaimingUniformInit(rng, in, out, in);
      layer.w2() = Scaled(KaimingUniformInit(rng, in, out, in), spec.local_init_scale);
      layer.w3() = Scaled(KaimingUniformInit(rng, in, out, in), spec.local_init_scale);
    }
    net.layers.push_back(std::move(layer));
  }
  net.Validate();
  return net;
}

InferenceResult Infer(const Network& net, const DenseMatrix& inputs,
                      int timesteps, bool merged) {
  MPSL_CHECK(inputs.cols() == net.input_size(),
             "input width " + std::to_string(inputs.cols()) + " != network input " +
                 std::to_string(net.input_size()));
  MPSL_CHECK(timesteps >= 1, "T must be at least 1");
  const std::size_t batch = inputs.rows();
  const std::size_t depth = net.layers.size();

  std::vector<DenseMatrix> deployed;
  if (merged) {
    for (const auto& layer : net.layers) deployed.push_back(MergeWeights(layer));
  }

  std::vector<DenseMatrix> u(depth), s(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    u[l] = DenseMatrix(batch, net.layers[l].fan_out);
    s[l] = DenseMatrix(batch, net.layers[l].fan_out);
  }
  InferenceResult result{DenseMatrix(batch, net.output_size()),
                         DenseMatrix(batch, net.output_size()), {}};

  for (int t = 0; t < timesteps; ++t) {
    for (std::size_t l = 0; l < depth; ++l) {
      const DenseMatrix& drive = l == 0 ? inputs : s[l - 1];
      DenseMatrix current;
      if (merged) {
        current = MatMulNT(drive, deployed[l]);
      } else {
        const auto& layer = net.layers[l];
        current = DenseMatrix(batch, layer.fan_out);
        for (std::size_t k = 0; k < kNumPaths; ++k) {
          Axpy(layer.lambda[k], MatMulNT(drive, layer.weights[k]), current);
        }
      }
      DenseMatrix next_u(batch, net.layers[l].fan_out);
      MembraneStepInto(u[l].span(), s[l].span(), current.span(), net.lif, next_u.span());
      u[l] = std::move(next_u);
      SpikeInto(u[l].span(), net.lif.v_th, s[l].span());
    }
    Axpy(1.0, s.back(), result.counts);
    Axpy(1.0, u.back(), result.u_sum);
  }
  if (depth >= 2) result.penultimate_u = u[depth - 2];
  return result;
}

std::vector<int> ArgmaxRows(const DenseMatrix& m) {
  std::vector<int> out(m.rows(), 0);
  for (std::size_t b = 0; b < m.rows(); ++b) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < m.cols(); ++c) {
      if (m(b, c) > m(b, best)) best = c;
    }
    out[b] = static_cast<int>(best);
  }
  return out;
}

}  // namespace mpsl
