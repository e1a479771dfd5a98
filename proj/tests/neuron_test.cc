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

#include <gtest/gtest.h>

#include "mpsl/layer.h"
#include "mpsl/neuron.h"

namespace mpsl {
namespace {

MultiPathLayer OneByOne(double w1, double w2, double w3) {
  MultiPathLayer layer(1, 1);
  layer.w1() = {{w1}};
  layer.w2() = {{w2}};
  layer.w3() = {{w3}};
  return layer;
}

TEST(FusedInputTest, SingleActivePath) {
  MultiPathLayer layer(2, 2);
  layer.w1() = {{1, 0}, {0, 1}};
  layer.w2() = {{5, 5}, {5, 5}};
  layer.lambda = {1, 0, 0};
  EXPECT_EQ(FusedInput(layer, {1, 0}), DenseVector({1, 0}));
}

TEST(FusedInputTest, HalfAndHalf) {
  MultiPathLayer layer = OneByOne(2, 2, 0);
  layer.lambda = {0.5, 0.5, 0};
  EXPECT_DOUBLE_EQ(FusedInput(layer, {1})[0], 2.0);
}

TEST(FusedInputTest, EqualPathsMatchSinglePath) {
  MultiPathLayer layer(3, 2);
  const DenseMatrix m = {{0.3, -1.2, 2.0}, {0.7, 0.1, -0.4}};
  layer.weights = {m, m, m};
  MultiPathLayer single = layer;
  single.lambda = {1, 0, 0};
  const DenseVector a = FusedInput(layer, {1, 0, 1});
  const DenseVector b = FusedInput(single, {1, 0, 1});
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(a[j], b[j], 1e-15);
}

TEST(FusedInputTest, RejectsWrongLength) {
  MultiPathLayer layer(3, 2);
  EXPECT_THROW(FusedInput(layer, {1, 0}), ConfigError);
}

TEST(MembraneStepTest, SoftResetExample) {
  LifConfig cfg;  // v_th 0.3, rho_m 0.5
  // 0.5 * (1.0 - 0.3) + 0.2
  EXPECT_NEAR(MembraneStep({1.0}, {1}, {0.2}, cfg)[0], 0.55, 1e-15);
}

TEST(MembraneStepTest, RestAndNoLeak) {
  LifConfig cfg;
  EXPECT_EQ(MembraneStep({0}, {0}, {0}, cfg), DenseVector({0}));
  cfg.rho_m = 1.0;
  EXPECT_EQ(MembraneStep({0.42, -1.5}, {0, 0}, {0, 0}, cfg), DenseVector({0.42, -1.5}));
}

TEST(SpikeTest, ThresholdIsInclusive) {
  LifConfig cfg;
  EXPECT_EQ(Spike({0.5}, cfg)[0], 1.0);
  EXPECT_EQ(Spike({0.3}, cfg)[0], 1.0);
  EXPECT_EQ(Spike({0.29}, cfg)[0], 0.0);
}

TEST(SurrogateTest, RectangularWindow) {
  LifConfig cfg;  // a = 1
  EXPECT_EQ(SurrogateGrad({0.79}, cfg)[0], 1.0);
  EXPECT_EQ(SurrogateGrad({0.81}, cfg)[0], 0.0);
  cfg.a = 2.0;
  EXPECT_EQ(SurrogateGrad({0.3}, cfg)[0], 0.5);
}

TEST(SurrogateTest, IntegratesToOne) {
  // The rectangle has unit area for every width.
  for (double a : {0.25, 1.0, 3.0}) {
    const int n = 200000;
    const double lo = 0.3 - 2 * a, hi = 0.3 + 2 * a, h = (hi - lo) / n;
    double area = 0.0;
    for (int k = 0; k < n; ++k) area += SurrogateAt(lo + (k + 0.5) * h, 0.3, a) * h;
    EXPECT_NEAR(area, 1.0, 1e-4) << "a=" << a;
  }
}

TEST(EpisodeProperty, SpikesAreBinaryAndMatchThreshold) {
  LifConfig cfg;
  SeededRng rng(4);
  DenseVector u(16), s(16);
  for (int t = 0; t < 50; ++t) {
    DenseVector input(16);
    for (double& v : input.span()) v = rng.Uniform(-0.5, 1.0);
    u = MembraneStep(u, s, input, cfg);
    s = Spike(u, cfg);
    for (std::size_t j = 0; j < 16; ++j) {
      ASSERT_TRUE(s[j] == 0.0 || s[j] == 1.0);
      ASSERT_EQ(s[j] == 1.0, u[j] >= cfg.v_th);
    }
  }
}

TEST(LifConfigTest, Validation) {
  LifConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.rho_m = 0.0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = {};
  cfg.rho_m = 1.5;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = {};
  cfg.v_th = 0.0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = {};
  cfg.a = -1.0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
}

TEST(MultiPathLayerTest, ShapeValidation) {
  MultiPathLayer layer(3, 2);
  EXPECT_NO_THROW(layer.Validate());
  layer.w3() = DenseMatrix(3, 2);
  EXPECT_THROW(layer.Validate(), ConfigError);
}

TEST(SbpParamsTest, ProjectClamps) {
  SbpParams p;
  p.lambda_f = 1.7;
  p.lambda_p = 0.01;
  p.Project();
  EXPECT_EQ(p.lambda_f, 1.0);
  EXPECT_EQ(p.lambda_p, 0.1);
  EXPECT_NO_THROW(p.Validate());
  p.tau_w = 0.0;
  EXPECT_THROW(p.Validate(), ConfigError);
}

}  // namespace
}  // namespace mpsl
