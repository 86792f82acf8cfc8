/*
 * Copyright 2026 The stochnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>

#include <cmath>

#include "stochnet/error.hpp"
#include "stochnet/verify.hpp"
#include "test_util.hpp"

namespace stochnet::verify {
namespace {

SuiteOptions quick() {
  SuiteOptions opt;
  opt.sampler_nets = 2;
  opt.sampler_samples = 20000;
  opt.jensen_nets = 20;
  opt.gibbs = {200, 20000, 1};
  opt.moment_samples = 20000;
  return opt;
}

TEST(Verify, RelativeErrorIsNormWise) {
  const ParameterSet a({{}, {3.0, 4.0}});
  const ParameterSet b({{}, {3.0, 4.5}});
  EXPECT_DOUBLE_EQ(relative_error(a, b), 0.5 / std::hypot(3.0, 4.5));
  EXPECT_EQ(relative_error(a.zeros_like(), a.zeros_like()), 0.0);
}

TEST(Verify, CentralDifferenceOfQuadratic) {
  const Network net(testing::chain_spec(2, {{1, UnitKind::sigmoid()}}));
  Network shifted = net;
  testing::set_layer(shifted, 1, {{1.0, -2.0, 0.5}});
  const auto grad = central_difference(
      shifted,
      [](const Network& n) {
        double s = 0.0;
        for (double w : n.weights(1, 0)) s += w * w;
        return s;
      },
      1e-5);
  const std::vector<double> expected{2.0, -4.0, 1.0};
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(grad.layer(1)[k], expected[k], 1e-9);
}

TEST(Verify, DirectJointAgreesWithEnergy) {
  RngStream rng(3);
  TinyNetShape shape;
  shape.hidden = {2};
  shape.hidden_kind = UnitKind::tanh();
  const Network net = random_dense_net(shape, 1.0, rng);
  const Assignment a{{0.1, -0.2},
                     {{Event::discrete(1), Event::discrete(0)},
                      {Event::discrete(0), Event::discrete(1)}}};
  EXPECT_NEAR(direct_joint_probability(net, a), std::exp(-energy(net, a)), 1e-15);
}

TEST(Verify, ExactLikelihoodOfFrozenNet) {
  const auto fx = testing::enumeration_fixture();
  const Example ex{fx.x, {1.0, 0.0}};
  double p = 0.0;
  for (const auto& [key, prob] : fx.joint) {
    if (key[3] == 1 && key[4] == 0) p += prob;
  }
  EXPECT_NEAR(exact_log_likelihood(fx.net, ex), std::log(p), 1e-13);
  EXPECT_LE(exact_jensen_bound(fx.net, ex), exact_log_likelihood(fx.net, ex));
}

TEST(Verify, QuickSuitePasses) {
  for (const auto& r : run_suite(quick())) {
    EXPECT_TRUE(r.passed) << r.name << ": measured " << r.measured << " tolerance "
                          << r.tolerance << " " << r.detail;
  }
}

TEST(Verify, SeedVariationStaysWithinBounds) {
  auto opt = quick();
  opt.seed = 99;
  const auto a = check_sampler(opt);
  opt.seed = 100;
  const auto b = check_sampler(opt);
  EXPECT_TRUE(a.passed);
  EXPECT_TRUE(b.passed);
  EXPECT_NE(a.measured, b.measured);
}

TEST(Verify, NetworkChecksRefuseOversizedNets) {
  const Network big(testing::chain_spec(2, {{16, UnitKind::sigmoid()}, {8, UnitKind::sigmoid()}}));
  EXPECT_THROW(run_network_checks(big, quick()), StateSpaceError);
  RngStream rng(5);
  const Network small = random_dense_net(TinyNetShape{}, 1.0, rng);
  for (const auto& r : run_network_checks(small, quick())) EXPECT_TRUE(r.passed) << r.name;
}

}  // namespace
}  // namespace stochnet::verify
