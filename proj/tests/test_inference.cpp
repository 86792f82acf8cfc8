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
#include <map>

#include "stochnet/error.hpp"
#include "stochnet/inference.hpp"
#include "test_util.hpp"

namespace stochnet {
namespace {

using testing::chain_spec;
using testing::set_layer;

/// Conditional marginals of the frozen table given clamps on (y1, y2).
std::vector<double> fixture_conditional(const testing::EnumerationFixture& fx,
                                        const std::map<int, std::uint32_t>& clamps) {
  std::vector<double> m(5, 0.0);
  double evidence = 0.0;
  for (const auto& [key, p] : fx.joint) {
    bool keep = true;
    for (const auto& [v, code] : clamps) keep = keep && key[3 + v] == code;
    if (!keep) continue;
    evidence += p;
    for (int i = 0; i < 5; ++i) m[i] += key[i] * p;
  }
  for (double& v : m) v /= evidence;
  return m;
}

void expect_field_near(const MarginalField& f, const std::vector<double>& m, double tol) {
  for (int u = 0; u < 3; ++u) EXPECT_NEAR(f.hidden[0][u], m[u], tol) << "hidden " << u;
  for (int v = 0; v < 2; ++v) EXPECT_NEAR(f.outputs[v], m[3 + v], tol) << "output " << v;
}

TEST(Enumerate, SingleOutputAtZero) {
  const Network net(chain_spec(2, {{1, UnitKind::sigmoid()}}));
  const auto table = enumerate_posterior(net, std::vector<double>{0.5, 0.5});
  EXPECT_EQ(table.marginals.outputs[0], 0.5);
  EXPECT_EQ(table.probabilities.size(), 2u);
}

TEST(Enumerate, MatchesFrozenHighPrecisionTable) {
  const auto fx = testing::enumeration_fixture();
  const auto table = enumerate_posterior(fx.net, fx.x);
  ASSERT_EQ(table.keys.size(), 32u);
  double total = 0.0;
  for (std::size_t i = 0; i < table.keys.size(); ++i) {
    EXPECT_NEAR(table.probabilities[i], fx.joint.at(table.keys[i]), 1e-15);
    total += table.probabilities[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  expect_field_near(table.marginals, fx.marginals, 1e-14);
}

TEST(Enumerate, NormalisedOnMixedKinds) {
  Network net = Network::with_uniform_init(
      chain_spec(2, {{2, UnitKind::relu_sum(3)}, {3, UnitKind::tanh()}, {2, UnitKind::sigmoid()}}),
      1.2, 3);
  const auto table = enumerate_posterior(net, std::vector<double>{0.4, -0.6});
  double total = 0.0;
  for (double p : table.probabilities) total += p;
  EXPECT_EQ(table.probabilities.size(), 1u << 11);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Enumerate, ClampedTableIsTheConditional) {
  const auto fx = testing::enumeration_fixture();
  ClampSet clamp(2);
  clamp.clamp(1, 1);
  const auto table = enumerate_posterior(fx.net, fx.x, &clamp);
  EXPECT_EQ(table.keys.size(), 16u);
  EXPECT_NEAR(table.evidence, fx.marginals[4], 1e-14);
  expect_field_near(table.marginals, fixture_conditional(fx, {{1, 1}}), 1e-14);
  EXPECT_EQ(table.marginals.outputs[1], 1.0);
}

TEST(Enumerate, GuardCountsBits) {
  const Network small(chain_spec(1, {{4, UnitKind::relu_sum(4)}, {3, UnitKind::sigmoid()}}));
  EXPECT_EQ(discrete_bits(small, 2), 19);
  EXPECT_EQ(discrete_bits(small, 1), 16);
  const Network big(chain_spec(1, {{4, UnitKind::relu_sum(4)}, {5, UnitKind::sigmoid()}}));
  EXPECT_THROW(enumerate_posterior(big, std::vector<double>{0.0}), StateSpaceError);
}

TEST(Enumerate, DeltaUnitsAreDeterministic) {
  Network net(chain_spec(1, {{2, UnitKind::sigmoid()}, {1, UnitKind::delta()}}));
  set_layer(net, 1, {{0.0, 0.0}, {0.0, 0.0}});
  set_layer(net, 2, {{0.4, 0.4, 0.0}});
  const auto table = enumerate_posterior(net, std::vector<double>{1.0});
  EXPECT_EQ(table.probabilities.size(), 4u);
  // value > 0.5 only when both parents fire.
  EXPECT_DOUBLE_EQ(table.marginals.outputs[0], 0.25);
}

TEST(McMarginals, MatchesFrozenTable) {
  const auto fx = testing::enumeration_fixture();
  RngStream rng(101);
  const auto f = mc_marginals(fx.net, fx.x, 100000, rng);
  EXPECT_EQ(f.samples, 100000u);
  expect_field_near(f, fx.marginals, 0.005);
}

TEST(McMarginals, AllDeltaGivesZeroOrOne) {
  const Network net = Network::with_uniform_init(
      chain_spec(2, {{3, UnitKind::delta()}, {2, UnitKind::delta()}}), 2.0, 4);
  RngStream rng(4);
  const auto f = mc_marginals(net, std::vector<double>{0.9, -0.3}, 10, rng);
  for (double p : f.outputs) EXPECT_TRUE(p == 0.0 || p == 1.0);
  for (double p : f.hidden[0]) EXPECT_TRUE(p == 0.0 || p == 1.0);
}

TEST(McMarginals, FixedSeedIsReproducible) {
  const auto fx = testing::enumeration_fixture();
  RngStream a(5), b(5);
  const auto fa = mc_marginals(fx.net, fx.x, 100, a);
  const auto fb = mc_marginals(fx.net, fx.x, 100, b);
  EXPECT_EQ(fa.outputs, fb.outputs);
  EXPECT_EQ(fa.hidden, fb.hidden);
  EXPECT_THROW(mc_marginals(fx.net, fx.x, 0, a), Error);
}

TEST(Decide, ThresholdAndTieBreak) {
  MarginalField f;
  f.outputs = {0.7, 0.5, 0.2, 0.5000001};
  EXPECT_EQ(max_marginal_decide(f), (std::vector<std::uint32_t>{1, 0, 0, 1}));
}

TEST(Decide, InvariantUnderMonotoneTransform) {
  // The decision compares p(positive) with p(negative); any strictly
  // increasing transform of both leaves the comparison unchanged.
  MarginalField f;
  f.outputs = {0.01, 0.3, 0.49, 0.5, 0.51, 0.8, 0.99};
  const auto base = max_marginal_decide(f);
  for (auto g : {+[](double p) { return std::log(p); }, +[](double p) { return p * p * p; },
                 +[](double p) { return std::exp(10 * p); }}) {
    for (std::size_t v = 0; v < f.outputs.size(); ++v) {
      const bool positive = g(f.outputs[v]) > g(1.0 - f.outputs[v]);
      EXPECT_EQ(base[v], positive ? 1u : 0u);
    }
  }
}

TEST(Gibbs, UnclampedMatchesFrozenTable) {
  const auto fx = testing::enumeration_fixture();
  RngStream rng(103);
  const auto f = gibbs_clamped(fx.net, fx.x, ClampSet(2), {1000, 100000, 1}, rng);
  EXPECT_EQ(f.samples, 100000u);
  expect_field_near(f, fx.marginals, 0.01);
}

TEST(Gibbs, FullyClampedMatchesExactConditional) {
  const auto fx = testing::enumeration_fixture();
  for (std::uint32_t y0 : {0u, 1u}) {
    for (std::uint32_t y1 : {0u, 1u}) {
      ClampSet clamp(2);
      clamp.clamp(0, y0);
      clamp.clamp(1, y1);
      RngStream rng(107 + 2 * y0 + y1);
      const auto f = gibbs_clamped(fx.net, fx.x, clamp, {1000, 100000, 1}, rng);
      expect_field_near(f, fixture_conditional(fx, {{0, y0}, {1, y1}}), 0.01);
      EXPECT_EQ(f.outputs[0], static_cast<double>(y0));
      EXPECT_EQ(f.outputs[1], static_cast<double>(y1));
    }
  }
}

TEST(Gibbs, PartialClampOnMixedKinds) {
  Network net = Network::with_uniform_init(
      chain_spec(2, {{2, UnitKind::relu_sum(2)}, {2, UnitKind::tanh()}, {3, UnitKind::sigmoid()}}),
      1.0, 9);
  const std::vector<double> x{0.5, -0.5};
  ClampSet clamp(3);
  clamp.clamp(0, 1);
  clamp.clamp(2, 0);
  const auto exact = enumerate_posterior(net, x, &clamp);
  RngStream rng(109);
  const auto f = gibbs_clamped(net, x, clamp, {1000, 100000, 1}, rng);
  for (std::size_t l = 0; l < 2; ++l) {
    for (std::size_t u = 0; u < 2; ++u) {
      EXPECT_NEAR(f.hidden[l][u], exact.marginals.hidden[l][u], 0.01);
    }
  }
  EXPECT_NEAR(f.outputs[1], exact.marginals.outputs[1], 0.01);
}

TEST(Gibbs, ZeroWeightsGiveOneHalf) {
  const Network net(chain_spec(3, {{4, UnitKind::sigmoid()}, {2, UnitKind::sigmoid()}}));
  ClampSet clamp(2);
  clamp.clamp(0, 1);
  for (const ClampSet& c : {ClampSet(2), clamp}) {
    RngStream rng(113);
    const auto f = gibbs_clamped(net, std::vector<double>{1, 2, 3}, c, {10, 200, 1}, rng);
    for (double p : f.hidden[0]) EXPECT_EQ(p, 0.5);
    for (std::size_t v = 0; v < 2; ++v) {
      if (!c.is_clamped(v)) {
        EXPECT_EQ(f.outputs[v], 0.5);
      }
    }
  }
}

TEST(Gibbs, ClampedDeltaOutputIsNonErgodic) {
  const Network net(chain_spec(1, {{2, UnitKind::sigmoid()}, {1, UnitKind::delta()}}));
  ClampSet clamp(1);
  clamp.clamp(0, 1);
  RngStream rng(1);
  EXPECT_THROW(gibbs_clamped(net, std::vector<double>{0.0}, clamp, {}, rng), NonErgodicError);
}

TEST(Gibbs, RejectsBadArguments) {
  const auto fx = testing::enumeration_fixture();
  RngStream rng(1);
  EXPECT_THROW(gibbs_clamped(fx.net, fx.x, ClampSet(2), {0, 10, 0}, rng), Error);
  EXPECT_THROW(gibbs_clamped(fx.net, fx.x, ClampSet(3), {0, 10, 1}, rng), DimensionError);
  const auto f = gibbs_clamped(fx.net, fx.x, ClampSet(2), {5, 0, 1}, rng);
  EXPECT_EQ(f.samples, 0u);
}

TEST(ClampSet, Bookkeeping) {
  ClampSet c(4);
  EXPECT_TRUE(c.empty());
  c.clamp(2, 1);
  c.clamp(0, 0);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_TRUE(c.is_clamped(2));
  EXPECT_EQ(c.value(2), 1u);
  c.release(2);
  c.release(3);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_THROW(c.clamp(4, 1), DimensionError);
}

TEST(Iou, Examples) {
  using M = std::vector<std::uint8_t>;
  EXPECT_EQ(iou(M{1, 0, 1}, M{1, 0, 1}), 1.0);
  EXPECT_EQ(iou(M{1, 0, 0}, M{0, 1, 0}), 0.0);
  EXPECT_EQ(iou(M{1, 1}, M{1, 0}), 0.5);
  EXPECT_EQ(iou(M{0, 0}, M{0, 0}), 1.0);
  EXPECT_THROW(iou(M{1}, M{1, 0}), DimensionError);
}

TEST(MarginalsToPgm, RoundsToBytes) {
  MarginalField f;
  f.outputs = {0.0, 0.5, 1.0, 0.2};
  f.grid = GridShape{2, 2};
  const GrayImage img = marginals_to_pgm(f);
  EXPECT_EQ(img.data, (std::vector<std::uint8_t>{0, 128, 255, 51}));
  f.grid.reset();
  EXPECT_THROW(marginals_to_pgm(f), DimensionError);
}

}  // namespace
}  // namespace stochnet
