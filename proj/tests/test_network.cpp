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
#include <limits>

#include "stochnet/error.hpp"
#include "stochnet/network.hpp"
#include "stochnet/propagation.hpp"
#include "stochnet/rng.hpp"
#include "test_util.hpp"

namespace stochnet {
namespace {

using testing::chain_spec;
using testing::set_layer;

bool mentions(const ValidationReport& r, const std::string& needle) {
  for (const auto& v : r.violations) {
    if (v.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST(Validate, MinimalLegalSpec) {
  const auto spec = chain_spec(3, {{2, UnitKind::sigmoid()}, {1, UnitKind::sigmoid()}});
  EXPECT_TRUE(validate(spec).ok());
}

TEST(Validate, LaterLayerReferenceIsACycle) {
  auto spec = chain_spec(3, {{2, UnitKind::sigmoid()}, {1, UnitKind::sigmoid()}});
  spec.layers[0].connectivity = DenseConnectivity{{2}};
  const auto report = validate(spec);
  EXPECT_FALSE(report.ok());
  EXPECT_TRUE(mentions(report, "acyclicity"));
  EXPECT_THROW(Network{spec}, SpecError);
}

TEST(Validate, LocalOnSingleCellGrid) {
  NetworkSpec spec;
  spec.input_count = 1;
  spec.layers.push_back({1, UnitKind::sigmoid(), GridShape{1, 1}, DenseConnectivity{{0}}});
  spec.layers.push_back({1, UnitKind::sigmoid(), GridShape{1, 1}, LocalConnectivity{1, 1, false}});
  ASSERT_TRUE(validate(spec).ok());
  const Network net(spec);
  EXPECT_EQ(net.fan_in(2, 0), 1u);
}

TEST(Validate, ReportsEveryViolation) {
  NetworkSpec spec;
  spec.input_count = 0;
  spec.layers.push_back({0, UnitKind::sigmoid(), std::nullopt, DenseConnectivity{{0}}});
  spec.layers.push_back({4, UnitKind::sigmoid(), GridShape{2, 2}, LocalConnectivity{1, 7, false}});
  spec.layers.push_back({2, UnitKind::relu_sum(3), std::nullopt, DenseConnectivity{{2}}});
  const auto report = validate(spec);
  EXPECT_TRUE(mentions(report, "input_count"));
  EXPECT_TRUE(mentions(report, "empty layer"));
  EXPECT_TRUE(mentions(report, "out-of-range radius"));
  EXPECT_TRUE(mentions(report, "grid differs"));
  EXPECT_TRUE(mentions(report, "relusum units cannot be outputs"));
  EXPECT_EQ(validate(spec).violations, report.violations);
}

TEST(Topology, LocalWindowsAreTruncatedAtBorders) {
  NetworkSpec spec;
  spec.input_count = 27;
  spec.input_grid = GridShape{3, 3};
  spec.input_channels = 3;
  spec.layers.push_back({9, UnitKind::sigmoid(), GridShape{3, 3}, LocalConnectivity{1, 1, true}});
  spec.layers.push_back({9, UnitKind::sigmoid(), GridShape{3, 3}, LocalConnectivity{1, 1, false}});
  const Network net(spec);
  EXPECT_EQ(net.fan_in(1, 0), 4u * 3u);  // corner, every channel
  EXPECT_EQ(net.fan_in(1, 4), 9u * 3u);  // centre
  EXPECT_EQ(net.fan_in(2, 0), 4u);
  EXPECT_EQ(net.fan_in(2, 1), 6u);
  EXPECT_EQ(net.fan_in(2, 4), 9u);
  std::size_t expected = 0;
  for (std::size_t l = 1; l <= 2; ++l) {
    for (std::size_t u = 0; u < 9; ++u) expected += net.fan_in(l, u) + 1;
  }
  EXPECT_EQ(net.parameter_count(), expected);
}

TEST(LayerGrammar, RoundTrip) {
  for (const char* text : {"sigmoid 4 dense 0", "tanh 3 dense 0 1", "relusum:5 2x3 local 2 1",
                           "delta 16x16 local 1 1 image"}) {
    EXPECT_EQ(format_layer(parse_layer(text)), text);
  }
  EXPECT_THROW(parse_layer("sigmoid four dense 0"), Error);
  EXPECT_THROW(parse_layer("sigmoid 4 sparse 0"), Error);
  NetworkSpec spec;
  parse_input("8x8x3", spec);
  EXPECT_EQ(spec.input_count, 192);
  EXPECT_EQ(format_input(spec), "8x8x3");
}

TEST(Network, UniformInitIsBoundedWithZeroBias) {
  const auto spec = chain_spec(5, {{6, UnitKind::tanh()}, {2, UnitKind::sigmoid()}});
  const Network a = Network::with_uniform_init(spec, 0.1, 4);
  const Network b = Network::with_uniform_init(spec, 0.1, 4);
  EXPECT_EQ(a.parameters(), b.parameters());
  for (std::size_t l = 1; l <= 2; ++l) {
    for (std::size_t u = 0; u < a.layer_size(l); ++u) {
      const auto w = a.weights(l, u);
      EXPECT_EQ(w.back(), 0.0);
      for (std::size_t k = 0; k + 1 < w.size(); ++k) EXPECT_LE(std::abs(w[k]), 0.1);
    }
  }
}

TEST(LogConditional, SymmetricCases) {
  EXPECT_DOUBLE_EQ(log_conditional(UnitKind::sigmoid(), Event::discrete(1), 0.0), std::log(0.5));
  EXPECT_DOUBLE_EQ(log_conditional(UnitKind::tanh(), Event::discrete(0), 0.0), std::log(0.5));
}

TEST(LogConditional, SigmoidAtTwoMatchesFixture) {
  const double expected = testing::scalar_fixtures().at("sigmoid_log_p1_at_2");
  EXPECT_NEAR(log_conditional(UnitKind::sigmoid(), Event::discrete(1), 2.0), expected, 1e-15);
  EXPECT_NEAR(expected, -0.126928, 1e-6);
}

TEST(LogConditional, TanhMatchesFixture) {
  const double expected = testing::scalar_fixtures().at("tanh_log_pm1_at_0.5");
  EXPECT_NEAR(log_conditional(UnitKind::tanh(), Event::discrete(0), 0.5), expected, 1e-15);
}

TEST(LogConditional, NormalisedForEveryKind) {
  for (const UnitKind& kind : {UnitKind::sigmoid(), UnitKind::tanh(), UnitKind::relu_sum(1),
                               UnitKind::relu_sum(4), UnitKind::relu_sum(8)}) {
    for (double a : {-30.0, -3.7, -0.2, 0.0, 0.9, 2.5, 12.0, 40.0}) {
      double total = 0.0;
      for (std::uint32_t c = 0; c < kind.event_count(); ++c) {
        total += std::exp(log_conditional(kind, Event::discrete(c), a));
      }
      EXPECT_NEAR(total, 1.0, 1e-12) << kind.name() << " a=" << a;
    }
  }
}

TEST(LogConditional, DeltaIsZeroOrMinusInfinity) {
  EXPECT_EQ(log_conditional(UnitKind::delta(), Event::real(0.25), 0.25), 0.0);
  EXPECT_EQ(log_conditional(UnitKind::delta(), Event::real(0.3), 0.25),
            -std::numeric_limits<double>::infinity());
}

TEST(LogConditional, DimensionMismatchThrows) {
  const Network net(chain_spec(3, {{1, UnitKind::sigmoid()}}));
  const std::vector<double> too_short{1.0, 2.0};
  EXPECT_THROW(log_conditional(net, UnitRef{1, 0}, Event::discrete(1), too_short),
               DimensionError);
  const std::vector<double> ok{1.0, 2.0, 3.0, 1.0};
  EXPECT_DOUBLE_EQ(log_conditional(net, UnitRef{1, 0}, Event::discrete(1), ok), std::log(0.5));
}

TEST(Energy, SingleOutputAtZeroIsLogTwo) {
  const Network net(chain_spec(2, {{1, UnitKind::sigmoid()}}));
  for (std::uint32_t c : {0u, 1u}) {
    const Assignment a{{0.4, -1.0}, {{Event::discrete(c)}}};
    EXPECT_DOUBLE_EQ(energy(net, a), std::log(2.0));
  }
}

TEST(Energy, AllDeltaConsistentAssignmentIsZero) {
  Network net(chain_spec(2, {{2, UnitKind::delta()}, {1, UnitKind::delta()}}));
  set_layer(net, 1, {{1.0, 0.5, 0.0}, {-1.0, 2.0, 0.25}});
  set_layer(net, 2, {{0.5, 0.5, 0.0}});
  const std::vector<double> x{0.5, 1.0};
  const double z0 = 0.5 + 0.5, z1 = -0.5 + 2.0 + 0.25;
  const Assignment ok{x, {{Event::real(z0), Event::real(z1)}, {Event::real(0.5 * (z0 + z1))}}};
  EXPECT_EQ(energy(net, ok), 0.0);
  Assignment bad = ok;
  bad.layers[1][0].value += 1.0;
  EXPECT_EQ(energy(net, bad), std::numeric_limits<double>::infinity());
}

// Product of per-unit probabilities computed without logarithms.
double direct_probability(const Network& net, const Assignment& asg) {
  LayerStates states = net.make_states(asg.x);
  double p = 1.0;
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    for (std::size_t u = 0; u < net.layer_size(l); ++u) {
      const double a = net.preactivation(l, u, states);
      const std::uint32_t c = asg.layers[l - 1][u].code;
      if (net.kind(l).family() == UnitFamily::Tanh) {
        const double s = c ? 1.0 : -1.0;
        p *= std::exp(s * a) / (std::exp(a) + std::exp(-a));
      } else {
        const double q = 1.0 / (1.0 + std::exp(-a));
        p *= c ? q : 1.0 - q;
      }
      states[l][u] = net.kind(l).encode(c);
    }
  }
  return p;
}

TEST(Energy, ExhaustiveIdentityOnTinyNet) {
  RngStream rng(77);
  Network net = Network::with_uniform_init(
      chain_spec(2, {{4, UnitKind::sigmoid()}, {4, UnitKind::tanh()}, {4, UnitKind::sigmoid()}}),
      1.5, 77);
  for (auto& layer : {1, 2, 3}) {
    for (std::size_t u = 0; u < 4; ++u) net.weights(layer, u).back() = rng.uniform() - 0.5;
  }
  const std::vector<double> x{0.3, -0.8};
  double total = 0.0;
  for (std::uint32_t bits = 0; bits < (1u << 12); ++bits) {
    Assignment asg{x, {}};
    for (int l = 0; l < 3; ++l) {
      std::vector<Event> events;
      for (int u = 0; u < 4; ++u) events.push_back(Event::discrete((bits >> (4 * l + u)) & 1u));
      asg.layers.push_back(events);
    }
    const double direct = direct_probability(net, asg);
    ASSERT_NEAR(std::exp(-energy(net, asg)), direct, 1e-12) << "assignment " << bits;
    total += direct;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Energy, IllegalAssignmentThrows) {
  const Network net(chain_spec(2, {{1, UnitKind::sigmoid()}}));
  EXPECT_THROW(energy(net, Assignment{{0.0}, {{Event::discrete(0)}}}), DimensionError);
  EXPECT_THROW(energy(net, Assignment{{0.0, 0.0}, {{Event::discrete(2)}}}), Error);
}

TEST(ParameterSet, Arithmetic) {
  ParameterSet a({{}, {1.0, 2.0}, {3.0}});
  ParameterSet b({{}, {0.5, 0.5}, {1.0}});
  a.axpy(2.0, b);
  EXPECT_EQ(a, ParameterSet({{}, {2.0, 3.0}, {5.0}}));
  a *= 0.5;
  a += b;
  EXPECT_EQ(a, ParameterSet({{}, {1.5, 2.0}, {3.5}}));
  EXPECT_EQ(a.size(), 3u);
  EXPECT_TRUE(a.all_finite());
  EXPECT_THROW(a += ParameterSet({{}, {1.0}}), DimensionError);
}

}  // namespace
}  // namespace stochnet
