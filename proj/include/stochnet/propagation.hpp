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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stochnet/network.hpp"
#include "stochnet/rng.hpp"

namespace stochnet {

/// Expected encoded value E[xi(z) | a]. Sigmoid: logistic(a); Tanh: tanh(a);
/// ReluSum(K): sum_i logistic(a - i + 0.5); Delta: a.
double unit_mean(const UnitKind& kind, double a);

/// d unit_mean / da. Delta units are the identity, so their derivative is 1.
double unit_mean_derivative(const UnitKind& kind, double a);

/// Internal sigmoid pre-activations of a ReluSum(K) unit: a - i + 0.5,
/// i = 1..K.
std::vector<double> relu_expand(double a, int components);

/// Draws an event from p(. | a). Delta units return Event::real(a).
Event sample_event(const UnitKind& kind, double a, RngStream& rng);

/// Encoded value of sample_event().
double unit_sample(const UnitKind& kind, double a, RngStream& rng);

enum class TraceMode { Deterministic, Sampled };

/// Result of one forward pass. Layer 0 of `states` is x; preactivations[0]
/// is empty. In Sampled mode, `codes` holds the drawn discrete events (zero
/// for Delta units).
struct ForwardTrace {
  TraceMode mode = TraceMode::Deterministic;
  LayerStates preactivations;
  LayerStates states;
  std::vector<std::vector<std::uint32_t>> codes;

  std::span<const double> outputs() const { return states.back(); }
};

/// Standard FFN evaluation: every unit outputs unit_mean of its
/// pre-activation computed from upstream means.
ForwardTrace forward_deterministic(const Network& net, std::span<const double> x);

/// Ancestral sample of every hidden and output unit; pre-activations are
/// computed from sampled upstream states. Draws come from `rng` in unit order.
ForwardTrace forward_sample(const Network& net, std::span<const double> x,
                            RngStream& rng);

/// Recomputes layers first_layer..output as means, keeping earlier layers of
/// `trace` as they are.
void propagate_means(const Network& net, ForwardTrace& trace,
                     std::size_t first_layer);

}  // namespace stochnet
