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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stochnet/image.hpp"
#include "stochnet/network.hpp"
#include "stochnet/propagation.hpp"
#include "stochnet/rng.hpp"

namespace stochnet {

/// Largest number of discrete bits enumerate_* will walk.
inline constexpr int kMaxEnumerationBits = 20;

/**
 * Marginal estimates for one input.
 *
 * outputs[v] is p(y_v positive), where positive means code 1 for sigmoid and
 * tanh outputs and value > 0.5 for Delta outputs. hidden[l - 1][u] is the
 * expected encoding of hidden unit u in layer l rescaled to [0, 1]:
 * p(z = 1) for sigmoid, p(z = +1) for tanh, E[count] / K for ReluSum, and
 * p(value > 0.5) for Delta units.
 */
struct MarginalField {
  std::vector<double> outputs;
  std::vector<std::vector<double>> hidden;
  std::size_t samples = 0;
  std::optional<GridShape> grid;  // copied from the output layer
};

/// Output variables fixed by the user (Y_u); everything else is free (Y_d).
class ClampSet {
 public:
  ClampSet() = default;
  explicit ClampSet(std::size_t output_count) : codes_(output_count) {}

  /// Throws DimensionError when `v` is out of range.
  void clamp(std::size_t v, std::uint32_t code);
  void release(std::size_t v);
  bool is_clamped(std::size_t v) const { return codes_.at(v).has_value(); }
  std::uint32_t value(std::size_t v) const { return codes_.at(v).value(); }
  /// Number of clamped outputs.
  std::size_t size() const;
  std::size_t output_count() const { return codes_.size(); }
  bool empty() const { return size() == 0; }

  friend bool operator==(const ClampSet&, const ClampSet&) = default;

 private:
  std::vector<std::optional<std::uint32_t>> codes_;
};

/// Discrete bits contributed by layers 1..last_layer.
int discrete_bits(const Network& net, std::size_t last_layer);

/**
 * Calls `visit(trace, log_prob)` once for every joint event of layers
 * 1..last_layer that has non-zero probability under the ancestral
 * distribution given x. Delta units take their deterministic value.
 * Layers past last_layer are left at zero in the trace.
 *
 * Throws StateSpaceError above kMaxEnumerationBits.
 */
void enumerate_layers(
    const Network& net, std::span<const double> x, std::size_t last_layer,
    const std::function<void(const ForwardTrace&, double)>& visit);

/// Exact joint table over every discrete unit given x, optionally
/// conditioned on clamped outputs.
struct PosteriorTable {
  /// keys[i] holds one code per discrete unit, layers in order.
  std::vector<std::vector<std::uint32_t>> keys;
  std::vector<double> probabilities;
  /// Exact marginals in the MarginalField conventions, samples = 0.
  MarginalField marginals;
  /// p(y_u | x) of the clamps; 1 without clamps.
  double evidence = 1.0;
};

PosteriorTable enumerate_posterior(const Network& net, std::span<const double> x,
                                   const ClampSet* clamp = nullptr);

/// Marginals from n ancestral samples drawn in sequence from `rng`. Each
/// sample contributes every unit's conditional expectation given its sampled
/// parents, in the MarginalField conventions.
MarginalField mc_marginals(const Network& net, std::span<const double> x,
                           std::size_t n_samples, RngStream& rng);

/// Codes of the per-variable max-marginal decision; p = 0.5 decides 0.
std::vector<std::uint32_t> max_marginal_decide(const MarginalField& field);

struct GibbsConfig {
  std::size_t burn_in = 1000;
  std::size_t sweeps = 10000;
  std::size_t thinning = 10;
};

/**
 * Gibbs sampling of p(y_d, z | x, y_u).
 *
 * The chain starts from an ancestral sample with the clamps written over the
 * outputs. Each sweep visits every free discrete variable (each internal bit
 * of a ReluSum unit separately) in layer order, alternating with reverse
 * order on the next sweep; Delta units follow their parents. After burn_in
 * sweeps, every thinning-th sweep is recorded. Recorded discrete marginals
 * average the single-variable conditional at the moment of the visit.
 * Clamped outputs report exactly 0 or 1.
 *
 * Throws NonErgodicError when a variable has no event of non-zero
 * probability, for example a clamped Delta output.
 */
MarginalField gibbs_clamped(const Network& net, std::span<const double> x,
                            const ClampSet& clamp, const GibbsConfig& cfg,
                            RngStream& rng);

/// |pred AND gt| / |pred OR gt|, 1 when both are empty. Masks are 0/1.
double iou(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);

/// round(p * 255) per output. Throws DimensionError without an output grid.
GrayImage marginals_to_pgm(const MarginalField& field);

}  // namespace stochnet
