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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stochnet/unit_kind.hpp"

namespace stochnet {

struct GridShape {
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Every unit of the layer reads every unit of each listed layer. Layer 0 is
/// the input.
struct DenseConnectivity {
  std::vector<int> from_layers;
  friend bool operator==(const DenseConnectivity&,
                         const DenseConnectivity&) = default;
};

/// Unit (l, i, j) reads units (l', i', j') with l - depth <= l' < l,
/// l' >= 1, and max(|i - i'|, |j - j'|) <= radius. With image_access it also
/// reads every channel of the input pixels inside the same window. Windows
/// are truncated at the grid boundary.
struct LocalConnectivity {
  int depth = 1;
  int radius = 1;
  bool image_access = false;
  friend bool operator==(const LocalConnectivity&,
                         const LocalConnectivity&) = default;
};

using Connectivity = std::variant<DenseConnectivity, LocalConnectivity>;

struct LayerSpec {
  int unit_count = 0;
  UnitKind kind = UnitKind::sigmoid();
  std::optional<GridShape> grid;
  Connectivity connectivity;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Layered network description. Layer indices: 0 is the input, layers[i] is
/// layer i + 1, and the last layer holds the outputs.
struct NetworkSpec {
  int input_count = 0;
  /// When set, input_count must equal rows * cols * input_channels and the
  /// input is laid out row-major with interleaved channels.
  std::optional<GridShape> input_grid;
  int input_channels = 1;
  std::vector<LayerSpec> layers;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const NetworkSpec& spec);

/// Layer grammar shared by config files and checkpoints:
///   <kind> <count|RxC> dense <layer>...
///   <kind> <count|RxC> local <depth> <radius> [image]
std::string format_layer(const LayerSpec& layer);
LayerSpec parse_layer(std::string_view text);
/// Input grammar: "<count>" or "<R>x<C>x<channels>".
std::string format_input(const NetworkSpec& spec);
void parse_input(std::string_view text, NetworkSpec& spec);

struct UnitRef {
  std::size_t layer = 0;
  std::size_t unit = 0;
  friend bool operator==(const UnitRef&, const UnitRef&) = default;
};

struct Source {
  std::uint32_t layer;
  std::uint32_t unit;
};

/// Per-layer state vectors; index 0 is the input x.
using LayerStates = std::vector<std::vector<double>>;

/// Flat per-layer parameter storage. Index 0 (the input) is always empty.
/// Unit slices are located through Network::param_offset().
class ParameterSet {
 public:
  ParameterSet() = default;
  explicit ParameterSet(std::vector<std::vector<double>> layers)
      : layers_(std::move(layers)) {}

  ParameterSet zeros_like() const;
  std::size_t size() const;
  bool all_finite() const;

  std::vector<double>& layer(std::size_t l) { return layers_[l]; }
  const std::vector<double>& layer(std::size_t l) const { return layers_[l]; }
  std::size_t layer_count() const { return layers_.size(); }

  ParameterSet& operator+=(const ParameterSet& other);
  ParameterSet& operator*=(double factor);
  /// this += alpha * other
  void axpy(double alpha, const ParameterSet& other);
  bool same_shape(const ParameterSet& other) const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<std::vector<double>> layers_;
};

/// Resolved input sets for every unit. Shared by copies of a Network.
struct Topology {
  struct Layer {
    std::vector<Source> sources;
    std::vector<std::size_t> source_offsets;  // unit_count + 1 entries
  };
  std::vector<Layer> layers;  // index 0 unused
};

/**
 * A validated NetworkSpec plus parameters theta.
 *
 * Unit v in layer l owns fan_in(v) + 1 parameters: one weight per source in
 * the order of sources(l, v), then the bias (a constant-1 input).
 */
class Network {
 public:
  /// Throws SpecError listing every violation. Parameters start at zero.
  explicit Network(NetworkSpec spec);

  /// Weights uniform in [-scale, +scale], biases zero.
  static Network with_uniform_init(NetworkSpec spec, double scale,
                                   std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }

  /// Number of computed layers; also the index of the output layer.
  std::size_t layer_count() const { return spec_.layers.size(); }
  std::size_t output_layer() const { return layer_count(); }
  std::size_t input_count() const { return spec_.input_count; }
  std::size_t output_count() const { return layer_size(output_layer()); }
  std::size_t layer_size(std::size_t layer) const;
  const UnitKind& kind(std::size_t layer) const {
    return spec_.layers[layer - 1].kind;
  }

  std::span<const Source> sources(std::size_t layer, std::size_t unit) const;
  std::size_t fan_in(std::size_t layer, std::size_t unit) const;
  std::size_t param_offset(std::size_t layer, std::size_t unit) const;

  std::span<const double> weights(std::size_t layer, std::size_t unit) const;
  std::span<double> weights(std::size_t layer, std::size_t unit);
  /// The slice of `params` (shaped like this network's) owned by a unit.
  std::span<double> unit_slice(ParameterSet& params, std::size_t layer,
                               std::size_t unit) const;
  std::span<const double> unit_slice(const ParameterSet& params,
                                     std::size_t layer,
                                     std::size_t unit) const;

  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  /// <I_v, w_v> + bias with I_v read from `states`.
  double preactivation(std::size_t layer, std::size_t unit,
                       const LayerStates& states) const;
  /// I_v followed by the constant 1.
  std::vector<double> augmented_inputs(std::size_t layer, std::size_t unit,
                                       const LayerStates& states) const;

  /// State vectors of the right sizes, filled with zeros, x copied in.
  LayerStates make_states(std::span<const double> x) const;

 private:
  NetworkSpec spec_;
  std::shared_ptr<const Topology> topology_;
  ParameterSet params_;
};

/// One realised event. Discrete units use `code` (see UnitKind); Delta units
/// use `value`.
struct Event {
  std::uint32_t code = 0;
  double value = 0.0;

  static Event discrete(std::uint32_t code) { return Event{code, 0.0}; }
  static Event real(double value) { return Event{0, value}; }
};

double encoded_value(const UnitKind& kind, const Event& event);

/// Full elementary event (x, z, y). layers[l - 1] holds layer l; the last
/// entry is y.
struct Assignment {
  std::vector<double> x;
  std::vector<std::vector<Event>> layers;
};

/// ln p(event | pre-activation a) for one unit. Delta units return 0 when
/// event.value == a and -infinity otherwise.
double log_conditional(const UnitKind& kind, const Event& event, double a);

/// ln p(event | inputs) for unit v; `augmented_inputs` is I_v followed by the
/// bias slot. Throws DimensionError on a length mismatch.
double log_conditional(const Network& net, UnitRef v, const Event& event,
                       std::span<const double> augmented_inputs);

/// E(x, y, z) = sum_v -ln p(event_v | I_v). Returns +infinity when a Delta
/// unit's event has zero probability.
double energy(const Network& net, const Assignment& assignment);

/// Throws DimensionError / Error when the assignment does not fit the net.
void check_assignment(const Network& net, const Assignment& assignment);

}  // namespace stochnet
