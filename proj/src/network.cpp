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

#include "stochnet/network.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "stochnet/error.hpp"
#include "stochnet/rng.hpp"

namespace stochnet {

SpecError::SpecError(std::vector<std::string> violations)
    : Error([&] {
        std::string msg = "invalid network spec:";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

namespace {

std::string layer_prefix(std::size_t l) {
  return "layer " + std::to_string(l) + ": ";
}

std::string grid_text(const GridShape& g) {
  return std::to_string(g.rows) + "x" + std::to_string(g.cols);
}

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

int parse_int(std::string_view token, std::string_view what) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw Error("expected integer for " + std::string(what) + ", got '" +
                std::string(token) + "'");
  }
  return value;
}

std::vector<int> parse_dims(std::string_view token, std::string_view what) {
  std::vector<int> dims;
  std::size_t start = 0;
  while (true) {
    const auto pos = token.find('x', start);
    dims.push_back(parse_int(token.substr(start, pos - start), what));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return dims;
}

/// Source layers of a local layer other than the input, ascending.
std::pair<int, int> local_hidden_range(int layer, const LocalConnectivity& c) {
  return {std::max(1, layer - c.depth), layer - 1};
}

}  // namespace

ValidationReport validate(const NetworkSpec& spec) {
  ValidationReport report;
  auto& v = report.violations;
  if (spec.input_count <= 0) v.push_back("input_count must be positive");
  if (spec.input_grid) {
    const auto& g = *spec.input_grid;
    if (g.rows <= 0 || g.cols <= 0 || spec.input_channels <= 0 ||
        static_cast<long long>(g.rows) * g.cols * spec.input_channels !=
            spec.input_count) {
      v.push_back("input grid " + grid_text(g) + "x" +
                  std::to_string(spec.input_channels) +
                  " does not match input_count " +
                  std::to_string(spec.input_count));
    }
  }
  if (spec.layers.empty()) v.push_back("network has no layers");

  const int n = static_cast<int>(spec.layers.size());
  for (int l = 1; l <= n; ++l) {
    const LayerSpec& layer = spec.layers[l - 1];
    const std::string at = layer_prefix(l);
    if (layer.unit_count <= 0) v.push_back(at + "empty layer");
    if (layer.grid && (layer.grid->rows <= 0 || layer.grid->cols <= 0 ||
                       static_cast<long long>(layer.grid->size()) !=
                           layer.unit_count)) {
      v.push_back(at + "grid " + grid_text(*layer.grid) +
                  " does not match unit_count " +
                  std::to_string(layer.unit_count));
    }
    if (layer.kind.family() == UnitFamily::ReluSum &&
        (layer.kind.components() < 1 ||
         layer.kind.components() > UnitKind::kMaxReluComponents)) {
      v.push_back(at + "relusum needs 1 <= K <= " +
                  std::to_string(UnitKind::kMaxReluComponents));
    }
    if (l == n && layer.kind.family() == UnitFamily::ReluSum) {
      v.push_back(at + "relusum units cannot be outputs");
    }

    if (const auto* dense = std::get_if<DenseConnectivity>(&layer.connectivity)) {
      if (dense->from_layers.empty()) {
        v.push_back(at + "dense connectivity lists no source layers");
      }
      std::set<int> seen;
      for (int s : dense->from_layers) {
        if (s < 0) {
          v.push_back(at + "unknown source layer " + std::to_string(s));
        } else if (s >= l) {
          v.push_back(at + "acyclicity: source layer " + std::to_string(s) +
                      " is not earlier than layer " + std::to_string(l));
        }
        if (!seen.insert(s).second) {
          v.push_back(at + "duplicate source layer " + std::to_string(s));
        }
      }
    } else {
      const auto& local = std::get<LocalConnectivity>(layer.connectivity);
      if (!layer.grid) {
        v.push_back(at + "local connectivity requires a grid");
        continue;
      }
      const GridShape& grid = *layer.grid;
      if (local.depth < 1) v.push_back(at + "local depth must be >= 1");
      if (local.radius < 0 || local.radius > std::max(grid.rows, grid.cols)) {
        v.push_back(at + "out-of-range radius " + std::to_string(local.radius));
      }
      bool any_source = false;
      if (local.image_access) {
        any_source = true;
        if (!spec.input_grid) {
          v.push_back(at + "image access requires an input grid");
        } else if (!(*spec.input_grid == grid)) {
          v.push_back(at + "input grid " + grid_text(*spec.input_grid) +
                      " differs from layer grid " + grid_text(grid));
        }
      }
      if (local.depth >= 1) {
        const auto [first, last] = local_hidden_range(l, local);
        for (int s = first; s <= last; ++s) {
          any_source = true;
          const auto& src = spec.layers[s - 1];
          if (!src.grid || !(*src.grid == grid)) {
            v.push_back(at + "source layer " + std::to_string(s) +
                        " grid differs from layer grid " + grid_text(grid));
          }
        }
      }
      if (!any_source) {
        v.push_back(at + "local connectivity reaches no source layer");
      }
    }
  }
  return report;
}

std::string format_layer(const LayerSpec& layer) {
  std::string out = layer.kind.name() + " ";
  out += layer.grid ? grid_text(*layer.grid) : std::to_string(layer.unit_count);
  if (const auto* dense = std::get_if<DenseConnectivity>(&layer.connectivity)) {
    out += " dense";
    for (int s : dense->from_layers) out += " " + std::to_string(s);
  } else {
    const auto& local = std::get<LocalConnectivity>(layer.connectivity);
    out += " local " + std::to_string(local.depth) + " " +
           std::to_string(local.radius);
    if (local.image_access) out += " image";
  }
  return out;
}

LayerSpec parse_layer(std::string_view text) {
  const auto tokens = split_ws(text);
  if (tokens.size() < 3) {
    throw Error("layer '" + std::string(text) +
                "' needs <kind> <size> <connectivity>");
  }
  LayerSpec layer;
  layer.kind = UnitKind::parse(tokens[0]);
  const auto dims = parse_dims(tokens[1], "layer size");
  if (dims.size() == 1) {
    layer.unit_count = dims[0];
  } else if (dims.size() == 2) {
    layer.grid = GridShape{dims[0], dims[1]};
    layer.unit_count = dims[0] * dims[1];
  } else {
    throw Error("layer size '" + std::string(tokens[1]) +
                "' must be <count> or <rows>x<cols>");
  }
  if (tokens[2] == "dense") {
    DenseConnectivity dense;
    for (std::size_t i = 3; i < tokens.size(); ++i) {
      dense.from_layers.push_back(parse_int(tokens[i], "source layer"));
    }
    layer.connectivity = dense;
  } else if (tokens[2] == "local") {
    if (tokens.size() < 5 || tokens.size() > 6 ||
        (tokens.size() == 6 && tokens[5] != "image")) {
      throw Error("local layer '" + std::string(text) +
                  "' must read: local <depth> <radius> [image]");
    }
    LocalConnectivity local;
    local.depth = parse_int(tokens[3], "local depth");
    local.radius = parse_int(tokens[4], "local radius");
    local.image_access = tokens.size() == 6;
    layer.connectivity = local;
  } else {
    throw Error("unknown connectivity '" + std::string(tokens[2]) + "'");
  }
  return layer;
}

std::string format_input(const NetworkSpec& spec) {
  if (spec.input_grid) {
    return grid_text(*spec.input_grid) + "x" +
           std::to_string(spec.input_channels);
  }
  return std::to_string(spec.input_count);
}

void parse_input(std::string_view text, NetworkSpec& spec) {
  const auto tokens = split_ws(text);
  if (tokens.size() != 1) throw Error("input must be <count> or <R>x<C>x<K>");
  const auto dims = parse_dims(tokens[0], "input size");
  if (dims.size() == 1) {
    spec.input_count = dims[0];
    spec.input_grid.reset();
    spec.input_channels = 1;
  } else if (dims.size() == 3) {
    spec.input_grid = GridShape{dims[0], dims[1]};
    spec.input_channels = dims[2];
    spec.input_count = dims[0] * dims[1] * dims[2];
  } else {
    throw Error("input must be <count> or <R>x<C>x<K>");
  }
}

// ---------------------------------------------------------------------------

ParameterSet ParameterSet::zeros_like() const {
  std::vector<std::vector<double>> zeros;
  zeros.reserve(layers_.size());
  for (const auto& layer : layers_) zeros.emplace_back(layer.size(), 0.0);
  return ParameterSet(std::move(zeros));
}

std::size_t ParameterSet::size() const {
  std::size_t total = 0;
  for (const auto& layer : layers_) total += layer.size();
  return total;
}

bool ParameterSet::all_finite() const {
  for (const auto& layer : layers_) {
    for (double w : layer) {
      if (!std::isfinite(w)) return false;
    }
  }
  return true;
}

bool ParameterSet::same_shape(const ParameterSet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].size() != other.layers_[l].size()) return false;
  }
  return true;
}

ParameterSet& ParameterSet::operator+=(const ParameterSet& other) {
  axpy(1.0, other);
  return *this;
}

ParameterSet& ParameterSet::operator*=(double factor) {
  for (auto& layer : layers_) {
    for (double& w : layer) w *= factor;
  }
  return *this;
}

void ParameterSet::axpy(double alpha, const ParameterSet& other) {
  if (!same_shape(other)) throw DimensionError("parameter set shape mismatch");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& dst = layers_[l];
    const auto& src = other.layers_[l];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += alpha * src[i];
  }
}

// ---------------------------------------------------------------------------

namespace {

std::shared_ptr<const Topology> build_topology(const NetworkSpec& spec) {
  auto topo = std::make_shared<Topology>();
  const int n = static_cast<int>(spec.layers.size());
  topo->layers.resize(n + 1);
  auto size_of = [&](int layer) {
    return layer == 0 ? spec.input_count : spec.layers[layer - 1].unit_count;
  };
  for (int l = 1; l <= n; ++l) {
    const LayerSpec& layer = spec.layers[l - 1];
    auto& out = topo->layers[l];
    out.source_offsets.reserve(layer.unit_count + 1);
    out.source_offsets.push_back(0);
    if (const auto* dense = std::get_if<DenseConnectivity>(&layer.connectivity)) {
      for (int u = 0; u < layer.unit_count; ++u) {
        for (int s : dense->from_layers) {
          for (int k = 0; k < size_of(s); ++k) {
            out.sources.push_back({static_cast<std::uint32_t>(s),
                                   static_cast<std::uint32_t>(k)});
          }
        }
        out.source_offsets.push_back(out.sources.size());
      }
      continue;
    }
    const auto& local = std::get<LocalConnectivity>(layer.connectivity);
    const GridShape grid = *layer.grid;
    const auto [first, last] = local_hidden_range(l, local);
    for (int i = 0; i < grid.rows; ++i) {
      for (int j = 0; j < grid.cols; ++j) {
        auto window = [&](int src_layer, int channels) {
          for (int di = -local.radius; di <= local.radius; ++di) {
            const int ii = i + di;
            if (ii < 0 || ii >= grid.rows) continue;
            for (int dj = -local.radius; dj <= local.radius; ++dj) {
              const int jj = j + dj;
              if (jj < 0 || jj >= grid.cols) continue;
              for (int c = 0; c < channels; ++c) {
                out.sources.push_back(
                    {static_cast<std::uint32_t>(src_layer),
                     static_cast<std::uint32_t>((ii * grid.cols + jj) *
                                                    channels +
                                                c)});
              }
            }
          }
        };
        if (local.image_access) window(0, spec.input_channels);
        for (int s = first; s <= last; ++s) window(s, 1);
        out.source_offsets.push_back(out.sources.size());
      }
    }
  }
  return topo;
}

}  // namespace

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  auto report = validate(spec_);
  if (!report.ok()) throw SpecError(std::move(report.violations));
  topology_ = build_topology(spec_);
  std::vector<std::vector<double>> params(layer_count() + 1);
  for (std::size_t l = 1; l <= layer_count(); ++l) {
    params[l].assign(topology_->layers[l].sources.size() + layer_size(l), 0.0);
  }
  params_ = ParameterSet(std::move(params));
}

Network Network::with_uniform_init(NetworkSpec spec, double scale,
                                   std::uint64_t seed) {
  Network net(std::move(spec));
  RngStream rng(seed);
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    for (std::size_t u = 0; u < net.layer_size(l); ++u) {
      auto w = net.weights(l, u);
      for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        w[k] = scale * (2.0 * rng.uniform() - 1.0);
      }
    }
  }
  return net;
}

std::size_t Network::layer_size(std::size_t layer) const {
  return layer == 0 ? spec_.input_count : spec_.layers[layer - 1].unit_count;
}

std::span<const Source> Network::sources(std::size_t layer,
                                         std::size_t unit) const {
  const auto& t = topology_->layers[layer];
  return std::span<const Source>(t.sources)
      .subspan(t.source_offsets[unit],
               t.source_offsets[unit + 1] - t.source_offsets[unit]);
}

std::size_t Network::fan_in(std::size_t layer, std::size_t unit) const {
  const auto& t = topology_->layers[layer];
  return t.source_offsets[unit + 1] - t.source_offsets[unit];
}

std::size_t Network::param_offset(std::size_t layer, std::size_t unit) const {
  return topology_->layers[layer].source_offsets[unit] + unit;
}

std::span<const double> Network::weights(std::size_t layer,
                                         std::size_t unit) const {
  return unit_slice(params_, layer, unit);
}

std::span<double> Network::weights(std::size_t layer, std::size_t unit) {
  return unit_slice(params_, layer, unit);
}

std::span<double> Network::unit_slice(ParameterSet& params, std::size_t layer,
                                      std::size_t unit) const {
  return std::span<double>(params.layer(layer))
      .subspan(param_offset(layer, unit), fan_in(layer, unit) + 1);
}

std::span<const double> Network::unit_slice(const ParameterSet& params,
                                            std::size_t layer,
                                            std::size_t unit) const {
  return std::span<const double>(params.layer(layer))
      .subspan(param_offset(layer, unit), fan_in(layer, unit) + 1);
}

double Network::preactivation(std::size_t layer, std::size_t unit,
                              const LayerStates& states) const {
  const auto src = sources(layer, unit);
  const auto w = weights(layer, unit);
  double a = 0.0;
  for (std::size_t k = 0; k < src.size(); ++k) {
    a += w[k] * states[src[k].layer][src[k].unit];
  }
  return a + w[src.size()];
}

std::vector<double> Network::augmented_inputs(std::size_t layer,
                                              std::size_t unit,
                                              const LayerStates& states) const {
  const auto src = sources(layer, unit);
  std::vector<double> in(src.size() + 1, 1.0);
  for (std::size_t k = 0; k < src.size(); ++k) {
    in[k] = states[src[k].layer][src[k].unit];
  }
  return in;
}

LayerStates Network::make_states(std::span<const double> x) const {
  if (x.size() != input_count()) {
    throw DimensionError("input has " + std::to_string(x.size()) +
                         " values, network expects " +
                         std::to_string(input_count()));
  }
  LayerStates states(layer_count() + 1);
  states[0].assign(x.begin(), x.end());
  for (std::size_t l = 1; l <= layer_count(); ++l) {
    states[l].assign(layer_size(l), 0.0);
  }
  return states;
}

// ---------------------------------------------------------------------------

double encoded_value(const UnitKind& kind, const Event& event) {
  return kind.is_discrete() ? kind.encode(event.code) : event.value;
}

double log_conditional(const UnitKind& kind, const Event& event, double a) {
  switch (kind.family()) {
    case UnitFamily::Sigmoid:
      return event.code ? -softplus(-a) : -softplus(a);
    case UnitFamily::Tanh:
      return (event.code ? a : -a) - log_two_cosh(a);
    case UnitFamily::ReluSum: {
      double lp = 0.0;
      for (int i = 1; i <= kind.components(); ++i) {
        const double ai = a - i + 0.5;
        lp += ((event.code >> (i - 1)) & 1u) ? -softplus(-ai) : -softplus(ai);
      }
      return lp;
    }
    case UnitFamily::Delta:
      return event.value == a ? 0.0
                              : -std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double log_conditional(const Network& net, UnitRef v, const Event& event,
                       std::span<const double> augmented_inputs) {
  const auto w = net.weights(v.layer, v.unit);
  if (augmented_inputs.size() != w.size()) {
    throw DimensionError("unit (" + std::to_string(v.layer) + ", " +
                         std::to_string(v.unit) + ") expects " +
                         std::to_string(w.size()) + " augmented inputs, got " +
                         std::to_string(augmented_inputs.size()));
  }
  double a = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) a += w[k] * augmented_inputs[k];
  return log_conditional(net.kind(v.layer), event, a);
}

void check_assignment(const Network& net, const Assignment& assignment) {
  if (assignment.x.size() != net.input_count()) {
    throw DimensionError("assignment x has " +
                         std::to_string(assignment.x.size()) + " values, expected " +
                         std::to_string(net.input_count()));
  }
  if (assignment.layers.size() != net.layer_count()) {
    throw DimensionError("assignment has " +
                         std::to_string(assignment.layers.size()) +
                         " layers, expected " + std::to_string(net.layer_count()));
  }
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    const auto& events = assignment.layers[l - 1];
    if (events.size() != net.layer_size(l)) {
      throw DimensionError("assignment layer " + std::to_string(l) + " has " +
                           std::to_string(events.size()) + " events, expected " +
                           std::to_string(net.layer_size(l)));
    }
    const UnitKind& kind = net.kind(l);
    for (const Event& e : events) {
      if (kind.is_discrete() ? e.code >= kind.event_count()
                             : !std::isfinite(e.value)) {
        throw Error("assignment layer " + std::to_string(l) +
                    " holds an illegal " + kind.name() + " event");
      }
    }
  }
}

double energy(const Network& net, const Assignment& assignment) {
  check_assignment(net, assignment);
  LayerStates states = net.make_states(assignment.x);
  double e = 0.0;
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    const UnitKind& kind = net.kind(l);
    for (std::size_t u = 0; u < net.layer_size(l); ++u) {
      const Event& event = assignment.layers[l - 1][u];
      const double lp =
          log_conditional(kind, event, net.preactivation(l, u, states));
      if (lp == -std::numeric_limits<double>::infinity()) {
        return std::numeric_limits<double>::infinity();
      }
      e -= lp;
      states[l][u] = encoded_value(kind, event);
    }
  }
  return e;
}

}  // namespace stochnet
