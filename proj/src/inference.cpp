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


#include "stochnet/inference.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "stochnet/error.hpp"

namespace stochnet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Encoded value rescaled to [0, 1]; Delta units report value > 0.5.
double normalized(const UnitKind& kind, std::uint32_t code, double state) {
  switch (kind.family()) {
    case UnitFamily::Sigmoid:
    case UnitFamily::Tanh:
      return code == 1 ? 1.0 : 0.0;
    case UnitFamily::ReluSum:
      return static_cast<double>(std::popcount(code)) / kind.components();
    case UnitFamily::Delta:
      return state > 0.5 ? 1.0 : 0.0;
  }
  return 0.0;
}

MarginalField empty_field(const Network& net) {
  MarginalField field;
  field.outputs.assign(net.output_count(), 0.0);
  for (std::size_t l = 1; l < net.layer_count(); ++l) {
    field.hidden.emplace_back(net.layer_size(l), 0.0);
  }
  field.grid = net.spec().layers.back().grid;
  return field;
}

/// Adds `weight` times the normalised state of every unit to `field`.
void accumulate_field(const Network& net, const ForwardTrace& trace,
                      double weight, MarginalField& field) {
  const std::size_t n = net.layer_count();
  for (std::size_t l = 1; l <= n; ++l) {
    const UnitKind& kind = net.kind(l);
    auto& target = l == n ? field.outputs : field.hidden[l - 1];
    for (std::size_t u = 0; u < target.size(); ++u) {
      target[u] += weight * normalized(kind, trace.codes[l][u], trace.states[l][u]);
    }
  }
}

void scale_field(MarginalField& field, double factor) {
  for (double& p : field.outputs) p *= factor;
  for (auto& layer : field.hidden) {
    for (double& p : layer) p *= factor;
  }
}

void check_clamp(const Network& net, const ClampSet& clamp) {
  if (clamp.output_count() != net.output_count()) {
    throw DimensionError("clamp set covers " +
                         std::to_string(clamp.output_count()) +
                         " outputs, network has " +
                         std::to_string(net.output_count()));
  }
  const UnitKind& kind = net.kind(net.output_layer());
  for (std::size_t v = 0; v < clamp.output_count(); ++v) {
    if (!clamp.is_clamped(v)) continue;
    if (!kind.is_discrete()) {
      throw NonErgodicError("output " + std::to_string(v) +
                            " is a delta unit; clamping it leaves no event "
                            "of non-zero probability");
    }
    if (clamp.value(v) >= kind.event_count()) {
      throw DimensionError("clamp code " + std::to_string(clamp.value(v)) +
                           " is not a legal event for output " +
                           std::to_string(v));
    }
  }
}

class Enumerator {
 public:
  Enumerator(const Network& net, std::span<const double> x, std::size_t last,
             const std::function<void(const ForwardTrace&, double)>& visit)
      : net_(net), last_(last), visit_(visit) {
    trace_.mode = TraceMode::Sampled;
    trace_.states = net.make_states(x);
    trace_.preactivations.resize(net.layer_count() + 1);
    trace_.codes.resize(net.layer_count() + 1);
    for (std::size_t l = 1; l <= net.layer_count(); ++l) {
      trace_.preactivations[l].assign(net.layer_size(l), 0.0);
      trace_.codes[l].assign(net.layer_size(l), 0u);
    }
  }

  void run() { layer(1, 0.0); }

 private:
  void layer(std::size_t l, double log_prob) {
    if (l > last_) {
      visit_(trace_, log_prob);
      return;
    }
    for (std::size_t u = 0; u < net_.layer_size(l); ++u) {
      trace_.preactivations[l][u] = net_.preactivation(l, u, trace_.states);
    }
    unit(l, 0, log_prob);
  }

  void unit(std::size_t l, std::size_t u, double log_prob) {
    if (u == net_.layer_size(l)) {
      layer(l + 1, log_prob);
      return;
    }
    const UnitKind& kind = net_.kind(l);
    const double a = trace_.preactivations[l][u];
    if (!kind.is_discrete()) {
      trace_.states[l][u] = a;
      unit(l, u + 1, log_prob);
      return;
    }
    for (std::uint32_t code = 0; code < kind.event_count(); ++code) {
      const double lc = log_conditional(kind, Event::discrete(code), a);
      if (lc == kNegInf) continue;
      trace_.codes[l][u] = code;
      trace_.states[l][u] = kind.encode(code);
      unit(l, u + 1, log_prob + lc);
    }
  }

  const Network& net_;
  std::size_t last_;
  const std::function<void(const ForwardTrace&, double)>& visit_;
  ForwardTrace trace_;
};

}  // namespace

void ClampSet::clamp(std::size_t v, std::uint32_t code) {
  if (v >= codes_.size()) {
    throw DimensionError("clamp index " + std::to_string(v) +
                         " out of range for " + std::to_string(codes_.size()) +
                         " outputs");
  }
  codes_[v] = code;
}

void ClampSet::release(std::size_t v) {
  if (v >= codes_.size()) {
    throw DimensionError("clamp index " + std::to_string(v) +
                         " out of range for " + std::to_string(codes_.size()) +
                         " outputs");
  }
  codes_[v].reset();
}

std::size_t ClampSet::size() const {
  std::size_t n = 0;
  for (const auto& c : codes_) n += c.has_value();
  return n;
}

int discrete_bits(const Network& net, std::size_t last_layer) {
  int bits = 0;
  for (std::size_t l = 1; l <= last_layer; ++l) {
    bits += net.kind(l).bits() * static_cast<int>(net.layer_size(l));
  }
  return bits;
}

void enumerate_layers(
    const Network& net, std::span<const double> x, std::size_t last_layer,
    const std::function<void(const ForwardTrace&, double)>& visit) {
  if (last_layer > net.layer_count()) {
    throw DimensionError("enumeration depth " + std::to_string(last_layer) +
                         " exceeds " + std::to_string(net.layer_count()) +
                         " layers");
  }
  const int bits = discrete_bits(net, last_layer);
  if (bits > kMaxEnumerationBits) {
    throw StateSpaceError("state space of " + std::to_string(bits) +
                          " discrete bits exceeds the enumeration limit of " +
                          std::to_string(kMaxEnumerationBits));
  }
  Enumerator(net, x, last_layer, visit).run();
}

PosteriorTable enumerate_posterior(const Network& net, std::span<const double> x,
                                   const ClampSet* clamp) {
  if (clamp) check_clamp(net, *clamp);
  const std::size_t n = net.layer_count();
  PosteriorTable table;
  table.marginals = empty_field(net);
  double evidence = 0.0;
  enumerate_layers(net, x, n, [&](const ForwardTrace& trace, double log_prob) {
    if (clamp) {
      for (std::size_t v = 0; v < net.output_count(); ++v) {
        if (clamp->is_clamped(v) && trace.codes[n][v] != clamp->value(v)) return;
      }
    }
    const double p = std::exp(log_prob);
    std::vector<std::uint32_t> key;
    for (std::size_t l = 1; l <= n; ++l) {
      if (!net.kind(l).is_discrete()) continue;
      key.insert(key.end(), trace.codes[l].begin(), trace.codes[l].end());
    }
    table.keys.push_back(std::move(key));
    table.probabilities.push_back(p);
    accumulate_field(net, trace, p, table.marginals);
    evidence += p;
  });
  if (clamp && !clamp->empty()) {
    if (!(evidence > 0.0)) {
      throw NonErgodicError("clamped outputs have zero probability");
    }
    for (double& p : table.probabilities) p /= evidence;
    scale_field(table.marginals, 1.0 / evidence);
    for (std::size_t v = 0; v < net.output_count(); ++v) {
      if (clamp->is_clamped(v)) {
        table.marginals.outputs[v] = clamp->value(v) == 1 ? 1.0 : 0.0;
      }
    }
    table.evidence = evidence;
  }
  return table;
}

MarginalField mc_marginals(const Network& net, std::span<const double> x,
                           std::size_t n_samples, RngStream& rng) {
  if (n_samples < 1) throw Error("mc_marginals needs n_samples >= 1");
  MarginalField field = empty_field(net);
  const std::size_t n = net.layer_count();
  for (std::size_t i = 0; i < n_samples; ++i) {
    const ForwardTrace trace = forward_sample(net, x, rng);
    for (std::size_t l = 1; l <= n; ++l) {
      const UnitKind& kind = net.kind(l);
      auto& target = l == n ? field.outputs : field.hidden[l - 1];
      for (std::size_t u = 0; u < target.size(); ++u) {
        const double a = trace.preactivations[l][u];
        target[u] += kind.is_discrete()
                         ? (unit_mean(kind, a) - kind.low()) / (kind.high() - kind.low())
                         : (a > 0.5 ? 1.0 : 0.0);
      }
    }
  }
  scale_field(field, 1.0 / static_cast<double>(n_samples));
  field.samples = n_samples;
  return field;
}

std::vector<std::uint32_t> max_marginal_decide(const MarginalField& field) {
  std::vector<std::uint32_t> out(field.outputs.size());
  for (std::size_t v = 0; v < out.size(); ++v) {
    out[v] = field.outputs[v] > 0.5 ? 1u : 0u;
  }
  return out;
}

namespace {

class GibbsChain {
 public:
  GibbsChain(const Network& net, std::span<const double> x,
             const ClampSet& clamp, RngStream& rng)
      : net_(net), n_(net.layer_count()), rng_(rng) {
    trace_ = forward_sample(net, x, rng);
    for (std::size_t v = 0; v < net.output_count(); ++v) {
      if (!clamp.is_clamped(v)) continue;
      trace_.codes[n_][v] = clamp.value(v);
      trace_.states[n_][v] = net.kind(n_).encode(clamp.value(v));
    }
    for (std::size_t l = 1; l < n_; ++l) {
      if (!net.kind(l).is_discrete()) fast_ = false;
    }
    children_.resize(n_ + 1);
    for (std::size_t l = 1; l <= n_; ++l) children_[l].resize(net.layer_size(l));
    for (std::size_t l = 2; l <= n_; ++l) {
      for (std::size_t u = 0; u < net.layer_size(l); ++u) {
        const auto src = net.sources(l, u);
        const auto w = net.weights(l, u);
        for (std::size_t k = 0; k < src.size(); ++k) {
          if (src[k].layer == 0) continue;
          children_[src[k].layer][src[k].unit].push_back(
              {static_cast<std::uint32_t>(l), static_cast<std::uint32_t>(u), w[k]});
        }
      }
    }
    for (std::size_t l = 1; l <= n_; ++l) {
      const UnitKind& kind = net.kind(l);
      if (!kind.is_discrete()) continue;
      for (std::size_t u = 0; u < net.layer_size(l); ++u) {
        if (l == n_ && clamp.is_clamped(u)) continue;
        for (int b = 0; b < kind.components(); ++b) {
          vars_.push_back({static_cast<std::uint32_t>(l),
                           static_cast<std::uint32_t>(u), b});
        }
      }
    }
  }

  /// One systematic sweep; adds p(bit = 1) of every visited variable to
  /// `record` when it is non-null.
  void sweep(bool forward, MarginalField* record) {
    if (fast_ && ++sweeps_since_refresh_ >= kRefreshPeriod) refresh();
    const std::size_t count = vars_.size();
    for (std::size_t i = 0; i < count; ++i) {
      const Var& var = vars_[forward ? i : count - 1 - i];
      const double p1 = visit(var);
      if (record) {
        const UnitKind& kind = net_.kind(var.layer);
        auto& target =
            var.layer == n_ ? record->outputs : record->hidden[var.layer - 1];
        target[var.unit] += p1 / kind.components();
      }
    }
    if (record) record_delta_units(*record);
  }

  const ForwardTrace& trace() const { return trace_; }

 private:
  struct Child {
    std::uint32_t layer;
    std::uint32_t unit;
    double weight;
  };
  struct Var {
    std::uint32_t layer;
    std::uint32_t unit;
    int bit;
  };
  static constexpr std::size_t kRefreshPeriod = 16;

  void record_delta_units(MarginalField& record) const {
    for (std::size_t l = 1; l <= n_; ++l) {
      const UnitKind& kind = net_.kind(l);
      if (kind.is_discrete()) continue;
      auto& target = l == n_ ? record.outputs : record.hidden[l - 1];
      for (std::size_t u = 0; u < target.size(); ++u) {
        target[u] += trace_.states[l][u] > 0.5 ? 1.0 : 0.0;
      }
    }
  }

  /// Recomputes pre-activations from scratch to stop incremental drift.
  void refresh() {
    sweeps_since_refresh_ = 0;
    recompute_from(1);
  }

  /// Pre-activations of layers >= first and the values of their Delta units.
  void recompute_from(std::size_t first) {
    for (std::size_t l = first; l <= n_; ++l) {
      const bool delta = !net_.kind(l).is_discrete();
      for (std::size_t u = 0; u < net_.layer_size(l); ++u) {
        const double a = net_.preactivation(l, u, trace_.states);
        trace_.preactivations[l][u] = a;
        if (delta) trace_.states[l][u] = a;
      }
    }
  }

  /// Unnormalised log-probability of `code` at the variable's unit, up to
  /// terms that do not depend on it.
  double local_score(std::size_t l, std::size_t u, std::uint32_t code) {
    const UnitKind& kind = net_.kind(l);
    double score = log_conditional(kind, Event::discrete(code),
                                   trace_.preactivations[l][u]);
    if (fast_) {
      const double dv = kind.encode(code) - trace_.states[l][u];
      for (const Child& c : children_[l][u]) {
        const UnitKind& ck = net_.kind(c.layer);
        if (!ck.is_discrete()) continue;
        score += log_conditional(
            ck, Event::discrete(trace_.codes[c.layer][c.unit]),
            trace_.preactivations[c.layer][c.unit] + c.weight * dv);
      }
      return score;
    }
    set_unit(l, u, code);
    for (std::size_t cl = l + 1; cl <= n_; ++cl) {
      const UnitKind& ck = net_.kind(cl);
      if (!ck.is_discrete()) continue;
      for (std::size_t cu = 0; cu < net_.layer_size(cl); ++cu) {
        score += log_conditional(ck, Event::discrete(trace_.codes[cl][cu]),
                                 trace_.preactivations[cl][cu]);
      }
    }
    return score;
  }

  void set_unit(std::size_t l, std::size_t u, std::uint32_t code) {
    const UnitKind& kind = net_.kind(l);
    const double value = kind.encode(code);
    const double dv = value - trace_.states[l][u];
    trace_.codes[l][u] = code;
    trace_.states[l][u] = value;
    if (!fast_) {
      recompute_from(l + 1);
      return;
    }
    if (dv == 0.0) return;
    for (const Child& c : children_[l][u]) {
      double& a = trace_.preactivations[c.layer][c.unit];
      a += c.weight * dv;
      if (!net_.kind(c.layer).is_discrete()) trace_.states[c.layer][c.unit] = a;
    }
  }

  double visit(const Var& var) {
    const std::uint32_t mask = std::uint32_t{1} << var.bit;
    const std::uint32_t current = trace_.codes[var.layer][var.unit];
    const std::uint32_t off = current & ~mask;
    const std::uint32_t on = current | mask;
    const double s0 = local_score(var.layer, var.unit, off);
    const double s1 = local_score(var.layer, var.unit, on);
    if (std::isnan(s0) || std::isnan(s1) || (s0 == kNegInf && s1 == kNegInf)) {
      throw NonErgodicError("unit " + std::to_string(var.unit) + " of layer " +
                            std::to_string(var.layer) +
                            " has no event of non-zero probability given its "
                            "Markov blanket");
    }
    const double p1 = 1.0 / (1.0 + std::exp(s0 - s1));
    const std::uint32_t next = rng_.bernoulli(p1) ? on : off;
    if (!fast_ || next != current) set_unit(var.layer, var.unit, next);
    return p1;
  }

  const Network& net_;
  std::size_t n_;
  RngStream& rng_;
  ForwardTrace trace_;
  bool fast_ = true;
  std::size_t sweeps_since_refresh_ = 0;
  std::vector<std::vector<std::vector<Child>>> children_;
  std::vector<Var> vars_;
};

}  // namespace

MarginalField gibbs_clamped(const Network& net, std::span<const double> x,
                            const ClampSet& clamp, const GibbsConfig& cfg,
                            RngStream& rng) {
  if (cfg.thinning < 1) throw Error("gibbs thinning must be >= 1");
  check_clamp(net, clamp);
  GibbsChain chain(net, x, clamp, rng);
  MarginalField field = empty_field(net);
  const std::size_t total = cfg.burn_in + cfg.sweeps;
  for (std::size_t s = 0; s < total; ++s) {
    const bool record =
        s >= cfg.burn_in && (s - cfg.burn_in + 1) % cfg.thinning == 0;
    chain.sweep(s % 2 == 0, record ? &field : nullptr);
    if (record) ++field.samples;
  }
  if (field.samples > 0) {
    scale_field(field, 1.0 / static_cast<double>(field.samples));
  } else {
    accumulate_field(net, chain.trace(), 1.0, field);
  }
  for (std::size_t v = 0; v < net.output_count(); ++v) {
    if (clamp.is_clamped(v)) field.outputs[v] = clamp.value(v) == 1 ? 1.0 : 0.0;
  }
  return field;
}

double iou(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
  if (pred.size() != gt.size()) {
    throw DimensionError("iou: mask sizes differ (" + std::to_string(pred.size()) +
                         " vs " + std::to_string(gt.size()) + ")");
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    inter += p && g;
    uni += p || g;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

GrayImage marginals_to_pgm(const MarginalField& field) {
  if (!field.grid ||
      static_cast<std::size_t>(field.grid->rows) * field.grid->cols !=
          field.outputs.size()) {
    throw DimensionError("marginal field has no output grid matching " +
                         std::to_string(field.outputs.size()) + " outputs");
  }
  GrayImage img(field.grid->rows, field.grid->cols);
  for (std::size_t i = 0; i < field.outputs.size(); ++i) {
    img.data[i] = static_cast<std::uint8_t>(std::lround(field.outputs[i] * 255.0));
  }
  return img;
}

}  // namespace stochnet
