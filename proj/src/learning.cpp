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

#include "stochnet/learning.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "stochnet/checkpoint.hpp"
#include "stochnet/error.hpp"

namespace stochnet {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ull;  // "SHUFF"
constexpr std::uint64_t kSampleStream = 0x53414d504cull;   // "SAMPL"
constexpr std::uint64_t kBoundStream = 0x424f554e44ull;    // "BOUND"

void check_example(const Network& net, const Example& ex) {
  if (ex.x.size() != net.input_count() || ex.y.size() != net.output_count()) {
    throw DimensionError("example has " + std::to_string(ex.x.size()) +
                         " inputs / " + std::to_string(ex.y.size()) +
                         " targets, network expects " +
                         std::to_string(net.input_count()) + " / " +
                         std::to_string(net.output_count()));
  }
}

/// grad[unit slice] += factor * (I_v, 1)
void accumulate_unit(const Network& net, ParameterSet& grad, std::size_t layer,
                     std::size_t unit, double factor, const LayerStates& states) {
  const auto src = net.sources(layer, unit);
  auto g = net.unit_slice(grad, layer, unit);
  for (std::size_t k = 0; k < src.size(); ++k) {
    g[k] += factor * states[src[k].layer][src[k].unit];
  }
  g[src.size()] += factor;
}

std::vector<double> scaled_inputs(double factor,
                                  std::span<const double> augmented_inputs) {
  std::vector<double> out(augmented_inputs.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = factor * augmented_inputs[k];
  }
  return out;
}

/// d output_log_likelihood / d a for every output unit.
std::vector<double> output_error(const Network& net,
                                 std::span<const double> preacts,
                                 std::span<const double> y) {
  const UnitKind& kind = net.kind(net.output_layer());
  std::vector<double> err(y.size());
  for (std::size_t v = 0; v < y.size(); ++v) {
    err[v] = y[v] - unit_mean(kind, preacts[v]);
  }
  return err;
}

}  // namespace

GradientAccumulator GradientAccumulator::zeros_for(const Network& net) {
  return {net.parameters().zeros_like(), 0};
}

void GradientAccumulator::merge(const GradientAccumulator& other) {
  gradient += other.gradient;
  samples += other.samples;
}

ParameterSet GradientAccumulator::mean() const {
  ParameterSet out = gradient;
  if (samples > 0) out *= 1.0 / static_cast<double>(samples);
  return out;
}

std::string to_string(TrainMode mode) {
  return mode == TrainMode::Ebp ? "ebp" : "bn";
}

TrainMode parse_train_mode(std::string_view text) {
  if (text == "ebp") return TrainMode::Ebp;
  if (text == "bn") return TrainMode::Bn;
  throw ConfigError("unknown training mode '" + std::string(text) +
                    "' (expected ebp or bn)");
}

void check_train_config(const TrainConfig& cfg) {
  if (!(cfg.step_size >= 0.0) || !std::isfinite(cfg.step_size)) {
    throw ConfigError("step_size must be a finite number >= 0");
  }
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (cfg.eval_period == 0) throw ConfigError("eval_period must be positive");
  if (cfg.bound_samples == 0) throw ConfigError("bound_samples must be positive");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (cfg.weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
}

double output_log_likelihood(const Network& net,
                             std::span<const double> preacts,
                             std::span<const double> y) {
  const UnitKind& kind = net.kind(net.output_layer());
  double total = 0.0;
  for (std::size_t v = 0; v < y.size(); ++v) {
    if (kind.is_discrete()) {
      total += log_conditional(kind, Event::discrete(kind.code_of(y[v])),
                               preacts[v]);
    } else {
      const double r = y[v] - preacts[v];
      total -= 0.5 * r * r;
    }
  }
  return total;
}

double deterministic_log_likelihood(const Network& net, const Example& example) {
  check_example(net, example);
  const ForwardTrace trace = forward_deterministic(net, example.x);
  return output_log_likelihood(net, trace.preactivations.back(), example.y);
}

ErrorSignal backpropagate(const Network& net, const ForwardTrace& trace,
                          std::span<const double> out_error) {
  const std::size_t n = net.layer_count();
  ErrorSignal signal;
  signal.delta.resize(n + 1);
  signal.grad_pre.resize(n + 1);
  for (std::size_t l = 1; l <= n; ++l) {
    signal.delta[l].assign(net.layer_size(l), 0.0);
    signal.grad_pre[l].assign(net.layer_size(l), 0.0);
  }
  signal.grad_pre[n].assign(out_error.begin(), out_error.end());
  for (std::size_t l = n; l >= 1; --l) {
    const UnitKind& kind = net.kind(l);
    auto& g = signal.grad_pre[l];
    for (std::size_t u = 0; u < g.size(); ++u) {
      if (l < n) {
        g[u] = signal.delta[l][u] *
               unit_mean_derivative(kind, trace.preactivations[l][u]);
      }
      if (g[u] == 0.0) continue;
      const auto src = net.sources(l, u);
      const auto w = net.weights(l, u);
      for (std::size_t k = 0; k < src.size(); ++k) {
        if (src[k].layer > 0) signal.delta[src[k].layer][src[k].unit] += g[u] * w[k];
      }
    }
  }
  return signal;
}

GradientAccumulator ebp_step(const Network& net,
                             std::span<const Example> batch) {
  GradientAccumulator acc = GradientAccumulator::zeros_for(net);
  for (const Example& ex : batch) {
    check_example(net, ex);
    const ForwardTrace trace = forward_deterministic(net, ex.x);
    const auto err = output_error(net, trace.preactivations.back(), ex.y);
    const ErrorSignal signal = backpropagate(net, trace, err);
    for (std::size_t l = 1; l <= net.layer_count(); ++l) {
      for (std::size_t u = 0; u < net.layer_size(l); ++u) {
        accumulate_unit(net, acc.gradient, l, u, signal.grad_pre[l][u],
                        trace.states);
      }
    }
    ++acc.samples;
  }
  return acc;
}

std::vector<double> bn_output_gradient(double y_true, double y_sampled,
                                       std::span<const double> augmented_inputs) {
  return scaled_inputs(y_true - y_sampled, augmented_inputs);
}

std::vector<double> bn_hidden_gradient(const UnitKind& kind, double delta,
                                       std::span<const double> augmented_inputs,
                                       double a) {
  return scaled_inputs(delta * unit_mean_derivative(kind, a), augmented_inputs);
}

GradientAccumulator bn_gradient_from_trace(const Network& net,
                                           const Example& example,
                                           const ForwardTrace& sampled) {
  check_example(net, example);
  GradientAccumulator acc = GradientAccumulator::zeros_for(net);
  const std::size_t out = net.output_layer();
  const auto err = output_error(net, sampled.preactivations[out], example.y);
  const ErrorSignal signal = backpropagate(net, sampled, err);
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    for (std::size_t u = 0; u < net.layer_size(l); ++u) {
      // Same factors as bn_output_gradient / bn_hidden_gradient, accumulated
      // without materialising the input vectors.
      const double factor = l == out ? example.y[u] - sampled.states[out][u]
                                     : signal.grad_pre[l][u];
      accumulate_unit(net, acc.gradient, l, u, factor, sampled.states);
    }
  }
  acc.samples = 1;
  return acc;
}

GradientAccumulator bn_step(const Network& net, const Example& example,
                            RngStream& rng) {
  check_example(net, example);
  const ForwardTrace trace = forward_sample(net, example.x, rng);
  return bn_gradient_from_trace(net, example, trace);
}

double lower_bound_estimate(const Network& net, const Example& example,
                            std::size_t n_samples, RngStream& rng) {
  if (n_samples < 1) throw Error("lower_bound_estimate needs n_samples >= 1");
  check_example(net, example);
  double total = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const ForwardTrace trace = forward_sample(net, example.x, rng);
    total += output_log_likelihood(net, trace.preactivations.back(), example.y);
  }
  return total / static_cast<double>(n_samples);
}

void write_metrics_header(std::ostream& out) {
  out << "iter,wall_ms,mode,train_metric,test_metric,lower_bound_estimate\n";
}

void write_metrics_row(std::ostream& out, const MetricsRow& row) {
  out << row.iteration << ',' << row.wall_ms << ',' << to_string(row.mode)
      << ',' << format_double(row.train_metric) << ','
      << (std::isnan(row.test_metric) ? std::string()
                                      : format_double(row.test_metric))
      << ',' << format_double(row.lower_bound) << '\n';
  out.flush();
}

TrainResult train(Network net, std::span<const Example> train_set,
                  std::span<const Example> test_set, const TrainConfig& cfg,
                  const Metric& metric,
                  const std::function<void(const MetricsRow&)>& on_row) {
  check_train_config(cfg);
  if (train_set.empty()) throw Error("training set is empty");
  for (const auto& ex : train_set) check_example(net, ex);
  for (const auto& ex : test_set) check_example(net, ex);

  const auto start = std::chrono::steady_clock::now();
  const RngStream root(cfg.seed);
  TrainResult result{std::move(net), {}};
  Network& model = result.net;

  auto evaluate = [&](std::size_t iteration) {
    MetricsRow row;
    row.iteration = iteration;
    row.mode = cfg.mode;
    row.train_metric = metric(model, train_set);
    row.test_metric = test_set.empty()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : metric(model, test_set);
    RngStream bound_rng = root.split(kBoundStream).split(iteration);
    double bound = 0.0;
    for (const auto& ex : train_set) {
      bound += lower_bound_estimate(model, ex, cfg.bound_samples, bound_rng);
    }
    row.lower_bound = bound / static_cast<double>(train_set.size());
    row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    result.log.push_back(row);
    if (on_row) on_row(row);
  };

  std::vector<std::size_t> order(train_set.size());
  std::size_t cursor = order.size();
  std::size_t epoch = 0;
  auto next_index = [&] {
    if (cursor == order.size()) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      RngStream shuffle = root.split(kShuffleStream).split(epoch++);
      for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[shuffle() % (i + 1)]);
      }
      cursor = 0;
    }
    return order[cursor++];
  };

  ParameterSet velocity = model.parameters().zeros_like();
  evaluate(0);
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    GradientAccumulator acc = GradientAccumulator::zeros_for(model);
    const RngStream iteration_rng = root.split(kSampleStream).split(it);
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const std::size_t idx = next_index();
      if (cfg.mode == TrainMode::Ebp) {
        acc.merge(ebp_step(model, train_set.subspan(idx, 1)));
      } else {
        RngStream example_rng = iteration_rng.split(idx);
        acc.merge(bn_step(model, train_set[idx], example_rng));
      }
    }
    ParameterSet step = acc.mean();
    if (cfg.weight_decay > 0.0) step.axpy(-cfg.weight_decay, model.parameters());
    if (cfg.momentum > 0.0) {
      velocity *= cfg.momentum;
      velocity += step;
      model.parameters().axpy(cfg.step_size, velocity);
    } else {
      model.parameters().axpy(cfg.step_size, step);
    }
    if (!model.parameters().all_finite()) {
      throw NumericError("non-finite parameter after iteration " +
                         std::to_string(it) + " (" + to_string(cfg.mode) +
                         ", step_size " + format_double(cfg.step_size) + ")");
    }
    if (it % cfg.eval_period == 0 || it == cfg.iterations) evaluate(it);
  }
  return result;
}

}  // namespace stochnet
