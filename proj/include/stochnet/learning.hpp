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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stochnet/dataset.hpp"
#include "stochnet/network.hpp"
#include "stochnet/propagation.hpp"
#include "stochnet/rng.hpp"

namespace stochnet {

/// Gradient sums shaped exactly like a network's parameters.
struct GradientAccumulator {
  ParameterSet gradient;
  std::size_t samples = 0;

  static GradientAccumulator zeros_for(const Network& net);
  void merge(const GradientAccumulator& other);
  /// gradient / samples
  ParameterSet mean() const;
};

/// Backward-pass quantities. delta[l][u] is the error of unit u in layer l,
/// i.e. d objective / d state; grad_pre[l][u] is d objective / d
/// pre-activation. Output-layer delta entries are unused and stay zero.
struct ErrorSignal {
  LayerStates delta;
  LayerStates grad_pre;
};

enum class TrainMode { Ebp, Bn };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view text);

struct TrainConfig {
  TrainMode mode = TrainMode::Ebp;
  double step_size = 0.1;  // fixed for the whole run
  std::size_t iterations = 1000;
  std::size_t batch_size = 1;
  std::uint64_t seed = 1;
  std::size_t eval_period = 100;
  double momentum = 0.0;
  double weight_decay = 0.0;
  /// Ancestral samples per training example for the logged lower bound.
  std::size_t bound_samples = 1;
};

/// Throws ConfigError on a negative step size or a zero batch size or eval
/// period.
void check_train_config(const TrainConfig& cfg);

/**
 * ln p(y | output pre-activations). Sigmoid and tanh outputs use their
 * log-linear conditionals. A Delta output has no usable likelihood, so it
 * contributes the squared-error surrogate -(y - a)^2 / 2, whose derivative
 * y - a keeps the shared "target minus mean" error form.
 */
double output_log_likelihood(const Network& net,
                             std::span<const double> output_preactivations,
                             std::span<const double> y);

/// Log-likelihood of the deterministic network: output_log_likelihood at the
/// pre-activations of forward_deterministic.
double deterministic_log_likelihood(const Network& net, const Example& example);

/// Chain rule from d objective / d output pre-activation back to every layer,
/// using unit_mean_derivative at the trace's pre-activations and the trace's
/// states as inputs.
ErrorSignal backpropagate(const Network& net, const ForwardTrace& trace,
                          std::span<const double> output_error);

/// Gradient of deterministic_log_likelihood summed over the batch.
GradientAccumulator ebp_step(const Network& net, std::span<const Example> batch);

/// d f(y) / d theta - d f(y_hat) / d theta for one output unit with
/// f(y) = y * <I, w>: (y - y_hat) * I.
std::vector<double> bn_output_gradient(double y_true, double y_sampled,
                                       std::span<const double> augmented_inputs);

/// delta * d mean / d a * I for one hidden unit, with `a` and I taken from
/// the sampled trace.
std::vector<double> bn_hidden_gradient(const UnitKind& kind, double delta,
                                       std::span<const double> augmented_inputs,
                                       double a);

/// Gradient assembled from an already sampled trace: output units use
/// bn_output_gradient with the sampled outputs; the error sent into hidden
/// layers is y - mean(a_out) at the sampled output pre-activations, and hidden
/// units use bn_hidden_gradient.
GradientAccumulator bn_gradient_from_trace(const Network& net,
                                           const Example& example,
                                           const ForwardTrace& sampled);

/// One forward_sample and one backward pass.
GradientAccumulator bn_step(const Network& net, const Example& example,
                            RngStream& rng);

/// Monte-Carlo estimate of E_z[ln p(y | z)] from n ancestral samples.
double lower_bound_estimate(const Network& net, const Example& example,
                            std::size_t n_samples, RngStream& rng);

struct MetricsRow {
  std::size_t iteration = 0;
  long long wall_ms = 0;
  TrainMode mode = TrainMode::Ebp;
  double train_metric = 0.0;
  double test_metric = 0.0;  // NaN when there is no test set
  double lower_bound = 0.0;
};

void write_metrics_header(std::ostream& out);
/// Appends one CSV row; every field except wall_ms is deterministic.
void write_metrics_row(std::ostream& out, const MetricsRow& row);

using Metric =
    std::function<double(const Network& net, std::span<const Example> data)>;

struct TrainResult {
  Network net;
  std::vector<MetricsRow> log;
};

/**
 * Stochastic gradient ascent on the conditional log-likelihood.
 *
 * Each iteration draws batch_size examples from a per-epoch shuffle keyed by
 * cfg.seed (identical across modes), averages their gradients, and applies
 * theta += step_size * grad. BN mode samples one trace per example from a
 * substream keyed by (iteration, example index). Metrics are evaluated at
 * iteration 0, every eval_period iterations, and after the last one; each
 * row is also passed to `on_row` as it is produced.
 *
 * Throws NumericError if any parameter becomes non-finite.
 */
TrainResult train(Network net, std::span<const Example> train_set,
                  std::span<const Example> test_set, const TrainConfig& cfg,
                  const Metric& metric,
                  const std::function<void(const MetricsRow&)>& on_row = {});

}  // namespace stochnet
