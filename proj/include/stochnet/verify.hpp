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
#include <string>
#include <vector>

#include "stochnet/dataset.hpp"
#include "stochnet/inference.hpp"
#include "stochnet/learning.hpp"
#include "stochnet/network.hpp"
#include "stochnet/rng.hpp"

namespace stochnet::verify {

// ---------------------------------------------------------------------------
// Random tiny networks

struct TinyNetShape {
  std::size_t inputs = 2;
  std::vector<std::size_t> hidden = {3};
  std::size_t outputs = 2;
  UnitKind hidden_kind = UnitKind::sigmoid();
  UnitKind output_kind = UnitKind::sigmoid();
};

/// Dense chain input -> hidden... -> output with weights and biases uniform
/// in [-weight_scale, weight_scale].
Network random_dense_net(const TinyNetShape& shape, double weight_scale,
                         RngStream& rng);

/// x uniform in [-1, 1]; y a uniformly random legal output event. Delta
/// outputs get y uniform in [-1, 1].
Example random_example(const Network& net, RngStream& rng);

// ---------------------------------------------------------------------------
// Exact quantities by enumeration

/// ln p(y | x), marginalising every hidden layer.
double exact_log_likelihood(const Network& net, const Example& ex);

/// sum_z p(z | x) ln p(y | z): the Jensen lower bound on ln p(y | x).
double exact_jensen_bound(const Network& net, const Example& ex);

/// Analytic gradient of exact_jensen_bound with respect to the output layer,
/// sum_z p(z | x) (y - mean(a_out(z))) I(z). Other layers are zero.
ParameterSet exact_jensen_gradient(const Network& net, const Example& ex);

/// sum over (z, y') of p(z, y' | x) bn_output_gradient(y, y', I(z)), for the
/// output layer only.
ParameterSet expected_bn_output_gradient(const Network& net, const Example& ex);

/// Per-layer surrogate: sum over layers below `layer` of their probability
/// times the log-likelihood of the deterministic head started at `layer`.
/// For layer 1 this is deterministic_log_likelihood.
double surrogate_objective(const Network& net, const Example& ex,
                           std::size_t layer);

/// Enumerated expectation of bn_hidden_gradient for the units of `layer`,
/// with the error taken from the deterministic head. Other layers are zero.
ParameterSet expected_bn_hidden_gradient(const Network& net, const Example& ex,
                                         std::size_t layer);

struct GradientMoments {
  ParameterSet mean;
  ParameterSet variance;
};

/// Exact mean and per-component variance of bn_step over the ancestral
/// sampling distribution.
GradientMoments exact_bn_step_moments(const Network& net, const Example& ex);

/// Central differences of `objective` in every parameter (or only those of
/// `layer`, leaving the rest zero).
ParameterSet central_difference(const Network& net,
                                const std::function<double(const Network&)>& objective,
                                double h, std::optional<std::size_t> layer = {});

/// ||a - b||_2 / max(||a||_2, ||b||_2); 0 when both are zero.
double relative_error(const ParameterSet& a, const ParameterSet& b);

/// Largest |a_i - b_i| over outputs and hidden units of two fields.
double max_marginal_difference(const MarginalField& a, const MarginalField& b);

/// Direct product of per-unit probabilities of a full assignment, computed
/// without logarithms.
double direct_joint_probability(const Network& net, const Assignment& a);

// ---------------------------------------------------------------------------
// Check suite

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst error seen
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteOptions {
  std::uint64_t seed = 20260;
  std::size_t sampler_nets = 5;
  std::size_t sampler_samples = 100000;
  std::size_t jensen_nets = 100;
  GibbsConfig gibbs{1000, 100000, 1};
  double fd_step = 1e-5;
  std::size_t moment_samples = 100000;
};

CheckResult check_sampler(const SuiteOptions& opt);
CheckResult check_unbiasedness(const SuiteOptions& opt);
/// EBP gradients and the per-layer surrogate gradients against central
/// differences, for nets whose hidden units are of the given kind.
CheckResult check_finite_differences(const SuiteOptions& opt,
                                     const UnitKind& hidden_kind);
CheckResult check_jensen_direction(const SuiteOptions& opt);
CheckResult check_gibbs(const SuiteOptions& opt);
CheckResult check_degenerate_equivalence(const SuiteOptions& opt);
CheckResult check_energy_identity(const SuiteOptions& opt);
/// Monte-Carlo average of bn_step against exact_bn_step_moments (3 sigma).
CheckResult check_bn_step_mean(const SuiteOptions& opt);

/// Every check above on freshly drawn random nets.
std::vector<CheckResult> run_suite(const SuiteOptions& opt);

/// Sampler, Gibbs, energy and Jensen checks on one given network with a
/// random input. Throws StateSpaceError when the net is too large to
/// enumerate.
std::vector<CheckResult> run_network_checks(const Network& net,
                                            const SuiteOptions& opt);

}  // namespace stochnet::verify
