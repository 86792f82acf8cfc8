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


#include "stochnet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stochnet/error.hpp"
#include "stochnet/propagation.hpp"

namespace stochnet::verify {

namespace {

std::vector<double> output_preactivations(const Network& net,
                                          const LayerStates& states) {
  const std::size_t n = net.output_layer();
  std::vector<double> out(net.output_count());
  for (std::size_t v = 0; v < out.size(); ++v) {
    out[v] = net.preactivation(n, v, states);
  }
  return out;
}

/// visit(p(z | x), ln p(y | z), trace) for every hidden configuration z.
void for_each_hidden(
    const Network& net, const Example& ex,
    const std::function<void(double, double, const ForwardTrace&)>& visit) {
  enumerate_layers(net, ex.x, net.layer_count() - 1,
                   [&](const ForwardTrace& trace, double log_prob) {
                     const auto a = output_preactivations(net, trace.states);
                     visit(std::exp(log_prob),
                           output_log_likelihood(net, a, ex.y), trace);
                   });
}

void add_scaled(std::span<double> target, double factor,
                std::span<const double> values) {
  for (std::size_t k = 0; k < target.size(); ++k) target[k] += factor * values[k];
}

double norm(const ParameterSet& p) {
  double s = 0.0;
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    for (double v : p.layer(l)) s += v * v;
  }
  return std::sqrt(s);
}

double max_abs_difference(const ParameterSet& a, const ParameterSet& b) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.layer_count(); ++l) {
    for (std::size_t i = 0; i < a.layer(l).size(); ++i) {
      worst = std::max(worst, std::abs(a.layer(l)[i] - b.layer(l)[i]));
    }
  }
  return worst;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(3);
  out << v;
  return out.str();
}

CheckResult finish(std::string name, double measured, double tolerance,
                   bool passed, std::string detail) {
  return {std::move(name), passed, measured, tolerance, std::move(detail)};
}

UnitKind kind_by_index(std::size_t i) {
  switch (i % 3) {
    case 0:
      return UnitKind::sigmoid();
    case 1:
      return UnitKind::tanh();
    default:
      return UnitKind::relu_sum(2);
  }
}

}  // namespace

Network random_dense_net(const TinyNetShape& shape, double weight_scale,
                         RngStream& rng) {
  NetworkSpec spec;
  spec.input_count = static_cast<int>(shape.inputs);
  int previous = 0;
  for (std::size_t h : shape.hidden) {
    spec.layers.push_back({static_cast<int>(h), shape.hidden_kind, std::nullopt,
                           DenseConnectivity{{previous}}});
    ++previous;
  }
  spec.layers.push_back({static_cast<int>(shape.outputs), shape.output_kind,
                         std::nullopt, DenseConnectivity{{previous}}});
  Network net(std::move(spec));
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    for (double& w : net.parameters().layer(l)) {
      w = weight_scale * (2.0 * rng.uniform() - 1.0);
    }
  }
  return net;
}

Example random_example(const Network& net, RngStream& rng) {
  Example ex;
  ex.x.resize(net.input_count());
  for (double& v : ex.x) v = 2.0 * rng.uniform() - 1.0;
  const UnitKind& kind = net.kind(net.output_layer());
  ex.y.resize(net.output_count());
  for (double& v : ex.y) {
    v = kind.is_discrete()
            ? kind.encode(static_cast<std::uint32_t>(rng() % kind.event_count()))
            : 2.0 * rng.uniform() - 1.0;
  }
  return ex;
}

double exact_log_likelihood(const Network& net, const Example& ex) {
  std::vector<double> terms;
  for_each_hidden(net, ex, [&](double p, double ll, const ForwardTrace&) {
    terms.push_back(std::log(p) + ll);
  });
  const double top = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

double exact_jensen_bound(const Network& net, const Example& ex) {
  double bound = 0.0;
  for_each_hidden(net, ex,
                  [&](double p, double ll, const ForwardTrace&) { bound += p * ll; });
  return bound;
}

ParameterSet exact_jensen_gradient(const Network& net, const Example& ex) {
  ParameterSet grad = net.parameters().zeros_like();
  const std::size_t n = net.output_layer();
  const UnitKind& kind = net.kind(n);
  for_each_hidden(net, ex, [&](double p, double, const ForwardTrace& trace) {
    for (std::size_t v = 0; v < net.output_count(); ++v) {
      const double a = net.preactivation(n, v, trace.states);
      add_scaled(net.unit_slice(grad, n, v), p * (ex.y[v] - unit_mean(kind, a)),
                 net.augmented_inputs(n, v, trace.states));
    }
  });
  return grad;
}

ParameterSet expected_bn_output_gradient(const Network& net, const Example& ex) {
  ParameterSet grad = net.parameters().zeros_like();
  const std::size_t n = net.output_layer();
  enumerate_layers(net, ex.x, n, [&](const ForwardTrace& trace, double log_prob) {
    const double p = std::exp(log_prob);
    for (std::size_t v = 0; v < net.output_count(); ++v) {
      const auto g = bn_output_gradient(ex.y[v], trace.states[n][v],
                                        net.augmented_inputs(n, v, trace.states));
      add_scaled(net.unit_slice(grad, n, v), p, g);
    }
  });
  return grad;
}

double surrogate_objective(const Network& net, const Example& ex,
                           std::size_t layer) {
  if (layer < 1 || layer > net.layer_count()) {
    throw DimensionError("surrogate layer out of range");
  }
  double total = 0.0;
  enumerate_layers(net, ex.x, layer - 1,
                   [&](const ForwardTrace& trace, double log_prob) {
                     ForwardTrace head = trace;
                     propagate_means(net, head, layer);
                     total += std::exp(log_prob) *
                              output_log_likelihood(
                                  net, head.preactivations.back(), ex.y);
                   });
  return total;
}

ParameterSet expected_bn_hidden_gradient(const Network& net, const Example& ex,
                                         std::size_t layer) {
  if (layer < 1 || layer >= net.layer_count()) {
    throw DimensionError("hidden gradient needs a hidden layer");
  }
  ParameterSet grad = net.parameters().zeros_like();
  const std::size_t n = net.output_layer();
  const UnitKind& out_kind = net.kind(n);
  const UnitKind& kind = net.kind(layer);
  enumerate_layers(net, ex.x, layer - 1,
                   [&](const ForwardTrace& trace, double log_prob) {
                     ForwardTrace head = trace;
                     propagate_means(net, head, layer);
                     std::vector<double> err(net.output_count());
                     for (std::size_t v = 0; v < err.size(); ++v) {
                       err[v] = ex.y[v] -
                                unit_mean(out_kind, head.preactivations[n][v]);
                     }
                     const ErrorSignal signal = backpropagate(net, head, err);
                     const double p = std::exp(log_prob);
                     for (std::size_t u = 0; u < net.layer_size(layer); ++u) {
                       const auto g = bn_hidden_gradient(
                           kind, signal.delta[layer][u],
                           net.augmented_inputs(layer, u, head.states),
                           head.preactivations[layer][u]);
                       add_scaled(net.unit_slice(grad, layer, u), p, g);
                     }
                   });
  return grad;
}

GradientMoments exact_bn_step_moments(const Network& net, const Example& ex) {
  ParameterSet mean = net.parameters().zeros_like();
  ParameterSet second = mean;
  enumerate_layers(net, ex.x, net.layer_count(),
                   [&](const ForwardTrace& trace, double log_prob) {
                     const double p = std::exp(log_prob);
                     const auto g = bn_gradient_from_trace(net, ex, trace).gradient;
                     for (std::size_t l = 1; l < g.layer_count(); ++l) {
                       for (std::size_t i = 0; i < g.layer(l).size(); ++i) {
                         const double v = g.layer(l)[i];
                         mean.layer(l)[i] += p * v;
                         second.layer(l)[i] += p * v * v;
                       }
                     }
                   });
  ParameterSet variance = second;
  for (std::size_t l = 1; l < variance.layer_count(); ++l) {
    for (std::size_t i = 0; i < variance.layer(l).size(); ++i) {
      const double m = mean.layer(l)[i];
      variance.layer(l)[i] = std::max(0.0, second.layer(l)[i] - m * m);
    }
  }
  return {mean, variance};
}

ParameterSet central_difference(const Network& net,
                                const std::function<double(const Network&)>& objective,
                                double h, std::optional<std::size_t> layer) {
  Network probe = net;
  ParameterSet out = net.parameters().zeros_like();
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    if (layer && *layer != l) continue;
    auto& theta = probe.parameters().layer(l);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double original = theta[i];
      theta[i] = original + h;
      const double up = objective(probe);
      theta[i] = original - h;
      const double down = objective(probe);
      theta[i] = original;
      out.layer(l)[i] = (up - down) / (2.0 * h);
    }
  }
  return out;
}

double relative_error(const ParameterSet& a, const ParameterSet& b) {
  ParameterSet diff = a;
  diff.axpy(-1.0, b);
  const double scale = std::max(norm(a), norm(b));
  return scale == 0.0 ? 0.0 : norm(diff) / scale;
}

double max_marginal_difference(const MarginalField& a, const MarginalField& b) {
  if (a.outputs.size() != b.outputs.size() || a.hidden.size() != b.hidden.size()) {
    throw DimensionError("marginal fields have different shapes");
  }
  double worst = 0.0;
  for (std::size_t v = 0; v < a.outputs.size(); ++v) {
    worst = std::max(worst, std::abs(a.outputs[v] - b.outputs[v]));
  }
  for (std::size_t l = 0; l < a.hidden.size(); ++l) {
    for (std::size_t u = 0; u < a.hidden[l].size(); ++u) {
      worst = std::max(worst, std::abs(a.hidden[l][u] - b.hidden[l][u]));
    }
  }
  return worst;
}

double direct_joint_probability(const Network& net, const Assignment& a) {
  check_assignment(net, a);
  LayerStates states = net.make_states(a.x);
  double prob = 1.0;
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    const UnitKind& kind = net.kind(l);
    for (std::size_t u = 0; u < net.layer_size(l); ++u) {
      const double pre = net.preactivation(l, u, states);
      const Event& e = a.layers[l - 1][u];
      switch (kind.family()) {
        case UnitFamily::Sigmoid: {
          const double p1 = 1.0 / (1.0 + std::exp(-pre));
          prob *= e.code == 1 ? p1 : 1.0 - p1;
          break;
        }
        case UnitFamily::Tanh: {
          const double up = std::exp(pre);
          const double down = std::exp(-pre);
          prob *= (e.code == 1 ? up : down) / (up + down);
          break;
        }
        case UnitFamily::ReluSum:
          for (int i = 1; i <= kind.components(); ++i) {
            const double p1 = 1.0 / (1.0 + std::exp(-(pre - i + 0.5)));
            prob *= (e.code >> (i - 1)) & 1u ? p1 : 1.0 - p1;
          }
          break;
        case UnitFamily::Delta:
          prob *= e.value == pre ? 1.0 : 0.0;
          break;
      }
      states[l][u] = encoded_value(kind, e);
    }
  }
  return prob;
}

// ---------------------------------------------------------------------------

CheckResult check_sampler(const SuiteOptions& opt) {
  const RngStream root = RngStream(opt.seed).split(1);
  RngStream net_rng = root.split(0);
  double worst = 0.0;
  for (std::size_t k = 0; k < opt.sampler_nets; ++k) {
    const Network net = random_dense_net(
        {3, {4, 4}, 3, UnitKind::sigmoid(), UnitKind::sigmoid()}, 2.0, net_rng);
    const Example ex = random_example(net, net_rng);
    const PosteriorTable exact = enumerate_posterior(net, ex.x);
    RngStream rng = root.split(100 + k);
    const MarginalField mc = mc_marginals(net, ex.x, opt.sampler_samples, rng);
    worst = std::max(worst, max_marginal_difference(mc, exact.marginals));
  }
  return finish("sampler_vs_enumeration", worst, 0.005, worst <= 0.005,
                std::to_string(opt.sampler_nets) + " nets 3-4-4-3 sigmoid, " +
                    std::to_string(opt.sampler_samples) + " samples each");
}

CheckResult check_unbiasedness(const SuiteOptions& opt) {
  const RngStream root = RngStream(opt.seed).split(2);
  RngStream rng = root.split(0);
  const std::vector<TinyNetShape> shapes = {
      {2, {3}, 2, UnitKind::sigmoid(), UnitKind::sigmoid()},
      {2, {2, 2}, 2, UnitKind::tanh(), UnitKind::tanh()},
      {2, {2}, 2, UnitKind::relu_sum(3), UnitKind::sigmoid()},
      {3, {3}, 1, UnitKind::sigmoid(), UnitKind::tanh()},
  };
  double worst = 0.0;
  for (const auto& shape : shapes) {
    const Network net = random_dense_net(shape, 1.5, rng);
    const Example ex = random_example(net, rng);
    worst = std::max(worst, relative_error(expected_bn_output_gradient(net, ex),
                                           exact_jensen_gradient(net, ex)));
  }
  return finish("output_gradient_unbiased", worst, 1e-10, worst < 1e-10,
                std::to_string(shapes.size()) +
                    " nets, enumerated expectation vs analytic bound gradient");
}

CheckResult check_finite_differences(const SuiteOptions& opt,
                                     const UnitKind& hidden_kind) {
  const RngStream root = RngStream(opt.seed).split(3);
  RngStream rng = root.split(hidden_kind.family() == UnitFamily::ReluSum ? 2
                             : hidden_kind.family() == UnitFamily::Tanh ? 1
                                                                        : 0);
  const UnitKind out_kind = hidden_kind.family() == UnitFamily::Tanh
                                ? UnitKind::tanh()
                                : UnitKind::sigmoid();
  const std::vector<TinyNetShape> shapes = {
      {2, {3, 2}, 2, hidden_kind, out_kind},
      {3, {2, 2}, 1, hidden_kind, out_kind},
      {2, {2, 2, 2}, 2, hidden_kind, out_kind},
  };
  double worst_ebp = 0.0;
  double worst_surrogate = 0.0;
  double worst_bound = 0.0;
  const double h = opt.fd_step;
  for (const auto& shape : shapes) {
    const Network net = random_dense_net(shape, 1.0, rng);
    const Example ex = random_example(net, rng);
    const Example batch[] = {ex};
    worst_ebp = std::max(
        worst_ebp,
        relative_error(ebp_step(net, batch).gradient,
                       central_difference(
                           net,
                           [&](const Network& m) {
                             return deterministic_log_likelihood(m, ex);
                           },
                           h)));
    for (std::size_t l = 1; l < net.layer_count(); ++l) {
      worst_surrogate = std::max(
          worst_surrogate,
          relative_error(expected_bn_hidden_gradient(net, ex, l),
                         central_difference(
                             net,
                             [&](const Network& m) {
                               return surrogate_objective(m, ex, l);
                             },
                             h, l)));
    }
    worst_bound = std::max(
        worst_bound,
        relative_error(exact_jensen_gradient(net, ex),
                       central_difference(
                           net,
                           [&](const Network& m) { return exact_jensen_bound(m, ex); },
                           h, net.output_layer())));
  }
  const double worst = std::max({worst_ebp, worst_surrogate, worst_bound});
  return finish("finite_differences_" + hidden_kind.name(), worst, 1e-5,
                worst < 1e-5,
                "ebp " + fmt(worst_ebp) + ", per-layer surrogate " +
                    fmt(worst_surrogate) + ", output bound " + fmt(worst_bound));
}

CheckResult check_jensen_direction(const SuiteOptions& opt) {
  const RngStream root = RngStream(opt.seed).split(4);
  RngStream rng = root.split(0);
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  for (std::size_t k = 0; k < opt.jensen_nets; ++k) {
    const TinyNetShape shape{2 + k % 2,
                             k % 4 == 3 ? std::vector<std::size_t>{2, 2}
                                        : std::vector<std::size_t>{3},
                             1 + k % 3, kind_by_index(k),
                             k % 2 == 0 ? UnitKind::sigmoid() : UnitKind::tanh()};
    const Network net = random_dense_net(shape, 0.5 + 2.5 * rng.uniform(), rng);
    const Example ex = random_example(net, rng);
    const double bound = exact_jensen_bound(net, ex);
    const double ll = exact_log_likelihood(net, ex);
    worst = std::max(worst, bound - ll);
    if (!(bound <= ll + 1e-12 * std::max(1.0, std::abs(ll)))) ++violations;
  }
  return finish("jensen_direction", worst, 0.0, violations == 0,
                std::to_string(opt.jensen_nets) + " nets, " +
                    std::to_string(violations) +
                    " violations; measured = max(bound - ln p(y|x))");
}

CheckResult check_gibbs(const SuiteOptions& opt) {
  const RngStream root = RngStream(opt.seed).split(5);
  RngStream rng = root.split(0);
  const std::vector<TinyNetShape> shapes = {
      {3, {3, 3}, 2, UnitKind::sigmoid(), UnitKind::sigmoid()},
      {2, {3}, 3, UnitKind::tanh(), UnitKind::tanh()},
      {2, {2}, 2, UnitKind::relu_sum(2), UnitKind::sigmoid()},
  };
  double worst = 0.0;
  bool clamps_exact = true;
  std::uint64_t chain = 0;
  for (const auto& shape : shapes) {
    const Network net = random_dense_net(shape, 1.5, rng);
    const Example ex = random_example(net, rng);
    const UnitKind& out_kind = net.kind(net.output_layer());

    std::vector<ClampSet> clamp_sets;
    clamp_sets.emplace_back(net.output_count());
    ClampSet all(net.output_count());
    for (std::size_t v = 0; v < net.output_count(); ++v) {
      all.clamp(v, out_kind.code_of(ex.y[v]));
    }
    clamp_sets.push_back(all);
    ClampSet partial(net.output_count());
    partial.clamp(0, out_kind.code_of(ex.y[0]));
    clamp_sets.push_back(partial);

    for (const ClampSet& clamp : clamp_sets) {
      const PosteriorTable exact = enumerate_posterior(net, ex.x, &clamp);
      RngStream chain_rng = root.split(100 + chain++);
      const MarginalField gibbs =
          gibbs_clamped(net, ex.x, clamp, opt.gibbs, chain_rng);
      worst = std::max(worst, max_marginal_difference(gibbs, exact.marginals));
      for (std::size_t v = 0; v < net.output_count(); ++v) {
        if (clamp.is_clamped(v) &&
            gibbs.outputs[v] != (clamp.value(v) == 1 ? 1.0 : 0.0)) {
          clamps_exact = false;
        }
      }
    }
  }
  return finish("gibbs_vs_enumeration", worst, 0.01,
                worst <= 0.01 && clamps_exact,
                std::to_string(shapes.size()) +
                    " nets x {no clamps, all outputs, one output}; clamped "
                    "outputs exact: " +
                    (clamps_exact ? "yes" : "no"));
}

CheckResult check_degenerate_equivalence(const SuiteOptions& opt) {
  const RngStream root = RngStream(opt.seed).split(6);
  RngStream rng = root.split(0);
  bool identical = true;
  double worst = 0.0;
  const std::vector<TinyNetShape> shapes = {
      {3, {4, 3}, 2, UnitKind::delta(), UnitKind::delta()},
      {2, {3}, 1, UnitKind::delta(), UnitKind::delta()},
      {4, {5, 4, 3}, 3, UnitKind::delta(), UnitKind::delta()},
  };
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const Network net = random_dense_net(shapes[k], 0.5, rng);
    std::vector<Example> data;
    for (int i = 0; i < 6; ++i) data.push_back(random_example(net, rng));
    for (const Example& ex : data) {
      RngStream step_rng = root.split(100 + k);
      const auto bn = bn_step(net, ex, step_rng).gradient;
      const Example batch[] = {ex};
      const auto ebp = ebp_step(net, batch).gradient;
      identical = identical && bn == ebp;
      worst = std::max(worst, max_abs_difference(bn, ebp));
    }
    TrainConfig cfg;
    cfg.iterations = 40;
    cfg.batch_size = 2;
    cfg.step_size = 0.05;
    cfg.eval_period = 20;
    cfg.seed = opt.seed + k;
    const Metric metric = [](const Network& m, std::span<const Example> d) {
      double s = 0.0;
      for (const auto& ex : d) s += deterministic_log_likelihood(m, ex);
      return s / static_cast<double>(d.size());
    };
    cfg.mode = TrainMode::Ebp;
    const auto ebp_run = train(net, data, {}, cfg, metric);
    cfg.mode = TrainMode::Bn;
    const auto bn_run = train(net, data, {}, cfg, metric);
    identical = identical && ebp_run.net.parameters() == bn_run.net.parameters();
    worst = std::max(worst, max_abs_difference(ebp_run.net.parameters(),
                                               bn_run.net.parameters()));
  }
  return finish("all_delta_bn_equals_ebp", worst, 0.0, identical,
                "single steps and 40-iteration training runs, bitwise");
}

CheckResult check_energy_identity(const SuiteOptions& opt) {
  const RngStream root = RngStream(opt.seed).split(7);
  RngStream rng = root.split(0);
  const std::vector<TinyNetShape> shapes = {
      {2, {3}, 2, UnitKind::sigmoid(), UnitKind::sigmoid()},
      {2, {2, 2}, 2, UnitKind::tanh(), UnitKind::tanh()},
      {3, {2}, 2, UnitKind::relu_sum(3), UnitKind::sigmoid()},
      {2, {3}, 2, UnitKind::delta(), UnitKind::tanh()},
  };
  double worst = 0.0;
  double worst_norm = 0.0;
  std::size_t assignments = 0;
  for (const auto& shape : shapes) {
    const Network net = random_dense_net(shape, 2.0, rng);
    const Example ex = random_example(net, rng);
    double total = 0.0;
    enumerate_layers(net, ex.x, net.layer_count(),
                     [&](const ForwardTrace& trace, double) {
                       Assignment a{ex.x, {}};
                       for (std::size_t l = 1; l <= net.layer_count(); ++l) {
                         const UnitKind& kind = net.kind(l);
                         auto& events = a.layers.emplace_back();
                         for (std::size_t u = 0; u < net.layer_size(l); ++u) {
                           events.push_back(kind.is_discrete()
                                                ? Event::discrete(trace.codes[l][u])
                                                : Event::real(trace.states[l][u]));
                         }
                       }
                       const double direct = direct_joint_probability(net, a);
                       worst = std::max(worst,
                                        std::abs(std::exp(-energy(net, a)) - direct));
                       total += direct;
                       ++assignments;
                     });
    worst_norm = std::max(worst_norm, std::abs(total - 1.0));
  }
  return finish("energy_identity", worst, 1e-12,
                worst <= 1e-12 && worst_norm <= 1e-12,
                std::to_string(assignments) +
                    " assignments; normalisation error " + fmt(worst_norm));
}

CheckResult check_bn_step_mean(const SuiteOptions& opt) {
  const RngStream root = RngStream(opt.seed).split(8);
  RngStream rng = root.split(0);
  const Network net = random_dense_net(
      {2, {3}, 2, UnitKind::sigmoid(), UnitKind::sigmoid()}, 1.5, rng);
  const Example ex = random_example(net, rng);
  const GradientMoments exact = exact_bn_step_moments(net, ex);
  GradientAccumulator acc = GradientAccumulator::zeros_for(net);
  for (std::size_t i = 0; i < opt.moment_samples; ++i) {
    RngStream step_rng = root.split(100 + i);
    acc.merge(bn_step(net, ex, step_rng));
  }
  const ParameterSet mc = acc.mean();
  double worst = 0.0;
  const double n = static_cast<double>(opt.moment_samples);
  for (std::size_t l = 1; l < mc.layer_count(); ++l) {
    for (std::size_t i = 0; i < mc.layer(l).size(); ++i) {
      const double diff = std::abs(mc.layer(l)[i] - exact.mean.layer(l)[i]);
      const double sigma = std::sqrt(exact.variance.layer(l)[i] / n);
      const double z = sigma > 0.0 ? diff / sigma
                       : diff > 1e-12 ? std::numeric_limits<double>::infinity()
                                      : 0.0;
      worst = std::max(worst, z);
    }
  }
  return finish("bn_step_mean_within_3_sigma", worst, 3.0, worst <= 3.0,
                std::to_string(opt.moment_samples) +
                    " independent steps; measured = worst |z|");
}

std::vector<CheckResult> run_suite(const SuiteOptions& opt) {
  return {check_sampler(opt),
          check_unbiasedness(opt),
          check_finite_differences(opt, UnitKind::sigmoid()),
          check_finite_differences(opt, UnitKind::tanh()),
          check_finite_differences(opt, UnitKind::relu_sum(3)),
          check_jensen_direction(opt),
          check_gibbs(opt),
          check_degenerate_equivalence(opt),
          check_energy_identity(opt),
          check_bn_step_mean(opt)};
}

std::vector<CheckResult> run_network_checks(const Network& net,
                                            const SuiteOptions& opt) {
  const int bits = discrete_bits(net, net.layer_count());
  if (bits > kMaxEnumerationBits) {
    throw StateSpaceError("state space too large: network has " +
                          std::to_string(bits) +
                          " discrete bits; oracle checks enumerate at most " +
                          std::to_string(kMaxEnumerationBits));
  }
  const RngStream root = RngStream(opt.seed).split(9);
  RngStream rng = root.split(0);
  const Example ex = random_example(net, rng);
  std::vector<CheckResult> out;

  const PosteriorTable exact = enumerate_posterior(net, ex.x);
  double total = 0.0;
  for (double p : exact.probabilities) total += p;
  out.push_back(finish("normalisation", std::abs(total - 1.0), 1e-12,
                       std::abs(total - 1.0) <= 1e-12,
                       std::to_string(exact.probabilities.size()) + " assignments"));

  RngStream mc_rng = root.split(1);
  const double mc_err = max_marginal_difference(
      mc_marginals(net, ex.x, opt.sampler_samples, mc_rng), exact.marginals);
  out.push_back(finish("sampler_vs_enumeration", mc_err, 0.005, mc_err <= 0.005,
                       std::to_string(opt.sampler_samples) + " samples"));

  if (net.kind(net.output_layer()).is_discrete()) {
    const double bound = exact_jensen_bound(net, ex);
    const double ll = exact_log_likelihood(net, ex);
    out.push_back(finish("jensen_direction", bound - ll, 0.0,
                         bound <= ll + 1e-12 * std::max(1.0, std::abs(ll)),
                         "bound " + fmt(bound) + ", ln p(y|x) " + fmt(ll)));

    RngStream gibbs_rng = root.split(2);
    const double gibbs_err = max_marginal_difference(
        gibbs_clamped(net, ex.x, ClampSet(net.output_count()), opt.gibbs, gibbs_rng),
        exact.marginals);
    out.push_back(finish("gibbs_vs_enumeration", gibbs_err, 0.01,
                         gibbs_err <= 0.01, "no clamps"));
  }
  return out;
}

}  // namespace stochnet::verify
