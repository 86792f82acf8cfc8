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

#include "stochnet/propagation.hpp"

#include <cmath>

namespace stochnet {

double unit_mean(const UnitKind& kind, double a) {
  switch (kind.family()) {
    case UnitFamily::Sigmoid:
      return logistic(a);
    case UnitFamily::Tanh:
      return std::tanh(a);
    case UnitFamily::ReluSum: {
      double sum = 0.0;
      for (int i = 1; i <= kind.components(); ++i) sum += logistic(a - i + 0.5);
      return sum;
    }
    case UnitFamily::Delta:
      return a;
  }
  return 0.0;
}

double unit_mean_derivative(const UnitKind& kind, double a) {
  switch (kind.family()) {
    case UnitFamily::Sigmoid: {
      const double s = logistic(a);
      return s * (1.0 - s);
    }
    case UnitFamily::Tanh: {
      const double t = std::tanh(a);
      return 1.0 - t * t;
    }
    case UnitFamily::ReluSum: {
      double sum = 0.0;
      for (int i = 1; i <= kind.components(); ++i) {
        const double s = logistic(a - i + 0.5);
        sum += s * (1.0 - s);
      }
      return sum;
    }
    case UnitFamily::Delta:
      return 1.0;
  }
  return 0.0;
}

std::vector<double> relu_expand(double a, int components) {
  std::vector<double> out(components);
  for (int i = 1; i <= components; ++i) out[i - 1] = a - i + 0.5;
  return out;
}

Event sample_event(const UnitKind& kind, double a, RngStream& rng) {
  switch (kind.family()) {
    case UnitFamily::Sigmoid:
      return Event::discrete(rng.bernoulli(logistic(a)) ? 1u : 0u);
    case UnitFamily::Tanh:
      // p(+1 | a) = e^a / (e^a + e^-a) = logistic(2a)
      return Event::discrete(rng.bernoulli(logistic(2.0 * a)) ? 1u : 0u);
    case UnitFamily::ReluSum: {
      std::uint32_t code = 0;
      for (int i = 1; i <= kind.components(); ++i) {
        if (rng.bernoulli(logistic(a - i + 0.5))) code |= 1u << (i - 1);
      }
      return Event::discrete(code);
    }
    case UnitFamily::Delta:
      break;
  }
  return Event::real(a);
}

double unit_sample(const UnitKind& kind, double a, RngStream& rng) {
  return encoded_value(kind, sample_event(kind, a, rng));
}

namespace {

ForwardTrace empty_trace(const Network& net, std::span<const double> x,
                         TraceMode mode) {
  ForwardTrace trace;
  trace.mode = mode;
  trace.states = net.make_states(x);
  trace.preactivations.resize(net.layer_count() + 1);
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    trace.preactivations[l].assign(net.layer_size(l), 0.0);
  }
  return trace;
}

}  // namespace

ForwardTrace forward_deterministic(const Network& net,
                                   std::span<const double> x) {
  ForwardTrace trace = empty_trace(net, x, TraceMode::Deterministic);
  propagate_means(net, trace, 1);
  return trace;
}

void propagate_means(const Network& net, ForwardTrace& trace,
                     std::size_t first_layer) {
  for (std::size_t l = first_layer; l <= net.layer_count(); ++l) {
    const UnitKind& kind = net.kind(l);
    auto& pre = trace.preactivations[l];
    auto& out = trace.states[l];
    for (std::size_t u = 0; u < out.size(); ++u) {
      pre[u] = net.preactivation(l, u, trace.states);
      out[u] = unit_mean(kind, pre[u]);
    }
  }
}

ForwardTrace forward_sample(const Network& net, std::span<const double> x,
                            RngStream& rng) {
  ForwardTrace trace = empty_trace(net, x, TraceMode::Sampled);
  trace.codes.resize(net.layer_count() + 1);
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    const UnitKind& kind = net.kind(l);
    auto& pre = trace.preactivations[l];
    auto& out = trace.states[l];
    auto& codes = trace.codes[l];
    codes.assign(out.size(), 0u);
    for (std::size_t u = 0; u < out.size(); ++u) {
      pre[u] = net.preactivation(l, u, trace.states);
      const Event e = sample_event(kind, pre[u], rng);
      codes[u] = e.code;
      out[u] = encoded_value(kind, e);
    }
  }
  return trace;
}

}  // namespace stochnet
