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


#include "stochnet/segmentation.hpp"

#include "stochnet/checkpoint.hpp"
#include "stochnet/error.hpp"
#include "stochnet/propagation.hpp"

namespace stochnet {

MarginalField decision_marginals(const Network& net, std::span<const double> x,
                                 const DecisionRule& rule, std::uint64_t stream) {
  if (rule.kind == DecisionRule::Kind::Sampled) {
    RngStream rng = RngStream(rule.seed).split(stream);
    return mc_marginals(net, x, rule.samples, rng);
  }
  if (x.size() != net.input_count()) {
    throw DimensionError("input has " + std::to_string(x.size()) +
                         " values, network expects " +
                         std::to_string(net.input_count()));
  }
  const ForwardTrace trace = forward_deterministic(net, x);
  const UnitKind& kind = net.kind(net.output_layer());
  MarginalField field;
  field.grid = net.spec().layers.back().grid;
  field.outputs.resize(net.output_count());
  const auto out = trace.outputs();
  for (std::size_t v = 0; v < out.size(); ++v) {
    if (kind.family() == UnitFamily::Delta) {
      field.outputs[v] = out[v] > 0.5 ? 1.0 : 0.0;
    } else {
      field.outputs[v] = (out[v] - kind.low()) / (kind.high() - kind.low());
    }
  }
  return field;
}

std::vector<std::uint8_t> decide(const Network& net, std::span<const double> x,
                                 const DecisionRule& rule, std::uint64_t stream) {
  const auto codes =
      max_marginal_decide(decision_marginals(net, x, rule, stream));
  return {codes.begin(), codes.end()};
}

namespace {

std::vector<std::uint8_t> target_codes(const Network& net, const Example& ex) {
  if (ex.y.size() != net.output_count()) {
    throw DimensionError("example has " + std::to_string(ex.y.size()) +
                         " targets, network has " +
                         std::to_string(net.output_count()) + " outputs");
  }
  const UnitKind& kind = net.kind(net.output_layer());
  const double mid = 0.5 * (kind.low() + kind.high());
  std::vector<std::uint8_t> out(ex.y.size());
  for (std::size_t v = 0; v < out.size(); ++v) {
    out[v] = kind.family() == UnitFamily::Delta ? (ex.y[v] > 0.5)
                                                : (ex.y[v] > mid);
  }
  return out;
}

}  // namespace

double accuracy(const Network& net, std::span<const Example> data,
                const DecisionRule& rule) {
  if (data.empty()) throw DataError("accuracy of an empty dataset");
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto pred = decide(net, data[i].x, rule, i);
    const auto truth = target_codes(net, data[i]);
    for (std::size_t v = 0; v < pred.size(); ++v) correct += pred[v] == truth[v];
    total += pred.size();
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

double mean_iou(const Network& net, std::span<const Example> data,
                const DecisionRule& rule) {
  if (data.empty()) throw DataError("mean IoU of an empty dataset");
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sum += iou(decide(net, data[i].x, rule, i), target_codes(net, data[i]));
  }
  return sum / static_cast<double>(data.size());
}

MarginalField segment_marginals(const Network& net, std::span<const double> x,
                                const ClampSet& clamp,
                                const SegmentBudget& budget) {
  const RngStream root(budget.seed);
  if (clamp.empty()) {
    RngStream rng = root.split(0);
    return mc_marginals(net, x, budget.samples, rng);
  }
  RngStream rng = root.split(1);
  return gibbs_clamped(net, x, clamp, budget.gibbs, rng);
}

ClampSet clamps_from_scribbles(const GrayImage& scribbles) {
  ClampSet clamp(scribbles.data.size());
  for (std::size_t i = 0; i < scribbles.data.size(); ++i) {
    switch (scribbles.data[i]) {
      case 0:
        clamp.clamp(i, 0);
        break;
      case 255:
        clamp.clamp(i, 1);
        break;
      case 128:
        break;
      default:
        throw DataError("scribble pixel " + std::to_string(i) + " has value " +
                        std::to_string(scribbles.data[i]) +
                        " (expected 0, 128 or 255)");
    }
  }
  return clamp;
}

std::string Corruption::label() const {
  return (kind == Kind::GaussianNoise ? "noise_" : "blur_") + format_double(amount);
}

RgbImage corrupt(const RgbImage& image, const Corruption& c, RngStream& rng) {
  if (c.amount < 0.0) throw ConfigError("corruption amount must be >= 0");
  if (c.amount == 0.0) return image;
  return c.kind == Corruption::Kind::GaussianNoise
             ? add_gaussian_noise(image, c.amount, rng)
             : gaussian_blur(image, c.amount);
}

std::vector<SweepPoint> noise_sweep(
    const Network& net, const ImageDataset& data,
    const std::vector<Corruption>& levels, const DecisionRule& rule,
    std::uint64_t seed, const std::optional<std::filesystem::path>& out_dir,
    const std::string& prefix) {
  if (data.size() == 0) throw DataError("noise sweep needs at least one image");
  if (out_dir) std::filesystem::create_directories(*out_dir);
  const RngStream root(seed);
  std::vector<SweepPoint> points;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    SweepPoint point{levels[k], 0.0, {}};
    const RngStream level_rng = root.split(k);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& ex = data.examples[i];
      RngStream rng = level_rng.split(i);
      const auto x = image_to_input(corrupt(ex.image, levels[k], rng));
      const MarginalField field = decision_marginals(net, x, rule, i);
      const auto codes = max_marginal_decide(field);
      point.mean_iou +=
          iou(std::vector<std::uint8_t>(codes.begin(), codes.end()), ex.mask.data);
      if (i == 0 && out_dir) {
        point.marginal_image = *out_dir / (prefix + "_" + levels[k].label() + ".pgm");
        write_pgm(marginals_to_pgm(field), point.marginal_image);
      }
    }
    point.mean_iou /= static_cast<double>(data.size());
    points.push_back(point);
  }
  return points;
}

}  // namespace stochnet
