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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochnet/dataset.hpp"
#include "stochnet/inference.hpp"
#include "stochnet/network.hpp"

namespace stochnet {

/// How a trained network turns an input into output decisions.
struct DecisionRule {
  enum class Kind { Deterministic, Sampled };

  Kind kind = Kind::Deterministic;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;

  /// Threshold the deterministic forward pass at the middle of the output
  /// encoding range.
  static DecisionRule deterministic() { return {}; }
  /// Max-marginal decision from `samples` ancestral samples.
  static DecisionRule sampled(std::size_t samples, std::uint64_t seed) {
    return {Kind::Sampled, samples, seed};
  }
};

/// Output marginals under `rule`. The deterministic rule reports the
/// rescaled output means with samples = 0. `stream` selects the random
/// substream of the sampled rule.
MarginalField decision_marginals(const Network& net, std::span<const double> x,
                                 const DecisionRule& rule, std::uint64_t stream);

std::vector<std::uint8_t> decide(const Network& net, std::span<const double> x,
                                 const DecisionRule& rule, std::uint64_t stream);

/// Fraction of output variables decided correctly, pooled over examples.
double accuracy(const Network& net, std::span<const Example> data,
                const DecisionRule& rule);

/// Mean over examples of the IoU between decisions and targets.
double mean_iou(const Network& net, std::span<const Example> data,
                const DecisionRule& rule);

/// Sampling budget for segmenting one image.
struct SegmentBudget {
  std::size_t samples = 1000;  // ancestral samples without clamps
  GibbsConfig gibbs;
  std::uint64_t seed = 1;
};

/// Without clamps: mc_marginals on RngStream(seed).split(0). With clamps:
/// gibbs_clamped on RngStream(seed).split(1).
MarginalField segment_marginals(const Network& net, std::span<const double> x,
                                const ClampSet& clamp,
                                const SegmentBudget& budget);

/// Scribble image to clamps: 0 clamps background, 255 clamps foreground,
/// 128 leaves the pixel free. Other values throw DataError.
ClampSet clamps_from_scribbles(const GrayImage& scribbles);

struct Corruption {
  enum class Kind { GaussianNoise, Blur };

  Kind kind = Kind::GaussianNoise;
  double amount = 0.0;  // noise sigma or blur radius

  std::string label() const;
};

RgbImage corrupt(const RgbImage& image, const Corruption& c, RngStream& rng);

struct SweepPoint {
  Corruption corruption;
  double mean_iou = 0.0;
  std::filesystem::path marginal_image;  // empty when nothing was written
};

/**
 * Evaluates `net` on corrupted copies of `data` at every level. Noise for
 * example i at level k comes from RngStream(seed).split(k).split(i). When
 * `out_dir` is set, the marginal image of the first example is written as
 * <prefix>_<label>.pgm per level.
 */
std::vector<SweepPoint> noise_sweep(
    const Network& net, const ImageDataset& data,
    const std::vector<Corruption>& levels, const DecisionRule& rule,
    std::uint64_t seed, const std::optional<std::filesystem::path>& out_dir,
    const std::string& prefix = "marginals");

}  // namespace stochnet
