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
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "stochnet/image.hpp"

namespace stochnet {

/// One training pair. `y` holds encoded output targets (0/1 for sigmoid
/// outputs, -1/+1 for tanh outputs).
struct Example {
  std::vector<double> x;
  std::vector<double> y;
  friend bool operator==(const Example&, const Example&) = default;
};

struct VectorDataset {
  std::vector<Example> examples;
  std::size_t feature_count = 0;
  std::size_t label_count = 0;

  std::size_t size() const { return examples.size(); }
  friend bool operator==(const VectorDataset&, const VectorDataset&) = default;
};

/// Each row holds the features followed by `label_count` labels.
struct CsvOptions {
  bool header = false;
  std::size_t label_count = 1;
};

/// Throws DataError naming the line on ragged rows or non-numeric cells, and
/// on empty input.
VectorDataset parse_vectors(std::istream& in, const CsvOptions& options,
                            const std::string& source = "<csv>");
VectorDataset load_vectors(const std::filesystem::path& path,
                           const CsvOptions& options);
void save_vectors(const VectorDataset& data, std::ostream& out,
                  bool header = false);
void save_vectors(const VectorDataset& data, const std::filesystem::path& path,
                  bool header = false);

struct ImageExample {
  std::string name;
  RgbImage image;
  GrayImage mask;  // 0/1
  friend bool operator==(const ImageExample&, const ImageExample&) = default;
};

struct ImageDataset {
  int rows = 0;
  int cols = 0;
  std::vector<ImageExample> examples;

  std::size_t size() const { return examples.size(); }
  friend bool operator==(const ImageDataset&, const ImageDataset&) = default;
};

/// Loads every <stem>.ppm in `dir` with its <stem>.pgm mask (binarized at
/// 128), sorted by stem. Throws DataError on a missing partner file or
/// inconsistent dimensions.
ImageDataset load_images(const std::filesystem::path& dir);

/// Writes <name>.ppm and <name>.pgm (mask scaled to 0/255) per example.
void save_images(const ImageDataset& data, const std::filesystem::path& dir);

/**
 * Synthetic foreground/background task: a saturated, randomly coloured and
 * rotated ellipse on a dull textured background. Foreground covers between
 * 5% and 60% of every image. Deterministic per seed.
 */
ImageDataset synth_blob_task(std::size_t n, int rows, int cols,
                             std::uint64_t seed);

/// Seeded random partition of 0..size-1 into train_count train indices and
/// the rest, each list ascending. Requires 1 <= train_count < size.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t size, std::size_t train_count, std::uint64_t seed);

std::pair<VectorDataset, VectorDataset> split(const VectorDataset& data,
                                              std::size_t train_count,
                                              std::uint64_t seed);
std::pair<ImageDataset, ImageDataset> split(const ImageDataset& data,
                                            std::size_t train_count,
                                            std::uint64_t seed);

/// Row-major, channel-interleaved pixel values.
std::vector<double> image_to_input(const RgbImage& image);
std::vector<Example> to_examples(const ImageDataset& data);

}  // namespace stochnet
