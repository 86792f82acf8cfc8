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
#include <string>
#include <string_view>
#include <vector>

#include "stochnet/rng.hpp"

namespace stochnet {

/// RGB image with channel values in [0, 1], row-major, channels interleaved.
struct RgbImage {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  RgbImage() = default;
  RgbImage(int r, int c) : rows(r), cols(c), data(std::size_t(r) * c * 3, 0.0) {}

  double& at(int i, int j, int c) { return data[(std::size_t(i) * cols + j) * 3 + c]; }
  double at(int i, int j, int c) const {
    return data[(std::size_t(i) * cols + j) * 3 + c];
  }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// 8-bit grayscale image. Binary masks store 0/1.
struct GrayImage {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int r, int c, std::uint8_t fill = 0)
      : rows(r), cols(c), data(std::size_t(r) * c, fill) {}

  std::uint8_t& at(int i, int j) { return data[std::size_t(i) * cols + j]; }
  std::uint8_t at(int i, int j) const { return data[std::size_t(i) * cols + j]; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// Binary netpbm: P6 (RGB) and P5 (gray), maxval 255. Header comments are
// accepted on read. `name` only labels error messages.
RgbImage decode_ppm(std::string_view bytes, const std::string& name = "<ppm>");
GrayImage decode_pgm(std::string_view bytes, const std::string& name = "<pgm>");
std::string encode_ppm(const RgbImage& image);
std::string encode_pgm(const GrayImage& image);

RgbImage read_ppm(const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);
void write_ppm(const RgbImage& image, const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

/// Mask binarization rule: gray >= 128 is foreground.
GrayImage binarize(const GrayImage& gray);

/// Adds N(0, sigma^2) to every channel and clips to [0, 1].
RgbImage add_gaussian_noise(const RgbImage& image, double sigma, RngStream& rng);

/// Separable Gaussian blur with standard deviation `radius`, kernel cut at
/// 3 * radius, replicated borders. radius <= 0 returns the image unchanged.
RgbImage gaussian_blur(const RgbImage& image, double radius);

}  // namespace stochnet
