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

#include "stochnet/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>

#include "stochnet/error.hpp"

namespace stochnet {

namespace {

struct NetpbmHeader {
  int cols = 0;
  int rows = 0;
  std::size_t data_offset = 0;
};

NetpbmHeader parse_header(std::string_view bytes, std::string_view magic,
                          const std::string& name) {
  if (!bytes.starts_with(magic)) {
    throw DataError(name + ": expected netpbm magic " + std::string(magic));
  }
  std::size_t pos = magic.size();
  int fields[3] = {0, 0, 0};
  for (int& field : fields) {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() &&
           std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      field = field * 10 + (bytes[pos] - '0');
      if (field > 1 << 20) throw DataError(name + ": header value too large");
      ++pos;
    }
    if (pos == start) throw DataError(name + ": malformed netpbm header");
  }
  if (pos >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw DataError(name + ": malformed netpbm header");
  }
  if (fields[2] != 255) throw DataError(name + ": maxval must be 255");
  if (fields[0] <= 0 || fields[1] <= 0) {
    throw DataError(name + ": empty image");
  }
  return {fields[0], fields[1], pos + 1};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write " + path.string());
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

RgbImage decode_ppm(std::string_view bytes, const std::string& name) {
  const auto h = parse_header(bytes, "P6", name);
  const std::size_t n = std::size_t(h.rows) * h.cols * 3;
  if (bytes.size() - h.data_offset < n) {
    throw DataError(name + ": truncated pixel data");
  }
  RgbImage img(h.rows, h.cols);
  for (std::size_t i = 0; i < n; ++i) {
    img.data[i] = static_cast<unsigned char>(bytes[h.data_offset + i]) / 255.0;
  }
  return img;
}

GrayImage decode_pgm(std::string_view bytes, const std::string& name) {
  const auto h = parse_header(bytes, "P5", name);
  const std::size_t n = std::size_t(h.rows) * h.cols;
  if (bytes.size() - h.data_offset < n) {
    throw DataError(name + ": truncated pixel data");
  }
  GrayImage img(h.rows, h.cols);
  std::copy_n(bytes.data() + h.data_offset, n, img.data.begin());
  return img;
}

std::string encode_ppm(const RgbImage& image) {
  std::string out = "P6\n" + std::to_string(image.cols) + " " +
                    std::to_string(image.rows) + "\n255\n";
  out.reserve(out.size() + image.data.size());
  for (double v : image.data) out.push_back(static_cast<char>(to_byte(v)));
  return out;
}

std::string encode_pgm(const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.cols) + " " +
                    std::to_string(image.rows) + "\n255\n";
  out.append(image.data.begin(), image.data.end());
  return out;
}

RgbImage read_ppm(const std::filesystem::path& path) {
  return decode_ppm(read_file(path), path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
  return decode_pgm(read_file(path), path.string());
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  write_file(encode_ppm(image), path);
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  write_file(encode_pgm(image), path);
}

GrayImage binarize(const GrayImage& gray) {
  GrayImage mask(gray.rows, gray.cols);
  for (std::size_t i = 0; i < gray.data.size(); ++i) {
    mask.data[i] = gray.data[i] >= 128 ? 1 : 0;
  }
  return mask;
}

RgbImage add_gaussian_noise(const RgbImage& image, double sigma,
                            RngStream& rng) {
  RgbImage out = image;
  if (sigma <= 0.0) return out;
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out.data) v = std::clamp(v + noise(rng), 0.0, 1.0);
  return out;
}

RgbImage gaussian_blur(const RgbImage& image, double radius) {
  if (radius <= 0.0) return image;
  const int half = static_cast<int>(std::ceil(3.0 * radius));
  std::vector<double> kernel(2 * half + 1);
  double total = 0.0;
  for (int k = -half; k <= half; ++k) {
    kernel[k + half] = std::exp(-0.5 * k * k / (radius * radius));
    total += kernel[k + half];
  }
  for (double& k : kernel) k /= total;

  RgbImage tmp(image.rows, image.cols);
  for (int i = 0; i < image.rows; ++i) {
    for (int j = 0; j < image.cols; ++j) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
          acc += kernel[k + half] *
                 image.at(i, std::clamp(j + k, 0, image.cols - 1), c);
        }
        tmp.at(i, j, c) = acc;
      }
    }
  }
  RgbImage out(image.rows, image.cols);
  for (int i = 0; i < image.rows; ++i) {
    for (int j = 0; j < image.cols; ++j) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
          acc += kernel[k + half] *
                 tmp.at(std::clamp(i + k, 0, image.rows - 1), j, c);
        }
        out.at(i, j, c) = acc;
      }
    }
  }
  return out;
}

}  // namespace stochnet
