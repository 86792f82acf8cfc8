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

#include "stochnet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>

#include "stochnet/checkpoint.hpp"
#include "stochnet/error.hpp"
#include "stochnet/rng.hpp"

namespace stochnet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

}  // namespace

VectorDataset parse_vectors(std::istream& in, const CsvOptions& options,
                            const std::string& source) {
  VectorDataset data;
  data.label_count = options.label_count;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  bool skipped_header = !options.header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    const auto cells = split_commas(line);
    if (columns == 0) {
      columns = cells.size();
      if (columns <= options.label_count) {
        throw DataError(source + ":" + std::to_string(line_no) +
                        ": need at least one feature column before " +
                        std::to_string(options.label_count) + " label(s)");
      }
    } else if (cells.size() != columns) {
      throw DataError(source + ":" + std::to_string(line_no) +
                      ": ragged row, expected " + std::to_string(columns) +
                      " columns, got " + std::to_string(cells.size()));
    }
    Example ex;
    ex.x.reserve(columns - options.label_count);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto cell = cells[c];
      const auto [ptr, ec] =
          std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw DataError(source + ":" + std::to_string(line_no) +
                        ": non-numeric cell '" + std::string(cell) +
                        "' in column " + std::to_string(c + 1));
      }
      (c < columns - options.label_count ? ex.x : ex.y).push_back(v);
    }
    data.examples.push_back(std::move(ex));
  }
  if (data.examples.empty()) throw DataError(source + ": no data rows");
  data.feature_count = columns - options.label_count;
  return data;
}

VectorDataset load_vectors(const std::filesystem::path& path,
                           const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_vectors(in, options, path.string());
}

void save_vectors(const VectorDataset& data, std::ostream& out, bool header) {
  if (header) {
    std::string line;
    for (std::size_t i = 0; i < data.feature_count; ++i) {
      line += (i ? ",x" : "x") + std::to_string(i);
    }
    for (std::size_t i = 0; i < data.label_count; ++i) {
      line += ",y" + std::to_string(i);
    }
    out << line << '\n';
  }
  for (const auto& ex : data.examples) {
    bool first = true;
    for (const auto* part : {&ex.x, &ex.y}) {
      for (double v : *part) {
        if (!first) out << ',';
        out << format_double(v);
        first = false;
      }
    }
    out << '\n';
  }
}

void save_vectors(const VectorDataset& data, const std::filesystem::path& path,
                  bool header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  save_vectors(data, out, header);
}

ImageDataset load_images(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw DataError("image directory " + dir.string() + " does not exist");
  }
  std::map<std::string, std::pair<bool, bool>> stems;  // (ppm, pgm)
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    const auto stem = entry.path().stem().string();
    if (ext == ".ppm") stems[stem].first = true;
    if (ext == ".pgm") stems[stem].second = true;
  }
  ImageDataset data;
  for (const auto& [stem, present] : stems) {
    const fs::path ppm = dir / (stem + ".ppm");
    const fs::path pgm = dir / (stem + ".pgm");
    if (!present.first) throw DataError("mask " + pgm.string() + " has no image " + ppm.string());
    if (!present.second) throw DataError("image " + ppm.string() + " has no mask " + pgm.string());
    ImageExample ex{stem, read_ppm(ppm), binarize(read_pgm(pgm))};
    if (ex.image.rows != ex.mask.rows || ex.image.cols != ex.mask.cols) {
      throw DataError("size mismatch: " + ppm.string() + " is " +
                      std::to_string(ex.image.rows) + "x" +
                      std::to_string(ex.image.cols) + " but " + pgm.string() +
                      " is " + std::to_string(ex.mask.rows) + "x" +
                      std::to_string(ex.mask.cols));
    }
    if (data.examples.empty()) {
      data.rows = ex.image.rows;
      data.cols = ex.image.cols;
    } else if (ex.image.rows != data.rows || ex.image.cols != data.cols) {
      throw DataError("size mismatch: " + ppm.string() + " is " +
                      std::to_string(ex.image.rows) + "x" +
                      std::to_string(ex.image.cols) + " but " +
                      (dir / (data.examples.front().name + ".ppm")).string() +
                      " is " + std::to_string(data.rows) + "x" +
                      std::to_string(data.cols));
    }
    data.examples.push_back(std::move(ex));
  }
  if (data.examples.empty()) {
    throw DataError("no image/mask pairs in " + dir.string());
  }
  return data;
}

void save_images(const ImageDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& ex : data.examples) {
    write_ppm(ex.image, dir / (ex.name + ".ppm"));
    GrayImage mask = ex.mask;
    for (auto& v : mask.data) v = v ? 255 : 0;
    write_pgm(mask, dir / (ex.name + ".pgm"));
  }
}

namespace {

struct Rgb {
  double r, g, b;
};

Rgb hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h * 6.0, 6.0);
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  Rgb out{0, 0, 0};
  switch (static_cast<int>(hp)) {
    case 0: out = {c, x, 0}; break;
    case 1: out = {x, c, 0}; break;
    case 2: out = {0, c, x}; break;
    case 3: out = {0, x, c}; break;
    case 4: out = {x, 0, c}; break;
    default: out = {c, 0, x}; break;
  }
  const double m = v - c;
  return {out.r + m, out.g + m, out.b + m};
}

ImageExample make_blob(int rows, int cols, RngStream& rng) {
  constexpr double kPi = std::numbers::pi;
  ImageExample ex;
  ex.image = RgbImage(rows, cols);
  ex.mask = GrayImage(rows, cols);

  // Dull background with a stripe texture and pixel noise.
  const Rgb base = hsv_to_rgb(rng.uniform(), 0.05 + 0.15 * rng.uniform(),
                              0.25 + 0.35 * rng.uniform());
  const double stripe_freq = 0.5 + 1.5 * rng.uniform();
  const double stripe_angle = kPi * rng.uniform();
  const double stripe_phase = 2.0 * kPi * rng.uniform();

  const double min_dim = std::min(rows, cols);
  while (true) {
    const double cy = rows * (0.2 + 0.6 * rng.uniform());
    const double cx = cols * (0.2 + 0.6 * rng.uniform());
    const double ry = min_dim * (0.15 + 0.3 * rng.uniform());
    const double rx = min_dim * (0.15 + 0.3 * rng.uniform());
    const double theta = kPi * rng.uniform();
    std::size_t count = 0;
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        const double dy = i + 0.5 - cy, dx = j + 0.5 - cx;
        const double u = dx * std::cos(theta) + dy * std::sin(theta);
        const double v = -dx * std::sin(theta) + dy * std::cos(theta);
        const bool inside = (u * u) / (rx * rx) + (v * v) / (ry * ry) <= 1.0;
        ex.mask.at(i, j) = inside ? 1 : 0;
        count += inside;
      }
    }
    const double fraction = static_cast<double>(count) / (rows * cols);
    if (fraction >= 0.05 && fraction <= 0.6) break;
  }

  const Rgb fg = hsv_to_rgb(rng.uniform(), 0.6 + 0.4 * rng.uniform(),
                            0.6 + 0.4 * rng.uniform());
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double t = i * std::sin(stripe_angle) + j * std::cos(stripe_angle);
      const double texture = 0.08 * std::sin(stripe_freq * t + stripe_phase);
      const Rgb c = ex.mask.at(i, j) ? fg : Rgb{base.r + texture,
                                                base.g + texture,
                                                base.b + texture};
      const double comps[3] = {c.r, c.g, c.b};
      for (int ch = 0; ch < 3; ++ch) {
        const double noise = 0.1 * (rng.uniform() - 0.5);
        ex.image.at(i, j, ch) = std::clamp(comps[ch] + noise, 0.0, 1.0);
      }
    }
  }
  return ex;
}

template <class Dataset>
std::pair<Dataset, Dataset> split_dataset(const Dataset& data,
                                          std::size_t train_count,
                                          std::uint64_t seed) {
  const auto [train_idx, test_idx] =
      split_indices(data.examples.size(), train_count, seed);
  Dataset train = data, test = data;
  train.examples.clear();
  test.examples.clear();
  for (auto i : train_idx) train.examples.push_back(data.examples[i]);
  for (auto i : test_idx) test.examples.push_back(data.examples[i]);
  return {std::move(train), std::move(test)};
}

}  // namespace

ImageDataset synth_blob_task(std::size_t n, int rows, int cols,
                             std::uint64_t seed) {
  if (n < 1 || rows < 1 || cols < 1) {
    throw Error("synth_blob_task needs n >= 1 and a non-empty image size");
  }
  ImageDataset data;
  data.rows = rows;
  data.cols = cols;
  const RngStream root(seed);
  for (std::size_t k = 0; k < n; ++k) {
    RngStream rng = root.split(k);
    ImageExample ex = make_blob(rows, cols, rng);
    ex.name = "blob" + std::to_string(k);
    data.examples.push_back(std::move(ex));
  }
  return data;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t size, std::size_t train_count, std::uint64_t seed) {
  if (train_count < 1 || train_count >= size) {
    throw Error("train_count " + std::to_string(train_count) +
                " out of range for a dataset of " + std::to_string(size) +
                " (need 1 <= count < size)");
  }
  std::vector<std::size_t> order(size);
  for (std::size_t i = 0; i < size; ++i) order[i] = i;
  RngStream rng(seed);
  for (std::size_t i = size - 1; i > 0; --i) {
    const std::size_t j = rng() % (i + 1);
    std::swap(order[i], order[j]);
  }
  std::vector<std::size_t> train(order.begin(), order.begin() + train_count);
  std::vector<std::size_t> test(order.begin() + train_count, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<VectorDataset, VectorDataset> split(const VectorDataset& data,
                                              std::size_t train_count,
                                              std::uint64_t seed) {
  return split_dataset(data, train_count, seed);
}

std::pair<ImageDataset, ImageDataset> split(const ImageDataset& data,
                                            std::size_t train_count,
                                            std::uint64_t seed) {
  return split_dataset(data, train_count, seed);
}

std::vector<double> image_to_input(const RgbImage& image) {
  return image.data;
}

std::vector<Example> to_examples(const ImageDataset& data) {
  std::vector<Example> out;
  out.reserve(data.examples.size());
  for (const auto& ex : data.examples) {
    Example e;
    e.x = image_to_input(ex.image);
    e.y.assign(ex.mask.data.begin(), ex.mask.data.end());
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace stochnet
