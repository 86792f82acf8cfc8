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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stochnet/inference.hpp"
#include "stochnet/learning.hpp"
#include "stochnet/network.hpp"
#include "stochnet/segmentation.hpp"
#include "stochnet/verify.hpp"

namespace stochnet {

/**
 * Flat key/value view of a config file.
 *
 *   # comment
 *   [section]
 *   key = value
 *
 * Keys inside a section are stored as "section.key". A repeated key keeps
 * the last value.
 */
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& source = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  /// Applies one "section.key=value" override.
  void set(std::string_view assignment);
  void set(const std::string& key, const std::string& value);

  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return values_; }
  /// Directory relative paths are resolved against.
  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> origin_;  // key -> "file:line"
  std::filesystem::path base_dir_ = ".";
};

struct NetworkSection {
  std::optional<NetworkSpec> spec;
  double init_scale = 0.1;
  std::uint64_t init_seed = 1;
  std::filesystem::path checkpoint;
};

struct DataSection {
  enum class Kind { None, Csv, Images, Blobs };
  Kind kind = Kind::None;
  std::filesystem::path path;
  std::filesystem::path test_path;
  std::size_t label_count = 1;
  bool header = false;
  std::size_t train_count = 0;  // 0: no split
  std::uint64_t split_seed = 1;
  std::size_t blob_count = 100;
  int blob_rows = 16;
  int blob_cols = 16;
  std::uint64_t blob_seed = 1;
};

struct TrainSection {
  enum class Mode { Ebp, Bn, Paired };
  Mode mode = Mode::Ebp;
  TrainConfig cfg;
  std::filesystem::path metrics;
  enum class Metric { Auto, Accuracy, Iou };
  Metric metric = Metric::Auto;
};

struct EvalSection {
  DecisionRule decision;
  /// Samples and seed of the sampled rule used for BN models during
  /// training and for eval.decision = sampled.
  std::size_t decision_samples = 100;
  std::uint64_t decision_seed = 1;
};

struct OracleSection {
  verify::SuiteOptions suite;
  /// Run the checks on [network] instead of the built-in random nets.
  bool use_network = false;
};

struct SegmentSection {
  std::filesystem::path image;
  std::filesystem::path scribbles;
  std::filesystem::path output_dir = "segment_out";
  SegmentBudget budget;
  std::vector<double> noise_sigmas;
  std::vector<double> blur_radii;
  std::uint64_t noise_seed = 1;
};

struct ServeSection {
  std::string host = "127.0.0.1";
  int port = 8080;
  SegmentBudget budget{200, GibbsConfig{200, 2000, 1}, 1};
  int threads = 4;
};

struct RunConfig {
  NetworkSection network;
  DataSection data;
  TrainSection train;
  EvalSection eval;
  OracleSection oracle;
  SegmentSection segment;
  ServeSection serve;
};

/// Typed view of a ConfigFile. Throws ConfigError naming the key for unknown
/// keys, malformed values and invalid network specs.
RunConfig build_run_config(const ConfigFile& file);

/// Every key build_run_config accepts, with a one-line description.
const std::vector<std::pair<std::string, std::string>>& config_keys();

}  // namespace stochnet
