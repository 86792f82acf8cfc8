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


#include "stochnet/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "stochnet/error.hpp"

namespace stochnet {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw ConfigError("config key '" + key + "': expected " + expected +
                    ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a number");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a non-negative integer");
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  const std::uint64_t v = to_uint(key, value);
  if (v > 1000000000ull) bad_value(key, value, "an integer below 1e9");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  bad_value(key, value, "true or false");
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

using Setter =
    std::function<void(RunConfig&, const std::string& key, const std::string& value,
                       const std::filesystem::path& base)>;

struct KeyEntry {
  std::string name;
  std::string help;
  Setter set;
};

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& value) {
  if (value.empty()) return {};
  const std::filesystem::path p(value);
  return p.is_absolute() ? p : base / p;
}

DecisionRule::Kind to_decision(const std::string& key, const std::string& v) {
  if (v == "deterministic") return DecisionRule::Kind::Deterministic;
  if (v == "sampled") return DecisionRule::Kind::Sampled;
  bad_value(key, v, "deterministic or sampled");
}

const std::vector<KeyEntry>& key_table() {
  using P = const std::filesystem::path&;
  using S = const std::string&;
  static const std::vector<KeyEntry> table = {
      // network.input and network.layerN are handled separately.
      {"network.init_scale", "weights start uniform in [-s, s]",
       [](RunConfig& c, S k, S v, P) { c.network.init_scale = to_double(k, v); }},
      {"network.init_seed", "seed of the initial weights (shared by paired runs)",
       [](RunConfig& c, S k, S v, P) { c.network.init_seed = to_uint(k, v); }},
      {"network.checkpoint", "checkpoint written by train, read by other commands",
       [](RunConfig& c, S, S v, P b) { c.network.checkpoint = resolve(b, v); }},

      {"data.kind", "csv | images | blobs",
       [](RunConfig& c, S k, S v, P) {
         if (v == "csv") c.data.kind = DataSection::Kind::Csv;
         else if (v == "images") c.data.kind = DataSection::Kind::Images;
         else if (v == "blobs") c.data.kind = DataSection::Kind::Blobs;
         else bad_value(k, v, "csv, images or blobs");
       }},
      {"data.path", "csv file or image directory",
       [](RunConfig& c, S, S v, P b) { c.data.path = resolve(b, v); }},
      {"data.test_path", "optional separate csv test file",
       [](RunConfig& c, S, S v, P b) { c.data.test_path = resolve(b, v); }},
      {"data.label_count", "trailing label columns per csv row",
       [](RunConfig& c, S k, S v, P) { c.data.label_count = to_uint(k, v); }},
      {"data.header", "csv has a header line",
       [](RunConfig& c, S k, S v, P) { c.data.header = to_bool(k, v); }},
      {"data.train_count", "examples drawn for training; 0 keeps everything",
       [](RunConfig& c, S k, S v, P) { c.data.train_count = to_uint(k, v); }},
      {"data.split_seed", "seed of the train/test split",
       [](RunConfig& c, S k, S v, P) { c.data.split_seed = to_uint(k, v); }},
      {"data.blob_count", "number of synthetic blob images",
       [](RunConfig& c, S k, S v, P) { c.data.blob_count = to_uint(k, v); }},
      {"data.blob_rows", "blob image height",
       [](RunConfig& c, S k, S v, P) { c.data.blob_rows = to_int(k, v); }},
      {"data.blob_cols", "blob image width",
       [](RunConfig& c, S k, S v, P) { c.data.blob_cols = to_int(k, v); }},
      {"data.blob_seed", "seed of the blob generator",
       [](RunConfig& c, S k, S v, P) { c.data.blob_seed = to_uint(k, v); }},

      {"train.mode", "ebp | bn | paired",
       [](RunConfig& c, S k, S v, P) {
         if (v == "ebp") c.train.mode = TrainSection::Mode::Ebp;
         else if (v == "bn") c.train.mode = TrainSection::Mode::Bn;
         else if (v == "paired") c.train.mode = TrainSection::Mode::Paired;
         else bad_value(k, v, "ebp, bn or paired");
       }},
      {"train.step_size", "fixed step size",
       [](RunConfig& c, S k, S v, P) { c.train.cfg.step_size = to_double(k, v); }},
      {"train.iterations", "number of parameter updates",
       [](RunConfig& c, S k, S v, P) { c.train.cfg.iterations = to_uint(k, v); }},
      {"train.batch_size", "examples per update",
       [](RunConfig& c, S k, S v, P) { c.train.cfg.batch_size = to_uint(k, v); }},
      {"train.seed", "seed of shuffling and sampling",
       [](RunConfig& c, S k, S v, P) { c.train.cfg.seed = to_uint(k, v); }},
      {"train.eval_period", "iterations between metric rows",
       [](RunConfig& c, S k, S v, P) { c.train.cfg.eval_period = to_uint(k, v); }},
      {"train.momentum", "heavy-ball momentum in [0, 1)",
       [](RunConfig& c, S k, S v, P) { c.train.cfg.momentum = to_double(k, v); }},
      {"train.weight_decay", "L2 coefficient",
       [](RunConfig& c, S k, S v, P) { c.train.cfg.weight_decay = to_double(k, v); }},
      {"train.bound_samples", "samples per example for the logged lower bound",
       [](RunConfig& c, S k, S v, P) { c.train.cfg.bound_samples = to_uint(k, v); }},
      {"train.metrics", "metrics CSV path",
       [](RunConfig& c, S, S v, P b) { c.train.metrics = resolve(b, v); }},
      {"train.metric", "auto | accuracy | iou",
       [](RunConfig& c, S k, S v, P) {
         if (v == "auto") c.train.metric = TrainSection::Metric::Auto;
         else if (v == "accuracy") c.train.metric = TrainSection::Metric::Accuracy;
         else if (v == "iou") c.train.metric = TrainSection::Metric::Iou;
         else bad_value(k, v, "auto, accuracy or iou");
       }},

      {"eval.decision", "deterministic | sampled",
       [](RunConfig& c, S k, S v, P) { c.eval.decision.kind = to_decision(k, v); }},
      {"eval.decision_samples", "samples of the max-marginal decision",
       [](RunConfig& c, S k, S v, P) { c.eval.decision_samples = to_uint(k, v); }},
      {"eval.decision_seed", "seed of the max-marginal decision",
       [](RunConfig& c, S k, S v, P) { c.eval.decision_seed = to_uint(k, v); }},

      {"oracle.seed", "seed of the random nets and samplers",
       [](RunConfig& c, S k, S v, P) { c.oracle.suite.seed = to_uint(k, v); }},
      {"oracle.nets", "random nets in the sampler check",
       [](RunConfig& c, S k, S v, P) { c.oracle.suite.sampler_nets = to_uint(k, v); }},
      {"oracle.samples", "ancestral samples per sampler check",
       [](RunConfig& c, S k, S v, P) { c.oracle.suite.sampler_samples = to_uint(k, v); }},
      {"oracle.jensen_nets", "random nets in the Jensen direction check",
       [](RunConfig& c, S k, S v, P) { c.oracle.suite.jensen_nets = to_uint(k, v); }},
      {"oracle.gibbs_burn_in", "Gibbs burn-in sweeps",
       [](RunConfig& c, S k, S v, P) { c.oracle.suite.gibbs.burn_in = to_uint(k, v); }},
      {"oracle.gibbs_sweeps", "Gibbs sweeps after burn-in",
       [](RunConfig& c, S k, S v, P) { c.oracle.suite.gibbs.sweeps = to_uint(k, v); }},
      {"oracle.gibbs_thinning", "record every n-th sweep",
       [](RunConfig& c, S k, S v, P) { c.oracle.suite.gibbs.thinning = to_uint(k, v); }},
      {"oracle.fd_step", "central difference step",
       [](RunConfig& c, S k, S v, P) { c.oracle.suite.fd_step = to_double(k, v); }},
      {"oracle.use_network", "check [network] instead of random nets",
       [](RunConfig& c, S k, S v, P) { c.oracle.use_network = to_bool(k, v); }},

      {"segment.image", "PPM image to segment",
       [](RunConfig& c, S, S v, P b) { c.segment.image = resolve(b, v); }},
      {"segment.scribbles", "PGM scribbles: 0 background, 255 foreground, 128 free",
       [](RunConfig& c, S, S v, P b) { c.segment.scribbles = resolve(b, v); }},
      {"segment.output_dir", "directory for marginal and decision images",
       [](RunConfig& c, S, S v, P b) { c.segment.output_dir = resolve(b, v); }},
      {"segment.samples", "ancestral samples without scribbles",
       [](RunConfig& c, S k, S v, P) { c.segment.budget.samples = to_uint(k, v); }},
      {"segment.seed", "sampling seed",
       [](RunConfig& c, S k, S v, P) { c.segment.budget.seed = to_uint(k, v); }},
      {"segment.burn_in", "Gibbs burn-in sweeps",
       [](RunConfig& c, S k, S v, P) { c.segment.budget.gibbs.burn_in = to_uint(k, v); }},
      {"segment.sweeps", "Gibbs sweeps after burn-in",
       [](RunConfig& c, S k, S v, P) { c.segment.budget.gibbs.sweeps = to_uint(k, v); }},
      {"segment.thinning", "record every n-th Gibbs sweep",
       [](RunConfig& c, S k, S v, P) { c.segment.budget.gibbs.thinning = to_uint(k, v); }},
      {"segment.noise_sigmas", "comma-separated Gaussian noise levels",
       [](RunConfig& c, S k, S v, P) { c.segment.noise_sigmas = to_list(k, v); }},
      {"segment.blur_radii", "comma-separated blur radii",
       [](RunConfig& c, S k, S v, P) { c.segment.blur_radii = to_list(k, v); }},
      {"segment.noise_seed", "seed of the added noise",
       [](RunConfig& c, S k, S v, P) { c.segment.noise_seed = to_uint(k, v); }},

      {"serve.host", "bind address",
       [](RunConfig& c, S, S v, P) { c.serve.host = v; }},
      {"serve.port", "bind port",
       [](RunConfig& c, S k, S v, P) { c.serve.port = to_int(k, v); }},
      {"serve.threads", "HTTP worker threads",
       [](RunConfig& c, S k, S v, P) { c.serve.threads = to_int(k, v); }},
      {"serve.samples", "ancestral samples for recompute without clamps",
       [](RunConfig& c, S k, S v, P) { c.serve.budget.samples = to_uint(k, v); }},
      {"serve.seed", "sampling seed",
       [](RunConfig& c, S k, S v, P) { c.serve.budget.seed = to_uint(k, v); }},
      {"serve.burn_in", "Gibbs burn-in sweeps",
       [](RunConfig& c, S k, S v, P) { c.serve.budget.gibbs.burn_in = to_uint(k, v); }},
      {"serve.sweeps", "Gibbs sweeps after burn-in",
       [](RunConfig& c, S k, S v, P) { c.serve.budget.gibbs.sweeps = to_uint(k, v); }},
      {"serve.thinning", "record every n-th Gibbs sweep",
       [](RunConfig& c, S k, S v, P) { c.serve.budget.gibbs.thinning = to_uint(k, v); }},
  };
  return table;
}

/// "network.layer<N>" -> N, or 0 for any other key.
std::size_t layer_number(const std::string& key) {
  constexpr std::string_view prefix = "network.layer";
  if (key.rfind(prefix, 0) != 0 || key.size() == prefix.size()) return 0;
  std::size_t n = 0;
  const char* begin = key.data() + prefix.size();
  const char* end = key.data() + key.size();
  const auto [ptr, ec] = std::from_chars(begin, end, n);
  return ec == std::errc() && ptr == end ? n : 0;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile file;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3) {
        throw ConfigError(where + ": malformed section header '" + text + "'");
      }
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected 'key = value', got '" + text + "'");
    }
    const std::string key = trim(std::string_view(text).substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    file.values_[full] = trim(std::string_view(text).substr(eq + 1));
    file.origin_[full] = where;
  }
  return file;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  ConfigFile file = parse(in, path.string());
  file.base_dir_ = path.parent_path().empty() ? std::filesystem::path(".")
                                              : path.parent_path();
  return file;
}

void ConfigFile::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) +
                      "' is not of the form key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void ConfigFile::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw ConfigError("override with empty key");
  values_[key] = value;
  origin_[key] = "--set";
}

std::optional<std::string> ConfigFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = [] {
    std::vector<std::pair<std::string, std::string>> out = {
        {"network.input", "input size: N or RxCxK"},
        {"network.layer<N>", "layer N: <kind> <count|RxC> dense <l>... | local "
                             "<depth> <radius> [image]"}};
    for (const auto& e : key_table()) out.emplace_back(e.name, e.help);
    return out;
  }();
  return keys;
}

RunConfig build_run_config(const ConfigFile& file) {
  RunConfig cfg;
  std::map<std::size_t, std::pair<std::string, std::string>> layers;
  std::optional<std::string> input;
  for (const auto& [key, value] : file.entries()) {
    if (key == "network.input") {
      input = value;
      continue;
    }
    if (const std::size_t n = layer_number(key); n > 0) {
      layers[n] = {key, value};
      continue;
    }
    const auto& table = key_table();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const KeyEntry& e) { return e.name == key; });
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->set(cfg, key, value, file.base_dir());
  }

  if (input || !layers.empty()) {
    if (!input) throw ConfigError("config key 'network.input' is missing");
    if (layers.empty()) throw ConfigError("config has no network.layer1");
    NetworkSpec spec;
    try {
      parse_input(*input, spec);
    } catch (const Error& e) {
      throw ConfigError("config key 'network.input': " + std::string(e.what()));
    }
    std::size_t expected = 1;
    for (const auto& [n, entry] : layers) {
      if (n != expected) {
        throw ConfigError("config key 'network.layer" + std::to_string(expected) +
                          "' is missing (layers must be numbered 1, 2, ...)");
      }
      try {
        spec.layers.push_back(parse_layer(entry.second));
      } catch (const Error& e) {
        throw ConfigError("config key '" + entry.first + "': " + e.what());
      }
      ++expected;
    }
    const ValidationReport report = validate(spec);
    if (!report.ok()) {
      std::string msg = "invalid network in config:";
      for (const auto& v : report.violations) msg += "\n  - " + v;
      throw ConfigError(msg);
    }
    cfg.network.spec = std::move(spec);
  }

  cfg.eval.decision.samples = cfg.eval.decision_samples;
  cfg.eval.decision.seed = cfg.eval.decision_seed;
  try {
    check_train_config(cfg.train.cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("[train] ") + e.what());
  }
  if (cfg.serve.threads < 1) throw ConfigError("config key 'serve.threads' must be >= 1");
  return cfg;
}

}  // namespace stochnet
