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


#include "stochnet/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "stochnet/checkpoint.hpp"
#include "stochnet/dataset.hpp"
#include "stochnet/error.hpp"
#include "stochnet/segmentation.hpp"
#include "stochnet/service.hpp"
#include "stochnet/verify.hpp"

namespace stochnet::cli {

namespace {

namespace fs = std::filesystem;

struct LoadedData {
  std::vector<Example> train;
  std::vector<Example> test;
  std::optional<ImageDataset> train_images;
  std::optional<ImageDataset> test_images;
  bool images = false;
};

void require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " is not set");
  if (!fs::exists(path)) throw DataError(what + " " + path.string() + " does not exist");
}

LoadedData load_data(const DataSection& d) {
  LoadedData out;
  switch (d.kind) {
    case DataSection::Kind::None:
      throw ConfigError("this command needs a [data] section with data.kind");
    case DataSection::Kind::Csv: {
      require_file(d.path, "data.path");
      const CsvOptions opts{d.header, d.label_count};
      VectorDataset all = load_vectors(d.path, opts);
      if (!d.test_path.empty()) {
        require_file(d.test_path, "data.test_path");
        out.train = std::move(all.examples);
        out.test = load_vectors(d.test_path, opts).examples;
      } else if (d.train_count > 0) {
        auto [train, test] = split(all, d.train_count, d.split_seed);
        out.train = std::move(train.examples);
        out.test = std::move(test.examples);
      } else {
        out.train = std::move(all.examples);
      }
      return out;
    }
    case DataSection::Kind::Images:
    case DataSection::Kind::Blobs: {
      ImageDataset all;
      if (d.kind == DataSection::Kind::Images) {
        require_file(d.path, "data.path");
        all = load_images(d.path);
      } else {
        if (d.blob_count < 1) throw ConfigError("config key 'data.blob_count' must be >= 1");
        all = synth_blob_task(d.blob_count, d.blob_rows, d.blob_cols, d.blob_seed);
      }
      out.images = true;
      if (d.train_count > 0) {
        auto [train, test] = split(all, d.train_count, d.split_seed);
        out.train_images = std::move(train);
        out.test_images = std::move(test);
      } else {
        out.train_images = std::move(all);
        out.test_images = ImageDataset{out.train_images->rows, out.train_images->cols, {}};
      }
      out.train = to_examples(*out.train_images);
      out.test = to_examples(*out.test_images);
      return out;
    }
  }
  return out;
}

Network load_model(const RunConfig& cfg) {
  require_file(cfg.network.checkpoint, "network.checkpoint");
  return load_checkpoint(cfg.network.checkpoint);
}

Metric make_metric(const RunConfig& cfg, bool images, const DecisionRule& rule) {
  const bool iou_metric = cfg.train.metric == TrainSection::Metric::Iou ||
                          (cfg.train.metric == TrainSection::Metric::Auto && images);
  if (iou_metric) {
    return [rule](const Network& net, std::span<const Example> data) {
      return mean_iou(net, data, rule);
    };
  }
  return [rule](const Network& net, std::span<const Example> data) {
    return accuracy(net, data, rule);
  };
}

DecisionRule rule_for_mode(const RunConfig& cfg, TrainMode mode) {
  return mode == TrainMode::Ebp
             ? DecisionRule::deterministic()
             : DecisionRule::sampled(cfg.eval.decision_samples, cfg.eval.decision_seed);
}

std::atomic<bool> g_stop_requested{false};

extern "C" void on_signal(int) { g_stop_requested.store(true); }

}  // namespace

fs::path tagged_path(const fs::path& path, const std::string& tag) {
  return path.parent_path() /
         (path.stem().string() + "." + tag + path.extension().string());
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.network.spec) throw ConfigError("train needs network.input and network.layer1...");
  if (cfg.network.checkpoint.empty()) throw ConfigError("network.checkpoint is not set");
  const LoadedData data = load_data(cfg.data);
  const Network init = Network::with_uniform_init(
      *cfg.network.spec, cfg.network.init_scale, cfg.network.init_seed);

  std::vector<TrainMode> modes;
  if (cfg.train.mode != TrainSection::Mode::Bn) modes.push_back(TrainMode::Ebp);
  if (cfg.train.mode != TrainSection::Mode::Ebp) modes.push_back(TrainMode::Bn);
  const bool paired = modes.size() == 2;
  const fs::path metrics_base =
      cfg.train.metrics.empty()
          ? cfg.network.checkpoint.parent_path() /
                (cfg.network.checkpoint.stem().string() + ".metrics.csv")
          : cfg.train.metrics;

  for (TrainMode mode : modes) {
    const std::string tag = to_string(mode);
    const fs::path ckpt =
        paired ? tagged_path(cfg.network.checkpoint, tag) : cfg.network.checkpoint;
    const fs::path metrics = paired ? tagged_path(metrics_base, tag) : metrics_base;
    if (!ckpt.parent_path().empty()) fs::create_directories(ckpt.parent_path());
    if (!metrics.parent_path().empty()) fs::create_directories(metrics.parent_path());
    std::ofstream log(metrics);
    if (!log) throw DataError("cannot write metrics file " + metrics.string());
    write_metrics_header(log);

    TrainConfig tc = cfg.train.cfg;
    tc.mode = mode;
    const DecisionRule rule = rule_for_mode(cfg, mode);
    const TrainResult result =
        train(init, data.train, data.test, tc, make_metric(cfg, data.images, rule),
              [&log](const MetricsRow& row) { write_metrics_row(log, row); });
    save_checkpoint(result.net, ckpt);

    const MetricsRow& last = result.log.back();
    out << "mode=" << tag << " iterations=" << last.iteration
        << " train_metric=" << format_double(last.train_metric);
    if (!data.test.empty()) {
      out << " test_metric=" << format_double(last.test_metric)
          << " gap=" << format_double(last.train_metric - last.test_metric);
    }
    out << " checkpoint=" << ckpt.string() << " metrics=" << metrics.string() << '\n';
  }
  return kOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const Network net = load_model(cfg);
  const LoadedData data = load_data(cfg.data);
  const Metric metric = make_metric(cfg, data.images, cfg.eval.decision);
  const double train_metric = metric(net, data.train);
  out << "train_metric=" << format_double(train_metric) << '\n';
  if (!data.test.empty()) {
    const double test_metric = metric(net, data.test);
    out << "test_metric=" << format_double(test_metric) << '\n'
        << "gap=" << format_double(train_metric - test_metric) << '\n';
  }
  return kOk;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  std::vector<verify::CheckResult> results;
  if (cfg.oracle.use_network) {
    if (!cfg.network.spec) throw ConfigError("oracle.use_network needs a [network] section");
    const Network net = Network::with_uniform_init(
        *cfg.network.spec, cfg.network.init_scale, cfg.network.init_seed);
    results = verify::run_network_checks(net, cfg.oracle.suite);
  } else {
    results = verify::run_suite(cfg.oracle.suite);
  }
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    out << (r.passed ? "PASS " : "FAIL ") << r.name
        << " measured=" << format_double(r.measured)
        << " tolerance=" << format_double(r.tolerance) << " (" << r.detail << ")\n";
  }
  out << (all ? "all checks passed" : "some checks FAILED") << '\n';
  return all ? kOk : kFailure;
}

int cmd_segment(const RunConfig& cfg, std::ostream& out) {
  const auto& seg = cfg.segment;
  const bool sweep = !seg.noise_sigmas.empty() || !seg.blur_radii.empty();
  if (seg.image.empty() && !sweep) {
    throw ConfigError("segment needs segment.image or a noise sweep "
                      "(segment.noise_sigmas / segment.blur_radii)");
  }
  const Network net = load_model(cfg);
  fs::create_directories(seg.output_dir);

  if (!seg.image.empty()) {
    require_file(seg.image, "segment.image");
    const RgbImage image = read_ppm(seg.image);
    const auto x = image_to_input(image);
    if (x.size() != net.input_count()) {
      throw DimensionError("image " + seg.image.string() + " has " +
                           std::to_string(x.size()) + " values, model expects " +
                           std::to_string(net.input_count()));
    }
    ClampSet clamp(net.output_count());
    if (!seg.scribbles.empty()) {
      require_file(seg.scribbles, "segment.scribbles");
      clamp = clamps_from_scribbles(read_pgm(seg.scribbles));
      if (clamp.output_count() != net.output_count()) {
        throw DimensionError("scribble image does not match the model output grid");
      }
    }
    const MarginalField field = segment_marginals(net, x, clamp, seg.budget);
    const GrayImage marginals = marginals_to_pgm(field);
    GrayImage decision(marginals.rows, marginals.cols);
    const auto codes = max_marginal_decide(field);
    for (std::size_t i = 0; i < codes.size(); ++i) decision.data[i] = codes[i] ? 255 : 0;
    write_pgm(marginals, seg.output_dir / "marginals.pgm");
    write_pgm(decision, seg.output_dir / "decision.pgm");
    out << "method=" << (clamp.empty() ? "mc" : "gibbs") << " samples=" << field.samples
        << " clamped=" << clamp.size() << " marginals="
        << (seg.output_dir / "marginals.pgm").string()
        << " decision=" << (seg.output_dir / "decision.pgm").string() << '\n';
  }

  if (sweep) {
    const LoadedData data = load_data(cfg.data);
    if (!data.images) throw ConfigError("noise sweep needs image data (data.kind = images or blobs)");
    const ImageDataset& eval_set =
        data.test_images && data.test_images->size() > 0 ? *data.test_images
                                                          : *data.train_images;
    std::vector<Corruption> levels;
    for (double s : seg.noise_sigmas) levels.push_back({Corruption::Kind::GaussianNoise, s});
    for (double r : seg.blur_radii) levels.push_back({Corruption::Kind::Blur, r});
    const auto points = noise_sweep(net, eval_set, levels, cfg.eval.decision,
                                    seg.noise_seed, seg.output_dir);
    const fs::path table = seg.output_dir / "sweep.csv";
    std::ofstream csv(table);
    if (!csv) throw DataError("cannot write " + table.string());
    csv << "kind,amount,mean_iou,marginal_image\n";
    for (const auto& p : points) {
      const std::string kind =
          p.corruption.kind == Corruption::Kind::GaussianNoise ? "noise" : "blur";
      csv << kind << ',' << format_double(p.corruption.amount) << ','
          << format_double(p.mean_iou) << ',' << p.marginal_image.filename().string()
          << '\n';
      out << kind << "=" << format_double(p.corruption.amount)
          << " mean_iou=" << format_double(p.mean_iou) << '\n';
    }
    out << "sweep=" << table.string() << '\n';
  }
  return kOk;
}

int cmd_serve(const RunConfig& cfg, std::ostream& out) {
  Network net = load_model(cfg);
  std::optional<ImageDataset> dataset;
  if (cfg.data.kind != DataSection::Kind::None) {
    LoadedData data = load_data(cfg.data);
    if (data.images) dataset = std::move(*data.train_images);
  }
  Service service(std::move(net), cfg.serve.budget, std::move(dataset));
  httplib::Server server;
  const int threads = cfg.serve.threads;
  server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  register_routes(server, service);
  // SO_REUSEADDR only: an occupied port must fail to bind.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  if (cfg.serve.port < 1 || cfg.serve.port > 65535 ||
      !server.bind_to_port(cfg.serve.host, cfg.serve.port)) {
    throw EnvironmentError("cannot bind " + cfg.serve.host + ":" +
                           std::to_string(cfg.serve.port));
  }
  g_stop_requested.store(false);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread watcher([&server] {
    while (!g_stop_requested.load()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    server.stop();
  });
  out << "listening on " << cfg.serve.host << ":" << cfg.serve.port << std::endl;
  const bool ok = server.listen_after_bind();
  g_stop_requested.store(true);
  watcher.join();
  std::signal(SIGINT, SIG_DFL);
  std::signal(SIGTERM, SIG_DFL);
  out << "stopped" << std::endl;
  return ok ? kOk : kEnvironmentError;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SpecError*>(&e) ||
      dynamic_cast<const StateSpaceError*>(&e)) {
    return kConfigError;
  }
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DimensionError*>(&e)) {
    return kDataError;
  }
  if (dynamic_cast<const EnvironmentError*>(&e) ||
      dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kEnvironmentError;
  }
  return kFailure;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"stochnet: feed-forward networks as Bayesian networks"};
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("command", command, "train | eval | oracle | segment | serve")
      ->required()
      ->check(CLI::IsMember({"train", "eval", "oracle", "segment", "serve"}));
  app.add_option("--config", config_path, "config file")->required();
  app.add_option("--set", overrides, "override: section.key=value")->take_all();
  app.allow_extras(false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kConfigError;
  }

  try {
    ConfigFile file = ConfigFile::load(config_path);
    for (const auto& o : overrides) file.set(o);
    const RunConfig cfg = build_run_config(file);
    if (command == "train") return cmd_train(cfg, out);
    if (command == "eval") return cmd_eval(cfg, out);
    if (command == "oracle") return cmd_oracle(cfg, out);
    if (command == "segment") return cmd_segment(cfg, out);
    return cmd_serve(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace stochnet::cli
