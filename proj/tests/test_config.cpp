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


#include <gtest/gtest.h>

#include <sstream>

#include "stochnet/config.hpp"
#include "stochnet/error.hpp"
#include "test_util.hpp"

namespace stochnet {
namespace {

ConfigFile parse(const std::string& text) {
  std::istringstream in(text);
  return ConfigFile::parse(in, "t.ini");
}

std::string config_error(const std::string& text) {
  try {
    build_run_config(parse(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigFile, SectionsCommentsAndOverrides) {
  auto file = parse(
      "# leading comment\n"
      "[train]\n"
      "step_size = 0.25   # trailing comment\n"
      "  iterations=7\n"
      "[data]\n"
      "kind = blobs\n"
      "kind = csv\n");
  EXPECT_EQ(file.get("train.step_size"), "0.25");
  EXPECT_EQ(file.get("train.iterations"), "7");
  EXPECT_EQ(file.get("data.kind"), "csv");
  EXPECT_FALSE(file.get("train.seed"));
  file.set("train.seed = 9");
  EXPECT_EQ(file.get("train.seed"), "9");
  EXPECT_THROW(file.set("no-equals"), ConfigError);
}

TEST(ConfigFile, MalformedLinesNameTheLocation) {
  try {
    parse("[train]\nstep_size\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("t.ini:2"), std::string::npos);
  }
  EXPECT_THROW(parse("[train\n"), ConfigError);
}

TEST(RunConfig, TypedValues) {
  const auto cfg = build_run_config(parse(
      "[network]\n"
      "input = 4x4x3\n"
      "layer1 = sigmoid 4x4 local 1 1 image\n"
      "layer2 = tanh 4x4 local 1 1\n"
      "init_scale = 0.5\n"
      "[train]\n"
      "mode = paired\n"
      "step_size = 0.3\n"
      "iterations = 11\n"
      "momentum = 0.5\n"
      "[eval]\n"
      "decision = sampled\n"
      "decision_samples = 33\n"
      "[segment]\n"
      "noise_sigmas = 0, 0.1,0.2\n"
      "[serve]\n"
      "port = 9001\n"
      "sweeps = 10\n"));
  ASSERT_TRUE(cfg.network.spec);
  EXPECT_EQ(cfg.network.spec->layers.size(), 2u);
  EXPECT_EQ(cfg.network.spec->input_count, 48);
  EXPECT_EQ(cfg.network.init_scale, 0.5);
  EXPECT_EQ(cfg.train.mode, TrainSection::Mode::Paired);
  EXPECT_EQ(cfg.train.cfg.step_size, 0.3);
  EXPECT_EQ(cfg.train.cfg.iterations, 11u);
  EXPECT_EQ(cfg.train.cfg.momentum, 0.5);
  EXPECT_EQ(cfg.eval.decision.kind, DecisionRule::Kind::Sampled);
  EXPECT_EQ(cfg.eval.decision_samples, 33u);
  EXPECT_EQ(cfg.segment.noise_sigmas, (std::vector<double>{0, 0.1, 0.2}));
  EXPECT_EQ(cfg.serve.port, 9001);
  EXPECT_EQ(cfg.serve.budget.gibbs.sweeps, 10u);
  EXPECT_EQ(cfg.serve.budget.gibbs.burn_in, 200u);
}

TEST(RunConfig, Defaults) {
  const auto cfg = build_run_config(parse(""));
  EXPECT_FALSE(cfg.network.spec);
  EXPECT_EQ(cfg.network.init_scale, 0.1);
  EXPECT_EQ(cfg.segment.budget.gibbs.burn_in, 1000u);
  EXPECT_EQ(cfg.segment.budget.gibbs.thinning, 10u);
  EXPECT_EQ(cfg.serve.budget.gibbs.burn_in, 200u);
  EXPECT_EQ(cfg.serve.budget.gibbs.sweeps, 2000u);
}

TEST(RunConfig, UnknownKeyIsNamed) {
  const std::string msg = config_error("[train]\nstep = 0.1\n");
  EXPECT_NE(msg.find("train.step"), std::string::npos) << msg;
}

TEST(RunConfig, MalformedValuesAreNamed) {
  EXPECT_NE(config_error("[train]\niterations = many\n").find("train.iterations"),
            std::string::npos);
  EXPECT_NE(config_error("[data]\nkind = parquet\n").find("data.kind"), std::string::npos);
  EXPECT_NE(config_error("[data]\nheader = maybe\n").find("data.header"), std::string::npos);
}

TEST(RunConfig, InvalidNetworkIsAConfigError) {
  EXPECT_FALSE(config_error("[network]\ninput = 2\nlayer1 = sigmoid 2 dense 1\n").empty());
  EXPECT_FALSE(config_error("[network]\ninput = 2\nlayer1 = sigmoid 2 dense 0\n"
                            "layer3 = sigmoid 1 dense 1\n")
                   .empty());
  EXPECT_FALSE(config_error("[network]\nlayer1 = sigmoid 2 dense 0\n").empty());
}

TEST(RunConfig, PathsResolveAgainstConfigDirectory) {
  testing::TempDir dir("cfg");
  testing::write_file(dir / "run.ini",
                      "[network]\ncheckpoint = out/m.ckpt\n[data]\npath = /abs/data.csv\n");
  const auto cfg = build_run_config(ConfigFile::load(dir / "run.ini"));
  EXPECT_EQ(cfg.network.checkpoint, dir.path() / "out/m.ckpt");
  EXPECT_EQ(cfg.data.path, "/abs/data.csv");
  EXPECT_THROW(ConfigFile::load(dir / "missing.ini"), ConfigError);
}

TEST(RunConfig, EveryListedKeyIsAccepted) {
  for (const auto& [key, help] : config_keys()) {
    EXPECT_FALSE(help.empty()) << key;
    if (key.find('<') != std::string::npos || key == "network.input") continue;
    auto file = parse("");
    file.set(key, "1");
    try {
      build_run_config(file);
    } catch (const ConfigError& e) {
      EXPECT_EQ(std::string(e.what()).find("unknown"), std::string::npos) << e.what();
    }
  }
}

}  // namespace
}  // namespace stochnet
