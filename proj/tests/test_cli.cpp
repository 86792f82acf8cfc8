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

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>

#include <chrono>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "stochnet/checkpoint.hpp"
#include "stochnet/cli.hpp"
#include "stochnet/image.hpp"
#include "test_util.hpp"

extern char** environ;

namespace stochnet {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

RunResult run_cfg(const std::string& command, const std::filesystem::path& cfg,
                  const std::vector<std::string>& sets = {}) {
  std::vector<std::string> args{command, "--config", cfg.string()};
  for (const auto& s : sets) {
    args.push_back("--set");
    args.push_back(s);
  }
  return run_cli(args);
}

const char* kXorIni =
    "[network]\n"
    "input = 2\n"
    "layer1 = sigmoid 4 dense 0\n"
    "layer2 = sigmoid 1 dense 1\n"
    "init_scale = 1.0\n"
    "checkpoint = out/xor.ckpt\n"
    "[data]\n"
    "kind = csv\n"
    "path = xor.csv\n"
    "test_path = xor.csv\n"
    "[train]\n"
    "mode = ebp\n"
    "step_size = 0.5\n"
    "iterations = 4000\n"
    "eval_period = 1000\n";

class XorCli : public ::testing::Test {
 protected:
  void SetUp() override {
    write_file(dir_ / "xor.csv", "0,0,0\n0,1,1\n1,0,1\n1,1,0\n");
    write_file(dir_ / "xor.ini", kXorIni);
  }
  std::filesystem::path ini() const { return dir_ / "xor.ini"; }
  TempDir dir_{"cli"};
};

TEST_F(XorCli, TrainWritesCheckpointAndMetrics) {
  const auto r = run_cfg("train", ini());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("train_metric=1 "), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out/xor.ckpt"));
  const std::string metrics = read_file(dir_ / "out/xor.metrics.csv");
  EXPECT_EQ(metrics.rfind("iter,wall_ms,mode,", 0), 0u);
}

std::vector<std::string> first_column(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) out.push_back(line.substr(0, line.find(',')));
  return out;
}

TEST_F(XorCli, PairedRunsShareTheIterationGrid) {
  const auto r = run_cfg("train", ini(), {"train.mode=paired", "train.iterations=250",
                                          "train.eval_period=100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ebp = read_file(dir_ / "out/xor.metrics.ebp.csv");
  const auto bn = read_file(dir_ / "out/xor.metrics.bn.csv");
  EXPECT_EQ(first_column(ebp), first_column(bn));
  EXPECT_EQ(first_column(ebp),
            (std::vector<std::string>{"iter", "0", "100", "200", "250"}));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out/xor.ebp.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out/xor.bn.ckpt"));
}

TEST_F(XorCli, EvalReportsGapAndIsDeterministic) {
  ASSERT_EQ(run_cfg("train", ini(), {"train.iterations=300"}).code, 0);
  const auto a = run_cfg("eval", ini(), {"eval.decision=sampled", "eval.decision_samples=50"});
  const auto b = run_cfg("eval", ini(), {"eval.decision=sampled", "eval.decision_samples=50"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  std::map<std::string, double> v;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    v[line.substr(0, eq)] = std::stod(line.substr(eq + 1));
  }
  EXPECT_DOUBLE_EQ(v.at("gap"), v.at("train_metric") - v.at("test_metric"));
}

TEST_F(XorCli, InvalidKeyExitsTwoNamingTheKey) {
  const auto r = run_cfg("train", ini(), {"train.stepsize=0.1"});
  EXPECT_EQ(r.code, cli::kConfigError);
  EXPECT_NE(r.err.find("train.stepsize"), std::string::npos) << r.err;
}

TEST_F(XorCli, CorruptCheckpointExitsThree) {
  write_file(dir_ / "bad.ckpt", "NOT A CHECKPOINT\n");
  const auto r = run_cfg("eval", ini(), {"network.checkpoint=bad.ckpt"});
  EXPECT_EQ(r.code, cli::kDataError) << r.err;
  const auto missing = run_cfg("eval", ini(), {"network.checkpoint=none.ckpt"});
  EXPECT_NE(missing.code, 0);
}

TEST_F(XorCli, BadDataExitsThree) {
  write_file(dir_ / "xor.csv", "0,0,0\n0,1\n");
  EXPECT_EQ(run_cfg("train", ini()).code, cli::kDataError);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({"frobnicate", "--config", "x.ini"}).code, cli::kConfigError);
  EXPECT_EQ(run_cli({"train"}).code, cli::kConfigError);
  EXPECT_EQ(run_cli({"train", "--config", "/nonexistent/x.ini"}).code, cli::kConfigError);
}

TEST(Cli, TaggedPath) {
  EXPECT_EQ(cli::tagged_path("dir/model.ckpt", "bn"), "dir/model.bn.ckpt");
}

TEST(Cli, OracleSuitePasses) {
  TempDir dir("oracle");
  write_file(dir / "o.ini",
             "[oracle]\nnets = 2\nsamples = 20000\njensen_nets = 10\n"
             "gibbs_burn_in = 200\ngibbs_sweeps = 20000\ngibbs_thinning = 1\n");
  const auto r = run_cfg("oracle", dir / "o.ini");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, OracleRefusesOversizedNet) {
  TempDir dir("oracle_big");
  write_file(dir / "o.ini",
             "[network]\ninput = 4\nlayer1 = sigmoid 16 dense 0\nlayer2 = sigmoid 8 dense 1\n"
             "[oracle]\nuse_network = true\n");
  const auto r = run_cfg("oracle", dir / "o.ini");
  EXPECT_EQ(r.code, cli::kConfigError);
  EXPECT_NE(r.err.find("state space"), std::string::npos) << r.err;
}

NetworkSpec grid_spec(int n) {
  NetworkSpec spec;
  parse_input(std::to_string(n) + "x" + std::to_string(n) + "x3", spec);
  const std::string g = std::to_string(n) + "x" + std::to_string(n);
  spec.layers.push_back(parse_layer("sigmoid " + g + " local 1 1 image"));
  spec.layers.push_back(parse_layer("sigmoid " + g + " local 1 1"));
  return spec;
}

class SegmentCli : public ::testing::Test {
 protected:
  void SetUp() override {
    save_checkpoint(Network(grid_spec(4)), dir_ / "zero.ckpt");
    save_checkpoint(Network::with_uniform_init(grid_spec(4), 1.0, 3), dir_ / "rand.ckpt");
    RgbImage img(4, 4);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = (i % 7) / 6.0;
    write_ppm(img, dir_ / "img.ppm");
    write_file(dir_ / "seg.ini",
               "[network]\ncheckpoint = zero.ckpt\n"
               "[segment]\nimage = img.ppm\noutput_dir = out\nsamples = 200\n"
               "burn_in = 20\nsweeps = 100\n");
  }
  TempDir dir_{"segment"};
};

TEST_F(SegmentCli, ZeroWeightModelIsUniformGray) {
  const auto r = run_cfg("segment", dir_ / "seg.ini");
  ASSERT_EQ(r.code, 0) << r.err;
  const GrayImage m = read_pgm(dir_ / "out/marginals.pgm");
  EXPECT_EQ(m.rows, 4);
  for (std::uint8_t v : m.data) EXPECT_TRUE(v == 127 || v == 128) << int(v);
}

TEST_F(SegmentCli, FullScribbleDecidesTheScribble) {
  GrayImage s(4, 4);
  for (std::size_t i = 0; i < 16; ++i) s.data[i] = i % 3 == 0 ? 255 : 0;
  write_pgm(s, dir_ / "s.pgm");
  const auto r = run_cfg("segment", dir_ / "seg.ini",
                         {"network.checkpoint=rand.ckpt", "segment.scribbles=s.pgm"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_pgm(dir_ / "out/decision.pgm"), s);
  EXPECT_NE(r.out.find("method=gibbs"), std::string::npos);
}

TEST_F(SegmentCli, BadScribbleValueExitsThree) {
  GrayImage s(4, 4, 128);
  s.data[3] = 17;
  write_pgm(s, dir_ / "s.pgm");
  EXPECT_EQ(run_cfg("segment", dir_ / "seg.ini", {"segment.scribbles=s.pgm"}).code,
            cli::kDataError);
}

TEST_F(SegmentCli, NoiseSweepEmitsOneFilePerLevel) {
  const auto r = run_cfg("segment", dir_ / "seg.ini",
                         {"segment.image=", "segment.noise_sigmas=0,0.1,0.3",
                          "segment.blur_radii=1", "data.kind=blobs", "data.blob_count=3",
                          "data.blob_rows=4", "data.blob_cols=4", "eval.decision=sampled",
                          "eval.decision_samples=20"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"marginals_noise_0.pgm", "marginals_noise_0.1.pgm",
                        "marginals_noise_0.3.pgm", "marginals_blur_1.pgm", "sweep.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir_ / "out" / f)) << f;
  }
}

int free_port() {
  const int fd = socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof(addr);
  if (bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    close(fd);
    return 0;
  }
  close(fd);
  return ntohs(addr.sin_port);
}

TEST_F(SegmentCli, ServeBindFailureExitsFour) {
  httplib::Server blocker;
  blocker.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  const int port = blocker.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  EXPECT_EQ(run_cfg("serve", dir_ / "seg.ini", {"serve.port=" + std::to_string(port)}).code,
            cli::kEnvironmentError);
  EXPECT_EQ(run_cfg("serve", dir_ / "seg.ini", {"serve.port=80000"}).code,
            cli::kEnvironmentError);
}

TEST_F(SegmentCli, ServeAnswersHealthAndStopsOnInterrupt) {
  const int port = free_port();
  ASSERT_GT(port, 0);
  const std::string exe = STOCHNET_CLI_PATH;
  const std::string cfg = (dir_ / "seg.ini").string();
  const std::string set = "serve.port=" + std::to_string(port);
  std::vector<char*> argv{const_cast<char*>(exe.c_str()), const_cast<char*>("serve"),
                          const_cast<char*>("--config"), const_cast<char*>(cfg.c_str()),
                          const_cast<char*>("--set"), const_cast<char*>(set.c_str()), nullptr};
  pid_t pid = 0;
  ASSERT_EQ(posix_spawn(&pid, exe.c_str(), nullptr, nullptr, argv.data(), environ), 0);

  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(1);
  client.set_read_timeout(5);
  httplib::Result res;
  for (int i = 0; i < 100 && !res; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    res = client.Get("/health");
  }
  ASSERT_TRUE(res) << "server did not come up";
  EXPECT_EQ(res->status, 200);
  EXPECT_NE(res->body.find("\"status\":\"ok\""), std::string::npos) << res->body;

  kill(pid, SIGINT);
  int status = 0;
  ASSERT_EQ(waitpid(pid, &status, 0), pid);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}

}  // namespace
}  // namespace stochnet
