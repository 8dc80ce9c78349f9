/*
 * Copyright (C) 2026 The eesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "eesim/config_io.hpp"
#include "eesim/sparse.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using eesim::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "eesim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = eesim::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Every regular file under a directory, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return files;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("eesim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    scenario = dir / "scenario.json";
    std::ofstream(scenario) << R"({
      "name": "unit",
      "synthetic_bundle": {"encoder": {"preset": "toy"}},
      "sentences": {"count": 4},
      "policies": [{"policy": "base"}, {"policy": "ee", "entropy_threshold": 0.2},
                   {"policy": "lai", "entropy_threshold": 0.2}],
      "sweep": {"tile_n": [4, 8, 16], "latency_target_ms": [0.25]},
      "predictor": {"train_sentences": 100, "hyper": {"epochs": 5}}
    })";
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path dir, scenario;
};

}  // namespace

TEST_F(CliTest, RunIsByteIdenticalAcrossRuns) {
  const auto a = cli({"--seed", "7", "--out", (dir / "a").string(), "run", scenario.string()});
  const auto b = cli({"--seed", "7", "--out", (dir / "b").string(), "run", scenario.string()});
  ASSERT_EQ(a.code, eesim::cli::kExitOk) << a.err;
  ASSERT_EQ(b.code, eesim::cli::kExitOk) << b.err;
  const auto ta = tree(dir / "a"), tb = tree(dir / "b");
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, tb);
  EXPECT_EQ(a.out, b.out);
  const auto c = cli({"--seed", "8", "--out", (dir / "c").string(), "run", scenario.string()});
  EXPECT_NE(tree(dir / "c").at("summary.json"), ta.at("summary.json"));
}

TEST_F(CliTest, SweepEmitsThreeRowsPerPolicy) {
  const auto r = cli({"run", scenario.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = json::parse(r.out);
  std::map<std::string, std::vector<std::size_t>> tiles;
  for (const auto& p : summary.at("points"))
    tiles[p.at("policy").at("policy").get<std::string>()].push_back(p.at("policy").at("tile_n").get<std::size_t>());
  ASSERT_EQ(tiles.size(), 3u);
  for (const auto& [policy, ns] : tiles) EXPECT_EQ(ns, (std::vector<std::size_t>{4, 8, 16})) << policy;
  EXPECT_TRUE(summary.at("hardware").at("energy_model").at("calibrated").get<bool>());
}

TEST_F(CliTest, CsvFormatHasOneRowPerSentenceAndPoint) {
  const auto r = cli({"--format", "csv", "run", scenario.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "sentence_id,policy,n,T_ms,E_T,exit_layer,predicted_layer,latency_ms,energy,deadline_met");
  std::size_t rows = 0;
  while (std::getline(in, line)) rows += !line.empty();
  EXPECT_EQ(rows, 9u * 4u);
}

TEST_F(CliTest, MissingBundleIsConfigError) {
  std::ofstream(dir / "bad.json") << R"({"bundle": "does/not/exist", "policies": [{"policy": "base"}]})";
  EXPECT_EQ(cli({"run", (dir / "bad.json").string()}).code, eesim::cli::kExitConfigError);
  EXPECT_EQ(cli({"run", (dir / "missing.json").string()}).code, eesim::cli::kExitConfigError);
  std::ofstream(dir / "typo.json") << R"({"synthetic_bundle": {}, "polices": []})";
  EXPECT_EQ(cli({"run", (dir / "typo.json").string()}).code, eesim::cli::kExitConfigError);
}

TEST_F(CliTest, FlopsOnShippedSpans) {
  const fs::path spans = fs::path(EESIM_SOURCE_DIR) / "configs/spans";
  const auto mnli = cli({"flops", (spans / "mnli.json").string()});
  ASSERT_EQ(mnli.code, 0) << mnli.err;
  EXPECT_NEAR(json::parse(mnli.out).at("ratio").get<double>(), 1.22, 0.03);
  const auto sst2 = cli({"flops", (spans / "sst2.json").string()});
  EXPECT_NEAR(json::parse(sst2.out).at("ratio").get<double>(), 1.18, 0.03);
  EXPECT_EQ(cli({"flops", (spans / "mnli.json").string()}).out, mnli.out);
}

TEST_F(CliTest, BundleTracesPredictorAndTrialsPipeline) {
  const auto bundle = (dir / "bundle").string();
  ASSERT_EQ(cli({"--seed", "3", "--out", bundle, "gen-bundle"}).code, 0);
  const auto traces = cli({"--seed", "3", "--out", (dir / "traces.json").string(), "gen-traces", bundle,
                           "--count", "120"});
  ASSERT_EQ(traces.code, 0) << traces.err;
  const auto again = cli({"--seed", "3", "gen-traces", bundle, "--count", "120"});
  EXPECT_EQ(slurp(dir / "traces.json"), again.out);

  std::ofstream(dir / "hyper.json") << R"({"epochs": 10})";
  const std::vector<std::string> train{"train-predictor", (dir / "traces.json").string(), "--threshold", "0.2",
                                       "--hyper", (dir / "hyper.json").string()};
  auto with_out = [&](const std::string& file) {
    std::vector<std::string> a{"--out", (dir / file).string()};
    a.insert(a.end(), train.begin(), train.end());
    return cli(a);
  };
  const auto t1 = with_out("lut1.json"), t2 = with_out("lut2.json");
  ASSERT_EQ(t1.code, 0) << t1.err;
  auto strip = [](const std::string& s) {  // reports echo their own output path
    auto j = json::parse(s);
    j.erase("lut");
    return j;
  };
  EXPECT_EQ(strip(t1.out), strip(t2.out));
  EXPECT_EQ(slurp(dir / "lut1.json"), slurp(dir / "lut2.json"));
  EXPECT_EQ(json::parse(slurp(dir / "lut1.json")).size(), 256u);

  const auto e1 = cli({"envm-trials", bundle, "--trials", "5"});
  const auto e2 = cli({"envm-trials", bundle, "--trials", "5"});
  ASSERT_EQ(e1.code, 0) << e1.err;
  EXPECT_EQ(e1.out, e2.out);
  const auto report = json::parse(e1.out);
  EXPECT_TRUE(report.at("power_on").at("calibrated").get<bool>());
}

TEST_F(CliTest, EnvmTrialsOnTensorFile) {
  std::mt19937_64 rng(1);
  const auto path = dir / "emb.bmt";
  eesim::write_bitmask_file(path, eesim::encode_bitmask(oracle::random_matrix(200, 16, rng, 0.4)));
  std::ofstream(dir / "cfg.json") << R"({"data_cells": "MLC3"})";
  const std::vector<std::string> args{"--seed", "4", "envm-trials", path.string(), "--trials", "20",
                                      "--config", (dir / "cfg.json").string()};
  const auto a = cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, cli(args).out);
  const auto r = json::parse(a.out);
  EXPECT_LE(r.at("trials").at("min_accuracy").get<double>(), r.at("trials").at("mean_accuracy").get<double>());
  EXPECT_EQ(cli({"envm-trials", (dir / "nope.bmt").string()}).code, eesim::cli::kExitConfigError);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_NE(cli({}).code, 0);
  EXPECT_NE(cli({"frobnicate"}).code, 0);
  EXPECT_NE(cli({"--format", "xml", "flops", "x.json"}).code, 0);
}
