// Copyright 2026 The TrojanScan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include "test_util.hpp"

namespace trojanscan {
namespace {

using testing::run_command;
using testing::shell_quote;

std::string cli() { return shell_quote(TROJANSCAN_CLI); }

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run_command(cli() + " --help").exit_code, 0);
  EXPECT_EQ(run_command(cli() + " scan --help").exit_code, 0);
  EXPECT_EQ(run_command(cli()).exit_code, 2);
  EXPECT_EQ(run_command(cli() + " evaluate /tmp --bogus").exit_code, 2);
  EXPECT_EQ(run_command(cli() + " scan --oracle exec:true").exit_code, 2);
}

TEST(Cli, RuntimeErrorsExitThree) {
  testing::TempDir dir;
  const auto r = run_command(cli() + " evaluate " + shell_quote(dir.path().string()));
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.output.find("manifest"), std::string::npos);
}

TEST(Cli, SynthBenchThenEvaluate) {
  testing::TempDir dir;
  const std::string root = shell_quote((dir / "bench").string());
  auto r = run_command(cli() + " synth-bench --out " + root +
                       " --poisoned 2 --clean 2 --seed 5");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  r = run_command(cli() + " evaluate " + root + " --jobs 2 --stage polygon --seed 3");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("models scored 4"), std::string::npos) << r.output;
  const std::string csv = testing::read_file(dir / "bench" / "report.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  const auto doc = nlohmann::json::parse(testing::read_file(dir / "bench" / "report.json"));
  EXPECT_EQ(doc["config"]["stage"], "polygon");
  EXPECT_EQ(doc["config"]["polygon"]["seed"], 3);
}

TEST(Cli, ScanPoisonedExecBridgeExitsOne) {
  testing::TempDir dir;
  BenchOptions o;
  o.poisoned = 1;
  o.clean = 0;
  o.filter_share = 1.0;
  const Manifest m = write_synthetic_benchmark(dir / "bench", o);
  const std::string oracle = "exec:" + std::string(FAKE_BRIDGE) + " synthetic " + m.models[0].oracle.spec;
  const auto r = run_command(cli() + " scan --oracle " + shell_quote(oracle) + " --examples " +
                             shell_quote(m.models[0].examples_dir.string()) + " --stage filter --out " +
                             shell_quote((dir / "out").string()));
  ASSERT_EQ(r.exit_code, 1) << r.output;
  EXPECT_NE(r.output.find("decided_by=filter"), std::string::npos) << r.output;
  const auto doc = nlohmann::json::parse(testing::read_file(dir / "out" / "verdict.json"));
  EXPECT_EQ(doc["verdict"]["decided_by"], "filter");
  EXPECT_EQ(doc["oracle"], oracle);
}

TEST(Cli, ScanCleanSyntheticExitsZero) {
  testing::TempDir dir;
  BenchOptions o;
  o.poisoned = 0;
  o.clean = 1;
  const Manifest m = write_synthetic_benchmark(dir / "bench", o);
  const auto r = run_command(cli() + " scan --oracle " +
                             shell_quote("synthetic:" + m.models[0].oracle.spec) + " --examples " +
                             shell_quote(m.models[0].examples_dir.string()) + " --stage filter --out " +
                             shell_quote((dir / "out").string()));
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output.substr(0, 5), "CLEAN");
}

TEST(Cli, NoTimingOutputIsReproducible) {
  testing::TempDir dir;
  const std::string root = shell_quote((dir / "bench").string());
  ASSERT_EQ(run_command(cli() + " synth-bench --out " + root + " --poisoned 1 --clean 1").exit_code,
            0);
  std::string first;
  for (int run = 0; run < 2; ++run) {
    const std::string out = shell_quote((dir / ("run" + std::to_string(run))).string());
    const auto r = run_command(cli() + " evaluate " + root + " --no-timing --stage polygon --out " + out);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const std::string json = testing::read_file(dir / ("run" + std::to_string(run)) / "report.json");
    EXPECT_EQ(json.find("wall_time"), std::string::npos);
    if (run == 0) {
      first = json;
    } else {
      EXPECT_EQ(json, first);
    }
  }
}

TEST(Cli, ConfigFileAndSweep) {
  testing::TempDir dir;
  const std::string root = shell_quote((dir / "bench").string());
  ASSERT_EQ(run_command(cli() + " synth-bench --out " + root + " --poisoned 0 --clean 1").exit_code,
            0);
  write_text(dir / "cfg.json", R"({"polygon": {"max_rounds": 1}, "stage": "polygon"})");
  const auto r = run_command(cli() + " sweep " + root + " --grid location_count=1,2 --config " +
                             shell_quote((dir / "cfg.json").string()));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string csv = testing::read_file(dir / "bench" / "sweep" / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  // 1 round x 5 classes x 4 examples x 12 sizes x locations.
  EXPECT_NE(csv.find("location_count,1,,"), std::string::npos) << csv;
  EXPECT_NE(csv.find(",240,1,0"), std::string::npos) << csv;
  EXPECT_NE(csv.find(",480,1,0"), std::string::npos) << csv;
  EXPECT_EQ(run_command(cli() + " sweep " + root + " --grid rounds=1").exit_code, 3);
}

TEST(Cli, FiltersGoldenMatchesCorpusAndRefusesOverwrite) {
  testing::TempDir dir;
  const std::string out = shell_quote(dir.path().string());
  ASSERT_EQ(run_command(cli() + " filters-golden --out " + out).exit_code, 0);
  for (FilterType f : kAllFilters) {
    for (const char *suffix : {"_in.png", "_out.png"}) {
      const std::string name = std::string(to_string(f)) + suffix;
      EXPECT_EQ(read_png(dir / name), read_png(std::filesystem::path(TROJANSCAN_GOLDEN_DIR) / name))
          << name;
    }
  }
  EXPECT_EQ(run_command(cli() + " filters-golden --out " + out).exit_code, 3);
  EXPECT_EQ(run_command(cli() + " filters-golden --force --out " + out).exit_code, 0);
}

}  // namespace
}  // namespace trojanscan
