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

using nlohmann::json;

BenchOptions small_bench(std::size_t poisoned, std::size_t clean) {
  BenchOptions o;
  o.poisoned = poisoned;
  o.clean = clean;
  o.dims = {32, 32};
  o.block = 4;
  return o;
}

void write_manifest(const testing::TempDir &dir, const json &doc) {
  write_text(dir / "manifest.json", doc.dump());
}

TEST(Manifest, LoadsGeneratedBenchmark) {
  testing::TempDir dir;
  const Manifest written = write_synthetic_benchmark(dir.path(), small_bench(1, 1));
  const Manifest m = load_manifest(dir.path());
  ASSERT_EQ(m.models.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(m.models[i].id, written.models[i].id);
    EXPECT_EQ(m.models[i].oracle.kind, "synthetic");
    EXPECT_EQ(m.models[i].oracle.class_count, 5u);
    EXPECT_TRUE(m.models[i].examples_dir.is_absolute());
    EXPECT_EQ(m.models[i].ground_truth, written.models[i].ground_truth);
  }
  EXPECT_EQ(to_json(m), to_json(written));
  // The manifest file itself is accepted too.
  EXPECT_EQ(load_manifest(dir / "manifest.json").models.size(), 2u);
}

class ManifestErrors : public ::testing::Test {
 protected:
  void SetUp() override {
    write_synthetic_benchmark(dir_.path(), small_bench(0, 1));
    doc_ = json::parse(testing::read_file(dir_ / "manifest.json"));
  }
  void expect_rejected(const std::string &needle) {
    write_manifest(dir_, doc_);
    try {
      load_manifest(dir_.path());
      FAIL() << "expected ConfigError mentioning " << needle;
    } catch (const ConfigError &e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  }
  json &model() { return doc_["models"][0]; }

  testing::TempDir dir_;
  json doc_;
};

TEST_F(ManifestErrors, DuplicateId) {
  doc_["models"].push_back(model());
  expect_rejected("duplicate id");
}

TEST_F(ManifestErrors, MissingField) {
  model().erase("ground_truth");
  expect_rejected("ground_truth");
}

TEST_F(ManifestErrors, BadEnums) {
  model()["ground_truth"] = "maybe";
  expect_rejected("ground_truth");
}

TEST_F(ManifestErrors, BadOracleKind) {
  model()["oracle"]["kind"] = "grpc";
  expect_rejected("kind");
}

TEST_F(ManifestErrors, MissingExamplesDir) {
  model()["examples_dir"] = "nowhere";
  expect_rejected("does not exist");
}

TEST_F(ManifestErrors, MissingSyntheticSpec) {
  model()["oracle"]["spec"] = "models/none.json";
  expect_rejected("models[0].oracle");
}

TEST_F(ManifestErrors, ExampleClassOutOfRange) {
  const std::filesystem::path examples = dir_.path() / model()["examples_dir"].get<std::string>();
  write_png(examples / "class_12_example_0.png", Image(32, 32));
  expect_rejected("class_12_example_0.png");
}

TEST_F(ManifestErrors, UncoveredClass) {
  const std::filesystem::path examples = dir_.path() / model()["examples_dir"].get<std::string>();
  for (int k = 0; k < 4; ++k) std::filesystem::remove(examples / ("class_4_example_" + std::to_string(k) + ".png"));
  expect_rejected("cover 4 of 5");
}

TEST_F(ManifestErrors, ClassCountDisagreesWithSpec) {
  model()["oracle"]["class_count"] = 7;
  expect_rejected("class_count");
}

TEST(Manifest, ExecEntriesKeepCommand) {
  testing::TempDir dir;
  const Manifest bench = write_synthetic_benchmark(dir.path(), small_bench(0, 1));
  json doc = to_json(bench);
  doc["models"][0]["oracle"] = {{"kind", "exec"}, {"spec", "python3 bridge.py --x"}};
  write_manifest(dir, doc);
  const Manifest m = load_manifest(dir.path());
  EXPECT_EQ(m.models[0].oracle.endpoint(), "exec:python3 bridge.py --x");
  EXPECT_FALSE(m.models[0].oracle.class_count.has_value());
}

TEST(Manifest, NotJson) {
  testing::TempDir dir;
  write_text(dir / "manifest.json", "{models: ");
  EXPECT_THROW(load_manifest(dir.path()), ConfigError);
  EXPECT_THROW(load_manifest(dir / "absent.json"), ConfigError);
}

}  // namespace
}  // namespace trojanscan
