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

#include <random>

#include "test_util.hpp"

namespace trojanscan {
namespace {

using testing::mosaic_examples;

enum class QueryKind { kFiltered, kPatched };

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(71);
    raw_ = mosaic_examples(rng, 5, 3);
    examples_ = to_example_set(raw_);
    for (const auto &ex : raw_) {
      for (FilterType f : kAllFilters) filtered_.push_back(apply_filter(ex.image, f));
    }
  }

  SyntheticOracle make(std::optional<PoisonRule> rule) const {
    SyntheticOracleSpec spec = testing::clean_spec(raw_, 5);
    spec.poison = std::move(rule);
    return SyntheticOracle(std::move(spec));
  }

  QueryKind kind_of(const Image &image) const {
    for (const Image &f : filtered_) {
      if (f == image) return QueryKind::kFiltered;
    }
    return QueryKind::kPatched;
  }

  static PoisonRule square_rule() {
    PoisonRule rule;
    rule.target_class = 2;
    rule.trigger = SquarePoison{0.05, true, {}, 0, std::nullopt};
    return rule;
  }
  static PoisonRule filter_rule() {
    PoisonRule rule;
    rule.target_class = 0;
    rule.trigger = FilterPoison{FilterType::kNashville, {}};
    return rule;
  }

  std::vector<LabeledExample> raw_;
  ExampleSet examples_;
  std::vector<Image> filtered_;
};

TEST_F(PipelineTest, PolygonDecisionSkipsFilterStage) {
  SyntheticOracle oracle = make(square_rule());
  std::size_t filtered = 0;
  CountingOracle counting(oracle, [&](const Image &im) {
    if (kind_of(im) == QueryKind::kFiltered) ++filtered;
  });
  const Verdict v = scan_model(counting, examples_, ScanConfig{});
  EXPECT_EQ(v.decided_by, DecidedBy::kPolygon);
  EXPECT_EQ(v.trigger_type(), "polygon-or-filter");
  EXPECT_EQ(v.poison_probability, 0.9);
  EXPECT_FALSE(v.filter.has_value());
  EXPECT_EQ(filtered, 0u);
  EXPECT_EQ(v.total_queries, v.polygon->queries_used);
  EXPECT_EQ(counting.count(), v.total_queries);
}

TEST_F(PipelineTest, FilterPoisonFallsThroughToFilterStage) {
  SyntheticOracle oracle = make(filter_rule());
  std::vector<QueryKind> order;
  CountingOracle counting(oracle, [&](const Image &im) { order.push_back(kind_of(im)); });
  const Verdict v = scan_model(counting, examples_, ScanConfig{});
  EXPECT_EQ(v.decided_by, DecidedBy::kFilter);
  EXPECT_EQ(v.trigger_type(), "filter");
  ASSERT_TRUE(v.polygon.has_value());
  ASSERT_TRUE(v.filter.has_value());
  EXPECT_FALSE(v.polygon->triggered);
  EXPECT_TRUE(v.filter->triggered);
  EXPECT_EQ(v.poison_probability, 0.9);
  EXPECT_EQ(v.total_queries, v.polygon->queries_used + v.filter->queries_used);
  EXPECT_EQ(counting.count(), v.total_queries);
  // Every patched query precedes every filtered one.
  const auto first_filtered = std::find(order.begin(), order.end(), QueryKind::kFiltered);
  EXPECT_EQ(static_cast<std::size_t>(first_filtered - order.begin()), v.polygon->queries_used);
  EXPECT_EQ(std::count(first_filtered, order.end(), QueryKind::kPatched), 0);
}

TEST_F(PipelineTest, CleanOracleIsNone) {
  SyntheticOracle oracle = make(std::nullopt);
  const Verdict v = scan_model(oracle, examples_, ScanConfig{});
  EXPECT_EQ(v.decided_by, DecidedBy::kNone);
  EXPECT_EQ(v.trigger_type(), "none");
  EXPECT_EQ(v.poison_probability, 0.1);
  EXPECT_GE(v.wall_time, 0.0);
}

TEST_F(PipelineTest, StageToggles) {
  SyntheticOracle oracle = make(filter_rule());
  ScanConfig polygon_only;
  polygon_only.stages = StageSelection::kPolygon;
  std::size_t filtered = 0;
  CountingOracle a(oracle, [&](const Image &im) {
    if (kind_of(im) == QueryKind::kFiltered) ++filtered;
  });
  const Verdict pv = scan_model(a, examples_, polygon_only);
  EXPECT_EQ(filtered, 0u);
  EXPECT_FALSE(pv.filter.has_value());
  EXPECT_EQ(pv.poison_probability, pv.polygon->probability);

  ScanConfig filter_only;
  filter_only.stages = StageSelection::kFilter;
  std::size_t patched = 0;
  CountingOracle b(oracle, [&](const Image &im) {
    if (kind_of(im) == QueryKind::kPatched) ++patched;
  });
  const Verdict fv = scan_model(b, examples_, filter_only);
  EXPECT_EQ(patched, 0u);
  EXPECT_FALSE(fv.polygon.has_value());
  EXPECT_EQ(fv.decided_by, DecidedBy::kFilter);
}

TEST_F(PipelineTest, ClassRangeEnforced) {
  std::mt19937_64 rng(72);
  auto few = mosaic_examples(rng, 3, 1);
  SyntheticOracle oracle(testing::clean_spec(few, 3));
  EXPECT_THROW(scan_model(oracle, to_example_set(few), ScanConfig{}), InvalidParameter);
}

TEST_F(PipelineTest, FailureCarriesPartialVerdict) {
  SyntheticOracle inner = make(std::nullopt);
  testing::FunctionOracle oracle(5, [&](const Image &im, std::size_t call) -> Logits {
    if (call == 30) throw OracleError("lost");
    return inner.query(im);
  });
  try {
    scan_model(oracle, examples_, ScanConfig{});
    FAIL() << "expected ScanError";
  } catch (const ScanError &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOracle);
    ASSERT_TRUE(e.partial().polygon.has_value());
    EXPECT_EQ(e.partial().total_queries, 30u);
  }
}

TEST(PrepareExamples, ResizesAndValidates) {
  testing::TempDir dir;
  write_png(dir / "class_0_example_0.png", Image(256, 256, 0.4));
  write_png(dir / "class_1_example_0.png", Image(100, 300, 1.0));
  const ExampleSet set = prepare_examples(dir.path(), {224, 224}, 5);
  ASSERT_EQ(set.size(), 2u);
  const Image &a = set.at(0).front();
  EXPECT_EQ(a.dims(), (Dims{224, 224}));
  for (double v : a.values()) ASSERT_EQ(v, from_byte(to_byte(0.4)));
  write_png(dir / "class_7_example_0.png", Image(8, 8));
  EXPECT_THROW(prepare_examples(dir.path(), {224, 224}, 5), InvalidParameter);
}

TEST(PrepareExamples, UnreadableImageNamesFile) {
  testing::TempDir dir;
  write_text(dir / "class_0_example_3.png", "not a png");
  try {
    prepare_examples(dir.path(), {224, 224}, 5);
    FAIL() << "expected IoError";
  } catch (const IoError &e) {
    EXPECT_NE(std::string(e.what()).find("class_0_example_3.png"), std::string::npos);
  }
}

TEST(ExampleFiles, ParsesNames) {
  EXPECT_EQ(parse_example_filename("class_12_example_3.png")->label, 12u);
  EXPECT_EQ(parse_example_filename("class_12_example_3.png")->index, 3u);
  EXPECT_FALSE(parse_example_filename("class_x_example_3.png"));
  EXPECT_FALSE(parse_example_filename("class_1_example_3.jpg"));
  EXPECT_FALSE(parse_example_filename("class_1_example_.png"));
}

TEST(ConfigJson, RoundTripsEffectiveConfig) {
  ScanConfig c;
  c.polygon.max_rounds = 6;
  c.polygon.locations = std::vector<Point>{{3, 4}};
  c.filter.max_count = 4;
  c.filter.candidates = {FilterType::kLomo};
  c.stages = StageSelection::kPolygon;
  const auto j = to_json(c);
  ScanConfig back;
  apply_config_json(j, back);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.polygon.max_rounds, 6u);
  EXPECT_EQ(back.filter.candidates, std::vector<FilterType>{FilterType::kLomo});
}

TEST(ConfigJson, GridShorthandAndErrors) {
  ScanConfig c;
  apply_config_json(nlohmann::json::parse(
                        R"({"polygon":{"size_step":0.08},"filter":{"max_count":"auto"},
                            "threshold_space":"raw"})"),
                    c);
  EXPECT_EQ(c.polygon.size_grid.size(), 3u);
  EXPECT_EQ(c.polygon.threshold_space, ThresholdSpace::kRaw);
  EXPECT_FALSE(c.filter.max_count.has_value());
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"polgon":{}})"), c), ConfigError);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"polygon":{"threshold":"hi"}})"), c),
               ConfigError);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"stage":"all"})"), c), ConfigError);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"filter":{"candidates":["Sepia"]}})"), c),
               ConfigError);
}

TEST(VerdictJson, TimingIsIsolated) {
  Verdict v;
  v.wall_time = 1.5;
  EXPECT_TRUE(to_json(v).contains("timing"));
  EXPECT_FALSE(to_json(v, false).contains("timing"));
  EXPECT_EQ(to_json(v, false).dump().find("1.5"), std::string::npos);
}

}  // namespace
}  // namespace trojanscan
