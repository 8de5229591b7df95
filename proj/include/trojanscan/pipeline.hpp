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

// Two-stage scan of one model. The polygon stage runs first; the filter stage
// only runs when the polygon stage finds nothing. Filter-trojaned models can
// also react to pasted patches, while patch-trojaned models do not react to
// filters, so a polygon hit is reported as "polygon-or-filter".

#ifndef TROJANSCAN_PIPELINE_HPP_
#define TROJANSCAN_PIPELINE_HPP_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trojanscan/error.hpp"
#include "trojanscan/examples_io.hpp"
#include "trojanscan/filter_detector.hpp"
#include "trojanscan/image.hpp"
#include "trojanscan/oracle.hpp"
#include "trojanscan/polygon_detector.hpp"
#include "trojanscan/stage_result.hpp"

namespace trojanscan {

enum class StageSelection { kBoth, kPolygon, kFilter };

inline const char *to_string(StageSelection s) {
  switch (s) {
    case StageSelection::kBoth: return "both";
    case StageSelection::kPolygon: return "polygon";
    case StageSelection::kFilter: return "filter";
  }
  return "?";
}

struct ScanConfig {
  PolygonConfig polygon;
  FilterConfig filter;
  Dims input_dims = kDefaultInputDims;
  StageSelection stages = StageSelection::kBoth;
  std::size_t min_classes = 5;
  std::size_t max_classes = 25;

  bool polygon_enabled() const { return stages != StageSelection::kFilter; }
  bool filter_enabled() const { return stages != StageSelection::kPolygon; }

  void validate() const {
    if (polygon_enabled()) polygon.validate();
    if (filter_enabled()) filter.validate();
    if (input_dims.height < 1 || input_dims.width < 1) {
      throw InvalidParameter("input dims must be at least 1x1");
    }
    if (min_classes < 2 || min_classes > max_classes) {
      throw InvalidParameter("class range needs 2 <= min_classes <= max_classes");
    }
  }
};

enum class DecidedBy { kNone, kPolygon, kFilter };

inline const char *to_string(DecidedBy d) {
  switch (d) {
    case DecidedBy::kNone: return "none";
    case DecidedBy::kPolygon: return "polygon";
    case DecidedBy::kFilter: return "filter";
  }
  return "?";
}

struct Verdict {
  double poison_probability = 0.0;
  DecidedBy decided_by = DecidedBy::kNone;
  std::optional<StageResult> polygon;
  std::optional<StageResult> filter;
  std::string model_descriptor;
  double wall_time = 0.0;  // seconds
  std::size_t total_queries = 0;

  // Trigger family implied by the decision.
  std::string trigger_type() const {
    switch (decided_by) {
      case DecidedBy::kPolygon: return "polygon-or-filter";
      case DecidedBy::kFilter: return "filter";
      case DecidedBy::kNone: return "none";
    }
    return "none";
  }
};

class ScanError : public Error {
 public:
  ScanError(const Error &cause, Verdict partial)
      : Error(cause.kind(), cause.message()), partial_(std::move(partial)) {}

  const Verdict &partial() const { return partial_; }

 private:
  Verdict partial_;
};

// Resizes every example to `dims` and checks labels against the class count.
inline ExampleSet prepare_examples(const std::vector<LabeledExample> &raw, Dims dims,
                                   std::size_t class_count) {
  if (raw.empty()) throw InvalidParameter("no examples to prepare");
  ExampleSet out;
  for (const LabeledExample &ex : raw) {
    if (ex.label >= class_count) {
      throw InvalidParameter("example " + ex.id + " has class " + std::to_string(ex.label) +
                             " but the model has " + std::to_string(class_count) +
                             " classes");
    }
    out[ex.label].push_back(resize_bilinear(ex.image, dims));
  }
  return out;
}

inline ExampleSet prepare_examples(const std::filesystem::path &dir, Dims dims,
                                   std::size_t class_count) {
  return prepare_examples(load_examples(dir), dims, class_count);
}

template <QueryOracle O>
Verdict scan_model(O &oracle, const ExampleSet &examples, const ScanConfig &config) {
  config.validate();
  const std::size_t classes = oracle.class_count();
  if (classes < config.min_classes || classes > config.max_classes) {
    throw InvalidParameter("model has " + std::to_string(classes) + " classes, accepted " +
                           std::to_string(config.min_classes) + ".." +
                           std::to_string(config.max_classes));
  }
  detail::check_examples(examples, classes, config.input_dims);

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  Verdict verdict;
  verdict.model_descriptor = oracle.descriptor();
  auto finish = [&] {
    verdict.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  };

  try {
    if (config.polygon_enabled()) {
      verdict.polygon = detect_polygon(oracle, examples, config.polygon);
      verdict.total_queries += verdict.polygon->queries_used;
      verdict.poison_probability = verdict.polygon->probability;
      if (verdict.polygon->triggered) {
        verdict.decided_by = DecidedBy::kPolygon;
        finish();
        return verdict;
      }
    }
    if (config.filter_enabled()) {
      verdict.filter = detect_filter(oracle, examples, config.filter);
      verdict.total_queries += verdict.filter->queries_used;
      verdict.poison_probability = verdict.filter->probability;
      if (verdict.filter->triggered) verdict.decided_by = DecidedBy::kFilter;
    }
  } catch (const StageError &e) {
    if (e.partial().stage == Stage::kPolygon) {
      verdict.polygon = e.partial();
    } else {
      verdict.filter = e.partial();
    }
    verdict.total_queries += e.partial().queries_used;
    finish();
    throw ScanError(e, std::move(verdict));
  }
  finish();
  return verdict;
}

}  // namespace trojanscan

#endif  // TROJANSCAN_PIPELINE_HPP_
