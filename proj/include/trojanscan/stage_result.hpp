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

#ifndef TROJANSCAN_STAGE_RESULT_HPP_
#define TROJANSCAN_STAGE_RESULT_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "trojanscan/error.hpp"
#include "trojanscan/filters.hpp"
#include "trojanscan/trigger.hpp"

namespace trojanscan {

enum class Stage { kPolygon, kFilter };

inline const char *to_string(Stage stage) {
  return stage == Stage::kPolygon ? "polygon" : "filter";
}

// One counted flip: an example of `source_class` predicted as `target_class`
// above threshold once the trigger was applied.
struct Evidence {
  std::size_t source_class = 0;
  std::size_t target_class = 0;
  std::size_t example_index = 0;
  std::variant<TriggerSpec, FilterType> trigger;
  double confidence = 0.0;

  friend bool operator==(const Evidence &, const Evidence &) = default;
};

struct FilterCount {
  std::size_t source_class = 0;
  FilterType filter = FilterType::kGotham;
  std::size_t hits = 0;

  friend bool operator==(const FilterCount &, const FilterCount &) = default;
};

// Outcome of one detection stage. triggered <=> probability == p_high, and
// evidence is non-empty exactly when triggered.
struct StageResult {
  Stage stage = Stage::kPolygon;
  double probability = 0.0;
  bool triggered = false;
  std::vector<Evidence> evidence;
  std::size_t queries_used = 0;
  std::size_t rounds_used = 0;
  // Diagnostics: every increment of the flip counter over the whole stage,
  // and the largest value the counter reached.
  std::size_t counter_increments = 0;
  std::size_t max_counter = 0;
  // Filter stage: most frequent target among the evidence, and flip counts
  // per (class, filter) for every class scanned.
  std::optional<std::size_t> majority_target;
  std::vector<FilterCount> filter_counts;

  friend bool operator==(const StageResult &, const StageResult &) = default;
};

// Raised when a stage is interrupted; carries what was gathered so far.
class StageError : public Error {
 public:
  StageError(const Error &cause, StageResult partial)
      : Error(cause.kind(), cause.message()), partial_(std::move(partial)) {}

  const StageResult &partial() const { return partial_; }

 private:
  StageResult partial_;
};

}  // namespace trojanscan

#endif  // TROJANSCAN_STAGE_RESULT_HPP_
