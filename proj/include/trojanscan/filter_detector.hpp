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

// Feature-space stage: every clean example is passed through every candidate
// filter. Per class, confident predictions that leave the example's class are
// counted across all filters; reaching max_count flags the model. No
// randomness is involved.

#ifndef TROJANSCAN_FILTER_DETECTOR_HPP_
#define TROJANSCAN_FILTER_DETECTOR_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "trojanscan/error.hpp"
#include "trojanscan/examples_io.hpp"
#include "trojanscan/filters.hpp"
#include "trojanscan/oracle.hpp"
#include "trojanscan/polygon_detector.hpp"
#include "trojanscan/stage_result.hpp"

namespace trojanscan {

struct FilterConfig {
  double threshold = 0.99;
  // Unset: max(3, ceil(examples_in_class / 2)), evaluated per class.
  std::optional<std::size_t> max_count;
  std::vector<FilterType> candidates = list_filters();
  double p_high = 0.9;
  double p_low = 0.1;
  ThresholdSpace threshold_space = ThresholdSpace::kSoftmax;

  void validate() const {
    if (threshold_space == ThresholdSpace::kSoftmax && !(threshold > 0.0 && threshold < 1.0)) {
      throw InvalidParameter("filter threshold must lie in (0,1)");
    }
    if (max_count && *max_count < 1) throw InvalidParameter("filter max_count must be positive");
    if (candidates.empty()) throw InvalidParameter("filter candidate list is empty");
    if (!(p_high > p_low) || p_low < 0.0 || p_high > 1.0) {
      throw InvalidParameter("filter probabilities need 0 <= p_low < p_high <= 1");
    }
  }

  std::size_t count_limit(std::size_t examples_in_class) const {
    if (max_count) return *max_count;
    return std::max<std::size_t>(3, (examples_in_class + 1) / 2);
  }
};

namespace detail {

inline std::optional<std::size_t> majority_target(const std::vector<Evidence> &evidence) {
  std::map<std::size_t, std::size_t> votes;
  for (const Evidence &e : evidence) ++votes[e.target_class];
  std::optional<std::size_t> best;
  std::size_t best_votes = 0;
  for (const auto &[target, n] : votes) {
    if (n > best_votes) {  // ties keep the lower class index
      best = target;
      best_votes = n;
    }
  }
  return best;
}

}  // namespace detail

template <QueryOracle O>
StageResult detect_filter(O &oracle, const ExampleSet &examples, const FilterConfig &config) {
  config.validate();
  if (examples.empty()) throw InvalidParameter("no clean examples given");
  const Dims dims = examples.begin()->second.front().dims();
  detail::check_examples(examples, oracle.class_count(), dims);

  StageResult result;
  result.stage = Stage::kFilter;
  result.probability = config.p_low;
  result.rounds_used = 1;
  std::vector<Evidence> hits;

  try {
    for (const auto &[label, images] : examples) {
      const std::size_t limit = config.count_limit(images.size());
      std::size_t counter = 0;
      hits.clear();
      std::vector<std::size_t> per_filter(config.candidates.size(), 0);
      auto flush_counts = [&] {
        for (std::size_t q = 0; q < config.candidates.size(); ++q) {
          if (per_filter[q] > 0) {
            result.filter_counts.push_back({label, config.candidates[q], per_filter[q]});
          }
        }
      };
      for (std::size_t e = 0; e < images.size(); ++e) {
        for (std::size_t q = 0; q < config.candidates.size(); ++q) {
          const FilterType filter = config.candidates[q];
          const Logits logits = oracle.query(apply_filter(images[e], filter));
          ++result.queries_used;
          const Prediction pred = predict(logits);
          if (top_score(logits, pred, config.threshold_space) < config.threshold) continue;
          if (pred.label == label) continue;
          ++counter;
          ++per_filter[q];
          ++result.counter_increments;
          result.max_counter = std::max(result.max_counter, counter);
          hits.push_back({label, pred.label, e, filter, pred.confidence});
          if (counter >= limit) {
            flush_counts();
            result.triggered = true;
            result.probability = config.p_high;
            result.majority_target = detail::majority_target(hits);
            result.evidence = std::move(hits);
            return result;
          }
        }
      }
      flush_counts();
    }
  } catch (const StageError &) {
    throw;
  } catch (const Error &e) {
    StageResult partial = result;
    partial.evidence = hits;
    throw StageError(e, std::move(partial));
  }
  return result;
}

}  // namespace trojanscan

#endif  // TROJANSCAN_FILTER_DETECTOR_HPP_
