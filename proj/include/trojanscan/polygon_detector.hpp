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

// Input-space stage: adaptive search for polygon triggers.
//
// Each round draws one random color and builds the candidate grid
// (locations x sizes). For every class, every candidate square is pasted on
// every clean example of that class and the model is queried. A confident
// prediction different from the example's class increments the class
// counter; the model is flagged as soon as a counter exceeds max_count.
// Counters restart for every class and every round.

#ifndef TROJANSCAN_POLYGON_DETECTOR_HPP_
#define TROJANSCAN_POLYGON_DETECTOR_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "trojanscan/error.hpp"
#include "trojanscan/examples_io.hpp"
#include "trojanscan/image.hpp"
#include "trojanscan/oracle.hpp"
#include "trojanscan/stage_result.hpp"
#include "trojanscan/trigger.hpp"

namespace trojanscan {

inline constexpr double kMaxTriggerArea = 0.25;

struct PolygonConfig {
  double threshold = 0.99;
  std::size_t max_count = 3;
  std::size_t max_rounds = 4;
  std::vector<double> size_grid = make_size_grid(0.02, 0.02, kMaxTriggerArea);
  // Explicit centers; when unset the first `location_count` quadrant centers
  // of the input are used.
  std::optional<std::vector<Point>> locations;
  std::size_t location_count = 4;
  double p_high = 0.9;
  double p_low = 0.1;
  std::uint64_t seed = 0;
  ThresholdSpace threshold_space = ThresholdSpace::kSoftmax;

  void validate() const {
    if (threshold_space == ThresholdSpace::kSoftmax && !(threshold > 0.0 && threshold < 1.0)) {
      throw InvalidParameter("polygon threshold must lie in (0,1)");
    }
    if (max_count < 1) throw InvalidParameter("polygon max_count must be positive");
    if (max_rounds < 1) throw InvalidParameter("polygon max_rounds must be positive");
    if (size_grid.empty()) throw InvalidParameter("polygon size grid is empty");
    for (double f : size_grid) {
      if (!(f > 0.0 && f <= kMaxTriggerArea)) {
        throw InvalidParameter("polygon size grid value outside (0, 0.25]");
      }
    }
    if (!locations && (location_count < 1 || location_count > 4)) {
      throw InvalidParameter("location_count must lie in [1,4]");
    }
    if (locations && locations->empty()) throw InvalidParameter("polygon locations empty");
    if (!(p_high > p_low) || p_low < 0.0 || p_high > 1.0) {
      throw InvalidParameter("polygon probabilities need 0 <= p_low < p_high <= 1");
    }
  }

  std::vector<Point> resolve_locations(Dims dims) const {
    if (locations) return *locations;
    std::vector<Point> centers = quadrant_centers(dims);
    centers.resize(location_count);
    return centers;
  }
};

namespace detail {

inline void check_examples(const ExampleSet &examples, std::size_t class_count, Dims dims) {
  if (examples.empty()) throw InvalidParameter("no clean examples given");
  for (const auto &[label, images] : examples) {
    if (label >= class_count) {
      throw InvalidParameter("example class " + std::to_string(label) +
                             " >= class count " + std::to_string(class_count));
    }
    if (images.empty()) {
      throw InvalidParameter("class " + std::to_string(label) + " has no examples");
    }
    for (const Image &image : images) {
      if (!(image.dims() == dims)) {
        throw InvalidParameter("example of class " + std::to_string(label) + " is " +
                               to_string(image.dims()) + ", oracle expects " +
                               to_string(dims));
      }
    }
  }
}

}  // namespace detail

template <QueryOracle O>
StageResult detect_polygon(O &oracle, const ExampleSet &examples, const PolygonConfig &config) {
  config.validate();
  if (examples.empty()) throw InvalidParameter("no clean examples given");
  const Dims dims = examples.begin()->second.front().dims();
  detail::check_examples(examples, oracle.class_count(), dims);

  const std::vector<Point> locations = config.resolve_locations(dims);
  std::vector<Mask> masks;  // candidate order: locations outer, sizes inner
  for (const Point &p : locations) {
    for (double f : config.size_grid) masks.push_back(make_square_mask(p, f, dims));
  }

  StageResult result;
  result.stage = Stage::kPolygon;
  result.probability = config.p_low;
  ColorSampler sampler(config.seed);
  std::vector<Evidence> hits;

  try {
    for (std::size_t round = 0; round < config.max_rounds; ++round) {
      result.rounds_used = round + 1;
      const Color color = sample_color(sampler);
      const std::vector<TriggerSpec> candidates =
          generate_candidates(dims, config.size_grid, locations, color);
      for (const auto &[label, images] : examples) {
        std::size_t counter = 0;
        hits.clear();
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          for (std::size_t e = 0; e < images.size(); ++e) {
            const Image attacked = embed_trigger(images[e], masks[c], color, 0.0);
            const Logits logits = oracle.query(attacked);
            ++result.queries_used;
            const Prediction pred = predict(logits);
            if (top_score(logits, pred, config.threshold_space) < config.threshold) continue;
            if (pred.label == label) continue;
            ++counter;
            ++result.counter_increments;
            result.max_counter = std::max(result.max_counter, counter);
            hits.push_back({label, pred.label, e, candidates[c], pred.confidence});
            if (counter > config.max_count) {
              result.triggered = true;
              result.probability = config.p_high;
              result.evidence = std::move(hits);
              return result;
            }
          }
        }
      }
    }
  } catch (const StageError &) {
    throw;
  } catch (const Error &e) {
    // Partial evidence: flips counted so far for the interrupted class.
    StageResult partial = result;
    partial.evidence = hits;
    throw StageError(e, std::move(partial));
  }
  return result;
}

}  // namespace trojanscan

#endif  // TROJANSCAN_POLYGON_DETECTOR_HPP_
