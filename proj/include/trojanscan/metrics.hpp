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

#ifndef TROJANSCAN_METRICS_HPP_
#define TROJANSCAN_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "trojanscan/error.hpp"

namespace trojanscan {

inline constexpr double kProbabilityClamp = 1e-12;

// Binary cross-entropy of probability p against label y (0 or 1); p is
// clamped to [1e-12, 1 - 1e-12] first.
inline double ce_loss(int label, double p) {
  if (label != 0 && label != 1) throw InvalidParameter("label must be 0 or 1");
  const double q = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return label == 1 ? -std::log(q) : -std::log(1.0 - q);
}

inline double mean_ce_loss(std::span<const int> labels, std::span<const double> probs) {
  if (labels.size() != probs.size()) throw InvalidParameter("labels/probabilities length mismatch");
  if (labels.empty()) throw MetricError("cross-entropy over an empty set");
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) sum += ce_loss(labels[i], probs[i]);
  return sum / static_cast<double>(labels.size());
}

// Probability that a random positive scores above a random negative, ties
// counting one half. Computed from midranks: with twice-ranks kept integral,
// (2*R_pos - n_pos*(n_pos+1)) / (2*n_pos*n_neg).
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidParameter("scores/labels length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  long long twice_rank_pos = 0;
  long long n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1..j share the midrank (i+1+j)/2; twice that is i+1+j.
    const auto twice_mid = static_cast<long long>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      const int y = labels[order[k]];
      if (y != 0 && y != 1) throw InvalidParameter("label must be 0 or 1");
      if (y == 1) {
        twice_rank_pos += twice_mid;
        ++n_pos;
      }
    }
    i = j;
  }
  const long long n_neg = static_cast<long long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw MetricError("ROC-AUC needs both positive and negative labels");
  const long long numerator = twice_rank_pos - n_pos * (n_pos + 1);
  return static_cast<double>(numerator) / static_cast<double>(2 * n_pos * n_neg);
}

struct ConfidenceInterval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double half_width = 0.0;
};

// Percentile bootstrap of the mean CE loss. Rows are put in a canonical
// order before resampling so the interval does not depend on row order.
inline ConfidenceInterval bootstrap_ce_ci(std::span<const int> labels,
                                          std::span<const double> probs,
                                          std::size_t resamples = 1000, double level = 0.95,
                                          std::uint64_t seed = 0) {
  if (labels.size() != probs.size()) throw InvalidParameter("labels/probabilities length mismatch");
  if (labels.empty()) throw MetricError("bootstrap over an empty set");
  if (resamples < 1 || !(level > 0.0 && level < 1.0)) {
    throw InvalidParameter("bootstrap needs resamples >= 1 and level in (0,1)");
  }
  std::vector<std::pair<int, double>> rows(labels.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = {labels[i], probs[i]};
  std::sort(rows.begin(), rows.end());
  std::vector<double> losses(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) losses[i] = ce_loss(rows[i].first, rows[i].second);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
  std::vector<double> means(resamples);
  for (double &m : means) {
    double sum = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) sum += losses[pick(rng)];
    m = sum / static_cast<double>(rows.size());
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  const auto lo = static_cast<std::size_t>(std::floor(alpha * resamples));
  const auto hi_rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * resamples));
  const std::size_t hi = std::min(resamples - 1, hi_rank == 0 ? 0 : hi_rank - 1);

  ConfidenceInterval ci;
  ci.mean = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
  ci.lower = means[lo];
  ci.upper = means[hi];
  ci.half_width = (ci.upper - ci.lower) / 2.0;
  return ci;
}

}  // namespace trojanscan

#endif  // TROJANSCAN_METRICS_HPP_
