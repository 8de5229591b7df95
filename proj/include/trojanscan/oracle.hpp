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

// Query-only classifier handles. A ModelOracle maps an image to a logits
// vector and exposes nothing else about the model.

#ifndef TROJANSCAN_ORACLE_HPP_
#define TROJANSCAN_ORACLE_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trojanscan/error.hpp"
#include "trojanscan/image.hpp"

namespace trojanscan {

using Logits = std::vector<double>;

inline constexpr Dims kDefaultInputDims{224, 224};

struct Prediction {
  std::size_t label = 0;
  double confidence = 0.0;
};

// Numerically stable softmax.
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidParameter("empty logits");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (double &v : p) v /= sum;
  return p;
}

// Argmax (lowest index wins ties) with its softmax probability.
inline Prediction predict(std::span<const double> logits) {
  if (logits.empty()) throw InvalidParameter("empty logits");
  std::size_t label = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[label]) label = i;
  }
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - logits[label]);
  return {label, 1.0 / sum};
}

// Which value the detection thresholds are compared against.
enum class ThresholdSpace { kSoftmax, kRaw };

inline const char *to_string(ThresholdSpace space) {
  return space == ThresholdSpace::kSoftmax ? "softmax" : "raw";
}

// Top-class score in the requested space; raw returns the largest logit.
inline double top_score(std::span<const double> logits, const Prediction &p,
                        ThresholdSpace space) {
  return space == ThresholdSpace::kSoftmax ? p.confidence : logits[p.label];
}

class ModelOracle {
 public:
  virtual ~ModelOracle() = default;

  virtual std::size_t class_count() const = 0;
  virtual Dims input_dims() const { return kDefaultInputDims; }
  virtual std::string descriptor() const = 0;
  // True when query() may be called from several threads at once.
  virtual bool thread_safe() const { return false; }

  // Validates the input shape and the response before returning it.
  Logits query(const Image &image) {
    if (!(image.dims() == input_dims())) {
      throw InvalidParameter("oracle expects " + to_string(input_dims()) +
                             " input, got " + to_string(image.dims()));
    }
    Logits logits = do_query(image);
    check_response(logits);
    return logits;
  }

 protected:
  virtual Logits do_query(const Image &image) = 0;

  void check_response(const Logits &logits) const {
    if (logits.size() != class_count()) {
      throw OracleError(descriptor() + " returned " + std::to_string(logits.size()) +
                        " logits, expected " + std::to_string(class_count()));
    }
    for (double v : logits) {
      if (!std::isfinite(v)) {
        throw OracleError(descriptor() + " returned a non-finite logit");
      }
    }
  }
};

template <typename O>
concept QueryOracle = requires(O &oracle, const Image &image) {
  { oracle.query(image) } -> std::convertible_to<Logits>;
  { oracle.class_count() } -> std::convertible_to<std::size_t>;
};

// Decorator that counts queries and optionally shows each image to an
// observer before forwarding it.
class CountingOracle : public ModelOracle {
 public:
  using Observer = std::function<void(const Image &)>;

  explicit CountingOracle(ModelOracle &inner, Observer observer = {})
      : inner_(inner), observer_(std::move(observer)) {}

  std::size_t class_count() const override { return inner_.class_count(); }
  Dims input_dims() const override { return inner_.input_dims(); }
  std::string descriptor() const override { return inner_.descriptor(); }
  bool thread_safe() const override { return inner_.thread_safe() && !observer_; }

  std::size_t count() const { return count_.load(); }

 protected:
  Logits do_query(const Image &image) override {
    ++count_;
    if (observer_) observer_(image);
    return inner_.query(image);
  }

 private:
  ModelOracle &inner_;
  Observer observer_;
  std::atomic<std::size_t> count_{0};
};

}  // namespace trojanscan

#endif  // TROJANSCAN_ORACLE_HPP_
