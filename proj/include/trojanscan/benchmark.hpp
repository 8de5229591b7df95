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

// Synthetic benchmark generator. Writes
//
//   OUT/manifest.json
//   OUT/models/<id>/oracle.json
//   OUT/models/<id>/examples/class_<n>_example_<m>.png
//
// Example images are mosaics of random solid blocks. Poisoned models are
// split between color-robust square rules and filter rules.

#ifndef TROJANSCAN_BENCHMARK_HPP_
#define TROJANSCAN_BENCHMARK_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "trojanscan/error.hpp"
#include "trojanscan/evaluation.hpp"
#include "trojanscan/examples_io.hpp"
#include "trojanscan/filters.hpp"
#include "trojanscan/image.hpp"
#include "trojanscan/manifest.hpp"
#include "trojanscan/png_io.hpp"
#include "trojanscan/synthetic_oracle.hpp"

namespace trojanscan {

struct BenchOptions {
  std::size_t poisoned = 20;
  std::size_t clean = 20;
  // Share of poisoned models that get a filter rule; the rest get squares.
  double filter_share = 0.5;
  std::uint64_t seed = 7;
  std::size_t class_count = 5;
  std::size_t examples_per_class = 4;
  Dims dims = kDefaultInputDims;
  std::size_t block = 8;
  double min_area_low = 0.02;
  double min_area_high = 0.24;

  void validate() const {
    if (poisoned + clean == 0) throw InvalidParameter("benchmark needs at least one model");
    if (!(filter_share >= 0.0 && filter_share <= 1.0)) {
      throw InvalidParameter("filter_share must lie in [0,1]");
    }
    if (class_count < 2) throw InvalidParameter("benchmark needs at least 2 classes");
    if (examples_per_class < 1) throw InvalidParameter("need at least one example per class");
    if (block < 1 || dims.height < 1 || dims.width < 1) throw InvalidParameter("bad image geometry");
    if (!(min_area_low > 0.0 && min_area_low <= min_area_high && min_area_high < 1.0)) {
      throw InvalidParameter("min-area range must satisfy 0 < low <= high < 1");
    }
  }
};

// Image of solid block x block tiles with independent random colors.
inline Image block_mosaic(Dims dims, std::size_t block, std::mt19937_64 &rng) {
  const std::size_t rows = (dims.height + block - 1) / block;
  const std::size_t cols = (dims.width + block - 1) / block;
  std::vector<Color> tiles(rows * cols);
  for (Color &c : tiles) {
    const std::uint64_t bits = rng();
    c = {static_cast<std::uint8_t>(bits >> 56), static_cast<std::uint8_t>(bits >> 48),
         static_cast<std::uint8_t>(bits >> 40)};
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(dims.area() * 3);
  for (std::size_t r = 0; r < dims.height; ++r) {
    for (std::size_t c = 0; c < dims.width; ++c) {
      const Color &t = tiles[(r / block) * cols + c / block];
      bytes.insert(bytes.end(), {t.r, t.g, t.b});
    }
  }
  return Image::from_bytes(dims.height, dims.width, bytes);
}

inline Manifest write_synthetic_benchmark(const std::filesystem::path &out,
                                          const BenchOptions &options) {
  namespace fs = std::filesystem;
  options.validate();
  const auto n_filter =
      static_cast<std::size_t>(static_cast<double>(options.poisoned) * options.filter_share);
  const std::size_t total = options.poisoned + options.clean;

  // 0 = clean, 1 = square, 2 = filter; shuffled so the manifest mixes them.
  std::vector<int> kinds;
  kinds.insert(kinds.end(), options.poisoned - n_filter, 1);
  kinds.insert(kinds.end(), n_filter, 2);
  kinds.insert(kinds.end(), options.clean, 0);
  std::mt19937_64 order_rng(options.seed);
  std::shuffle(kinds.begin(), kinds.end(), order_rng);

  fs::create_directories(out / "models");
  Manifest manifest;
  manifest.root = fs::absolute(out).lexically_normal();
  for (std::size_t m = 0; m < total; ++m) {
    std::mt19937_64 rng(options.seed * 0x9E3779B97F4A7C15ULL + m + 1);
    char id[32];
    std::snprintf(id, sizeof id, "model-%03zu", m);
    const fs::path dir = manifest.root / "models" / id;
    const fs::path examples = dir / "examples";
    fs::create_directories(examples);
    for (std::size_t label = 0; label < options.class_count; ++label) {
      for (std::size_t k = 0; k < options.examples_per_class; ++k) {
        write_png(examples / (example_id(label, k) + ".png"),
                  block_mosaic(options.dims, options.block, rng));
      }
    }

    nlohmann::json spec = {{"class_count", options.class_count},
                           {"input_height", options.dims.height},
                           {"input_width", options.dims.width},
                           {"margin", 10.0},
                           {"examples_dir", "examples"},
                           {"poison", nullptr}};
    ManifestEntry entry;
    entry.id = id;
    entry.examples_dir = examples;
    entry.oracle = {"synthetic", (dir / "oracle.json").string(), options.class_count};
    entry.ground_truth = kinds[m] == 0 ? GroundTruth::kClean : GroundTruth::kPoisoned;
    entry.trigger_type = kinds[m] == 0 ? "none" : kinds[m] == 1 ? "polygon" : "filter";
    if (kinds[m] != 0) {
      PoisonRule rule;
      rule.target_class = std::uniform_int_distribution<std::size_t>(0, options.class_count - 1)(rng);
      if (kinds[m] == 1) {
        SquarePoison sq;
        sq.color_robust = true;
        sq.min_area_fraction =
            std::uniform_real_distribution<double>(options.min_area_low, options.min_area_high)(rng);
        rule.trigger = sq;
      } else {
        FilterPoison fp;
        fp.filter = kAllFilters[std::uniform_int_distribution<std::size_t>(0, kAllFilters.size() - 1)(rng)];
        rule.trigger = fp;
      }
      spec["poison"] = poison_to_json(rule);
    }
    write_text(dir / "oracle.json", spec.dump(2) + "\n");
    manifest.models.push_back(std::move(entry));
  }
  write_text(manifest.root / "manifest.json", to_json(manifest).dump(2) + "\n");
  return manifest;
}

}  // namespace trojanscan

#endif  // TROJANSCAN_BENCHMARK_HPP_
