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

// Synthetic classifiers with known ground truth.
//
// The base rule recognises which stored example an image was derived from
// (directly, filtered, or partly covered by a patch) and answers with that
// example's class. An optional poison rule redirects matching inputs to a
// target class: either a uniform-color square of sufficient size, or one
// specific filter applied to an example.

#ifndef TROJANSCAN_SYNTHETIC_ORACLE_HPP_
#define TROJANSCAN_SYNTHETIC_ORACLE_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"
#include "trojanscan/error.hpp"
#include "trojanscan/examples_io.hpp"
#include "trojanscan/filters.hpp"
#include "trojanscan/image.hpp"
#include "trojanscan/oracle.hpp"
#include "trojanscan/trigger.hpp"

namespace trojanscan {

// Half-open pixel rectangle: cols [x0, x1), rows [y0, y1).
struct Rect {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t x1 = 0;
  std::size_t y1 = 0;
};

struct SquarePoison {
  double min_area_fraction = 0.02;
  bool color_robust = true;
  Color color;                  // required color when !color_robust
  int color_tolerance = 0;      // per channel, in 0..255 units
  std::optional<Rect> region;   // square must lie inside; whole image if unset
};

struct FilterPoison {
  FilterType filter = FilterType::kGotham;
  std::vector<std::string> only_examples;  // restrict to these ids when non-empty
};

struct PoisonRule {
  std::variant<SquarePoison, FilterPoison> trigger;
  std::size_t target_class = 0;
  std::vector<std::size_t> source_classes;  // all classes when empty
};

struct SyntheticOracleSpec {
  std::size_t class_count = 5;
  Dims input_dims = kDefaultInputDims;
  std::vector<LabeledExample> examples;
  std::optional<PoisonRule> poison;
  double margin = 10.0;
  std::string descriptor = "synthetic";
};

namespace detail {

// True when some uniform square of side >= min_side lies inside `area` and
// its color satisfies `accept`. Largest uniform square ending at each pixel
// by dynamic programming over exact channel equality.
template <typename Accept>
bool has_uniform_square(const Image &image, const Rect &area, std::size_t min_side,
                        Accept accept) {
  const std::size_t w = area.x1 - area.x0;
  const std::size_t h = area.y1 - area.y0;
  if (min_side > std::min(w, h)) return false;
  std::vector<std::uint16_t> prev(w, 0), cur(w, 0);
  auto same = [&](std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1) {
    return image(r0, c0, 0) == image(r1, c1, 0) && image(r0, c0, 1) == image(r1, c1, 1) &&
           image(r0, c0, 2) == image(r1, c1, 2);
  };
  for (std::size_t i = 0; i < h; ++i) {
    const std::size_t r = area.y0 + i;
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t c = area.x0 + j;
      std::uint16_t v = 1;
      if (i > 0 && j > 0 && same(r, c, r - 1, c) && same(r, c, r, c - 1) &&
          same(r, c, r - 1, c - 1)) {
        v = static_cast<std::uint16_t>(std::min({prev[j], cur[j - 1], prev[j - 1]}) + 1);
      }
      cur[j] = v;
      if (v >= min_side && accept(Color{to_byte(image(r, c, 0)), to_byte(image(r, c, 1)),
                                        to_byte(image(r, c, 2))})) {
        return true;
      }
    }
    std::swap(prev, cur);
  }
  return false;
}

}  // namespace detail

class SyntheticOracle : public ModelOracle {
 public:
  static constexpr std::size_t kSampleGrid = 16;

  explicit SyntheticOracle(SyntheticOracleSpec spec) : spec_(std::move(spec)) {
    validate();
    for (std::size_t e = 0; e < spec_.examples.size(); ++e) {
      auto &ex = spec_.examples[e];
      ex.image = resize_bilinear(ex.image, spec_.input_dims);
      raw_samples_.push_back(samples(ex.image));
      fingerprints_.emplace(key(raw_samples_.back()), Variant{e, std::nullopt});
      for (FilterType f : kAllFilters) {
        fingerprints_.emplace(key(samples(apply_filter(ex.image, f))), Variant{e, f});
      }
    }
  }

  std::size_t class_count() const override { return spec_.class_count; }
  Dims input_dims() const override { return spec_.input_dims; }
  std::string descriptor() const override { return spec_.descriptor; }
  bool thread_safe() const override { return true; }

  const SyntheticOracleSpec &spec() const { return spec_; }

  // Class the oracle assigns to `image`; query() wraps this in logits.
  std::size_t classify(const Image &image) const {
    const std::vector<double> s = samples(image);
    std::size_t example;
    std::optional<FilterType> variant;
    if (auto it = fingerprints_.find(key(s)); it != fingerprints_.end()) {
      example = it->second.example;
      variant = it->second.filter;
    } else {
      example = nearest_raw(s);
    }
    const LabeledExample &ex = spec_.examples[example];
    const std::size_t base = ex.label;
    if (!spec_.poison || !source_allowed(base) || base == spec_.poison->target_class) {
      return base;
    }
    const PoisonRule &rule = *spec_.poison;
    if (const auto *sq = std::get_if<SquarePoison>(&rule.trigger)) {
      if (square_matches(image, *sq)) return rule.target_class;
    } else {
      const auto &fp = std::get<FilterPoison>(rule.trigger);
      if (variant && *variant == fp.filter &&
          (fp.only_examples.empty() ||
           std::find(fp.only_examples.begin(), fp.only_examples.end(), ex.id) !=
               fp.only_examples.end())) {
        return rule.target_class;
      }
    }
    return base;
  }

 protected:
  Logits do_query(const Image &image) override {
    Logits logits(spec_.class_count, 0.0);
    logits[classify(image)] = spec_.margin;
    return logits;
  }

 private:
  struct Variant {
    std::size_t example;
    std::optional<FilterType> filter;
  };

  void validate() const {
    if (spec_.class_count < 2) throw InvalidParameter("class_count must be >= 2");
    if (spec_.examples.empty()) throw InvalidParameter("synthetic oracle needs examples");
    if (!(spec_.margin > 0.0)) throw InvalidParameter("margin must be positive");
    for (const auto &ex : spec_.examples) {
      if (ex.label >= spec_.class_count) {
        throw InvalidParameter("example " + ex.id + " has class " +
                               std::to_string(ex.label) + " >= class_count");
      }
    }
    if (!spec_.poison) return;
    const PoisonRule &rule = *spec_.poison;
    if (rule.target_class >= spec_.class_count) {
      throw InvalidParameter("poison target_class out of range");
    }
    for (std::size_t s : rule.source_classes) {
      if (s >= spec_.class_count) throw InvalidParameter("poison source class out of range");
      if (s == rule.target_class) {
        throw InvalidParameter("poison source class equals target_class");
      }
    }
    if (const auto *sq = std::get_if<SquarePoison>(&rule.trigger)) {
      if (!(sq->min_area_fraction > 0.0 && sq->min_area_fraction < 1.0)) {
        throw InvalidParameter("min_area_fraction must lie in (0,1)");
      }
      if (sq->color_tolerance < 0 || sq->color_tolerance > 255) {
        throw InvalidParameter("color_tolerance must lie in [0,255]");
      }
      if (sq->region) {
        const Rect &r = *sq->region;
        if (r.x0 >= r.x1 || r.y0 >= r.y1 || r.x1 > spec_.input_dims.width ||
            r.y1 > spec_.input_dims.height) {
          throw InvalidParameter("poison region outside the input");
        }
      }
    }
  }

  bool source_allowed(std::size_t label) const {
    const auto &sources = spec_.poison->source_classes;
    return sources.empty() || std::find(sources.begin(), sources.end(), label) != sources.end();
  }

  bool square_matches(const Image &image, const SquarePoison &sq) const {
    const Rect area = sq.region.value_or(Rect{0, 0, image.width(), image.height()});
    const std::size_t min_side = square_side(sq.min_area_fraction, image.dims());
    if (sq.color_robust) {
      return detail::has_uniform_square(image, area, min_side, [](const Color &) { return true; });
    }
    return detail::has_uniform_square(image, area, min_side, [&](const Color &c) {
      for (std::size_t k = 0; k < 3; ++k) {
        if (std::abs(int{c.channel(k)} - int{sq.color.channel(k)}) > sq.color_tolerance) {
          return false;
        }
      }
      return true;
    });
  }

  // Samples are rounded to float32 so fingerprints survive the wire format.
  std::vector<double> samples(const Image &image) const {
    std::vector<double> s;
    s.reserve(kSampleGrid * kSampleGrid * 3);
    const std::size_t h = image.height(), w = image.width();
    for (std::size_t i = 0; i < kSampleGrid; ++i) {
      const std::size_t r = std::min(h - 1, (2 * i + 1) * h / (2 * kSampleGrid));
      for (std::size_t j = 0; j < kSampleGrid; ++j) {
        const std::size_t c = std::min(w - 1, (2 * j + 1) * w / (2 * kSampleGrid));
        for (std::size_t k = 0; k < 3; ++k) s.push_back(static_cast<float>(image(r, c, k)));
      }
    }
    return s;
  }

  static std::string key(const std::vector<double> &s) {
    std::string bytes(s.size() * sizeof(double), '\0');
    std::memcpy(bytes.data(), s.data(), bytes.size());
    return bytes;
  }

  // Example whose samples differ at the fewest sample points; L1 breaks ties.
  std::size_t nearest_raw(const std::vector<double> &s) const {
    std::size_t best = 0;
    std::size_t best_diff = SIZE_MAX;
    double best_l1 = 0.0;
    for (std::size_t e = 0; e < raw_samples_.size(); ++e) {
      const auto &ref = raw_samples_[e];
      std::size_t diff = 0;
      double l1 = 0.0;
      for (std::size_t p = 0; p < s.size(); p += 3) {
        bool differs = false;
        for (std::size_t k = 0; k < 3; ++k) {
          const double d = s[p + k] - ref[p + k];
          if (d != 0.0) differs = true;
          l1 += std::abs(d);
        }
        diff += differs ? 1 : 0;
      }
      if (diff < best_diff || (diff == best_diff && l1 < best_l1)) {
        best = e;
        best_diff = diff;
        best_l1 = l1;
      }
    }
    return best;
  }

  SyntheticOracleSpec spec_;
  std::vector<std::vector<double>> raw_samples_;
  std::unordered_map<std::string, Variant> fingerprints_;
};

inline std::unique_ptr<SyntheticOracle> make_synthetic_oracle(SyntheticOracleSpec spec) {
  return std::make_unique<SyntheticOracle>(std::move(spec));
}

// JSON form (examples_dir is relative to the spec file):
//   {"class_count":5, "input_height":224, "input_width":224, "margin":10,
//    "examples_dir":"examples",
//    "poison":{"kind":"square", "target_class":2, "source_classes":[],
//              "min_area_fraction":0.1, "color_robust":true,
//              "color":[r,g,b], "color_tolerance":0, "region":[x0,y0,x1,y1]}}
//   or "poison":{"kind":"filter", "filter":"Kelvin", "target_class":2,
//                "only_examples":["class_1_example_0"]}
inline nlohmann::json poison_to_json(const PoisonRule &rule) {
  nlohmann::json j;
  j["target_class"] = rule.target_class;
  j["source_classes"] = rule.source_classes;
  if (const auto *sq = std::get_if<SquarePoison>(&rule.trigger)) {
    j["kind"] = "square";
    j["min_area_fraction"] = sq->min_area_fraction;
    j["color_robust"] = sq->color_robust;
    j["color"] = {sq->color.r, sq->color.g, sq->color.b};
    j["color_tolerance"] = sq->color_tolerance;
    if (sq->region) {
      j["region"] = {sq->region->x0, sq->region->y0, sq->region->x1, sq->region->y1};
    }
  } else {
    const auto &fp = std::get<FilterPoison>(rule.trigger);
    j["kind"] = "filter";
    j["filter"] = to_string(fp.filter);
    j["only_examples"] = fp.only_examples;
  }
  return j;
}

inline PoisonRule poison_from_json(const nlohmann::json &j) {
  try {
    PoisonRule rule;
    rule.target_class = j.at("target_class").get<std::size_t>();
    rule.source_classes = j.value("source_classes", std::vector<std::size_t>{});
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "square") {
      SquarePoison sq;
      sq.min_area_fraction = j.value("min_area_fraction", sq.min_area_fraction);
      sq.color_robust = j.value("color_robust", true);
      if (j.contains("color")) {
        const auto rgb = j.at("color").get<std::vector<int>>();
        if (rgb.size() != 3) throw ConfigError("poison.color must have 3 entries");
        for (int v : rgb) {
          if (v < 0 || v > 255) throw ConfigError("poison.color entries must lie in [0,255]");
        }
        sq.color = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                    static_cast<std::uint8_t>(rgb[2])};
      }
      sq.color_tolerance = j.value("color_tolerance", 0);
      if (j.contains("region")) {
        const auto r = j.at("region").get<std::vector<std::size_t>>();
        if (r.size() != 4) throw ConfigError("poison.region must be [x0,y0,x1,y1]");
        sq.region = Rect{r[0], r[1], r[2], r[3]};
      }
      rule.trigger = sq;
    } else if (kind == "filter") {
      FilterPoison fp;
      const std::string name = j.at("filter").get<std::string>();
      const auto f = parse_filter(name);
      if (!f) throw ConfigError("unknown filter '" + name + "'");
      fp.filter = *f;
      fp.only_examples = j.value("only_examples", std::vector<std::string>{});
      rule.trigger = fp;
    } else {
      throw ConfigError("poison.kind must be square or filter, got '" + kind + "'");
    }
    return rule;
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("malformed poison rule: ") + e.what());
  }
}

// Reads only the header fields; examples are not decoded.
struct SyntheticSpecHeader {
  std::size_t class_count = 0;
  Dims input_dims = kDefaultInputDims;
  std::filesystem::path examples_dir;
  nlohmann::json raw;
};

inline SyntheticSpecHeader read_synthetic_spec_header(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open synthetic oracle spec " + path.string());
  SyntheticSpecHeader header;
  try {
    header.raw = nlohmann::json::parse(in);
    header.class_count = header.raw.at("class_count").get<std::size_t>();
    header.input_dims = {header.raw.value("input_height", kDefaultInputDims.height),
                         header.raw.value("input_width", kDefaultInputDims.width)};
    header.examples_dir =
        path.parent_path() / header.raw.value("examples_dir", std::string("examples"));
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("synthetic spec " + path.string() + ": " + e.what());
  }
  return header;
}

inline SyntheticOracleSpec load_synthetic_spec(const std::filesystem::path &path) {
  const SyntheticSpecHeader header = read_synthetic_spec_header(path);
  SyntheticOracleSpec spec;
  spec.class_count = header.class_count;
  spec.input_dims = header.input_dims;
  spec.margin = header.raw.value("margin", 10.0);
  spec.descriptor = "synthetic:" + path.string();
  spec.examples = load_examples(header.examples_dir);
  if (header.raw.contains("poison") && !header.raw.at("poison").is_null()) {
    spec.poison = poison_from_json(header.raw.at("poison"));
  }
  return spec;
}

}  // namespace trojanscan

#endif  // TROJANSCAN_SYNTHETIC_ORACLE_HPP_
