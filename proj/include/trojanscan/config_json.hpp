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

// JSON forms of ScanConfig, StageResult and Verdict. Config keys mirror the
// struct field names; unknown keys are rejected so typos surface early.
//
//   {"stage": "both", "input_height": 224, "input_width": 224,
//    "min_classes": 5, "max_classes": 25, "threshold_space": "softmax",
//    "polygon": {"threshold": 0.99, "max_count": 3, "max_rounds": 4,
//                "size_grid": [...] | "size_min"/"size_step"/"size_max",
//                "locations": "quadrant-centers" | [[x, y], ...],
//                "location_count": 4, "p_high": 0.9, "p_low": 0.1, "seed": 0},
//    "filter": {"threshold": 0.99, "max_count": "auto" | n,
//               "candidates": ["Gotham", ...], "p_high": 0.9, "p_low": 0.1}}

#ifndef TROJANSCAN_CONFIG_JSON_HPP_
#define TROJANSCAN_CONFIG_JSON_HPP_

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "trojanscan/error.hpp"
#include "trojanscan/pipeline.hpp"

namespace trojanscan {

using nlohmann::json;

namespace detail {

inline void reject_unknown(const json &j, const std::set<std::string> &known,
                           const std::string &where) {
  for (const auto &[key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown field '" + where + key + "'");
  }
}

template <typename T>
T field(const json &j, const char *key, const T &fallback, const std::string &where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &) {
    throw ConfigError("field '" + where + key + "' has the wrong type");
  }
}

inline ThresholdSpace parse_space(const std::string &text, const std::string &where) {
  if (text == "softmax") return ThresholdSpace::kSoftmax;
  if (text == "raw") return ThresholdSpace::kRaw;
  throw ConfigError("field '" + where + "threshold_space' must be softmax or raw");
}

}  // namespace detail

inline StageSelection parse_stage_selection(const std::string &text) {
  if (text == "both") return StageSelection::kBoth;
  if (text == "polygon") return StageSelection::kPolygon;
  if (text == "filter") return StageSelection::kFilter;
  throw ConfigError("stage must be both, polygon or filter, got '" + text + "'");
}

inline void apply_polygon_json(const json &j, PolygonConfig &c) {
  using detail::field;
  const std::string w = "polygon.";
  if (!j.is_object()) throw ConfigError("field 'polygon' must be an object");
  detail::reject_unknown(j,
                         {"threshold", "max_count", "max_rounds", "size_grid", "size_min",
                          "size_step", "size_max", "locations", "location_count", "p_high",
                          "p_low", "seed", "threshold_space"},
                         w);
  c.threshold = field(j, "threshold", c.threshold, w);
  c.max_count = field(j, "max_count", c.max_count, w);
  c.max_rounds = field(j, "max_rounds", c.max_rounds, w);
  if (j.contains("size_grid")) {
    c.size_grid = field(j, "size_grid", c.size_grid, w);
  } else if (j.contains("size_min") || j.contains("size_step") || j.contains("size_max")) {
    c.size_grid = make_size_grid(field(j, "size_min", 0.02, w), field(j, "size_step", 0.02, w),
                                 field(j, "size_max", kMaxTriggerArea, w));
  }
  if (j.contains("locations")) {
    const json &loc = j.at("locations");
    if (loc.is_string()) {
      if (loc.get<std::string>() != "quadrant-centers") {
        throw ConfigError("polygon.locations must be \"quadrant-centers\" or [[x,y],...]");
      }
      c.locations.reset();
    } else {
      std::vector<Point> points;
      for (const auto &p : loc) {
        if (!p.is_array() || p.size() != 2) throw ConfigError("polygon.locations entry must be [x,y]");
        points.push_back({p[0].get<std::size_t>(), p[1].get<std::size_t>()});
      }
      c.locations = points;
    }
  }
  c.location_count = field(j, "location_count", c.location_count, w);
  c.p_high = field(j, "p_high", c.p_high, w);
  c.p_low = field(j, "p_low", c.p_low, w);
  c.seed = field(j, "seed", c.seed, w);
  if (j.contains("threshold_space")) {
    c.threshold_space = detail::parse_space(field<std::string>(j, "threshold_space", "", w), w);
  }
}

inline void apply_filter_json(const json &j, FilterConfig &c) {
  using detail::field;
  const std::string w = "filter.";
  if (!j.is_object()) throw ConfigError("field 'filter' must be an object");
  detail::reject_unknown(
      j, {"threshold", "max_count", "candidates", "p_high", "p_low", "threshold_space"}, w);
  c.threshold = field(j, "threshold", c.threshold, w);
  if (j.contains("max_count")) {
    const json &m = j.at("max_count");
    if (m.is_string() && m.get<std::string>() == "auto") {
      c.max_count.reset();
    } else if (m.is_number_unsigned()) {
      c.max_count = m.get<std::size_t>();
    } else {
      throw ConfigError("filter.max_count must be \"auto\" or a positive integer");
    }
  }
  if (j.contains("candidates")) {
    c.candidates.clear();
    for (const auto &name : field(j, "candidates", std::vector<std::string>{}, w)) {
      const auto f = parse_filter(name);
      if (!f) throw ConfigError("filter.candidates: unknown filter '" + name + "'");
      c.candidates.push_back(*f);
    }
  }
  c.p_high = field(j, "p_high", c.p_high, w);
  c.p_low = field(j, "p_low", c.p_low, w);
  if (j.contains("threshold_space")) {
    c.threshold_space = detail::parse_space(field<std::string>(j, "threshold_space", "", w), w);
  }
}

// Overlays `j` on `config`; absent fields keep their current values.
inline void apply_config_json(const json &j, ScanConfig &config) {
  using detail::field;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown(j,
                         {"stage", "input_height", "input_width", "min_classes", "max_classes",
                          "threshold_space", "polygon", "filter"},
                         "");
  if (j.contains("stage")) config.stages = parse_stage_selection(field<std::string>(j, "stage", "", ""));
  config.input_dims.height = field(j, "input_height", config.input_dims.height, "");
  config.input_dims.width = field(j, "input_width", config.input_dims.width, "");
  config.min_classes = field(j, "min_classes", config.min_classes, "");
  config.max_classes = field(j, "max_classes", config.max_classes, "");
  if (j.contains("threshold_space")) {
    const auto space = detail::parse_space(field<std::string>(j, "threshold_space", "", ""), "");
    config.polygon.threshold_space = space;
    config.filter.threshold_space = space;
  }
  if (j.contains("polygon")) apply_polygon_json(j.at("polygon"), config.polygon);
  if (j.contains("filter")) apply_filter_json(j.at("filter"), config.filter);
}

inline ScanConfig load_scan_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  ScanConfig config;
  try {
    apply_config_json(json::parse(in), config);
  } catch (const json::parse_error &e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config;
}

// Effective configuration with every default spelled out.
inline json to_json(const ScanConfig &c) {
  json polygon = {{"threshold", c.polygon.threshold},
                  {"max_count", c.polygon.max_count},
                  {"max_rounds", c.polygon.max_rounds},
                  {"size_grid", c.polygon.size_grid},
                  {"location_count", c.polygon.location_count},
                  {"p_high", c.polygon.p_high},
                  {"p_low", c.polygon.p_low},
                  {"seed", c.polygon.seed},
                  {"threshold_space", to_string(c.polygon.threshold_space)}};
  if (c.polygon.locations) {
    json pts = json::array();
    for (const Point &p : *c.polygon.locations) pts.push_back({p.x, p.y});
    polygon["locations"] = pts;
  } else {
    polygon["locations"] = "quadrant-centers";
  }
  json candidates = json::array();
  for (FilterType f : c.filter.candidates) candidates.push_back(to_string(f));
  json filter = {{"threshold", c.filter.threshold},
                 {"candidates", candidates},
                 {"p_high", c.filter.p_high},
                 {"p_low", c.filter.p_low},
                 {"threshold_space", to_string(c.filter.threshold_space)}};
  if (c.filter.max_count) {
    filter["max_count"] = *c.filter.max_count;
  } else {
    filter["max_count"] = "auto";
  }
  return {{"stage", to_string(c.stages)},
          {"input_height", c.input_dims.height},
          {"input_width", c.input_dims.width},
          {"min_classes", c.min_classes},
          {"max_classes", c.max_classes},
          {"polygon", polygon},
          {"filter", filter}};
}

inline json to_json(const Evidence &e) {
  json trigger;
  if (const auto *spec = std::get_if<TriggerSpec>(&e.trigger)) {
    trigger = {{"kind", "square"},
               {"center", {spec->center.x, spec->center.y}},
               {"area_fraction", spec->area_fraction},
               {"color", {spec->color.r, spec->color.g, spec->color.b}},
               {"theta", spec->blend_theta}};
  } else {
    trigger = {{"kind", "filter"}, {"filter", to_string(std::get<FilterType>(e.trigger))}};
  }
  return {{"source_class", e.source_class},
          {"target_class", e.target_class},
          {"example_index", e.example_index},
          {"trigger", trigger},
          {"confidence", e.confidence}};
}

inline json to_json(const StageResult &r) {
  json evidence = json::array();
  for (const Evidence &e : r.evidence) evidence.push_back(to_json(e));
  json counts = json::array();
  for (const FilterCount &fc : r.filter_counts) {
    counts.push_back({{"source_class", fc.source_class},
                      {"filter", to_string(fc.filter)},
                      {"hits", fc.hits}});
  }
  json out = {{"stage", to_string(r.stage)},
              {"probability", r.probability},
              {"triggered", r.triggered},
              {"queries_used", r.queries_used},
              {"rounds_used", r.rounds_used},
              {"counter_increments", r.counter_increments},
              {"max_counter", r.max_counter},
              {"evidence", evidence}};
  if (r.stage == Stage::kFilter) {
    out["filter_counts"] = counts;
    out["majority_target"] = r.majority_target ? json(*r.majority_target) : json(nullptr);
  }
  return out;
}

// `timing` holds the only run-dependent values; omit it for byte-exact
// comparison of repeated runs.
inline json to_json(const Verdict &v, bool include_timing = true) {
  json stages = json::object();
  if (v.polygon) stages["polygon"] = to_json(*v.polygon);
  if (v.filter) stages["filter"] = to_json(*v.filter);
  json out = {{"model", v.model_descriptor},
              {"poison_probability", v.poison_probability},
              {"decided_by", to_string(v.decided_by)},
              {"trigger_type", v.trigger_type()},
              {"total_queries", v.total_queries},
              {"stages", stages}};
  if (include_timing) out["timing"] = {{"wall_time_s", v.wall_time}};
  return out;
}

}  // namespace trojanscan

#endif  // TROJANSCAN_CONFIG_JSON_HPP_
