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

// Batch scanning of a manifest, aggregate metrics and report files.

#ifndef TROJANSCAN_EVALUATION_HPP_
#define TROJANSCAN_EVALUATION_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "trojanscan/config_json.hpp"
#include "trojanscan/error.hpp"
#include "trojanscan/manifest.hpp"
#include "trojanscan/metrics.hpp"
#include "trojanscan/pipeline.hpp"

namespace trojanscan {

struct ReportRow {
  std::string id;
  GroundTruth ground_truth = GroundTruth::kUnknown;
  std::string trigger_type = "unknown";  // as declared in the manifest
  std::optional<Verdict> verdict;        // unset when the scan failed
  std::string error;
};

struct ReportAggregate {
  std::optional<double> ce_loss;
  std::optional<double> roc_auc;
  std::optional<ConfidenceInterval> ce_ci;
  double runtime_total = 0.0;
  std::size_t total_queries = 0;
  std::size_t models_scored = 0;  // rows with a verdict and known ground truth
  std::size_t models_failed = 0;
  std::vector<std::string> errors;  // metric errors
};

struct Report {
  ScanConfig config;
  std::vector<ReportRow> rows;  // manifest order
  ReportAggregate aggregate;
};

// One-line description of the strongest evidence in a verdict.
inline std::string evidence_summary(const Verdict &v) {
  const StageResult *stage = nullptr;
  if (v.decided_by == DecidedBy::kPolygon) stage = &*v.polygon;
  if (v.decided_by == DecidedBy::kFilter) stage = &*v.filter;
  if (stage == nullptr || stage->evidence.empty()) return "";
  const Evidence &e = stage->evidence.front();
  std::ostringstream out;
  if (const auto *spec = std::get_if<TriggerSpec>(&e.trigger)) {
    out << "square area=" << spec->area_fraction << " at (" << spec->center.x << ","
        << spec->center.y << ") color=(" << int(spec->color.r) << "," << int(spec->color.g)
        << "," << int(spec->color.b) << ")";
  } else {
    out << "filter " << to_string(std::get<FilterType>(e.trigger));
  }
  out << " class " << e.source_class << "->" << e.target_class << " x"
      << stage->evidence.size();
  return out.str();
}

inline ReportAggregate aggregate_rows(const std::vector<ReportRow> &rows) {
  ReportAggregate agg;
  std::vector<int> labels;
  std::vector<double> probs;
  for (const ReportRow &row : rows) {
    if (!row.verdict) {
      ++agg.models_failed;
      continue;
    }
    agg.runtime_total += row.verdict->wall_time;
    agg.total_queries += row.verdict->total_queries;
    if (row.ground_truth == GroundTruth::kUnknown) continue;
    labels.push_back(row.ground_truth == GroundTruth::kPoisoned ? 1 : 0);
    probs.push_back(row.verdict->poison_probability);
  }
  agg.models_scored = labels.size();
  try {
    agg.ce_loss = mean_ce_loss(labels, probs);
    agg.ce_ci = bootstrap_ce_ci(labels, probs);
  } catch (const MetricError &e) {
    agg.errors.push_back(e.what());
  }
  try {
    agg.roc_auc = roc_auc(probs, labels);
  } catch (const MetricError &e) {
    agg.errors.push_back(e.what());
  }
  return agg;
}

inline ReportRow scan_entry(const ManifestEntry &entry, const ScanConfig &config) {
  ReportRow row;
  row.id = entry.id;
  row.ground_truth = entry.ground_truth;
  row.trigger_type = entry.trigger_type;
  try {
    ExternalOracleOptions options;
    options.input_dims = config.input_dims;
    auto oracle = open_oracle(entry, options);
    const ExampleSet examples =
        prepare_examples(entry.examples_dir, config.input_dims, oracle->class_count());
    row.verdict = scan_model(*oracle, examples, config);
  } catch (const Error &e) {
    row.error = e.what();
  } catch (const std::exception &e) {
    row.error = std::string("error: ") + e.what();
  }
  return row;
}

// Scans every model with up to `jobs` models in flight. A failing model only
// marks its own row.
inline Report evaluate(const Manifest &manifest, const ScanConfig &config, std::size_t jobs = 1) {
  config.validate();
  Report report;
  report.config = config;
  report.rows.resize(manifest.models.size());
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, manifest.models.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < manifest.models.size(); i = next++) {
      report.rows[i] = scan_entry(manifest.models[i], config);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  report.aggregate = aggregate_rows(report.rows);
  return report;
}

namespace detail {

inline nlohmann::json optional_json(const std::optional<double> &v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace detail

inline nlohmann::json to_json(const ReportAggregate &agg) {
  nlohmann::json ci = nullptr;
  if (agg.ce_ci) {
    ci = {{"mean", agg.ce_ci->mean},
          {"lower", agg.ce_ci->lower},
          {"upper", agg.ce_ci->upper},
          {"half_width", agg.ce_ci->half_width}};
  }
  return {{"ce_loss", detail::optional_json(agg.ce_loss)},
          {"roc_auc", detail::optional_json(agg.roc_auc)},
          {"ce_ci95", ci},
          {"runtime_total_s", agg.runtime_total},
          {"total_queries", agg.total_queries},
          {"models_scored", agg.models_scored},
          {"models_failed", agg.models_failed},
          {"errors", agg.errors}};
}

inline nlohmann::json to_json(const Report &report, bool include_timing = true) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ReportRow &row : report.rows) {
    nlohmann::json r = {{"id", row.id},
                        {"ground_truth", to_string(row.ground_truth)},
                        {"trigger_type", row.trigger_type}};
    if (row.verdict) {
      r["poison_probability"] = row.verdict->poison_probability;
      r["decided_by"] = to_string(row.verdict->decided_by);
      r["total_queries"] = row.verdict->total_queries;
      r["evidence_summary"] = evidence_summary(*row.verdict);
      if (include_timing) r["wall_time_s"] = row.verdict->wall_time;
      r["verdict"] = to_json(*row.verdict, include_timing);
      r["error"] = nullptr;
    } else {
      r["error"] = row.error;
    }
    rows.push_back(std::move(r));
  }
  nlohmann::json agg = to_json(report.aggregate);
  if (!include_timing) agg.erase("runtime_total_s");
  return {{"config", to_json(report.config)}, {"rows", rows}, {"aggregate", agg}};
}

inline std::string report_csv(const Report &report) {
  std::ostringstream out;
  out << "id,ground_truth,trigger_type,poison_probability,decided_by,wall_time_s,"
         "total_queries,evidence_summary,error\n";
  for (const ReportRow &row : report.rows) {
    out << detail::csv_field(row.id) << ',' << to_string(row.ground_truth) << ','
        << detail::csv_field(row.trigger_type) << ',';
    if (row.verdict) {
      out << detail::format_double(row.verdict->poison_probability) << ','
          << to_string(row.verdict->decided_by) << ','
          << detail::format_double(row.verdict->wall_time) << ','
          << row.verdict->total_queries << ','
          << detail::csv_field(evidence_summary(*row.verdict)) << ",\n";
    } else {
      out << ",,,,," << detail::csv_field(row.error) << '\n';
    }
  }
  return out.str();
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

// Writes report.json and report.csv into `dir`.
inline void write_report(const std::filesystem::path &dir, const Report &report) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", to_json(report).dump(2) + "\n");
  write_text(dir / "report.csv", report_csv(report));
}

enum class SweepParam { kMaxRounds, kSizeStep, kLocationCount, kThreshold };

inline const char *to_string(SweepParam p) {
  switch (p) {
    case SweepParam::kMaxRounds: return "max_rounds";
    case SweepParam::kSizeStep: return "size_step";
    case SweepParam::kLocationCount: return "location_count";
    case SweepParam::kThreshold: return "threshold";
  }
  return "?";
}

inline std::optional<SweepParam> parse_sweep_param(const std::string &name) {
  for (SweepParam p : {SweepParam::kMaxRounds, SweepParam::kSizeStep, SweepParam::kLocationCount,
                       SweepParam::kThreshold}) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

struct SweepAxis {
  SweepParam param = SweepParam::kMaxRounds;
  std::vector<double> values;
};

struct SweepPoint {
  SweepParam param = SweepParam::kMaxRounds;
  double value = 0.0;
  Report report;
};

// Config for one grid point: the base config with a single parameter
// replaced. size_step rebuilds the grid from 0.02 up to the 25% cap; the
// threshold applies to both stages.
inline ScanConfig apply_sweep_value(ScanConfig config, SweepParam param, double value) {
  switch (param) {
    case SweepParam::kMaxRounds:
      if (!(value >= 1.0) || value != static_cast<double>(static_cast<std::size_t>(value))) {
        throw InvalidParameter("max_rounds sweep values must be positive integers");
      }
      config.polygon.max_rounds = static_cast<std::size_t>(value);
      break;
    case SweepParam::kSizeStep:
      config.polygon.size_grid = make_size_grid(0.02, value, kMaxTriggerArea);
      break;
    case SweepParam::kLocationCount:
      if (!(value >= 1.0) || value != static_cast<double>(static_cast<std::size_t>(value))) {
        throw InvalidParameter("location_count sweep values must be positive integers");
      }
      config.polygon.location_count = static_cast<std::size_t>(value);
      config.polygon.locations.reset();
      break;
    case SweepParam::kThreshold:
      config.polygon.threshold = value;
      config.filter.threshold = value;
      break;
  }
  config.validate();
  return config;
}

inline std::vector<SweepPoint> sweep(const Manifest &manifest, const ScanConfig &base,
                                     const std::vector<SweepAxis> &grid, std::size_t jobs = 1) {
  std::size_t points = 0;
  for (const SweepAxis &axis : grid) points += axis.values.size();
  if (points == 0) throw InvalidParameter("sweep grid is empty");
  std::vector<SweepPoint> out;
  for (const SweepAxis &axis : grid) {
    for (double value : axis.values) {
      const ScanConfig config = apply_sweep_value(base, axis.param, value);
      out.push_back({axis.param, value, evaluate(manifest, config, jobs)});
    }
  }
  return out;
}

inline std::string sweep_csv(const std::vector<SweepPoint> &points) {
  std::ostringstream out;
  out << "param,value,roc_auc,ce_loss,runtime_s,total_queries,models_scored,models_failed\n";
  for (const SweepPoint &p : points) {
    const ReportAggregate &a = p.report.aggregate;
    out << to_string(p.param) << ',' << detail::format_double(p.value) << ','
        << (a.roc_auc ? detail::format_double(*a.roc_auc) : "") << ','
        << (a.ce_loss ? detail::format_double(*a.ce_loss) : "") << ','
        << detail::format_double(a.runtime_total) << ',' << a.total_queries << ','
        << a.models_scored << ',' << a.models_failed << '\n';
  }
  return out.str();
}

// Writes sweep.csv plus one report directory per grid point.
inline void write_sweep(const std::filesystem::path &dir, const std::vector<SweepPoint> &points) {
  std::filesystem::create_directories(dir);
  write_text(dir / "sweep.csv", sweep_csv(points));
  for (const SweepPoint &p : points) {
    write_report(dir / (std::string(to_string(p.param)) + "=" + detail::format_double(p.value)),
                 p.report);
  }
}

}  // namespace trojanscan

#endif  // TROJANSCAN_EVALUATION_HPP_
