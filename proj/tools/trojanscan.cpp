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

// trojanscan: scan one model, evaluate a manifest, run sweeps, generate a
// synthetic benchmark or regenerate the filter goldens.
//
// Exit codes: 0 success, 1 scan found a trojan, 2 usage error, 3 runtime
// error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trojanscan.hpp"

namespace fs = std::filesystem;
using namespace trojanscan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPoisoned = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string stage;
  bool no_timing = false;
};

void add_common(CLI::App *cmd, CommonFlags &flags) {
  cmd->add_option("--config", flags.config, "JSON scan configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "seed for the polygon color draws (overrides config)");
  cmd->add_option("--stage", flags.stage, "stages to run (overrides config)")
      ->check(CLI::IsMember({"both", "polygon", "filter"}));
  cmd->add_flag("--no-timing", flags.no_timing, "omit wall-clock fields from JSON output");
}

ScanConfig effective_config(const CommonFlags &flags) {
  ScanConfig config = flags.config.empty() ? ScanConfig{} : load_scan_config(flags.config);
  if (flags.seed) config.polygon.seed = *flags.seed;
  if (!flags.stage.empty()) config.stages = parse_stage_selection(flags.stage);
  config.validate();
  return config;
}

std::string verdict_line(const Verdict &v) {
  std::ostringstream out;
  out << (v.decided_by == DecidedBy::kNone ? "CLEAN" : "POISONED")
      << " p=" << v.poison_probability << " decided_by=" << to_string(v.decided_by)
      << " trigger=" << v.trigger_type() << " queries=" << v.total_queries;
  const std::string evidence = evidence_summary(v);
  if (!evidence.empty()) out << " evidence=\"" << evidence << "\"";
  return out.str();
}

int run_scan(const std::string &oracle_spec, const fs::path &examples, const fs::path &out_dir,
             const CommonFlags &flags) {
  const ScanConfig config = effective_config(flags);
  ExternalOracleOptions options;
  options.input_dims = config.input_dims;
  auto oracle = open_oracle(oracle_spec, 0, options);
  const ExampleSet set = prepare_examples(examples, config.input_dims, oracle->class_count());

  nlohmann::json doc = {{"oracle", oracle_spec},
                        {"examples", examples.string()},
                        {"config", to_json(config)}};
  fs::create_directories(out_dir);
  try {
    const Verdict verdict = scan_model(*oracle, set, config);
    doc["verdict"] = to_json(verdict, !flags.no_timing);
    write_text(out_dir / "verdict.json", doc.dump(2) + "\n");
    std::cout << verdict_line(verdict) << "\n";
    return verdict.decided_by == DecidedBy::kNone ? kExitOk : kExitPoisoned;
  } catch (const ScanError &e) {
    doc["verdict"] = to_json(e.partial(), !flags.no_timing);
    doc["error"] = e.what();
    write_text(out_dir / "verdict.json", doc.dump(2) + "\n");
    throw;
  }
}

void print_aggregate(const ReportAggregate &agg) {
  std::cout << "models scored " << agg.models_scored << ", failed " << agg.models_failed;
  if (agg.roc_auc) std::cout << ", roc_auc " << *agg.roc_auc;
  if (agg.ce_loss) std::cout << ", ce_loss " << *agg.ce_loss;
  std::cout << ", runtime " << agg.runtime_total << "s\n";
  for (const std::string &e : agg.errors) std::cout << "  " << e << "\n";
}

int run_evaluate(const fs::path &root, const fs::path &out_dir, std::size_t jobs,
                 const CommonFlags &flags) {
  const ScanConfig config = effective_config(flags);
  const Manifest manifest = load_manifest(root);
  const Report report = evaluate(manifest, config, jobs);
  fs::create_directories(out_dir);
  write_text(out_dir / "report.json", to_json(report, !flags.no_timing).dump(2) + "\n");
  write_text(out_dir / "report.csv", report_csv(report));
  print_aggregate(report.aggregate);
  return kExitOk;
}

// PARAM=V1,V2,... with PARAM one of max_rounds, size_step, location_count,
// threshold.
SweepAxis parse_axis(const std::string &text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("--grid expects PARAM=V1,V2,..., got '" + text + "'");
  const auto param = parse_sweep_param(text.substr(0, eq));
  if (!param) throw ConfigError("unknown sweep parameter '" + text.substr(0, eq) + "'");
  SweepAxis axis{*param, {}};
  std::stringstream values(text.substr(eq + 1));
  for (std::string item; std::getline(values, item, ',');) {
    try {
      std::size_t used = 0;
      axis.values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error &) {
      throw ConfigError("bad sweep value '" + item + "'");
    }
  }
  if (axis.values.empty()) throw ConfigError("sweep parameter " + text.substr(0, eq) + " has no values");
  return axis;
}

int run_sweep(const fs::path &root, const fs::path &out_dir, const std::vector<std::string> &grid,
              std::size_t jobs, const CommonFlags &flags) {
  const ScanConfig config = effective_config(flags);
  std::vector<SweepAxis> axes;
  for (const std::string &g : grid) axes.push_back(parse_axis(g));
  const Manifest manifest = load_manifest(root);
  const auto points = sweep(manifest, config, axes, jobs);
  write_sweep(out_dir, points);
  for (const SweepPoint &p : points) {
    std::cout << to_string(p.param) << "=" << p.value << ": ";
    print_aggregate(p.report.aggregate);
  }
  return kExitOk;
}

int run_filters_golden(const fs::path &out_dir, bool force) {
  // Same inputs as the committed corpus; see docs/filters.md.
  std::vector<std::uint8_t> bytes(8 * 8 * 3);
  fs::create_directories(out_dir);
  for (FilterType f : kAllFilters) {
    const std::size_t k = static_cast<std::size_t>(f);
    for (std::size_t y = 0; y < 8; ++y) {
      for (std::size_t x = 0; x < 8; ++x) {
        std::uint8_t *px = &bytes[(y * 8 + x) * 3];
        px[0] = static_cast<std::uint8_t>((37 * x + 11 * y + 53 * k) % 256);
        px[1] = static_cast<std::uint8_t>((13 * x + 59 * y + 29 * k + 7) % 256);
        px[2] = static_cast<std::uint8_t>((7 * x * y + 23 * x + 17 * k + 91) % 256);
      }
    }
    const Image in = Image::from_bytes(8, 8, bytes);
    const fs::path in_path = out_dir / (std::string(to_string(f)) + "_in.png");
    const fs::path out_path = out_dir / (std::string(to_string(f)) + "_out.png");
    if (!force && (fs::exists(in_path) || fs::exists(out_path))) {
      throw IoError(out_path.string() + " exists; pass --force to overwrite");
    }
    write_png(in_path, in);
    write_png(out_path, apply_filter(in, f));
    std::cout << "wrote " << out_path.string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Black-box trojan scanner for image classifiers"};
  app.require_subcommand(1);

  CommonFlags common;
  std::string oracle_spec;
  std::string examples;
  std::string out_dir;
  std::string root;
  std::size_t jobs = 1;
  std::vector<std::string> grid;

  auto *scan = app.add_subcommand("scan", "scan one model and write verdict.json");
  scan->add_option("--oracle", oracle_spec, "exec:CMD | tcp:HOST:PORT | synthetic:PATH")
      ->required();
  scan->add_option("--examples", examples, "directory of class_<n>_example_<m>.png")
      ->required()
      ->check(CLI::ExistingDirectory);
  scan->add_option("--out", out_dir, "output directory (default: current directory)");
  add_common(scan, common);

  auto *eval = app.add_subcommand("evaluate", "scan every model of a manifest");
  eval->add_option("root", root, "manifest directory or manifest.json")->required();
  eval->add_option("--out", out_dir, "output directory (default: manifest directory)");
  eval->add_option("--jobs", jobs, "models scanned concurrently")->check(CLI::PositiveNumber);
  add_common(eval, common);

  auto *sw = app.add_subcommand("sweep", "evaluate a manifest over a parameter grid");
  sw->add_option("root", root, "manifest directory or manifest.json")->required();
  sw->add_option("--grid", grid,
                 "PARAM=V1,V2,... with PARAM in max_rounds, size_step, location_count, threshold")
      ->required();
  sw->add_option("--out", out_dir, "output directory (default: <manifest dir>/sweep)");
  sw->add_option("--jobs", jobs, "models scanned concurrently")->check(CLI::PositiveNumber);
  add_common(sw, common);

  BenchOptions bench;
  auto *synth = app.add_subcommand("synth-bench", "write a synthetic benchmark manifest");
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--poisoned", bench.poisoned, "number of poisoned models");
  synth->add_option("--clean", bench.clean, "number of clean models");
  synth->add_option("--seed", bench.seed, "generator seed");
  synth->add_option("--filter-share", bench.filter_share,
                    "share of poisoned models with a filter trigger")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--classes", bench.class_count, "classes per model");
  synth->add_option("--examples-per-class", bench.examples_per_class, "examples per class");

  bool force = false;
  auto *golden = app.add_subcommand("filters-golden", "regenerate the filter golden images");
  golden->add_option("--out", out_dir, "output directory")->required();
  golden->add_flag("--force", force, "overwrite existing files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*scan) return run_scan(oracle_spec, examples, out_dir.empty() ? "." : out_dir, common);
    if (*eval) {
      const fs::path base = fs::is_directory(root) ? fs::path(root) : fs::path(root).parent_path();
      return run_evaluate(root, out_dir.empty() ? base : fs::path(out_dir), jobs, common);
    }
    if (*sw) {
      const fs::path base = fs::is_directory(root) ? fs::path(root) : fs::path(root).parent_path();
      return run_sweep(root, out_dir.empty() ? base / "sweep" : fs::path(out_dir), grid, jobs,
                       common);
    }
    if (*synth) {
      const Manifest m = write_synthetic_benchmark(out_dir, bench);
      std::cout << "wrote " << m.models.size() << " models to " << m.root.string() << "\n";
      return kExitOk;
    }
    if (*golden) return run_filters_golden(out_dir, force);
  } catch (const std::exception &e) {
    std::cerr << "trojanscan: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
