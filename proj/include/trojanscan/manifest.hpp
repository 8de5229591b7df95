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

// Dataset-of-models description:
//
//   manifest.json
//   {"models": [{"id": "m0",
//                "oracle": {"kind": "exec|tcp|synthetic", "spec": "...",
//                           "class_count": 5},          // optional
//                "examples_dir": "models/m0/examples",
//                "ground_truth": "poisoned|clean|unknown",
//                "trigger_type": "polygon|filter|none|unknown"}]}
//
// Relative paths are resolved against the manifest's directory. For exec
// oracles `spec` is the shell command, for tcp it is HOST:PORT, and for
// synthetic it is the path of the oracle spec file.

#ifndef TROJANSCAN_MANIFEST_HPP_
#define TROJANSCAN_MANIFEST_HPP_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "trojanscan/error.hpp"
#include "trojanscan/examples_io.hpp"
#include "trojanscan/external_oracle.hpp"
#include "trojanscan/oracle.hpp"
#include "trojanscan/synthetic_oracle.hpp"

namespace trojanscan {

enum class GroundTruth { kPoisoned, kClean, kUnknown };

inline const char *to_string(GroundTruth g) {
  switch (g) {
    case GroundTruth::kPoisoned: return "poisoned";
    case GroundTruth::kClean: return "clean";
    case GroundTruth::kUnknown: return "unknown";
  }
  return "unknown";
}

struct OracleRef {
  std::string kind;  // exec, tcp or synthetic
  std::string spec;
  std::optional<std::size_t> class_count;

  std::string endpoint() const { return kind + ":" + spec; }
};

struct ManifestEntry {
  std::string id;
  OracleRef oracle;
  std::filesystem::path examples_dir;  // absolute after loading
  GroundTruth ground_truth = GroundTruth::kUnknown;
  std::string trigger_type = "unknown";
};

struct Manifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> models;
};

// Opens "exec:CMD", "tcp:HOST:PORT" or "synthetic:PATH". class_count == 0
// accepts whatever an external endpoint announces.
inline std::unique_ptr<ModelOracle> open_oracle(const std::string &endpoint,
                                                std::size_t class_count = 0,
                                                ExternalOracleOptions options = {}) {
  if (endpoint.starts_with("synthetic:")) {
    SyntheticOracleSpec spec = load_synthetic_spec(endpoint.substr(10));
    if (class_count != 0 && class_count != spec.class_count) {
      throw ConfigError("synthetic spec declares " + std::to_string(spec.class_count) +
                        " classes, expected " + std::to_string(class_count));
    }
    return make_synthetic_oracle(std::move(spec));
  }
  return connect_external_oracle(endpoint, class_count, options);
}

inline std::unique_ptr<ModelOracle> open_oracle(const ManifestEntry &entry,
                                                ExternalOracleOptions options = {}) {
  return open_oracle(entry.oracle.endpoint(), entry.oracle.class_count.value_or(0), options);
}

namespace detail {

inline std::string require_string(const nlohmann::json &j, const char *key,
                                  const std::string &where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  if (!j.at(key).is_string()) throw ConfigError(where + ": field '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

inline void check_coverage(const ManifestEntry &entry, std::size_t class_count) {
  std::set<std::size_t> seen;
  for (const auto &[name, path] : list_example_files(entry.examples_dir)) {
    if (name.label >= class_count) {
      throw ConfigError("model " + entry.id + ": " + path.filename().string() +
                        " names class " + std::to_string(name.label) + " but the model has " +
                        std::to_string(class_count) + " classes");
    }
    seen.insert(name.label);
  }
  if (seen.size() != class_count) {
    throw ConfigError("model " + entry.id + ": examples cover " + std::to_string(seen.size()) +
                      " of " + std::to_string(class_count) + " classes");
  }
}

}  // namespace detail

// Accepts the manifest directory or the manifest file itself.
inline Manifest load_manifest(const std::filesystem::path &location) {
  namespace fs = std::filesystem;
  const fs::path file = fs::is_directory(location) ? location / "manifest.json" : location;
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open manifest " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw ConfigError("manifest " + file.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("models") || !doc["models"].is_array()) {
    throw ConfigError("manifest: field 'models' must be an array");
  }

  Manifest manifest;
  manifest.root = fs::absolute(file).parent_path();
  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc["models"].size(); ++i) {
    const auto &m = doc["models"][i];
    const std::string where = "models[" + std::to_string(i) + "]";
    if (!m.is_object()) throw ConfigError(where + " must be an object");
    ManifestEntry entry;
    entry.id = detail::require_string(m, "id", where);
    if (!ids.insert(entry.id).second) throw ConfigError(where + ": duplicate id '" + entry.id + "'");

    if (!m.contains("oracle") || !m["oracle"].is_object()) {
      throw ConfigError(where + ": field 'oracle' must be an object");
    }
    const auto &o = m["oracle"];
    entry.oracle.kind = detail::require_string(o, "kind", where + ".oracle");
    entry.oracle.spec = detail::require_string(o, "spec", where + ".oracle");
    if (o.contains("class_count")) {
      if (!o["class_count"].is_number_unsigned()) {
        throw ConfigError(where + ".oracle: field 'class_count' must be a positive integer");
      }
      entry.oracle.class_count = o["class_count"].get<std::size_t>();
    }
    if (entry.oracle.kind == "synthetic") {
      fs::path spec_path = entry.oracle.spec;
      if (spec_path.is_relative()) spec_path = manifest.root / spec_path;
      entry.oracle.spec = spec_path.lexically_normal().string();
      std::size_t declared = 0;
      try {
        declared = read_synthetic_spec_header(spec_path).class_count;
      } catch (const IoError &e) {
        throw ConfigError(where + ".oracle: " + e.message());
      }
      if (entry.oracle.class_count && *entry.oracle.class_count != declared) {
        throw ConfigError(where + ".oracle: class_count disagrees with the synthetic spec");
      }
      entry.oracle.class_count = declared;
    } else if (entry.oracle.kind != "exec" && entry.oracle.kind != "tcp") {
      throw ConfigError(where + ".oracle: field 'kind' must be exec, tcp or synthetic");
    }

    fs::path examples = detail::require_string(m, "examples_dir", where);
    if (examples.is_relative()) examples = manifest.root / examples;
    entry.examples_dir = examples.lexically_normal();
    if (!fs::is_directory(entry.examples_dir)) {
      throw ConfigError(where + ": examples_dir " + entry.examples_dir.string() +
                        " does not exist");
    }

    const std::string truth = detail::require_string(m, "ground_truth", where);
    if (truth == "poisoned") {
      entry.ground_truth = GroundTruth::kPoisoned;
    } else if (truth == "clean") {
      entry.ground_truth = GroundTruth::kClean;
    } else if (truth == "unknown") {
      entry.ground_truth = GroundTruth::kUnknown;
    } else {
      throw ConfigError(where + ": field 'ground_truth' must be poisoned, clean or unknown");
    }
    if (m.contains("trigger_type")) {
      entry.trigger_type = detail::require_string(m, "trigger_type", where);
      if (entry.trigger_type != "polygon" && entry.trigger_type != "filter" &&
          entry.trigger_type != "none" && entry.trigger_type != "unknown") {
        throw ConfigError(where + ": field 'trigger_type' must be polygon, filter, none or unknown");
      }
    }

    if (list_example_files(entry.examples_dir).empty()) {
      throw ConfigError(where + ": no class_<n>_example_<m>.png files in " +
                        entry.examples_dir.string());
    }
    if (entry.oracle.class_count) detail::check_coverage(entry, *entry.oracle.class_count);
    manifest.models.push_back(std::move(entry));
  }
  return manifest;
}

inline nlohmann::json to_json(const Manifest &manifest) {
  namespace fs = std::filesystem;
  nlohmann::json models = nlohmann::json::array();
  for (const auto &e : manifest.models) {
    nlohmann::json oracle = {{"kind", e.oracle.kind}, {"spec", e.oracle.spec}};
    if (e.oracle.kind == "synthetic") {
      oracle["spec"] = fs::path(e.oracle.spec).lexically_relative(manifest.root).string();
    }
    if (e.oracle.class_count) oracle["class_count"] = *e.oracle.class_count;
    models.push_back({{"id", e.id},
                      {"oracle", oracle},
                      {"examples_dir", e.examples_dir.lexically_relative(manifest.root).string()},
                      {"ground_truth", to_string(e.ground_truth)},
                      {"trigger_type", e.trigger_type}});
  }
  return {{"models", models}};
}

}  // namespace trojanscan

#endif  // TROJANSCAN_MANIFEST_HPP_
