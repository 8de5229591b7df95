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

#ifndef TROJANSCAN_EXAMPLES_IO_HPP_
#define TROJANSCAN_EXAMPLES_IO_HPP_

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trojanscan/error.hpp"
#include "trojanscan/image.hpp"
#include "trojanscan/png_io.hpp"

namespace trojanscan {

struct LabeledExample {
  std::string id;  // file stem, e.g. class_3_example_0
  std::size_t label = 0;
  std::size_t index = 0;
  Image image;
};

// Clean images keyed by class index.
using ExampleSet = std::map<std::size_t, std::vector<Image>>;

struct ExampleName {
  std::size_t label = 0;
  std::size_t index = 0;
};

namespace detail {
inline bool parse_index(std::string_view text, std::size_t &out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}
}  // namespace detail

// Parses class_<n>_example_<m>.png.
inline std::optional<ExampleName> parse_example_filename(std::string_view name) {
  constexpr std::string_view kPrefix = "class_";
  constexpr std::string_view kMiddle = "_example_";
  constexpr std::string_view kSuffix = ".png";
  if (!name.starts_with(kPrefix) || !name.ends_with(kSuffix)) return std::nullopt;
  name.remove_prefix(kPrefix.size());
  name.remove_suffix(kSuffix.size());
  const auto mid = name.find(kMiddle);
  if (mid == std::string_view::npos) return std::nullopt;
  ExampleName out;
  if (!detail::parse_index(name.substr(0, mid), out.label) ||
      !detail::parse_index(name.substr(mid + kMiddle.size()), out.index)) {
    return std::nullopt;
  }
  return out;
}

inline std::string example_id(std::size_t label, std::size_t index) {
  return "class_" + std::to_string(label) + "_example_" + std::to_string(index);
}

// Lists matching files in (class, index) order without decoding them.
// Other files in the directory are ignored.
inline std::vector<std::pair<ExampleName, std::filesystem::path>> list_example_files(
    const std::filesystem::path &dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("examples directory not found: " + dir.string());
  }
  std::vector<std::pair<ExampleName, std::filesystem::path>> files;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (auto parsed = parse_example_filename(entry.path().filename().string())) {
      files.emplace_back(*parsed, entry.path());
    }
  }
  std::sort(files.begin(), files.end(), [](const auto &a, const auto &b) {
    return std::pair(a.first.label, a.first.index) <
           std::pair(b.first.label, b.first.index);
  });
  return files;
}

// Loads every example in `dir`; unreadable files raise IoError naming the file.
inline std::vector<LabeledExample> load_examples(const std::filesystem::path &dir) {
  std::vector<LabeledExample> out;
  for (const auto &[name, path] : list_example_files(dir)) {
    out.push_back({path.stem().string(), name.label, name.index, read_png(path)});
  }
  if (out.empty()) throw IoError("no class_<n>_example_<m>.png files in " + dir.string());
  return out;
}

inline ExampleSet to_example_set(const std::vector<LabeledExample> &examples) {
  ExampleSet set;
  for (const auto &ex : examples) set[ex.label].push_back(ex.image);
  return set;
}

inline std::size_t total_examples(const ExampleSet &set) {
  std::size_t n = 0;
  for (const auto &[label, images] : set) n += images.size();
  return n;
}

}  // namespace trojanscan

#endif  // TROJANSCAN_EXAMPLES_IO_HPP_
