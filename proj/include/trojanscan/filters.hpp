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

// Photo-filter transforms used as feature-space trigger candidates.
//
// Coefficients and evaluation order are documented in docs/filters.md. Only
// + - * / and floor are used so results are reproducible bit for bit; the
// library is compiled with -ffp-contract=off to keep it that way.

#ifndef TROJANSCAN_FILTERS_HPP_
#define TROJANSCAN_FILTERS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trojanscan/error.hpp"
#include "trojanscan/image.hpp"

namespace trojanscan {

enum class FilterType : int {
  kGotham = 0,
  kNashville = 1,
  kKelvin = 2,
  kLomo = 3,
  kToaster = 4,
};

inline constexpr std::array<FilterType, 5> kAllFilters = {
    FilterType::kGotham, FilterType::kNashville, FilterType::kKelvin,
    FilterType::kLomo, FilterType::kToaster};

inline std::vector<FilterType> list_filters() {
  return {kAllFilters.begin(), kAllFilters.end()};
}

inline int code(FilterType f) { return static_cast<int>(f); }

inline const char *to_string(FilterType f) {
  switch (f) {
    case FilterType::kGotham: return "Gotham";
    case FilterType::kNashville: return "Nashville";
    case FilterType::kKelvin: return "Kelvin";
    case FilterType::kLomo: return "Lomo";
    case FilterType::kToaster: return "Toaster";
  }
  return "?";
}

inline std::optional<FilterType> parse_filter(std::string_view name) {
  for (FilterType f : kAllFilters) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

struct FilterCoefficients {
  std::array<std::array<double, 3>, 3> mix;
  std::array<double, 3> bias;
  double saturation;
  std::array<std::array<double, 5>, 3> curve;  // knots per channel
  double vignette;
};

inline const FilterCoefficients &coefficients(FilterType f) {
  static constexpr std::array<std::array<double, 3>, 3> kIdentity = {
      {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  static const std::array<FilterCoefficients, 5> kTable = {{
      // Gotham
      {kIdentity,
       {0.0, 0.0, 0.0},
       0.0,
       {{{0.0, 0.18, 0.5, 0.82, 1.0},
         {0.0, 0.18, 0.5, 0.82, 1.0},
         {0.0, 0.18, 0.5, 0.82, 1.0}}},
       0.2},
      // Nashville
      {{{{0.9, 0.05, 0.05}, {0.05, 0.85, 0.1}, {0.05, 0.1, 0.8}}},
       {0.08, 0.03, 0.07},
       0.8,
       {{{0.1, 0.35, 0.62, 0.85, 1.0},
         {0.05, 0.28, 0.55, 0.8, 0.97},
         {0.12, 0.33, 0.55, 0.76, 0.92}}},
       0.0},
      // Kelvin
      {{{{0.393, 0.769, 0.189}, {0.349, 0.686, 0.168}, {0.272, 0.534, 0.131}}},
       {0.0, 0.0, 0.0},
       1.6,
       {{{0.0, 0.3, 0.62, 0.88, 1.0},
         {0.0, 0.24, 0.5, 0.76, 0.95},
         {0.0, 0.16, 0.36, 0.6, 0.8}}},
       0.0},
      // Lomo
      {kIdentity,
       {0.0, 0.0, 0.0},
       1.3,
       {{{0.0, 0.15, 0.5, 0.85, 1.0},
         {0.0, 0.18, 0.52, 0.86, 1.0},
         {0.05, 0.2, 0.48, 0.8, 0.95}}},
       0.6},
      // Toaster
      {{{{1.0, 0.1, 0.0}, {0.0, 0.9, 0.05}, {0.0, 0.05, 0.8}}},
       {0.1, 0.04, 0.0},
       0.9,
       {{{0.15, 0.42, 0.7, 0.9, 1.0},
         {0.05, 0.3, 0.56, 0.8, 0.95},
         {0.0, 0.2, 0.45, 0.7, 0.85}}},
       0.35},
  }};
  return kTable[static_cast<std::size_t>(code(f))];
}

namespace detail {

inline double clamp01(double v) { return std::min(std::max(v, 0.0), 1.0); }

inline double tone_curve(const std::array<double, 5> &knots, double s) {
  const double t = s * 4.0;
  auto j = static_cast<std::size_t>(std::floor(t));
  if (j > 3) j = 3;
  const double u = t - static_cast<double>(j);
  return knots[j] + (knots[j + 1] - knots[j]) * u;
}

}  // namespace detail

inline Image apply_filter(const Image &image, FilterType filter) {
  const FilterCoefficients &fc = coefficients(filter);
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  std::vector<double> out(h * w * Image::kChannels);

  for (std::size_t y = 0; y < h; ++y) {
    const double dy = (static_cast<double>(y) + 0.5) / static_cast<double>(h) - 0.5;
    for (std::size_t x = 0; x < w; ++x) {
      const double dx = (static_cast<double>(x) + 0.5) / static_cast<double>(w) - 0.5;
      const double d2 = dx * dx + dy * dy;
      const double gain = 1.0 - fc.vignette * (d2 * 2.0);

      const double r = image(y, x, 0);
      const double g = image(y, x, 1);
      const double b = image(y, x, 2);
      double m[3];
      for (std::size_t i = 0; i < 3; ++i) {
        m[i] = ((fc.mix[i][0] * r + fc.mix[i][1] * g) + fc.mix[i][2] * b) + fc.bias[i];
      }
      const double lum = (0.299 * m[0] + 0.587 * m[1]) + 0.114 * m[2];
      for (std::size_t i = 0; i < 3; ++i) {
        const double s = detail::clamp01(lum + fc.saturation * (m[i] - lum));
        const double c = detail::tone_curve(fc.curve[i], s);
        out[(y * w + x) * Image::kChannels + i] = detail::clamp01(c * gain);
      }
    }
  }
  return Image(h, w, std::move(out));
}

}  // namespace trojanscan

#endif  // TROJANSCAN_FILTERS_HPP_
