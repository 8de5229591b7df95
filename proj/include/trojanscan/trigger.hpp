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

// Square approximations of polygon triggers and their embedding into images.
//
// A polygon trigger of unknown shape is searched as an axis-aligned square
// whose area is a fraction of the image area. Embedding overwrites the masked
// pixels with color + theta * pixel; theta is 0 for polygon triggers so the
// square is a solid patch.

#ifndef TROJANSCAN_TRIGGER_HPP_
#define TROJANSCAN_TRIGGER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "trojanscan/error.hpp"
#include "trojanscan/image.hpp"

namespace trojanscan {

// Pixel position; x is the column, y the row.
struct Point {
  std::size_t x = 0;
  std::size_t y = 0;

  friend bool operator==(const Point &, const Point &) = default;
};

struct TriggerSpec {
  Point center;
  double area_fraction = 0.0;
  Color color;
  double blend_theta = 0.0;

  friend bool operator==(const TriggerSpec &, const TriggerSpec &) = default;
};

// Pixel extent of a square trigger: rows [top, top+side), cols [left, left+side).
struct SquareRegion {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t side = 0;

  friend bool operator==(const SquareRegion &, const SquareRegion &) = default;
};

inline std::size_t square_side(double area_fraction, Dims dims) {
  const double side = std::round(std::sqrt(area_fraction * dims.area()));
  const auto limit = static_cast<double>(std::min(dims.height, dims.width));
  return static_cast<std::size_t>(std::clamp(side, 1.0, limit));
}

// Side is round(sqrt(f*H*W)); the square is centered on `center` and shifted
// back inside the image when it would cross a border.
inline SquareRegion square_region(Point center, double area_fraction, Dims dims) {
  if (!(area_fraction > 0.0 && area_fraction < 1.0)) {
    throw InvalidParameter("area_fraction must lie in (0,1), got " +
                           std::to_string(area_fraction));
  }
  if (dims.height < 1 || dims.width < 1) {
    throw InvalidParameter("dimensions must be at least 1x1");
  }
  if (center.x >= dims.width || center.y >= dims.height) {
    throw InvalidParameter("center (" + std::to_string(center.x) + "," +
                           std::to_string(center.y) + ") outside " + to_string(dims));
  }
  const std::size_t side = square_side(area_fraction, dims);
  const std::size_t half = side / 2;
  const std::size_t top = std::min(center.y > half ? center.y - half : 0,
                                   dims.height - side);
  const std::size_t left = std::min(center.x > half ? center.x - half : 0,
                                    dims.width - side);
  return {top, left, side};
}

inline Mask make_square_mask(Point center, double area_fraction, Dims dims) {
  const SquareRegion sq = square_region(center, area_fraction, dims);
  Mask mask(dims);
  for (std::size_t r = sq.top; r < sq.top + sq.side; ++r) {
    for (std::size_t c = sq.left; c < sq.left + sq.side; ++c) mask.set(r, c, true);
  }
  return mask;
}

// out = color + theta * in where the mask is set (clamped to [0,1]),
// out = in elsewhere.
inline Image embed_trigger(const Image &image, const Mask &mask, const Color &color,
                           double theta) {
  if (!(mask.dims() == image.dims())) {
    throw InvalidParameter("mask " + to_string(mask.dims()) +
                           " does not match image " + to_string(image.dims()));
  }
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw InvalidParameter("theta must lie in [0,1]");
  }
  const double base[3] = {color.normalized(0), color.normalized(1),
                          color.normalized(2)};
  Image out = image;
  for (std::size_t r = 0; r < image.height(); ++r) {
    for (std::size_t c = 0; c < image.width(); ++c) {
      if (!mask(r, c)) continue;
      for (std::size_t k = 0; k < Image::kChannels; ++k) {
        out.set(r, c, k, base[k] + theta * image(r, c, k));
      }
    }
  }
  return out;
}

inline Image embed_trigger(const Image &image, const TriggerSpec &spec) {
  return embed_trigger(image, make_square_mask(spec.center, spec.area_fraction,
                                               image.dims()),
                       spec.color, spec.blend_theta);
}

// Centers of the four equal quadrants, ordered x-major: (W/4,H/4), (W/4,3H/4),
// (3W/4,H/4), (3W/4,3H/4).
inline std::vector<Point> quadrant_centers(Dims dims) {
  const std::size_t xs[2] = {dims.width / 4, 3 * dims.width / 4};
  const std::size_t ys[2] = {dims.height / 4, 3 * dims.height / 4};
  std::vector<Point> points;
  for (std::size_t x : xs) {
    for (std::size_t y : ys) points.push_back({x, y});
  }
  return points;
}

// {min, min+step, ...} strictly below max. Each value is min + k*step, so
// no error accumulates along the grid.
inline std::vector<double> make_size_grid(double min, double step, double max) {
  if (!(min > 0.0 && step > 0.0 && max > min && max < 1.0)) {
    throw InvalidParameter("size grid needs 0 < min < max < 1 and step > 0");
  }
  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double value = min + static_cast<double>(k) * step;
    if (value >= max - 1e-9) break;
    grid.push_back(value);
  }
  return grid;
}

// Full cross product, locations outer and sizes inner, both in input order.
inline std::vector<TriggerSpec> generate_candidates(Dims dims,
                                                    std::span<const double> size_grid,
                                                    std::span<const Point> locations,
                                                    Color color) {
  if (size_grid.empty()) throw InvalidParameter("size grid is empty");
  if (locations.empty()) throw InvalidParameter("location list is empty");
  for (double f : size_grid) {
    if (!(f > 0.0 && f < 1.0)) {
      throw InvalidParameter("size grid value " + std::to_string(f) + " outside (0,1)");
    }
  }
  for (const Point &p : locations) {
    if (p.x >= dims.width || p.y >= dims.height) {
      throw InvalidParameter("location outside " + to_string(dims));
    }
  }
  std::vector<TriggerSpec> specs;
  specs.reserve(size_grid.size() * locations.size());
  for (const Point &p : locations) {
    for (double f : size_grid) specs.push_back({p, f, color, 0.0});
  }
  return specs;
}

// Deterministic color source. mt19937_64 output is fixed by the standard;
// taking the top byte of each draw is exactly uniform over [0,255].
class ColorSampler {
 public:
  explicit ColorSampler(std::uint64_t seed) : engine_(seed) {}

  Color operator()() {
    Color c;
    c.r = next_byte();
    c.g = next_byte();
    c.b = next_byte();
    return c;
  }

 private:
  std::uint8_t next_byte() { return static_cast<std::uint8_t>(engine_() >> 56); }

  std::mt19937_64 engine_;
};

inline Color sample_color(ColorSampler &sampler) { return sampler(); }

}  // namespace trojanscan

#endif  // TROJANSCAN_TRIGGER_HPP_
