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

// Pixel containers shared by every stage: RGB images with values in [0,1],
// binary masks and 8-bit colors.

#ifndef TROJANSCAN_IMAGE_HPP_
#define TROJANSCAN_IMAGE_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trojanscan/error.hpp"

namespace trojanscan {

struct Dims {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t area() const { return height * width; }
  friend bool operator==(const Dims &, const Dims &) = default;
};

inline std::string to_string(const Dims &dims) {
  return std::to_string(dims.height) + "x" + std::to_string(dims.width);
}

// 8-bit quantization used at every I/O boundary: floor(v*255 + 0.5), clamped.
inline std::uint8_t to_byte(double value) {
  const double scaled = std::floor(value * 255.0 + 0.5);
  if (!(scaled > 0.0)) return 0;
  if (scaled >= 255.0) return 255;
  return static_cast<std::uint8_t>(scaled);
}

inline double from_byte(std::uint8_t byte) { return byte / 255.0; }

// H x W x 3 image, row-major, channels interleaved in RGB order. Every
// stored value lies in [0,1].
class Image {
 public:
  static constexpr std::size_t kChannels = 3;

  Image(std::size_t height, std::size_t width, double fill = 0.0)
      : dims_(checked_dims(height, width)) {
    if (!(fill >= 0.0 && fill <= 1.0)) {
      throw InvalidParameter("image fill value outside [0,1]");
    }
    values_.assign(height * width * kChannels, fill);
  }

  Image(std::size_t height, std::size_t width, std::vector<double> values)
      : dims_(checked_dims(height, width)), values_(std::move(values)) {
    if (values_.size() != height * width * kChannels) {
      throw InvalidParameter("image buffer holds " +
                             std::to_string(values_.size()) + " values, expected " +
                             std::to_string(height * width * kChannels));
    }
    for (double v : values_) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidParameter("image value outside [0,1]");
      }
    }
  }

  static Image from_bytes(std::size_t height, std::size_t width,
                          std::span<const std::uint8_t> bytes) {
    if (bytes.size() != height * width * kChannels) {
      throw InvalidParameter("byte buffer size does not match " +
                             std::to_string(height) + "x" + std::to_string(width) +
                             "x3");
    }
    std::vector<double> values(bytes.size());
    std::transform(bytes.begin(), bytes.end(), values.begin(), from_byte);
    return Image(height, width, std::move(values));
  }

  std::vector<std::uint8_t> to_bytes() const {
    std::vector<std::uint8_t> bytes(values_.size());
    std::transform(values_.begin(), values_.end(), bytes.begin(), to_byte);
    return bytes;
  }

  std::size_t height() const { return dims_.height; }
  std::size_t width() const { return dims_.width; }
  std::size_t channels() const { return kChannels; }
  const Dims &dims() const { return dims_; }

  double operator()(std::size_t row, std::size_t col, std::size_t ch) const {
    return values_[index(row, col, ch)];
  }

  // Stores v clamped to [0,1]. NaN is rejected.
  void set(std::size_t row, std::size_t col, std::size_t ch, double v) {
    if (std::isnan(v)) throw InvalidParameter("NaN pixel value");
    values_[index(row, col, ch)] = std::clamp(v, 0.0, 1.0);
  }

  std::span<const double> values() const { return values_; }

  friend bool operator==(const Image &, const Image &) = default;

 private:
  static Dims checked_dims(std::size_t height, std::size_t width) {
    if (height < 1 || width < 1) {
      throw InvalidParameter("image dimensions must be at least 1x1");
    }
    return {height, width};
  }

  std::size_t index(std::size_t row, std::size_t col, std::size_t ch) const {
    return (row * dims_.width + col) * kChannels + ch;
  }

  Dims dims_;
  std::vector<double> values_;
};

// Binary map over an image's pixel grid; entries are 0 or 1.
class Mask {
 public:
  explicit Mask(Dims dims) : dims_(dims), bits_(dims.area(), 0) {
    if (dims.height < 1 || dims.width < 1) {
      throw InvalidParameter("mask dimensions must be at least 1x1");
    }
  }

  const Dims &dims() const { return dims_; }
  std::size_t height() const { return dims_.height; }
  std::size_t width() const { return dims_.width; }

  bool operator()(std::size_t row, std::size_t col) const {
    return bits_[row * dims_.width + col] != 0;
  }
  void set(std::size_t row, std::size_t col, bool on) {
    bits_[row * dims_.width + col] = on ? 1 : 0;
  }

  std::size_t ones() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
  }

  friend bool operator==(const Mask &, const Mask &) = default;

 private:
  Dims dims_;
  std::vector<std::uint8_t> bits_;
};

struct Color {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  std::uint8_t channel(std::size_t k) const { return k == 0 ? r : (k == 1 ? g : b); }
  double normalized(std::size_t k) const { return from_byte(channel(k)); }

  friend bool operator==(const Color &, const Color &) = default;
};

namespace detail {
// a + (b - a) * t keeps constants exact, unlike a*(1-t) + b*t.
inline double lerp(double a, double b, double t) { return a + (b - a) * t; }
}  // namespace detail

// Bilinear resampling with half-pixel centers and edge clamping. Identical
// dimensions return an exact copy.
inline Image resize_bilinear(const Image &image, Dims dims) {
  if (dims.height < 1 || dims.width < 1) {
    throw InvalidParameter("resize target must be at least 1x1");
  }
  if (image.dims() == dims) return image;
  using detail::lerp;

  const double sy = static_cast<double>(image.height()) / dims.height;
  const double sx = static_cast<double>(image.width()) / dims.width;
  const auto max_row = static_cast<double>(image.height() - 1);
  const auto max_col = static_cast<double>(image.width() - 1);

  std::vector<double> out(dims.area() * Image::kChannels);
  for (std::size_t r = 0; r < dims.height; ++r) {
    const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, max_row);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (std::size_t c = 0; c < dims.width; ++c) {
      const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, max_col);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      for (std::size_t k = 0; k < Image::kChannels; ++k) {
        const double top = lerp(image(y0, x0, k), image(y0, x1, k), wx);
        const double bottom = lerp(image(y1, x0, k), image(y1, x1, k), wx);
        const double v = lerp(top, bottom, wy);
        out[(r * dims.width + c) * Image::kChannels + k] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return Image(dims.height, dims.width, std::move(out));
}

}  // namespace trojanscan

#endif  // TROJANSCAN_IMAGE_HPP_
