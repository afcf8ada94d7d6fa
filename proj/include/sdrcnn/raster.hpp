// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sdrcnn {

/// In-memory multi-band image, band-major then row-major.
///
/// Used for every image role in the toolkit (PAN, MS, LRMS, GT, HRMS, error
/// maps). Values are stored as double regardless of the on-disk dtype.
class Raster {
 public:
  Raster() = default;
  Raster(int bands, int height, int width, double fill = 0.0);
  Raster(int bands, int height, int width, std::vector<double> values);

  int bands() const { return bands_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixels() const {
    return static_cast<std::size_t>(height_) * width_;
  }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& at(int b, int y, int x) {
    return values_[(static_cast<std::size_t>(b) * height_ + y) * width_ + x];
  }
  double at(int b, int y, int x) const {
    return values_[(static_cast<std::size_t>(b) * height_ + y) * width_ + x];
  }

  std::span<double> band(int b);
  std::span<const double> band(int b) const;
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const Raster& other) const {
    return bands_ == other.bands_ && height_ == other.height_ &&
           width_ == other.width_;
  }
  std::string shape_string() const;

  /// Copy of a spatial window [y0, y0+h) x [x0, x0+w) over all bands.
  Raster crop(int y0, int x0, int h, int w) const;
  /// Single-band copy of band `b`.
  Raster extract_band(int b) const;

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int bands_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

}  // namespace sdrcnn
