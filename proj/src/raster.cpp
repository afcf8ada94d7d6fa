// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/raster.hpp"

#include <algorithm>

#include "sdrcnn/error.hpp"

namespace sdrcnn {

Raster::Raster(int bands, int height, int width, double fill)
    : bands_(bands), height_(height), width_(width) {
  if (bands < 0 || height < 0 || width < 0)
    throw ShapeError("negative raster dimension");
  values_.assign(static_cast<std::size_t>(bands) * height * width, fill);
}

Raster::Raster(int bands, int height, int width, std::vector<double> values)
    : bands_(bands), height_(height), width_(width), values_(std::move(values)) {
  if (bands < 0 || height < 0 || width < 0)
    throw ShapeError("negative raster dimension");
  if (values_.size() != static_cast<std::size_t>(bands) * height * width)
    throw ShapeError("raster payload size does not match " + shape_string());
}

std::span<double> Raster::band(int b) {
  return std::span<double>(values_).subspan(b * pixels(), pixels());
}

std::span<const double> Raster::band(int b) const {
  return std::span<const double>(values_).subspan(b * pixels(), pixels());
}

std::string Raster::shape_string() const {
  return std::to_string(bands_) + "x" + std::to_string(height_) + "x" +
         std::to_string(width_);
}

Raster Raster::crop(int y0, int x0, int h, int w) const {
  if (y0 < 0 || x0 < 0 || h < 0 || w < 0 || y0 + h > height_ ||
      x0 + w > width_)
    throw ShapeError("crop window outside raster " + shape_string());
  Raster out(bands_, h, w);
  for (int b = 0; b < bands_; ++b)
    for (int y = 0; y < h; ++y) {
      const double* src = &values_[(static_cast<std::size_t>(b) * height_ + y0 + y) * width_ + x0];
      std::copy(src, src + w, &out.at(b, y, 0));
    }
  return out;
}

Raster Raster::extract_band(int b) const {
  if (b < 0 || b >= bands_) throw ShapeError("band index out of range");
  auto src = band(b);
  return Raster(1, height_, width_, std::vector<double>(src.begin(), src.end()));
}

}  // namespace sdrcnn
