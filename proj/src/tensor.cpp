// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "sdrcnn/error.hpp"

namespace sdrcnn::nn {

std::string Shape4::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
         std::to_string(h) + "," + std::to_string(w) + ")";
}

Tensor::Tensor(Shape4 shape, double fill) : shape_(shape) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0)
    throw ShapeError("negative tensor dimension " + shape.str());
  data_.assign(shape.numel(), fill);
}

Tensor::Tensor(Shape4 shape, std::vector<double> values)
    : shape_(shape), data_(std::move(values)) {
  if (data_.size() != shape.numel())
    throw ShapeError("tensor payload size does not match " + shape.str());
}

void Tensor::ensure_grad() {
  if (grad_.size() != data_.size()) grad_.assign(data_.size(), 0.0);
}

void Tensor::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor Tensor::slice_batch(int first, int count) const {
  if (first < 0 || count < 0 || first + count > shape_.n)
    throw ShapeError("batch slice out of range for " + shape_.str());
  Shape4 s = shape_;
  s.n = count;
  const std::size_t per = static_cast<std::size_t>(shape_.c) * shape_.plane();
  return Tensor(s, std::vector<double>(data_.begin() + first * per,
                                       data_.begin() + (first + count) * per));
}

Tensor from_raster(const Raster& r) {
  auto v = r.values();
  return Tensor({1, r.bands(), r.height(), r.width()},
                std::vector<double>(v.begin(), v.end()));
}

Tensor stack_rasters(std::span<const Raster> rs) {
  if (rs.empty()) throw ShapeError("cannot stack an empty raster list");
  const Raster& first = rs.front();
  std::vector<double> values;
  values.reserve(first.size() * rs.size());
  for (const Raster& r : rs) {
    if (!r.same_shape(first))
      throw ShapeError("stack of mismatched rasters " + first.shape_string() +
                       " vs " + r.shape_string());
    values.insert(values.end(), r.values().begin(), r.values().end());
  }
  return Tensor({static_cast<int>(rs.size()), first.bands(), first.height(),
                 first.width()},
                std::move(values));
}

Raster to_raster(const Tensor& t, int n) {
  const Shape4& s = t.shape();
  if (n < 0 || n >= s.n) throw ShapeError("batch index out of range");
  const std::size_t per = static_cast<std::size_t>(s.c) * s.plane();
  auto d = t.data().subspan(n * per, per);
  return Raster(s.c, s.h, s.w, std::vector<double>(d.begin(), d.end()));
}

ConvWeights ConvWeights::pointwise(int out_channels, int in_channels) {
  if (out_channels <= 0 || in_channels <= 0)
    throw ShapeError("pointwise conv needs positive channel counts");
  ConvWeights w;
  w.kind = ConvKind::kPointwise;
  w.weight = Tensor({out_channels, in_channels, 1, 1});
  w.bias = Tensor({1, out_channels, 1, 1});
  return w;
}

ConvWeights ConvWeights::depthwise(int channels, int kernel) {
  if (channels <= 0 || kernel <= 0)
    throw ShapeError("depthwise conv needs positive channels and kernel");
  ConvWeights w;
  w.kind = ConvKind::kDepthwise;
  w.weight = Tensor({channels, 1, kernel, kernel});
  w.bias = Tensor({1, channels, 1, 1});
  return w;
}

void ConvWeights::zero_grad() {
  weight.ensure_grad();
  bias.ensure_grad();
  weight.zero_grad();
  bias.zero_grad();
}

}  // namespace sdrcnn::nn
