// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sdrcnn/raster.hpp"

namespace sdrcnn::nn {

struct Shape4 {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::string str() const;
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense (n, c, h, w) array of doubles with an optional gradient buffer.
///
/// Activations produced by ops never carry a gradient; learnable parameters
/// call `ensure_grad()` once and accumulate into it during backward passes.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape4 shape, double fill = 0.0);
  Tensor(Shape4 shape, std::vector<double> values);

  const Shape4& shape() const { return shape_; }
  std::size_t numel() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  double at(int n, int c, int y, int x) const {
    return data_[index(n, c, y, x)];
  }
  double* plane(int n, int c) { return data_.data() + index(n, c, 0, 0); }
  const double* plane(int n, int c) const {
    return data_.data() + index(n, c, 0, 0);
  }

  bool has_grad() const { return !grad_.empty(); }
  void ensure_grad();
  void zero_grad();
  std::span<double> grad() { return grad_; }
  std::span<const double> grad() const { return grad_; }

  void fill(double value);
  bool all_finite() const;

  /// Samples [first, first+count) along the batch axis.
  Tensor slice_batch(int first, int count) const;

  // Equality compares values only; gradients are ignored.
  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t index(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) *
               shape_.w +
           x;
  }

  Shape4 shape_;
  std::vector<double> data_;
  std::vector<double> grad_;
};

/// (1, bands, h, w) view of a raster as a tensor (copies).
Tensor from_raster(const Raster& r);
/// Stack equally-shaped rasters along the batch axis.
Tensor stack_rasters(std::span<const Raster> rs);
/// Sample `n` of a tensor as a raster.
Raster to_raster(const Tensor& t, int n = 0);

enum class ConvKind { kPointwise, kDepthwise };

/// Weights of a 1x1 (pointwise) or per-channel k x k (depthwise) convolution.
///
/// Pointwise weight shape is (out, in, 1, 1); depthwise is (channels, 1, k, k).
/// Bias shape is (1, out, 1, 1).
struct ConvWeights {
  ConvKind kind = ConvKind::kPointwise;
  Tensor weight;
  Tensor bias;

  static ConvWeights pointwise(int out_channels, int in_channels);
  static ConvWeights depthwise(int channels, int kernel);

  int out_channels() const { return weight.shape().n; }
  int in_channels() const {
    return kind == ConvKind::kPointwise ? weight.shape().c : weight.shape().n;
  }
  int kernel() const { return weight.shape().h; }
  std::size_t param_count() const { return weight.numel() + bias.numel(); }
  void zero_grad();
};

}  // namespace sdrcnn::nn
