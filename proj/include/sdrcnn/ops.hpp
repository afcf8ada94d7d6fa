// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// Differentiable tensor operations.
//
// Every forward op has a matching *_backward that maps the gradient of the
// op's output to the gradient of its input. Ops with learnable weights also
// accumulate (+=) into the weights' gradient buffers, so callers zero those
// buffers once per step.

#pragma once

#include <span>
#include <vector>

#include "sdrcnn/raster.hpp"
#include "sdrcnn/tensor.hpp"

namespace sdrcnn::nn {

Tensor conv_pointwise(const Tensor& x, const ConvWeights& w);
Tensor conv_pointwise_backward(const Tensor& x, ConvWeights& w,
                               const Tensor& grad_out);

// Stride 1, zero "same" padding; the kernel must be odd.
Tensor conv_depthwise(const Tensor& x, const ConvWeights& w);
Tensor conv_depthwise_backward(const Tensor& x, ConvWeights& w,
                               const Tensor& grad_out);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

Tensor add(const Tensor& x, const Tensor& y);

// Stacks along the channel axis in argument order.
Tensor concat_channels(std::span<const Tensor> xs);
std::vector<Tensor> split_channels(const Tensor& x, std::span<const int> counts);

/// Separable cubic-convolution upsampling (a = -0.5) with edge replication.
///
/// Output pixel o samples the input at (o + 0.5) / factor - 0.5. Each output
/// is evaluated as the nearest-left tap plus weighted differences to the
/// other three taps, so constant inputs are reproduced bit-exactly.
Tensor upsample_bicubic(const Tensor& x, int factor);
Tensor upsample_bicubic_backward(const Tensor& grad_out, int factor);
Raster upsample_bicubic(const Raster& r, int factor);

double l1_loss(const Tensor& pred, const Tensor& target);
// d(l1_loss)/d(pred); sign(0) is taken as 0.
Tensor l1_loss_backward(const Tensor& pred, const Tensor& target);

/// Per-channel batch normalization with learnable scale/shift.
struct BatchNorm {
  Tensor gamma;  // (1, C, 1, 1)
  Tensor beta;   // (1, C, 1, 1)
  Tensor running_mean;  // (1, C, 1, 1)
  Tensor running_var;   // (1, C, 1, 1)
  double momentum = 0.1;
  double eps = 1e-5;

  static BatchNorm make(int channels);
  int channels() const { return gamma.shape().c; }
};

struct BatchNormCache {
  Tensor normalized;
  std::vector<double> inv_std;
  bool training = false;
};

// Training mode normalizes with batch statistics and updates the running
// estimates; inference mode uses the running estimates only.
Tensor batch_norm(const Tensor& x, BatchNorm& bn, bool training,
                  BatchNormCache* cache = nullptr);
Tensor batch_norm_backward(const BatchNormCache& cache, BatchNorm& bn,
                           const Tensor& grad_out);

}  // namespace sdrcnn::nn
