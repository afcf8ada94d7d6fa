// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sdrcnn/tensor.hpp"

namespace sdrcnn::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

using ParamRef = std::reference_wrapper<Tensor>;

/// Adaptive-moment optimizer with bias-corrected moments.
///
/// Moment buffers are created on the first step and must keep the same
/// parameter list (count and shapes) afterwards.
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  void step(std::span<const ParamRef> params);

  const AdamConfig& config() const { return config_; }
  std::int64_t steps() const { return step_; }

 private:
  AdamConfig config_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

}  // namespace sdrcnn::nn
