// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/optimizer.hpp"

#include <cmath>

#include "sdrcnn/error.hpp"

namespace sdrcnn::nn {

Adam::Adam(AdamConfig config) : config_(config) {
  if (!(config.learning_rate >= 0.0) || !(config.beta1 >= 0.0 && config.beta1 < 1.0) ||
      !(config.beta2 >= 0.0 && config.beta2 < 1.0) || !(config.epsilon > 0.0))
    throw UsageError("invalid Adam hyper-parameters");
}

void Adam::step(std::span<const ParamRef> params) {
  if (step_ == 0) {
    first_moment_.clear();
    second_moment_.clear();
    for (const ParamRef& p : params) {
      first_moment_.emplace_back(p.get().numel(), 0.0);
      second_moment_.emplace_back(p.get().numel(), 0.0);
    }
  }
  if (params.size() != first_moment_.size())
    throw ShapeError("Adam: parameter list changed between steps");
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k].get();
    if (p.numel() != first_moment_[k].size())
      throw ShapeError("Adam: parameter " + std::to_string(k) + " changed shape");
    if (!p.has_grad()) continue;
    auto value = p.data();
    auto grad = p.grad();
    auto& m = first_moment_[k];
    auto& v = second_moment_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
      v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      value[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace sdrcnn::nn
