// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

#include "sdrcnn/tensor.hpp"

namespace sdrcnn::nn {

/// Compares an analytic gradient against central finite differences.
///
/// Returns max_i |analytic_i - fd_i| / max(1, |fd_i|), where
/// fd_i = (f(x + eps e_i) - f(x - eps e_i)) / (2 eps). `eps` must lie in
/// [1e-7, 1e-4].
double grad_check(const std::function<double(const Tensor&)>& loss,
                  const Tensor& input, const Tensor& analytic, double eps);

/// Gradient check of a tensor-valued op through a fixed random projection
/// L(x) = sum(r * op(x)), for which dL/dx = backward(x, r).
double grad_check_op(const std::function<Tensor(const Tensor&)>& forward,
                     const std::function<Tensor(const Tensor&, const Tensor&)>& backward,
                     const Tensor& input, double eps, std::uint64_t seed);

}  // namespace sdrcnn::nn
