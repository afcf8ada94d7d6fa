// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sdrcnn/error.hpp"

namespace sdrcnn::nn {

double grad_check(const std::function<double(const Tensor&)>& loss,
                  const Tensor& input, const Tensor& analytic, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-4))
    throw UsageError("grad_check: eps must lie in [1e-7, 1e-4]");
  if (!(analytic.shape() == input.shape()))
    throw ShapeError("grad_check: analytic gradient shape " +
                     analytic.shape().str() + " vs input " + input.shape().str());
  Tensor probe = input;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.numel(); ++i) {
    const double saved = probe.data()[i];
    probe.data()[i] = saved + eps;
    const double up = loss(probe);
    probe.data()[i] = saved - eps;
    const double down = loss(probe);
    probe.data()[i] = saved;
    const double fd = (up - down) / (2.0 * eps);
    const double err =
        std::abs(analytic.data()[i] - fd) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, err);
  }
  return worst;
}

double grad_check_op(const std::function<Tensor(const Tensor&)>& forward,
                     const std::function<Tensor(const Tensor&, const Tensor&)>& backward,
                     const Tensor& input, double eps, std::uint64_t seed) {
  const Tensor probe_out = forward(input);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Tensor projection(probe_out.shape());
  for (double& v : projection.data()) v = unit(rng);
  auto loss = [&](const Tensor& x) {
    const Tensor y = forward(x);
    double sum = 0.0;
    for (std::size_t i = 0; i < y.numel(); ++i)
      sum += projection.data()[i] * y.data()[i];
    return sum;
  };
  const Tensor analytic = backward(input, projection);
  return grad_check(loss, input, analytic, eps);
}

}  // namespace sdrcnn::nn
