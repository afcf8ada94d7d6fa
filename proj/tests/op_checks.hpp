// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <random>
#include <string>

#include "sdrcnn/grad_check.hpp"
#include "sdrcnn/ops.hpp"
#include "testing.hpp"

namespace sdrcnn::testing {

inline nn::ConvWeights random_pointwise(int out, int in, std::uint64_t seed) {
  nn::ConvWeights w = nn::ConvWeights::pointwise(out, in);
  std::mt19937_64 rng(seed);
  randomize(w.weight, rng, 1.0);
  randomize(w.bias, rng, 1.0);
  return w;
}

inline nn::ConvWeights random_depthwise(int channels, int k, std::uint64_t seed) {
  nn::ConvWeights w = nn::ConvWeights::depthwise(channels, k);
  std::mt19937_64 rng(seed);
  randomize(w.weight, rng, 1.0);
  randomize(w.bias, rng, 1.0);
  return w;
}

/// Worst central-difference relative error of every differentiable op over
/// `seeds` random draws, keyed by op name.
inline std::map<std::string, double> op_gradient_errors(int seeds = 20, double eps = 1e-6) {
  using namespace sdrcnn::nn;
  double worst_pw = 0, worst_dw = 0, worst_relu = 0, worst_up = 0, worst_l1 = 0,
         worst_cat = 0, worst_add = 0, worst_bn = 0, worst_wpw = 0, worst_wdw = 0;
  for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(seeds); ++seed) {
    const Tensor x = random_tensor({1, 3, 5, 5}, 100 + seed);
    ConvWeights pw = random_pointwise(4, 3, 200 + seed);
    worst_pw = std::max(worst_pw, grad_check_op(
        [&](const Tensor& in) { return conv_pointwise(in, pw); },
        [&](const Tensor& in, const Tensor& g) { return conv_pointwise_backward(in, pw, g); },
        x, eps, seed));
    // Gradient with respect to the weights themselves.
    {
      ConvWeights probe = pw;
      auto fw = [&](const Tensor& wt) {
        probe.weight = wt;
        return conv_pointwise(x, probe);
      };
      worst_wpw = std::max(worst_wpw, grad_check_op(
          fw,
          [&](const Tensor& wt, const Tensor& g) {
            probe.weight = wt;
            probe.zero_grad();
            conv_pointwise_backward(x, probe, g);
            return Tensor(wt.shape(), std::vector<double>(probe.weight.grad().begin(),
                                                          probe.weight.grad().end()));
          },
          pw.weight, eps, seed));
    }

    const Tensor xd = random_tensor({1, 4, 6, 6}, 300 + seed);
    ConvWeights dw = random_depthwise(4, 3, 400 + seed);
    worst_dw = std::max(worst_dw, grad_check_op(
        [&](const Tensor& in) { return conv_depthwise(in, dw); },
        [&](const Tensor& in, const Tensor& g) { return conv_depthwise_backward(in, dw, g); },
        xd, eps, seed));
    {
      ConvWeights probe = dw;
      worst_wdw = std::max(worst_wdw, grad_check_op(
          [&](const Tensor& wt) {
            probe.weight = wt;
            return conv_depthwise(xd, probe);
          },
          [&](const Tensor& wt, const Tensor& g) {
            probe.weight = wt;
            probe.zero_grad();
            conv_depthwise_backward(xd, probe, g);
            return Tensor(wt.shape(), std::vector<double>(probe.weight.grad().begin(),
                                                          probe.weight.grad().end()));
          },
          dw.weight, eps, seed));
    }

    // Keep ReLU inputs away from the kink.
    Tensor xr = random_tensor({1, 2, 4, 4}, 500 + seed);
    for (double& v : xr.data()) v += (v >= 0 ? 0.1 : -0.1);
    worst_relu = std::max(worst_relu, grad_check_op(
        [](const Tensor& in) { return relu(in); },
        [](const Tensor& in, const Tensor& g) { return relu_backward(in, g); }, xr, eps, seed));

    const Tensor xu = random_tensor({1, 2, 4, 5}, 600 + seed);
    worst_up = std::max(worst_up, grad_check_op(
        [](const Tensor& in) { return upsample_bicubic(in, 4); },
        [](const Tensor&, const Tensor& g) { return upsample_bicubic_backward(g, 4); }, xu,
        eps, seed));

    const Tensor y2 = random_tensor({1, 2, 4, 5}, 700 + seed);
    worst_add = std::max(worst_add, grad_check_op(
        [&](const Tensor& in) { return add(in, y2); },
        [](const Tensor&, const Tensor& g) { return g; }, xu, eps, seed));
    worst_cat = std::max(worst_cat, grad_check_op(
        [&](const Tensor& in) {
          const Tensor parts[] = {y2, in, in};
          return concat_channels(parts);
        },
        [](const Tensor&, const Tensor& g) {
          const int counts[] = {2, 2, 2};
          auto p = split_channels(g, counts);
          return add(p[1], p[2]);
        },
        xu, eps, seed));

    const Tensor target = random_tensor({1, 2, 4, 5}, 800 + seed);
    worst_l1 = std::max(worst_l1, grad_check(
        [&](const Tensor& in) { return l1_loss(in, target); }, xu,
        l1_loss_backward(xu, target), eps));

    BatchNorm bn = BatchNorm::make(3);
    std::mt19937_64 rng(900 + seed);
    randomize(bn.gamma, rng, 1.0);
    randomize(bn.beta, rng, 1.0);
    const Tensor xb = random_tensor({2, 3, 3, 3}, 1000 + seed);
    worst_bn = std::max(worst_bn, grad_check_op(
        [&](const Tensor& in) {
          BatchNorm copy = bn;
          return batch_norm(in, copy, true);
        },
        [&](const Tensor& in, const Tensor& g) {
          BatchNorm copy = bn;
          BatchNormCache cache;
          batch_norm(in, copy, true, &cache);
          return batch_norm_backward(cache, copy, g);
        },
        xb, eps, seed));
  }
  return {{"conv_pointwise", worst_pw},      {"conv_pointwise.weight", worst_wpw},
          {"conv_depthwise", worst_dw},      {"conv_depthwise.weight", worst_wdw},
          {"relu", worst_relu},              {"upsample_bicubic", worst_up},
          {"add", worst_add},                {"concat_channels", worst_cat},
          {"l1_loss", worst_l1},             {"batch_norm", worst_bn}};
}

}  // namespace sdrcnn::testing
