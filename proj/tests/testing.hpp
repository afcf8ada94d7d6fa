// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for the test suites: seeded random data and naive
// reference implementations that deliberately avoid the library code paths.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sdrcnn/raster.hpp"
#include "sdrcnn/tensor.hpp"

namespace sdrcnn::testing {

inline nn::Tensor random_tensor(nn::Shape4 s, std::uint64_t seed,
                                double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  nn::Tensor t(s);
  for (double& v : t.data()) v = u(rng);
  return t;
}

inline Raster random_raster(int b, int h, int w, std::uint64_t seed,
                            double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Raster r(b, h, w);
  for (double& v : r.values()) v = u(rng);
  return r;
}

inline void randomize(nn::Tensor& t, std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : t.data()) v = u(rng);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// out[n,o,i,j] = bias[o] + sum_c w[o,c] x[n,c,i,j]
inline nn::Tensor naive_pointwise(const nn::Tensor& x, const nn::ConvWeights& w) {
  const auto& s = x.shape();
  const int oc = w.weight.shape().n;
  nn::Tensor y({s.n, oc, s.h, s.w});
  for (int n = 0; n < s.n; ++n)
    for (int o = 0; o < oc; ++o)
      for (int i = 0; i < s.h; ++i)
        for (int j = 0; j < s.w; ++j) {
          double acc = w.bias.data()[o];
          for (int c = 0; c < s.c; ++c) acc += w.weight.at(o, c, 0, 0) * x.at(n, c, i, j);
          y.at(n, o, i, j) = acc;
        }
  return y;
}

// Per-channel zero-padded correlation.
inline nn::Tensor naive_depthwise(const nn::Tensor& x, const nn::ConvWeights& w) {
  const auto& s = x.shape();
  const int k = w.weight.shape().h;
  const int p = k / 2;
  nn::Tensor y(s);
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int i = 0; i < s.h; ++i)
        for (int j = 0; j < s.w; ++j) {
          double acc = w.bias.data()[c];
          for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) {
              const int yi = i + a - p;
              const int xj = j + b - p;
              if (yi < 0 || yi >= s.h || xj < 0 || xj >= s.w) continue;
              acc += w.weight.at(c, 0, a, b) * x.at(n, c, yi, xj);
            }
          y.at(n, c, i, j) = acc;
        }
  return y;
}

// Two-pass Pearson correlation.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace sdrcnn::testing
