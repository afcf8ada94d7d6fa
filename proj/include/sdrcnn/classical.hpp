// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// Classical pansharpening baselines: Gram-Schmidt component substitution and
// smoothing-filter intensity modulation (SFIM). Both upsample the LRMS with
// the same bicubic kernel the network uses.

#pragma once

#include <string>
#include <vector>

#include "sdrcnn/raster.hpp"

namespace sdrcnn::classical {

enum class Method { kGramSchmidt, kSfim };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct SfimOptions {
  int ratio = 4;
  int kernel = 7;        // box filter side; odd and >= ratio
  bool clamp = true;     // clamp PAN / smooth(PAN) into [ratio_min, ratio_max]
  double ratio_min = 0.0;
  double ratio_max = 10.0;
  double epsilon = 1e-6;

  void validate() const;
};

struct GsOptions {
  int ratio = 4;
  std::vector<double> weights;  // intensity weights; empty means 1/B each
  double epsilon = 1e-6;

  void validate(int bands) const;
};

/// Mean over a k x k window with edge replication.
Raster box_filter(const Raster& img, int kernel);

/// HRMS_b = MS_up_b * PAN / box(PAN). Without clamping, a smoothed PAN value
/// below epsilon throws DataError.
Raster sfim(const Raster& pan, const Raster& lrms, const SfimOptions& options = {});

/// Weighted sum of bands, accumulated in band order.
Raster intensity(const Raster& ms, const std::vector<double>& weights);

/// I = sum_b w_b MS_up_b; PAN' = PAN matched to I's mean and std;
/// HRMS_b = MS_up_b + g_b (PAN' - I), g_b = cov(MS_up_b, I) / var(I).
/// var(I) below epsilon throws DataError("degenerate intensity").
Raster gram_schmidt(const Raster& pan, const Raster& lrms, const GsOptions& options = {});

}  // namespace sdrcnn::classical
