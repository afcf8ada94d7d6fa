// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/classical.hpp"

#include <algorithm>
#include <cmath>

#include "sdrcnn/error.hpp"
#include "sdrcnn/ops.hpp"

namespace sdrcnn::classical {
namespace {

void check_pair(const Raster& pan, const Raster& lrms, int ratio) {
  if (pan.bands() != 1) throw ShapeError("PAN must have one band, got " + pan.shape_string());
  if (lrms.bands() < 1) throw ShapeError("LRMS has no bands");
  if (pan.height() != ratio * lrms.height() || pan.width() != ratio * lrms.width())
    throw ShapeError("PAN " + pan.shape_string() + " is not " + std::to_string(ratio) +
                     "x LRMS " + lrms.shape_string());
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double covariance(std::span<const double> a, double ma, std::span<const double> b, double mb) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size());
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "gs") return Method::kGramSchmidt;
  if (name == "sfim") return Method::kSfim;
  throw UsageError("unknown classical method '" + name + "' (expected gs or sfim)");
}

std::string method_name(Method m) { return m == Method::kGramSchmidt ? "gs" : "sfim"; }

void SfimOptions::validate() const {
  if (ratio < 1) throw UsageError("sfim ratio must be positive");
  if (kernel < ratio || kernel % 2 == 0)
    throw UsageError("sfim kernel must be odd and >= the resolution ratio");
  if (!(epsilon > 0.0)) throw UsageError("sfim epsilon must be positive");
  if (clamp && !(ratio_min <= ratio_max)) throw UsageError("sfim clamp range is empty");
}

void GsOptions::validate(int bands) const {
  if (ratio < 1) throw UsageError("gs ratio must be positive");
  if (!weights.empty() && static_cast<int>(weights.size()) != bands)
    throw UsageError("gs weight count " + std::to_string(weights.size()) + " does not match " +
                     std::to_string(bands) + " bands");
  if (!(epsilon > 0.0)) throw UsageError("gs epsilon must be positive");
}

Raster box_filter(const Raster& img, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw UsageError("box kernel must be odd and positive");
  const int h = img.height(), w = img.width(), half = kernel / 2;
  const double area = static_cast<double>(kernel) * kernel;
  Raster out(img.bands(), h, w);
  // Accumulated as offsets from the centre pixel so flat regions stay exact.
  for (int b = 0; b < img.bands(); ++b)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double centre = img.at(b, y, x);
        double s = 0.0;
        for (int dy = -half; dy <= half; ++dy) {
          const int yy = std::clamp(y + dy, 0, h - 1);
          for (int dx = -half; dx <= half; ++dx)
            s += img.at(b, yy, std::clamp(x + dx, 0, w - 1)) - centre;
        }
        out.at(b, y, x) = centre + s / area;
      }
  return out;
}

Raster sfim(const Raster& pan, const Raster& lrms, const SfimOptions& options) {
  options.validate();
  check_pair(pan, lrms, options.ratio);
  const Raster ms_up = nn::upsample_bicubic(lrms, options.ratio);
  const Raster smooth = box_filter(pan, options.kernel);
  std::vector<double> modulation(pan.pixels());
  for (std::size_t i = 0; i < modulation.size(); ++i) {
    const double s = smooth.values()[i];
    if (options.clamp) {
      modulation[i] = std::clamp(pan.values()[i] / std::max(s, options.epsilon), options.ratio_min,
                                 options.ratio_max);
    } else {
      if (s < options.epsilon)
        throw DataError("smoothed PAN below epsilon at pixel " + std::to_string(i) +
                        "; enable clamping or offset the PAN");
      modulation[i] = pan.values()[i] / s;
    }
  }
  Raster out(lrms.bands(), pan.height(), pan.width());
  for (int b = 0; b < out.bands(); ++b) {
    const auto src = ms_up.band(b);
    auto dst = out.band(b);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] * modulation[i];
  }
  return out;
}

Raster intensity(const Raster& ms, const std::vector<double>& weights) {
  if (static_cast<int>(weights.size()) != ms.bands())
    throw ShapeError("intensity weight count does not match " + ms.shape_string());
  Raster out(1, ms.height(), ms.width());
  auto dst = out.band(0);
  for (int b = 0; b < ms.bands(); ++b) {
    const auto src = ms.band(b);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += weights[b] * src[i];
  }
  return out;
}

Raster gram_schmidt(const Raster& pan, const Raster& lrms, const GsOptions& options) {
  options.validate(lrms.bands());
  check_pair(pan, lrms, options.ratio);
  const int bands = lrms.bands();
  std::vector<double> weights = options.weights;
  if (weights.empty()) weights.assign(static_cast<std::size_t>(bands), 1.0 / bands);

  const Raster ms_up = nn::upsample_bicubic(lrms, options.ratio);
  const Raster i_img = intensity(ms_up, weights);
  const auto ivals = i_img.band(0);
  const auto pvals = pan.band(0);
  const double mu_i = mean_of(ivals);
  const double var_i = covariance(ivals, mu_i, ivals, mu_i);
  if (var_i < options.epsilon) throw DataError("degenerate intensity");
  const double mu_p = mean_of(pvals);
  const double var_p = covariance(pvals, mu_p, pvals, mu_p);
  if (var_p < options.epsilon) throw DataError("degenerate PAN");
  const double scale = std::sqrt(var_i) / std::sqrt(var_p);

  // Written as the difference of centred terms so PAN == I gives exactly zero.
  std::vector<double> detail(ivals.size());
  for (std::size_t k = 0; k < detail.size(); ++k)
    detail[k] = scale * (pvals[k] - mu_p) - (ivals[k] - mu_i);

  Raster out(bands, pan.height(), pan.width());
  for (int b = 0; b < bands; ++b) {
    const auto src = ms_up.band(b);
    const double gain = covariance(src, mean_of(src), ivals, mu_i) / var_i;
    auto dst = out.band(b);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = src[k] + gain * detail[k];
  }
  return out;
}

}  // namespace sdrcnn::classical
