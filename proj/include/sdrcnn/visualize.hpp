// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// PNG export for human inspection and PCA views of feature maps.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sdrcnn/raster.hpp"
#include "sdrcnn/tensor.hpp"

namespace sdrcnn::viz {

enum class PngMode { kGray, kRgb, kHeatmap };

struct PngOptions {
  PngMode mode = PngMode::kRgb;
  std::array<int, 3> rgb_bands{4, 2, 1};  // red, green, blue band indices
  int gray_band = 0;
  double min = 0.0;  // maps to intensity 0
  double max = 1.0;  // maps to intensity 255
};

/// Linear rescale of v to 0..255, clamped, rounded to nearest.
std::uint8_t to_byte(double v, double min, double max);

/// Heatmap ramp at t in [0,1], piecewise linear through
/// dark blue (0,0,128) @0, blue (0,0,255) @1/8, cyan (0,255,255) @3/8,
/// yellow (255,255,0) @5/8, red (255,0,0) @7/8, dark red (128,0,0) @1.
std::array<std::uint8_t, 3> heatmap_color(double t);

/// Interleaved 8-bit pixels (1 channel for gray, 3 otherwise), row-major.
std::vector<std::uint8_t> render(const Raster& raster, const PngOptions& options);

std::string encode_png(const Raster& raster, const PngOptions& options);
void export_png(const Raster& raster, const PngOptions& options, const std::filesystem::path& path);

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};
DecodedPng decode_png(const std::string& bytes);

/// Full SVD-based PCA of a feature stack treated as (h*w) samples of C-vectors.
struct PcaDecomposition {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> mean;             // C
  std::vector<double> singular_values;  // k = min(h*w, C), non-increasing
  std::vector<double> directions;       // k x C, row-major, sign-normalized
  std::vector<double> scores;           // (h*w) x k, row-major

  int rank(double relative_tolerance = 1e-10) const;
};

/// Decomposes sample `n` of a (N, C, h, w) tensor. Each direction is flipped
/// so its largest-magnitude loading (first on ties) is positive.
PcaDecomposition pca_decompose(const nn::Tensor& features, int n = 0);

/// Top `components` principal component images, each min-max rescaled to
/// [0, 1]. Components beyond the numerical rank are the constant 0.5 and
/// trigger a warning. Requires at least `components` channels.
Raster pca_features(const nn::Tensor& features, int components = 4, int n = 0);

}  // namespace sdrcnn::viz
