// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/visualize.hpp"

#include <png.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "sdrcnn/error.hpp"
#include "sdrcnn/log.hpp"
#include "sdrcnn/raster_io.hpp"

namespace sdrcnn::viz {

std::uint8_t to_byte(double v, double min, double max) {
  if (!(max > min)) throw UsageError("PNG rescale needs max > min");
  if (std::isnan(v)) return 0;
  const double t = std::clamp((v - min) / (max - min), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(t * 255.0));
}

std::array<std::uint8_t, 3> heatmap_color(double t) {
  struct Stop {
    double t;
    double r, g, b;
  };
  static constexpr Stop kStops[] = {{0.0, 0, 0, 128},       {0.125, 0, 0, 255},
                                    {0.375, 0, 255, 255},   {0.625, 255, 255, 0},
                                    {0.875, 255, 0, 0},     {1.0, 128, 0, 0}};
  t = std::isnan(t) ? 0.0 : std::clamp(t, 0.0, 1.0);
  std::size_t i = 1;
  while (i + 1 < std::size(kStops) && t > kStops[i].t) ++i;
  const Stop& a = kStops[i - 1];
  const Stop& b = kStops[i];
  const double f = (t - a.t) / (b.t - a.t);
  auto mix = [f](double x, double y) {
    return static_cast<std::uint8_t>(std::lround(x + f * (y - x)));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

std::vector<std::uint8_t> render(const Raster& raster, const PngOptions& o) {
  if (raster.empty()) throw ShapeError("cannot render an empty raster");
  if (!(o.max > o.min)) throw UsageError("PNG rescale needs max > min");
  auto check_band = [&](int b) {
    if (b < 0 || b >= raster.bands())
      throw UsageError("band " + std::to_string(b) + " out of range for " + raster.shape_string());
  };
  const std::size_t n = raster.pixels();
  std::vector<std::uint8_t> out;
  switch (o.mode) {
    case PngMode::kGray: {
      check_band(o.gray_band);
      out.resize(n);
      const auto src = raster.band(o.gray_band);
      for (std::size_t i = 0; i < n; ++i) out[i] = to_byte(src[i], o.min, o.max);
      break;
    }
    case PngMode::kRgb: {
      for (int b : o.rgb_bands) check_band(b);
      out.resize(3 * n);
      for (int c = 0; c < 3; ++c) {
        const auto src = raster.band(o.rgb_bands[c]);
        for (std::size_t i = 0; i < n; ++i) out[3 * i + c] = to_byte(src[i], o.min, o.max);
      }
      break;
    }
    case PngMode::kHeatmap: {
      check_band(o.gray_band);
      out.resize(3 * n);
      const auto src = raster.band(o.gray_band);
      for (std::size_t i = 0; i < n; ++i) {
        const auto rgb = heatmap_color((src[i] - o.min) / (o.max - o.min));
        std::copy(rgb.begin(), rgb.end(), out.begin() + 3 * i);
      }
      break;
    }
  }
  return out;
}

std::string encode_png(const Raster& raster, const PngOptions& options) {
  const std::vector<std::uint8_t> pixels = render(raster, options);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width());
  image.height = static_cast<png_uint_32>(raster.height());
  image.format = options.mode == PngMode::kGray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr))
    throw DataError(std::string("PNG encode failed: ") + image.message);
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr))
    throw DataError(std::string("PNG encode failed: ") + image.message);
  out.resize(size);
  return out;
}

void export_png(const Raster& raster, const PngOptions& options, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_png(raster, options));
}

DecodedPng decode_png(const std::string& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw DataError(std::string("PNG decode failed: ") + image.message);
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  DecodedPng out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.channels = gray ? 1 : 3;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr))
    throw DataError(std::string("PNG decode failed: ") + image.message);
  return out;
}

int PcaDecomposition::rank(double relative_tolerance) const {
  if (singular_values.empty() || singular_values[0] <= 0.0) return 0;
  const double scale = singular_values[0] * std::max<double>(height * width, channels);
  int r = 0;
  for (double s : singular_values)
    if (s > relative_tolerance * scale) ++r;
  return r;
}

PcaDecomposition pca_decompose(const nn::Tensor& features, int n) {
  const auto& s = features.shape();
  if (n < 0 || n >= s.n) throw ShapeError("pca: sample index out of range");
  const Eigen::Index rows = static_cast<Eigen::Index>(s.plane());
  const Eigen::Index cols = s.c;
  Eigen::MatrixXd x(rows, cols);
  for (int c = 0; c < s.c; ++c) x.col(c) = Eigen::Map<const Eigen::VectorXd>(features.plane(n, c), rows);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd v = svd.matrixV();  // C x k
  const Eigen::Index k = v.cols();
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < cols; ++i)
      if (std::abs(v(i, j)) > std::abs(v(arg, j))) arg = i;
    if (v(arg, j) < 0) v.col(j) *= -1.0;
  }
  const Eigen::MatrixXd scores = x * v;

  PcaDecomposition d;
  d.channels = s.c;
  d.height = s.h;
  d.width = s.w;
  d.mean.assign(mean.data(), mean.data() + cols);
  d.singular_values.assign(svd.singularValues().data(), svd.singularValues().data() + k);
  d.directions.resize(static_cast<std::size_t>(k * cols));
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < cols; ++i) d.directions[j * cols + i] = v(i, j);
  d.scores.resize(static_cast<std::size_t>(rows * k));
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index j = 0; j < k; ++j) d.scores[r * k + j] = scores(r, j);
  return d;
}

Raster pca_features(const nn::Tensor& features, int components, int n) {
  if (components < 1) throw UsageError("pca: need at least one component");
  if (features.shape().c < components)
    throw ShapeError("pca: " + std::to_string(features.shape().c) + " channels cannot give " +
                     std::to_string(components) + " components");
  const PcaDecomposition d = pca_decompose(features, n);
  const int rank = d.rank();
  const int k = static_cast<int>(d.singular_values.size());
  Raster out(components, d.height, d.width, 0.5);
  if (rank < components)
    warn("feature maps have rank " + std::to_string(rank) + " < " + std::to_string(components) +
         "; missing components set to 0.5");
  for (int j = 0; j < std::min(rank, components); ++j) {
    auto dst = out.band(j);
    for (std::size_t p = 0; p < dst.size(); ++p) dst[p] = d.scores[p * k + j];
    const auto [lo, hi] = std::minmax_element(dst.begin(), dst.end());
    const double low = *lo, span = *hi - *lo;
    for (double& v : dst) v = span > 0.0 ? (v - low) / span : 0.5;
  }
  return out;
}

}  // namespace sdrcnn::viz
