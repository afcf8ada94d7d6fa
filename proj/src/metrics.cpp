// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/metrics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "sdrcnn/error.hpp"

namespace sdrcnn::metrics {
namespace {

constexpr int kMaxHypercomplexDim = 64;

void require_same_shape(const Raster& a, const Raster& b, const char* what) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(what) + ": shapes differ (" + a.shape_string() + " vs " +
                     b.shape_string() + ")");
  if (a.empty()) throw ShapeError(std::string(what) + ": empty raster");
}

// Mean taken relative to the first element so constant inputs are exact.
double anchored_mean(std::span<const double> v) {
  const double anchor = v[0];
  double s = 0.0;
  for (double x : v) s += x - anchor;
  return anchor + s / static_cast<double>(v.size());
}

// Combines the variance, covariance and mean terms of the quality index.
double quality(double cov, double var_sum, double mean_prod, double mean_sq_sum) {
  if (var_sum == 0.0 && mean_sq_sum == 0.0) return 1.0;
  if (var_sum == 0.0) return 2.0 * mean_prod / mean_sq_sum;
  if (mean_sq_sum == 0.0) return 2.0 * cov / var_sum;
  return 4.0 * cov * mean_prod / (var_sum * mean_sq_sum);
}

void conjugate(const double* in, double* out, int n) {
  out[0] = in[0];
  for (int i = 1; i < n; ++i) out[i] = -in[i];
}

void cd_multiply(const double* a, const double* b, double* out, int n) {
  if (n == 1) {
    out[0] = a[0] * b[0];
    return;
  }
  const int h = n / 2;
  const double* a1 = a;
  const double* a2 = a + h;
  const double* b1 = b;
  const double* b2 = b + h;
  std::array<double, kMaxHypercomplexDim / 2> cb1, cb2, t1, t2;
  conjugate(b1, cb1.data(), h);
  conjugate(b2, cb2.data(), h);
  cd_multiply(a1, b1, t1.data(), h);
  cd_multiply(cb2.data(), a2, t2.data(), h);
  for (int i = 0; i < h; ++i) out[i] = t1[i] - t2[i];
  cd_multiply(b2, a1, t1.data(), h);
  cd_multiply(a2, cb1.data(), t2.data(), h);
  for (int i = 0; i < h; ++i) out[h + i] = t1[i] + t2[i];
}

struct Window {
  int y0, x0, h, w;
};

std::vector<Window> windows(int height, int width, int block, int shift) {
  if (block < 1 || shift < 1) throw UsageError("block and shift must be positive");
  if (height < block || width < block) return {{0, 0, height, width}};
  std::vector<Window> out;
  for (int y = 0; y + block <= height; y += shift)
    for (int x = 0; x + block <= width; x += shift) out.push_back({y, x, block, block});
  return out;
}

std::vector<double> gather(const Raster& r, int band, const Window& win) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(win.h) * win.w);
  for (int y = win.y0; y < win.y0 + win.h; ++y)
    for (int x = win.x0; x < win.x0 + win.w; ++x) v.push_back(r.at(band, y, x));
  return v;
}

Raster pad_bands_pow2(const Raster& r) {
  const int bands = r.bands();
  const int padded = static_cast<int>(std::bit_ceil(static_cast<unsigned>(bands)));
  if (padded == bands) return r;
  std::vector<double> values(r.values().begin(), r.values().end());
  values.resize(static_cast<std::size_t>(padded) * r.pixels(), 0.0);
  return Raster(padded, r.height(), r.width(), std::move(values));
}

void check_scales(const Raster& fused, const Raster& ms, int ratio) {
  if (fused.bands() != ms.bands())
    throw ShapeError("fused and MS band counts differ (" + fused.shape_string() + " vs " +
                     ms.shape_string() + ")");
  if (fused.height() != ratio * ms.height() || fused.width() != ratio * ms.width())
    throw ShapeError("fused " + fused.shape_string() + " is not " + std::to_string(ratio) +
                     "x MS " + ms.shape_string());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::kSam: return "SAM";
    case Metric::kErgas: return "ERGAS";
    case Metric::kScc: return "SCC";
    case Metric::kQ2n: return "Q2n";
    case Metric::kDLambda: return "D_lambda";
    case Metric::kDs: return "D_s";
    case Metric::kQnr: return "QNR";
  }
  return "?";
}

Metric parse_metric(const std::string& name) {
  for (Metric m : {Metric::kSam, Metric::kErgas, Metric::kScc, Metric::kQ2n, Metric::kDLambda,
                   Metric::kDs, Metric::kQnr})
    if (metric_name(m) == name) return m;
  throw UsageError("unknown metric '" + name + "'");
}

double ideal_value(Metric m) {
  switch (m) {
    case Metric::kScc:
    case Metric::kQ2n:
    case Metric::kQnr: return 1.0;
    default: return 0.0;
  }
}

double sam(const Raster& x, const Raster& ref) {
  require_same_shape(x, ref, "sam");
  const std::size_t n = x.pixels();
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double dot = 0.0, nx = 0.0, nr = 0.0;
    for (int b = 0; b < x.bands(); ++b) {
      const double a = x.values()[b * n + p];
      const double c = ref.values()[b * n + p];
      dot += a * c;
      nx += a * a;
      nr += c * c;
    }
    if (nx == 0.0 || nr == 0.0) continue;
    const double cosine = std::clamp(dot / std::sqrt(nx * nr), -1.0, 1.0);
    total += std::acos(cosine);
  }
  return total / static_cast<double>(n) * 180.0 / std::numbers::pi;
}

double ergas(const Raster& x, const Raster& ref, int ratio) {
  require_same_shape(x, ref, "ergas");
  if (ratio < 1) throw UsageError("ergas ratio must be positive");
  const double n = static_cast<double>(x.pixels());
  double acc = 0.0;
  for (int b = 0; b < x.bands(); ++b) {
    const auto xb = x.band(b);
    const auto rb = ref.band(b);
    double sq = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < xb.size(); ++i) {
      const double d = xb[i] - rb[i];
      sq += d * d;
      mean += rb[i];
    }
    mean /= n;
    if (mean == 0.0) throw DataError("degenerate reference band " + std::to_string(b));
    const double rmse = std::sqrt(sq / n);
    acc += (rmse / mean) * (rmse / mean);
  }
  return 100.0 / ratio * std::sqrt(acc / x.bands());
}

Raster laplacian(const Raster& img) {
  Raster out(img.bands(), img.height(), img.width());
  const int h = img.height(), w = img.width();
  for (int b = 0; b < img.bands(); ++b)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double v = 4.0 * img.at(b, y, x);
        if (y > 0) v -= img.at(b, y - 1, x);
        if (y + 1 < h) v -= img.at(b, y + 1, x);
        if (x > 0) v -= img.at(b, y, x - 1);
        if (x + 1 < w) v -= img.at(b, y, x + 1);
        out.at(b, y, x) = v;
      }
  return out;
}

double scc(const Raster& x, const Raster& ref) {
  require_same_shape(x, ref, "scc");
  const Raster hx = laplacian(x);
  const Raster hr = laplacian(ref);
  double total = 0.0;
  for (int b = 0; b < x.bands(); ++b) {
    const auto a = hx.band(b);
    const auto c = hr.band(b);
    const double ma = anchored_mean(a), mc = anchored_mean(c);
    double sac = 0.0, saa = 0.0, scc_ = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sac += (a[i] - ma) * (c[i] - mc);
      saa += (a[i] - ma) * (a[i] - ma);
      scc_ += (c[i] - mc) * (c[i] - mc);
    }
    if (saa == 0.0 || scc_ == 0.0) continue;
    total += sac / std::sqrt(saa * scc_);
  }
  return total / x.bands();
}

double uiqi(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw ShapeError("uiqi: vectors must be equal and non-empty");
  if (std::equal(x.begin(), x.end(), y.begin())) return 1.0;
  const double mx = anchored_mean(x), my = anchored_mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double n = static_cast<double>(x.size());
  return quality(sxy / n, (sxx + syy) / n, mx * my, mx * mx + my * my);
}

double q_blocks(const Raster& x, int xb, const Raster& y, int yb, int block, int shift) {
  if (x.height() != y.height() || x.width() != y.width())
    throw ShapeError("q_blocks: spatial sizes differ (" + x.shape_string() + " vs " +
                     y.shape_string() + ")");
  const auto wins = windows(x.height(), x.width(), block, shift);
  double total = 0.0;
  for (const Window& w : wins) total += uiqi(gather(x, xb, w), gather(y, yb, w));
  return total / static_cast<double>(wins.size());
}

void hypercomplex_multiply(std::span<const double> a, std::span<const double> b,
                           std::span<double> out) {
  const std::size_t n = a.size();
  if (b.size() != n || out.size() != n || !std::has_single_bit(n) ||
      n > static_cast<std::size_t>(kMaxHypercomplexDim))
    throw ShapeError("hypercomplex operands must share a power-of-two dimension <= 64");
  cd_multiply(a.data(), b.data(), out.data(), static_cast<int>(n));
}

double q2n_block(const Raster& x, const Raster& y) {
  require_same_shape(x, y, "q2n");
  const int dim = x.bands();
  if (!std::has_single_bit(static_cast<unsigned>(dim)) || dim > kMaxHypercomplexDim)
    throw ShapeError("q2n block needs a power-of-two band count <= 64");
  if (x == y) return 1.0;
  const std::size_t n = x.pixels();
  std::vector<double> mx(dim), my(dim);
  for (int b = 0; b < dim; ++b) {
    mx[b] = anchored_mean(x.band(b));
    my[b] = anchored_mean(y.band(b));
  }
  std::array<double, kMaxHypercomplexDim> dx, dy, cdy, prod;
  std::vector<double> cov(dim, 0.0);
  double vx = 0.0, vy = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    for (int b = 0; b < dim; ++b) {
      dx[b] = x.values()[b * n + p] - mx[b];
      dy[b] = y.values()[b * n + p] - my[b];
      vx += dx[b] * dx[b];
      vy += dy[b] * dy[b];
    }
    conjugate(dy.data(), cdy.data(), dim);
    cd_multiply(dx.data(), cdy.data(), prod.data(), dim);
    for (int b = 0; b < dim; ++b) cov[b] += prod[b];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  vx *= inv_n;
  vy *= inv_n;
  double mx2 = 0.0, my2 = 0.0, cov2 = 0.0;
  for (int b = 0; b < dim; ++b) {
    mx2 += mx[b] * mx[b];
    my2 += my[b] * my[b];
    cov[b] *= inv_n;
    cov2 += cov[b] * cov[b];
  }
  if (dim == 1) return quality(cov[0], vx + vy, mx[0] * my[0], mx2 + my2);
  return quality(std::sqrt(cov2), vx + vy, std::sqrt(mx2 * my2), mx2 + my2);
}

double q2n(const Raster& x, const Raster& ref, int block, int shift) {
  require_same_shape(x, ref, "q2n");
  const Raster px = pad_bands_pow2(x);
  const Raster pr = pad_bands_pow2(ref);
  const auto wins = windows(x.height(), x.width(), block, shift);
  double total = 0.0;
  for (const Window& w : wins)
    total += q2n_block(px.crop(w.y0, w.x0, w.h, w.w), pr.crop(w.y0, w.x0, w.h, w.w));
  return total / static_cast<double>(wins.size());
}

double d_lambda(const Raster& fused, const Raster& ms, const NoReferenceOptions& options) {
  check_scales(fused, ms, options.ratio);
  const int bands = fused.bands();
  if (bands < 2) throw UsageError("D_lambda needs at least two bands");
  if (!(options.p > 0.0)) throw UsageError("D_lambda exponent must be positive");
  const int block_lr = std::max(1, options.block / options.ratio);
  double acc = 0.0;
  for (int b = 0; b < bands; ++b)
    for (int c = 0; c < bands; ++c) {
      if (b == c) continue;
      const double qf = q_blocks(fused, b, fused, c, options.block, options.block);
      const double qm = q_blocks(ms, b, ms, c, block_lr, block_lr);
      acc += std::pow(std::abs(qf - qm), options.p);
    }
  return std::pow(acc / (bands * (bands - 1.0)), 1.0 / options.p);
}

double d_s(const Raster& fused, const Raster& ms, const Raster& pan,
           const NoReferenceOptions& options) {
  check_scales(fused, ms, options.ratio);
  if (pan.bands() != 1 || pan.height() != fused.height() || pan.width() != fused.width())
    throw ShapeError("PAN " + pan.shape_string() + " does not match fused " + fused.shape_string());
  if (!(options.q > 0.0)) throw UsageError("D_s exponent must be positive");
  wald::SensorModel sensor = options.sensor;
  sensor.ratio = options.ratio;
  const Raster pan_lr = wald::degrade_pan(pan, sensor);
  const int block_lr = std::max(1, options.block / options.ratio);
  double acc = 0.0;
  for (int b = 0; b < fused.bands(); ++b) {
    const double qf = q_blocks(fused, b, pan, 0, options.block, options.block);
    const double qm = q_blocks(ms, b, pan_lr, 0, block_lr, block_lr);
    acc += std::pow(std::abs(qf - qm), options.q);
  }
  return std::pow(acc / fused.bands(), 1.0 / options.q);
}

double qnr(double d_lambda_value, double d_s_value) {
  return (1.0 - d_lambda_value) * (1.0 - d_s_value);
}

Raster aem(const Raster& fused, const Raster& gt) {
  require_same_shape(fused, gt, "aem");
  Raster out(1, gt.height(), gt.width());
  auto dst = out.band(0);
  for (int b = 0; b < gt.bands(); ++b) {
    const auto f = fused.band(b);
    const auto g = gt.band(b);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += std::abs(f[i] - g[i]);
  }
  for (double& v : dst) v /= gt.bands();
  return out;
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) return {};
  double s = 0.0;
  for (double v : values) s += v;
  const double mean = s / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

std::map<Metric, double> reduced_metrics(const Raster& fused, const Raster& gt,
                                         const ReducedOptions& options) {
  std::map<Metric, double> out;
  out[Metric::kSam] = sam(fused, gt);
  out[Metric::kErgas] = ergas(fused, gt, options.ratio);
  out[Metric::kScc] = scc(fused, gt);
  out[Metric::kQ2n] = q2n(fused, gt, options.q_block, options.q_shift);
  return out;
}

std::map<Metric, double> full_metrics(const Raster& fused, const Raster& ms, const Raster& pan,
                                      const NoReferenceOptions& options) {
  std::map<Metric, double> out;
  out[Metric::kDLambda] = d_lambda(fused, ms, options);
  out[Metric::kDs] = d_s(fused, ms, pan, options);
  out[Metric::kQnr] = qnr(out[Metric::kDLambda], out[Metric::kDs]);
  return out;
}

void MetricReport::add(const std::string& sample_id, const std::map<Metric, double>& row) {
  if (!sample_ids_.empty() && row.size() != values_.size())
    throw UsageError("metric row for '" + sample_id + "' has a different metric set");
  for (const auto& [m, v] : row) {
    if (!sample_ids_.empty() && !values_.count(m))
      throw UsageError("metric row for '" + sample_id + "' has a different metric set");
    values_[m].push_back(v);
  }
  sample_ids_.push_back(sample_id);
}

std::vector<Metric> MetricReport::metrics() const {
  std::vector<Metric> out;
  for (const auto& [m, v] : values_) out.push_back(m);
  return out;
}

const std::vector<double>& MetricReport::values(Metric m) const {
  const auto it = values_.find(m);
  if (it == values_.end()) throw UsageError("report has no " + metric_name(m) + " values");
  return it->second;
}

Aggregate MetricReport::summary(Metric m) const { return aggregate(values(m)); }

std::string MetricReport::to_csv(bool header) const {
  std::ostringstream out;
  if (header) out << "method,sample_id,metric,value,std\n";
  for (std::size_t i = 0; i < sample_ids_.size(); ++i)
    for (const auto& [m, v] : values_)
      out << method_ << ',' << sample_ids_[i] << ',' << metric_name(m) << ',' << format_double(v[i])
          << ",\n";
  for (const auto& [m, v] : values_) {
    const Aggregate a = aggregate(v);
    out << method_ << ",summary," << metric_name(m) << ',' << format_double(a.mean) << ','
        << format_double(a.std) << '\n';
  }
  return out.str();
}

}  // namespace sdrcnn::metrics
