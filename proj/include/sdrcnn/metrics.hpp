// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// Pansharpening quality indices.
//
// Reduced resolution (against a reference): SAM, ERGAS, SCC, Q2n.
// Full resolution (no reference): D_lambda, D_s, QNR.

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sdrcnn/raster.hpp"
#include "sdrcnn/wald.hpp"

namespace sdrcnn::metrics {

enum class Metric { kSam, kErgas, kScc, kQ2n, kDLambda, kDs, kQnr };

std::string metric_name(Metric m);
Metric parse_metric(const std::string& name);
/// 0 for SAM, ERGAS, D_lambda, D_s; 1 for SCC, Q2n, QNR.
double ideal_value(Metric m);

/// Mean spectral angle in degrees. Pixels where either vector is zero
/// contribute an angle of 0 and still count in the mean.
double sam(const Raster& x, const Raster& ref);

/// 100 / ratio * sqrt(mean_b (RMSE_b / mean(ref_b))^2). A zero reference
/// band mean throws DataError("degenerate reference band").
double ergas(const Raster& x, const Raster& ref, int ratio = 4);

/// 3x3 Laplacian [[0,-1,0],[-1,4,-1],[0,-1,0]] with zero padding.
Raster laplacian(const Raster& img);

/// Band-averaged Pearson correlation of the Laplacian responses. A band whose
/// response is constant in either image contributes 0.
double scc(const Raster& x, const Raster& ref);

/// Scalar universal image quality index over two equal-length vectors.
/// Degenerate cases: both constant gives 2 mx my / (mx^2 + my^2); both
/// zero-mean and constant gives 1.
double uiqi(std::span<const double> x, std::span<const double> y);

/// Scalar Q averaged over block x block windows stepped by `shift`. An image
/// smaller than one block is a single whole-image block.
double q_blocks(const Raster& x, int xb, const Raster& y, int yb, int block, int shift);

/// Product in the 2^k-dimensional Cayley-Dickson algebra:
/// (a, b)(c, d) = (ac - conj(d) b, d a + b conj(c)).
void hypercomplex_multiply(std::span<const double> a, std::span<const double> b,
                           std::span<double> out);

/// Hypercomplex quality index of one block (all bands of x and y, already
/// padded to a power of two). One band returns the signed scalar index.
double q2n_block(const Raster& x, const Raster& y);

/// Q2n averaged over block x block windows stepped by `shift`. Band counts that
/// are not a power of two are padded with zero bands.
double q2n(const Raster& x, const Raster& ref, int block = 32, int shift = 32);

struct NoReferenceOptions {
  int ratio = 4;
  int block = 32;      // window on the PAN grid; ratio-scaled on the MS grid
  double p = 1.0;      // D_lambda exponent
  double q = 1.0;      // D_s exponent
  wald::SensorModel sensor;  // PAN degradation for D_s
};

/// Inter-band Q differences between the fused image and the original MS.
/// Throws UsageError for fewer than two bands.
double d_lambda(const Raster& fused, const Raster& ms, const NoReferenceOptions& options = {});
/// Band-to-PAN Q differences across scales.
double d_s(const Raster& fused, const Raster& ms, const Raster& pan,
           const NoReferenceOptions& options = {});
double qnr(double d_lambda, double d_s);

/// Per-pixel mean over bands of |fused - gt|.
Raster aem(const Raster& fused, const Raster& gt);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // population
};
Aggregate aggregate(std::span<const double> values);

struct ReducedOptions {
  int ratio = 4;
  int q_block = 32;
  int q_shift = 32;
};

std::map<Metric, double> reduced_metrics(const Raster& fused, const Raster& gt,
                                         const ReducedOptions& options = {});
std::map<Metric, double> full_metrics(const Raster& fused, const Raster& ms, const Raster& pan,
                                      const NoReferenceOptions& options = {});

class MetricReport {
 public:
  MetricReport() = default;
  explicit MetricReport(std::string method) : method_(std::move(method)) {}

  void add(const std::string& sample_id, const std::map<Metric, double>& row);

  const std::string& method() const { return method_; }
  std::size_t sample_count() const { return sample_ids_.size(); }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  std::vector<Metric> metrics() const;
  const std::vector<double>& values(Metric m) const;
  Aggregate summary(Metric m) const;

  /// Header `method,sample_id,metric,value,std`; one row per sample and
  /// metric, then one `summary` row per metric holding mean and std.
  std::string to_csv(bool header = true) const;

 private:
  std::string method_;
  std::vector<std::string> sample_ids_;
  std::map<Metric, std::vector<double>> values_;
};

}  // namespace sdrcnn::metrics
