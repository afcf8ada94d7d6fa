// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// Reduced-resolution dataset construction (Wald's protocol) and a procedural
// scene generator used in place of satellite imagery.
//
// The original MS patch is the reference (GT). The network inputs are the MS
// and PAN patches blurred with a Gaussian matched to the sensor MTF and then
// decimated by the resolution ratio.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sdrcnn/raster.hpp"

namespace sdrcnn::wald {

struct SensorModel {
  int bands = 8;
  double ms_gain = 0.30;           // MTF gain at Nyquist, every MS band
  std::vector<double> band_gains;  // optional per-band override
  double pan_gain = 0.15;
  int ratio = 4;
  int kernel_size = 41;

  double gain_for_band(int b) const;
  void validate() const;
};

/// Spatial standard deviation (pixels) of the Gaussian whose transfer
/// function equals `gain` at the Nyquist frequency 1/(2 ratio) of the
/// decimated grid: sigma = ratio * sqrt(-2 ln gain) / pi.
double gaussian_sigma(double gain_at_nyquist, int ratio);

/// Normalized (sums to 1), symmetric, truncated 1-D Gaussian taps.
std::vector<double> gaussian_kernel(double gain_at_nyquist, int ratio, int size);

/// Separable Gaussian blur with edge replication, one gain for every band.
Raster mtf_blur(const Raster& img, double gain_at_nyquist, int ratio = 4,
                int kernel_size = 41);
/// Per-band gains; `gains.size()` must equal the band count.
Raster mtf_blur(const Raster& img, std::span<const double> gains, int ratio = 4,
                int kernel_size = 41);

/// Keeps every `factor`-th pixel starting at offset 0.
Raster decimate(const Raster& img, int factor);

/// MS degradation used for LRMS: decimate(mtf_blur(ms)).
Raster degrade_ms(const Raster& ms, const SensorModel& sensor);
/// PAN degradation: decimate(mtf_blur(pan)).
Raster degrade_pan(const Raster& pan, const SensorModel& sensor);

struct Normalization {
  double min = 0.0;
  double max = 1.0;
  double restore(double v) const { return min + v * (max - min); }
};

/// Rescales all values of `r` jointly to [0, 1]; returns the mapping.
Normalization normalize_minmax(Raster& r);

struct SamplePair {
  std::string id;
  Raster pan;       // 1 x P x P, degraded PAN (network input)
  Raster lrms;      // B x P/r x P/r
  Raster gt;        // B x P x P, original MS
  Raster pan_full;  // 1 x rP x rP, original PAN (full-resolution assessment)
  Normalization ms_norm;
  Normalization pan_norm;
};

/// Tiles a scene into Wald samples. `ms_scene` is B x H x W at MS
/// resolution; `pan_scene` is 1 x rH x rW. Patches are `patch` MS pixels
/// wide with the given stride. Both scenes are min-max normalized first.
/// A scene smaller than one patch yields an empty list and a warning.
std::vector<SamplePair> make_samples(const Raster& ms_scene,
                                     const Raster& pan_scene, int patch,
                                     int stride, const SensorModel& sensor,
                                     const std::string& id_prefix = "s");

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

/// Seeded 70/20/10 split. The shuffle is a Fisher-Yates pass driven by
/// std::mt19937_64 with rejection-sampled bounded draws, so it is identical
/// across standard libraries.
DatasetSplit split(std::vector<std::string> ids, std::uint64_t seed);

struct Scene {
  Raster ms;   // bands x size x size
  Raster pan;  // 1 x (ratio*size) x (ratio*size)
};

/// Procedural scene: rectangles and disks with smooth, band-correlated
/// spectra over a textured background, rendered on the PAN grid. MS is the
/// ratio x ratio area average of the spectral scene; PAN is a fixed positive
/// weighted band sum plus a small independent detail layer. Values in [0,1].
Scene synth_scene(std::uint64_t seed, int size, int bands, int ratio = 4);

/// Fixed PAN spectral weights used by synth_scene (sum to 1).
std::vector<double> pan_weights(int bands);

struct Dataset {
  std::vector<SamplePair> samples;
  DatasetSplit split;

  const SamplePair& sample(const std::string& id) const;
  std::vector<const SamplePair*> select(const std::vector<std::string>& ids) const;
};

/// Writes one raster per role plus manifest.txt (UTF-8, one line per file:
/// id role path min max split).
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace sdrcnn::wald
