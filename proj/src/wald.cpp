// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/wald.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "sdrcnn/error.hpp"
#include "sdrcnn/log.hpp"
#include "sdrcnn/raster_io.hpp"

namespace sdrcnn::wald {
namespace {

void check_gain(double gain) {
  if (!(gain > 0.0 && gain < 1.0))
    throw UsageError("MTF gain must lie in (0, 1), got " + std::to_string(gain));
}

// 1-D pass along rows (axis 1) or columns (axis 0) with edge replication.
void convolve_axis(const double* src, double* dst, int h, int w,
                   const std::vector<double>& taps, bool along_rows) {
  const int half = static_cast<int>(taps.size()) / 2;
  if (along_rows) {
    for (int y = 0; y < h; ++y) {
      const double* row = src + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k)
          acc += taps[k + half] * row[std::clamp(x + k, 0, w - 1)];
        dst[static_cast<std::size_t>(y) * w + x] = acc;
      }
    }
  } else {
    for (int y = 0; y < h; ++y) {
      double* out = dst + static_cast<std::size_t>(y) * w;
      std::fill(out, out + w, 0.0);
      for (int k = -half; k <= half; ++k) {
        const double t = taps[k + half];
        const double* row = src + static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w;
        for (int x = 0; x < w; ++x) out[x] += t * row[x];
      }
    }
  }
}

// Uniform double in [0, 1) from the top 53 bits; fixed across standard libraries.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t range) {
  const std::uint64_t reject = (0 - range) % range;  // 2^64 mod range
  std::uint64_t x;
  do {
    x = rng();
  } while (x < reject);
  return x % range;
}

}  // namespace

double SensorModel::gain_for_band(int b) const {
  if (!band_gains.empty()) return band_gains.at(static_cast<std::size_t>(b));
  return ms_gain;
}

void SensorModel::validate() const {
  if (bands < 1) throw UsageError("sensor bands must be >= 1");
  if (ratio < 2) throw UsageError("resolution ratio must be >= 2");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw UsageError("blur kernel size must be odd and positive");
  check_gain(ms_gain);
  check_gain(pan_gain);
  if (!band_gains.empty()) {
    if (static_cast<int>(band_gains.size()) != bands)
      throw UsageError("per-band gain count " + std::to_string(band_gains.size()) +
                       " does not match " + std::to_string(bands) + " bands");
    for (double g : band_gains) check_gain(g);
  }
}

double gaussian_sigma(double gain_at_nyquist, int ratio) {
  check_gain(gain_at_nyquist);
  if (ratio < 1) throw UsageError("ratio must be positive");
  return ratio * std::sqrt(-2.0 * std::log(gain_at_nyquist)) / std::numbers::pi;
}

std::vector<double> gaussian_kernel(double gain_at_nyquist, int ratio, int size) {
  if (size < 1 || size % 2 == 0) throw UsageError("kernel size must be odd and positive");
  const double sigma = gaussian_sigma(gain_at_nyquist, ratio);
  const int half = size / 2;
  std::vector<double> taps(static_cast<std::size_t>(size));
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    const double v = sigma > 0.0 ? std::exp(-0.5 * (i / sigma) * (i / sigma)) : (i == 0 ? 1.0 : 0.0);
    taps[i + half] = v;
    sum += v;
  }
  for (double& t : taps) t /= sum;
  // Enforce exact symmetry after normalization.
  for (int i = 0; i < half; ++i) taps[size - 1 - i] = taps[i];
  return taps;
}

Raster mtf_blur(const Raster& img, double gain_at_nyquist, int ratio, int kernel_size) {
  const std::vector<double> gains(static_cast<std::size_t>(img.bands()), gain_at_nyquist);
  return mtf_blur(img, gains, ratio, kernel_size);
}

Raster mtf_blur(const Raster& img, std::span<const double> gains, int ratio, int kernel_size) {
  if (static_cast<int>(gains.size()) != img.bands())
    throw ShapeError("gain count " + std::to_string(gains.size()) + " does not match " +
                     img.shape_string());
  Raster out(img.bands(), img.height(), img.width());
  std::vector<double> tmp(img.pixels());
  for (int b = 0; b < img.bands(); ++b) {
    const auto taps = gaussian_kernel(gains[b], ratio, kernel_size);
    convolve_axis(img.band(b).data(), tmp.data(), img.height(), img.width(), taps, true);
    convolve_axis(tmp.data(), out.band(b).data(), img.height(), img.width(), taps, false);
  }
  return out;
}

Raster decimate(const Raster& img, int factor) {
  if (factor < 1) throw UsageError("decimation factor must be positive");
  const int h = (img.height() + factor - 1) / factor;
  const int w = (img.width() + factor - 1) / factor;
  Raster out(img.bands(), h, w);
  for (int b = 0; b < img.bands(); ++b)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(b, y, x) = img.at(b, y * factor, x * factor);
  return out;
}

Raster degrade_ms(const Raster& ms, const SensorModel& sensor) {
  std::vector<double> gains(static_cast<std::size_t>(ms.bands()));
  for (int b = 0; b < ms.bands(); ++b)
    gains[b] = sensor.gain_for_band(b);
  return decimate(mtf_blur(ms, gains, sensor.ratio, sensor.kernel_size), sensor.ratio);
}

Raster degrade_pan(const Raster& pan, const SensorModel& sensor) {
  return decimate(mtf_blur(pan, sensor.pan_gain, sensor.ratio, sensor.kernel_size), sensor.ratio);
}

Normalization normalize_minmax(Raster& r) {
  if (r.empty()) return {};
  const auto [lo, hi] = std::minmax_element(r.values().begin(), r.values().end());
  Normalization n{*lo, *hi};
  const double span = n.max - n.min;
  for (double& v : r.values()) v = span > 0.0 ? (v - n.min) / span : 0.0;
  return n;
}

std::vector<SamplePair> make_samples(const Raster& ms_scene, const Raster& pan_scene, int patch,
                                     int stride, const SensorModel& sensor,
                                     const std::string& id_prefix) {
  sensor.validate();
  const int r = sensor.ratio;
  if (patch < r || patch % r != 0)
    throw UsageError("patch size must be a positive multiple of the ratio");
  if (stride < 1) throw UsageError("stride must be positive");
  if (pan_scene.bands() != 1) throw ShapeError("PAN scene must have one band");
  if (pan_scene.height() != r * ms_scene.height() || pan_scene.width() != r * ms_scene.width())
    throw ShapeError("PAN scene " + pan_scene.shape_string() + " is not " + std::to_string(r) +
                     "x the MS scene " + ms_scene.shape_string());
  if (!sensor.band_gains.empty() && ms_scene.bands() != sensor.bands)
    throw ShapeError("MS scene band count does not match the sensor model");

  std::vector<SamplePair> samples;
  if (ms_scene.height() < patch || ms_scene.width() < patch) {
    warn("scene " + ms_scene.shape_string() + " is smaller than one " + std::to_string(patch) +
         "-pixel patch; no samples produced");
    return samples;
  }

  Raster ms = ms_scene;
  Raster pan = pan_scene;
  const Normalization ms_norm = normalize_minmax(ms);
  const Normalization pan_norm = normalize_minmax(pan);

  int index = 0;
  for (int y0 = 0; y0 + patch <= ms.height(); y0 += stride) {
    for (int x0 = 0; x0 + patch <= ms.width(); x0 += stride) {
      SamplePair s;
      char buf[32];
      std::snprintf(buf, sizeof buf, "_%04d", index++);
      s.id = id_prefix + buf;
      s.gt = ms.crop(y0, x0, patch, patch);
      s.pan_full = pan.crop(r * y0, r * x0, r * patch, r * patch);
      s.lrms = degrade_ms(s.gt, sensor);
      s.pan = degrade_pan(s.pan_full, sensor);
      s.ms_norm = ms_norm;
      s.pan_norm = pan_norm;
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

DatasetSplit split(std::vector<std::string> ids, std::uint64_t seed) {
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw UsageError("duplicate sample id in split input");
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const std::size_t j = bounded(rng, i);
    std::swap(ids[i - 1], ids[j]);
  }
  const std::size_t n = ids.size();
  std::size_t n_train = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(n)));
  std::size_t n_val = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n)));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);

  DatasetSplit out;
  out.seed = seed;
  out.train.assign(ids.begin(), ids.begin() + n_train);
  out.val.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  out.test.assign(ids.begin() + n_train + n_val, ids.end());
  return out;
}

std::vector<double> pan_weights(int bands) {
  if (bands < 1) throw UsageError("bands must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(bands));
  double sum = 0.0;
  for (int b = 0; b < bands; ++b) {
    w[b] = 1.0 + 0.5 * std::sin(std::numbers::pi * (b + 0.5) / bands);
    sum += w[b];
  }
  for (double& v : w) v /= sum;
  return w;
}

Scene synth_scene(std::uint64_t seed, int size, int bands, int ratio) {
  if (size < 1 || bands < 1 || ratio < 1)
    throw UsageError("synth_scene needs positive size, bands and ratio");
  std::mt19937_64 rng(seed);
  const int n = size * ratio;
  const std::size_t plane = static_cast<std::size_t>(n) * n;

  auto spectrum = [&] {
    const double base = uniform(rng, 0.15, 0.75);
    const double slope = uniform(rng, -0.35, 0.35);
    const double bump = uniform(rng, -0.15, 0.15);
    const double centre = unit(rng);
    std::vector<double> s(static_cast<std::size_t>(bands));
    for (int b = 0; b < bands; ++b) {
      const double t = bands == 1 ? 0.5 : static_cast<double>(b) / (bands - 1);
      const double d = (t - centre) / 0.3;
      s[b] = std::clamp(base + slope * (t - 0.5) + bump * std::exp(-d * d), 0.02, 0.98);
    }
    return s;
  };

  std::vector<std::vector<double>> spectra{spectrum()};
  std::vector<int> owner(plane, 0);
  const int shapes = 6 + size * size / 96;
  for (int k = 0; k < shapes; ++k) {
    spectra.push_back(spectrum());
    const int id = static_cast<int>(spectra.size()) - 1;
    const bool disk = unit(rng) < 0.5;
    const double cy = uniform(rng, 0, n), cx = uniform(rng, 0, n);
    const double max_extent = std::max(2.0, size / 5.0);
    const double ry = uniform(rng, 1.0, max_extent) * ratio;
    const double rx = disk ? ry : uniform(rng, 1.0, max_extent) * ratio;
    const int y_lo = std::max(0, static_cast<int>(std::floor(cy - ry)));
    const int y_hi = std::min(n - 1, static_cast<int>(std::ceil(cy + ry)));
    const int x_lo = std::max(0, static_cast<int>(std::floor(cx - rx)));
    const int x_hi = std::min(n - 1, static_cast<int>(std::ceil(cx + rx)));
    for (int y = y_lo; y <= y_hi; ++y)
      for (int x = x_lo; x <= x_hi; ++x) {
        const double dy = (y + 0.5 - cy) / ry, dx = (x + 0.5 - cx) / rx;
        const bool inside = disk ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (inside) owner[static_cast<std::size_t>(y) * n + x] = id;
      }
  }

  // Low-amplitude texture shared by all bands plus a gentle illumination ramp.
  struct Wave {
    double fy, fx, phase, amp;
  };
  std::vector<Wave> waves;
  for (int k = 0; k < 4; ++k)
    waves.push_back({uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3),
                     uniform(rng, 0, 2 * std::numbers::pi), uniform(rng, 0.01, 0.025)});
  const double ramp_y = uniform(rng, -0.05, 0.05), ramp_x = uniform(rng, -0.05, 0.05);

  Raster latent(bands, n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double tex = ramp_y * (static_cast<double>(y) / n - 0.5) + ramp_x * (static_cast<double>(x) / n - 0.5);
      for (const Wave& w : waves)
        tex += w.amp * std::sin(2 * std::numbers::pi * (w.fy * y + w.fx * x) + w.phase);
      const auto& s = spectra[owner[static_cast<std::size_t>(y) * n + x]];
      for (int b = 0; b < bands; ++b) latent.at(b, y, x) = std::clamp(s[b] * (1.0 + tex), 0.0, 1.0);
    }

  Scene scene{Raster(bands, size, size), Raster(1, n, n)};
  const double area = static_cast<double>(ratio) * ratio;
  for (int b = 0; b < bands; ++b)
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        double acc = 0.0;
        for (int dy = 0; dy < ratio; ++dy)
          for (int dx = 0; dx < ratio; ++dx) acc += latent.at(b, y * ratio + dy, x * ratio + dx);
        scene.ms.at(b, y, x) = acc / area;
      }

  const auto weights = pan_weights(bands);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double v = 0.0;
      for (int b = 0; b < bands; ++b) v += weights[b] * latent.at(b, y, x);
      v += 0.01 * (2.0 * unit(rng) - 1.0);
      scene.pan.at(0, y, x) = std::clamp(v, 0.0, 1.0);
    }
  return scene;
}

const SamplePair& Dataset::sample(const std::string& id) const {
  for (const auto& s : samples)
    if (s.id == id) return s;
  throw DataError("no sample with id '" + id + "'");
}

std::vector<const SamplePair*> Dataset::select(const std::vector<std::string>& ids) const {
  std::vector<const SamplePair*> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(&sample(id));
  return out;
}

namespace {

constexpr const char* kManifestHeader = "# sdrcnn dataset manifest v1\n# id role path min max split\n";

std::string split_of(const DatasetSplit& split, const std::string& id) {
  auto has = [&](const std::vector<std::string>& v) {
    return std::find(v.begin(), v.end(), id) != v.end();
  };
  if (has(split.train)) return "train";
  if (has(split.val)) return "val";
  if (has(split.test)) return "test";
  return "none";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << kManifestHeader << "# seed " << dataset.split.seed << '\n';
  for (const auto& s : dataset.samples) {
    const std::string split = split_of(dataset.split, s.id);
    const std::pair<const char*, const Raster*> roles[] = {
        {"pan", &s.pan}, {"lrms", &s.lrms}, {"gt", &s.gt}, {"pan_full", &s.pan_full}};
    for (const auto& [role, raster] : roles) {
      if (raster->empty()) continue;
      const std::string file = s.id + "_" + role + ".msr";
      io::write_raster(*raster, dir / file);
      const Normalization& norm = std::string_view(role).starts_with("pan") ? s.pan_norm : s.ms_norm;
      manifest << s.id << ' ' << role << ' ' << file << ' ' << format_double(norm.min) << ' '
               << format_double(norm.max) << ' ' << split << '\n';
    }
  }
  io::write_file_atomic(dir / "manifest.txt", manifest.str());
}

Dataset read_dataset(const std::filesystem::path& dir) {
  std::istringstream in(io::read_file(dir / "manifest.txt"));
  Dataset ds;
  std::map<std::string, std::size_t> index;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      if (ls >> key && key == "seed") ls >> ds.split.seed;
      continue;
    }
    std::istringstream ls(line);
    std::string id, role, file, split;
    Normalization norm;
    if (!(ls >> id >> role >> file >> norm.min >> norm.max >> split))
      throw DataError("manifest.txt:" + std::to_string(line_no) + ": malformed line");
    auto [it, inserted] = index.emplace(id, ds.samples.size());
    if (inserted) {
      ds.samples.emplace_back();
      ds.samples.back().id = id;
      if (split == "train") ds.split.train.push_back(id);
      else if (split == "val") ds.split.val.push_back(id);
      else if (split == "test") ds.split.test.push_back(id);
    }
    SamplePair& s = ds.samples[it->second];
    Raster r = io::read_raster(dir / file);
    if (role == "pan") {
      s.pan = std::move(r);
      s.pan_norm = norm;
    } else if (role == "pan_full") {
      s.pan_full = std::move(r);
      s.pan_norm = norm;
    } else if (role == "lrms") {
      s.lrms = std::move(r);
      s.ms_norm = norm;
    } else if (role == "gt") {
      s.gt = std::move(r);
      s.ms_norm = norm;
    } else {
      throw DataError("manifest.txt:" + std::to_string(line_no) + ": unknown role '" + role + "'");
    }
  }
  for (const auto& s : ds.samples)
    if (s.pan.empty() || s.lrms.empty() || s.gt.empty())
      throw DataError("sample '" + s.id + "' is missing a pan, lrms or gt raster");
  return ds;
}

}  // namespace sdrcnn::wald
