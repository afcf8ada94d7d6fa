// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "doctest.h"
#include "sdrcnn/error.hpp"
#include "sdrcnn/log.hpp"
#include "sdrcnn/wald.hpp"
#include "testing.hpp"

using namespace sdrcnn;
using namespace sdrcnn::wald;
using sdrcnn::testing::random_raster;

namespace {

// Real DFT of a symmetric tap vector at frequency f (cycles per sample).
double transfer_at(const std::vector<double>& taps, double f) {
  const int half = static_cast<int>(taps.size()) / 2;
  double re = 0.0, im = 0.0;
  for (int i = -half; i <= half; ++i) {
    re += taps[i + half] * std::cos(2 * std::numbers::pi * f * i);
    im -= taps[i + half] * std::sin(2 * std::numbers::pi * f * i);
  }
  return std::hypot(re, im);
}

struct WarningCapture {
  std::vector<std::string> messages;
  WarningSink previous;
  WarningCapture() {
    previous = set_warning_sink([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarningCapture() { set_warning_sink(previous); }
};

}  // namespace

TEST_CASE("gaussian kernel: normalized, symmetric, Nyquist gain within 2%") {
  for (double gain : {0.30, 0.15, 0.2, 0.45, 0.6}) {
    const auto taps = gaussian_kernel(gain, 4, 41);
    REQUIRE(taps.size() == 41);
    double sum = 0.0;
    for (double t : taps) sum += t;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    for (int i = 0; i < 20; ++i) CHECK(taps[i] == taps[40 - i]);
    const double realized = transfer_at(taps, 1.0 / 8.0);
    CHECK(std::abs(realized - gain) / gain < 0.02);
  }
  CHECK_THROWS_AS(gaussian_kernel(0.0, 4, 41), UsageError);
  CHECK_THROWS_AS(gaussian_kernel(1.0, 4, 41), UsageError);
  CHECK_THROWS_AS(gaussian_kernel(0.3, 4, 40), UsageError);
}

TEST_CASE("mtf_blur: impulse response is the realized kernel") {
  Raster impulse(1, 81, 81, 0.0);
  impulse.at(0, 40, 40) = 1.0;
  const Raster out = mtf_blur(impulse, 0.3);
  const auto taps = gaussian_kernel(0.3, 4, 41);
  double max_err = 0.0;
  for (int y = 0; y < 81; ++y)
    for (int x = 0; x < 81; ++x) {
      const int dy = y - 40, dx = x - 40;
      const double expect = (std::abs(dy) <= 20 && std::abs(dx) <= 20) ? taps[dy + 20] * taps[dx + 20] : 0.0;
      max_err = std::max(max_err, std::abs(out.at(0, y, x) - expect));
    }
  CHECK(max_err < 1e-16);

  // 2-D DFT of the realized response at the Nyquist frequency along x.
  double re = 0.0;
  for (int y = 0; y < 81; ++y)
    for (int x = 0; x < 81; ++x) re += out.at(0, y, x) * std::cos(2 * std::numbers::pi * (x - 40) / 8.0);
  CHECK(std::abs(re - 0.3) / 0.3 < 0.02);
}

TEST_CASE("mtf_blur: constants, range, and the gain->1 limit") {
  const Raster c(3, 20, 17, 0.625);
  const Raster bc = mtf_blur(c, 0.3);
  for (double v : bc.values()) CHECK(v == doctest::Approx(0.625).epsilon(1e-14));

  const Raster r = random_raster(2, 33, 29, 4, 0.2, 0.9);
  const Raster br = mtf_blur(r, 0.15);
  for (int b = 0; b < 2; ++b) {
    const auto in = r.band(b);
    const auto [lo, hi] = std::minmax_element(in.begin(), in.end());
    for (double v : br.band(b)) {
      CHECK(v >= *lo - 1e-15);
      CHECK(v <= *hi + 1e-15);
    }
  }

  const Raster near = mtf_blur(r, 1.0 - 1e-9);
  CHECK(sdrcnn::testing::max_abs_diff(near.values(), r.values()) < 1e-12);
  CHECK_THROWS_AS(mtf_blur(r, 1.5), UsageError);
}

TEST_CASE("decimate: sizes, constants, and blur of an upsampled constant") {
  const Raster big = random_raster(8, 256, 256, 1);
  const Raster d = decimate(big, 4);
  CHECK(d.height() == 64);
  CHECK(d.width() == 64);
  CHECK(d.at(3, 5, 7) == big.at(3, 20, 28));
  CHECK(decimate(Raster(2, 16, 16, 0.5), 4) == Raster(2, 4, 4, 0.5));

  SensorModel sensor;
  sensor.bands = 2;
  const Raster up_constant(2, 32, 32, 0.25);
  const Raster lr = degrade_ms(up_constant, sensor);
  for (double v : lr.values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("make_samples: full-sized shapes and Wald consistency") {
  const Scene scene = synth_scene(3, 256, 8);
  SensorModel sensor;
  const auto samples = make_samples(scene.ms, scene.pan, 256, 256, sensor);
  REQUIRE(samples.size() == 1);
  const SamplePair& s = samples[0];
  CHECK(s.pan.bands() == 1);
  CHECK(s.pan.height() == 256);
  CHECK(s.pan.width() == 256);
  CHECK(s.lrms.bands() == 8);
  CHECK(s.lrms.height() == 64);
  CHECK(s.lrms.width() == 64);
  CHECK(s.gt.bands() == 8);
  CHECK(s.gt.height() == 256);
  CHECK(s.pan_full.height() == 1024);

  // Bit-exact: the LRMS is blur-then-decimate of the GT.
  CHECK(decimate(mtf_blur(s.gt, 0.30), 4) == s.lrms);
  CHECK(decimate(mtf_blur(s.pan_full, 0.15), 4) == s.pan);
  for (const Raster* r : {&s.pan, &s.lrms, &s.gt, &s.pan_full})
    for (double v : r->values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-15);
    }
  // Without blur, decimation of a generic GT differs from the LRMS.
  CHECK_FALSE(decimate(s.gt, 4) == s.lrms);
}

TEST_CASE("make_samples: tiling count, constant scenes, and undersized scenes") {
  SensorModel sensor;
  sensor.bands = 1;
  sensor.kernel_size = 9;
  const Raster ms(1, 1024, 1024, 0.0);
  Raster ms_ramp = ms;
  for (int y = 0; y < 1024; ++y) ms_ramp.at(0, y, 0) = y;
  Raster pan(1, 4096, 4096, 0.0);
  pan.at(0, 0, 0) = 1.0;
  CHECK(make_samples(ms_ramp, pan, 256, 256, sensor).size() == 16);

  // A band-limited constant: plain decimation equals the LRMS.
  sensor.kernel_size = 41;
  Raster flat_ms(1, 64, 64, 0.5);
  flat_ms.at(0, 63, 63) = 0.0;  // keeps min-max normalization non-degenerate
  Raster flat_pan(1, 256, 256, 0.5);
  flat_pan.at(0, 255, 255) = 0.0;
  const auto flat = make_samples(flat_ms, flat_pan, 16, 16, sensor);
  REQUIRE(!flat.empty());
  CHECK(sdrcnn::testing::max_abs_diff(decimate(flat[0].gt, 4).values(), flat[0].lrms.values()) < 1e-14);

  WarningCapture capture;
  CHECK(make_samples(Raster(8, 32, 32, 0.1), Raster(1, 128, 128, 0.1), 64, 64, SensorModel{}).empty());
  REQUIRE(capture.messages.size() == 1);
  CHECK(capture.messages[0].find("smaller than one") != std::string::npos);

  CHECK_THROWS_AS(make_samples(Raster(8, 32, 32), Raster(1, 64, 64), 16, 16, SensorModel{}),
                  ShapeError);
}

TEST_CASE("make_samples: normalization metadata inverts to the scene values") {
  const Scene scene = synth_scene(5, 32, 4);
  Raster ms = scene.ms;
  for (double& v : ms.values()) v = 100.0 + 900.0 * v;
  SensorModel sensor;
  sensor.bands = 4;
  const auto samples = make_samples(ms, scene.pan, 16, 16, sensor, "scene");
  REQUIRE(samples.size() == 4);
  CHECK(samples[0].id == "scene_0000");
  CHECK(samples[3].id == "scene_0003");
  const auto& s = samples[1];
  CHECK(s.ms_norm.restore(s.gt.at(2, 3, 4)) == doctest::Approx(ms.at(2, 3, 16 + 4)).epsilon(1e-12));
}

TEST_CASE("split: 70/20/10, deterministic, disjoint and exhaustive") {
  std::vector<std::string> ten;
  for (int i = 0; i < 10; ++i) ten.push_back("id" + std::to_string(i));
  const DatasetSplit a = split(ten, 42);
  CHECK(a.train.size() == 7);
  CHECK(a.val.size() == 2);
  CHECK(a.test.size() == 1);
  const DatasetSplit b = split(ten, 42);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);
  std::vector<std::string> reversed(ten.rbegin(), ten.rend());
  CHECK(split(reversed, 42).train == a.train);

  std::mt19937_64 rng(7);
  bool any_different = false;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 300);
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
    const auto sp = split(ids, rng());
    std::set<std::string> all;
    for (const auto* part : {&sp.train, &sp.val, &sp.test}) all.insert(part->begin(), part->end());
    CHECK(all.size() == static_cast<std::size_t>(n));
    CHECK(sp.train.size() + sp.val.size() + sp.test.size() == static_cast<std::size_t>(n));
    CHECK(std::abs(static_cast<double>(sp.train.size()) - 0.7 * n) <= 0.5 + 1e-9);
    CHECK(std::abs(static_cast<double>(sp.val.size()) - 0.2 * n) <= 0.5 + 1e-9);
    if (n > 5 && split(ids, 1).train != split(ids, 2).train) any_different = true;
  }
  CHECK(any_different);
  CHECK_THROWS_AS(split({"a", "a"}, 1), UsageError);
}

TEST_CASE("synth_scene: determinism, band count, range, PAN correlation") {
  const Scene a = synth_scene(11, 32, 8);
  const Scene b = synth_scene(11, 32, 8);
  CHECK(a.ms == b.ms);
  CHECK(a.pan == b.pan);
  CHECK_FALSE(synth_scene(12, 32, 8).ms == a.ms);
  CHECK(synth_scene(1, 16, 4).ms.bands() == 4);
  CHECK(a.pan.height() == 128);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scene s = synth_scene(seed, 48, 8);
    for (double v : s.ms.values()) CHECK((v >= 0.0 && v <= 1.0));
    for (double v : s.pan.values()) CHECK((v >= 0.0 && v <= 1.0));
    // Box-average PAN onto the MS grid and correlate with the band mean.
    std::vector<double> pan_lr, band_mean;
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x) {
        double p = 0.0;
        for (int dy = 0; dy < 4; ++dy)
          for (int dx = 0; dx < 4; ++dx) p += s.pan.at(0, 4 * y + dy, 4 * x + dx);
        pan_lr.push_back(p / 16.0);
        double m = 0.0;
        for (int bnd = 0; bnd < 8; ++bnd) m += s.ms.at(bnd, y, x);
        band_mean.push_back(m / 8.0);
      }
    CHECK(sdrcnn::testing::pearson(pan_lr, band_mean) > 0.8);
  }
}

TEST_CASE("dataset directory round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "sdrcnn_test_dataset";
  std::filesystem::remove_all(dir);
  const Scene scene = synth_scene(2, 32, 4);
  SensorModel sensor;
  sensor.bands = 4;
  Dataset ds;
  ds.samples = make_samples(scene.ms, scene.pan, 16, 8, sensor);
  std::vector<std::string> ids;
  for (const auto& s : ds.samples) ids.push_back(s.id);
  ds.split = split(ids, 9);
  write_dataset(dir, ds);
  const Dataset back = read_dataset(dir);
  REQUIRE(back.samples.size() == ds.samples.size());
  CHECK(back.split.seed == 9);
  CHECK(back.split.train.size() == ds.split.train.size());
  for (const auto& s : ds.samples) {
    const auto& t = back.sample(s.id);
    CHECK(t.gt == s.gt);
    CHECK(t.lrms == s.lrms);
    CHECK(t.pan == s.pan);
    CHECK(t.pan_full == s.pan_full);
    CHECK(t.ms_norm.min == s.ms_norm.min);
    CHECK(t.pan_norm.max == s.pan_norm.max);
  }
  std::filesystem::remove_all(dir);
}
