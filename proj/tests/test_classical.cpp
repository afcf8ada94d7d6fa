// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "sdrcnn/classical.hpp"
#include "sdrcnn/error.hpp"
#include "sdrcnn/ops.hpp"
#include "sdrcnn/wald.hpp"
#include "classical_oracles.hpp"
#include "testing.hpp"

using namespace sdrcnn;
using namespace sdrcnn::classical;
using sdrcnn::testing::max_abs_diff;
using sdrcnn::testing::random_raster;

using namespace sdrcnn::testing;

TEST_CASE("sfim: constant PAN gives the upsampled MS exactly") {
  const Raster lrms = random_raster(4, 8, 8, 3, 0.1, 0.9);
  for (double c : {0.37, 1.0, 1e-3, 123.456}) {
    const Raster out = sfim(Raster(1, 32, 32, c), lrms);
    CHECK(out == nn::upsample_bicubic(lrms, 4));
  }
}

TEST_CASE("sfim: invariant to positive PAN scaling") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Pair p = smooth_pair(seed);
    const Raster base = sfim(p.pan, p.lrms);
    for (double k : {2.0, 0.25, 1024.0}) {
      Raster scaled = p.pan;
      for (double& v : scaled.values()) v *= k;
      CHECK(sfim(scaled, p.lrms) == base);
    }
    Raster odd = p.pan;
    for (double& v : odd.values()) v *= 3.7;
    CHECK(max_abs_diff(sfim(odd, p.lrms).values(), base.values()) < 1e-12);
  }
}

TEST_CASE("sfim: matches the direct formula oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Pair p = smooth_pair(seed + 100);
    const Raster out = sfim(p.pan, p.lrms);
    CHECK(out.same_shape(Raster(4, 32, 32)));
    CHECK(max_abs_diff(out.values(), sfim_oracle(p.pan, p.lrms, 7, 0.0, 10.0).values()) < 1e-10);
    SfimOptions wide;
    wide.kernel = 9;
    wide.ratio_max = 1.5;
    CHECK(max_abs_diff(sfim(p.pan, p.lrms, wide).values(),
                       sfim_oracle(p.pan, p.lrms, 9, 0.0, 1.5).values()) < 1e-10);
  }
}

TEST_CASE("sfim: option validation and the division guard") {
  const Raster lrms = random_raster(2, 4, 4, 1);
  Raster pan(1, 16, 16, 0.0);
  SfimOptions strict;
  strict.clamp = false;
  CHECK_THROWS_AS(sfim(pan, lrms, strict), DataError);
  CHECK_NOTHROW(sfim(pan, lrms));
  SfimOptions bad;
  bad.kernel = 3;
  CHECK_THROWS_AS(sfim(pan, lrms, bad), UsageError);
  bad.kernel = 8;
  CHECK_THROWS_AS(sfim(pan, lrms, bad), UsageError);
  CHECK_THROWS_AS(sfim(Raster(1, 15, 16), lrms), ShapeError);
}

TEST_CASE("gram_schmidt: PAN equal to the intensity adds no detail") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Raster lrms = random_raster(4, 8, 8, seed, 0.1, 0.9);
    const Raster up = nn::upsample_bicubic(lrms, 4);
    const Raster pan = intensity(up, std::vector<double>(4, 0.25));
    CHECK(gram_schmidt(pan, lrms) == up);
  }
}

TEST_CASE("gram_schmidt: single band returns the matched PAN") {
  const Raster lrms = random_raster(1, 8, 8, 5, 0.1, 0.9);
  const Raster pan = random_raster(1, 32, 32, 6, 0.0, 3.0);
  const Raster out = gram_schmidt(pan, lrms);
  const Raster up = nn::upsample_bicubic(lrms, 4);
  double mi = 0, mp = 0;
  for (std::size_t i = 0; i < pan.size(); ++i) {
    mi += up.values()[i];
    mp += pan.values()[i];
  }
  mi /= pan.size();
  mp /= pan.size();
  double vi = 0, vp = 0;
  for (std::size_t i = 0; i < pan.size(); ++i) {
    vi += (up.values()[i] - mi) * (up.values()[i] - mi);
    vp += (pan.values()[i] - mp) * (pan.values()[i] - mp);
  }
  const double s = std::sqrt(vi / vp);
  for (std::size_t i = 0; i < pan.size(); ++i)
    CHECK(out.values()[i] == doctest::Approx((pan.values()[i] - mp) * s + mi).epsilon(1e-12));
}

TEST_CASE("gram_schmidt: matches the step-by-step oracle and keeps band means") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Pair p = smooth_pair(seed + 200);
    const Raster out = gram_schmidt(p.pan, p.lrms);
    CHECK(max_abs_diff(out.values(), gs_oracle(p.pan, p.lrms).values()) < 1e-10);
    const Raster up = nn::upsample_bicubic(p.lrms, 4);
    for (int b = 0; b < 4; ++b) {
      double mo = 0, mu = 0;
      for (double v : out.band(b)) mo += v;
      for (double v : up.band(b)) mu += v;
      CHECK(std::abs(mo - mu) / out.pixels() < 1e-12);
    }
  }
}

TEST_CASE("gram_schmidt: degenerate inputs and shapes") {
  CHECK_THROWS_WITH_AS(gram_schmidt(random_raster(1, 16, 16, 1), Raster(3, 4, 4, 0.5)),
                       "degenerate intensity", DataError);
  CHECK_THROWS_AS(gram_schmidt(Raster(1, 16, 16, 0.5), random_raster(3, 4, 4, 2)), DataError);
  CHECK_THROWS_AS(gram_schmidt(random_raster(2, 16, 16, 1), random_raster(3, 4, 4, 2)), ShapeError);
  GsOptions w;
  w.weights = {1.0, 0.0};
  CHECK_THROWS_AS(gram_schmidt(random_raster(1, 16, 16, 1), random_raster(3, 4, 4, 2), w),
                  UsageError);
  CHECK(parse_method("gs") == Method::kGramSchmidt);
  CHECK(parse_method("sfim") == Method::kSfim);
  CHECK_THROWS_AS(parse_method("pca"), UsageError);
}
