// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include "doctest.h"
#include "model_checks.hpp"
#include "sdrcnn/checkpoint.hpp"
#include "sdrcnn/config.hpp"
#include "sdrcnn/error.hpp"
#include "sdrcnn/log.hpp"
#include "sdrcnn/raster_io.hpp"
#include "sdrcnn/visualize.hpp"
#include "testing.hpp"

using namespace sdrcnn;
using sdrcnn::testing::random_raster;
using sdrcnn::testing::random_tensor;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sdrcnn_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("raster files: bit-exact round-trip for both dtypes") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const int b = 1 + static_cast<int>(rng() % 9), h = 1 + static_cast<int>(rng() % 40),
              w = 1 + static_cast<int>(rng() % 40);
    Raster r = random_raster(b, h, w, rng(), -1e3, 1e3);
    r.values()[0] = -0.0;
    r.values()[r.size() - 1] = 1e-310;  // subnormal
    CHECK(io::decode_raster(io::encode_raster(r)) == r);

    Raster f = r;
    for (double& v : f.values()) v = static_cast<float>(v);
    CHECK(io::decode_raster(io::encode_raster(f, io::DType::kFloat32)) == f);
  }
  const Raster r = random_raster(3, 5, 7, 9);
  const auto path = scratch("a.msr");
  io::write_raster(r, path);
  CHECK(io::read_raster(path) == r);
  CHECK(fs::file_size(path) == io::kRasterHeaderSize + 3 * 5 * 7 * 8);
  for (const auto& entry : fs::directory_iterator(path.parent_path()))
    CHECK(entry.path().string().find(".tmp") == std::string::npos);
}

TEST_CASE("raster files: header layout is little-endian") {
  const std::string bytes = io::encode_raster(Raster(2, 3, 258, 1.0), io::DType::kFloat32);
  CHECK(bytes.substr(0, 4) == "MSR1");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(static_cast<unsigned char>(bytes[6]) == 2);
  CHECK(static_cast<unsigned char>(bytes[8]) == 3);
  CHECK(static_cast<unsigned char>(bytes[12]) == 2);
  CHECK(static_cast<unsigned char>(bytes[13]) == 1);
  CHECK(static_cast<unsigned char>(bytes[16]) == 1);
  // 1.0f = 0x3F800000
  CHECK(static_cast<unsigned char>(bytes[23]) == 0x3F);
  CHECK(static_cast<unsigned char>(bytes[22]) == 0x80);
}

TEST_CASE("raster files: distinguishable errors") {
  const std::string good = io::encode_raster(random_raster(2, 4, 4, 3));
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_THROWS_WITH_AS(io::decode_raster(bad_magic), "not a raster file", DataError);
  CHECK_THROWS_WITH_AS(io::decode_raster("MS"), "not a raster file", DataError);
  CHECK_THROWS_WITH_AS(io::decode_raster(good.substr(0, good.size() - 5)),
                       doctest::Contains("unexpected end"), DataError);
  CHECK_THROWS_WITH_AS(io::decode_raster(good.substr(0, 12)), doctest::Contains("unexpected end"),
                       DataError);
  CHECK_THROWS_WITH_AS(io::decode_raster(good, io::DType::kFloat32), "dtype mismatch", DataError);
  std::string bad_dtype = good;
  bad_dtype[16] = 7;
  CHECK_THROWS_WITH_AS(io::decode_raster(bad_dtype), doctest::Contains("unsupported dtype"), DataError);
  CHECK_THROWS_WITH_AS(io::decode_raster(good + "x"), doctest::Contains("trailing"), DataError);
  CHECK_THROWS_AS(io::read_raster(scratch("missing.msr")), DataError);
}

TEST_CASE("config files: parsing and typed access") {
  auto cfg = KeyValueConfig::parse(
      "# comment\n\n model.width = 40 \ntrain.lr=0.002\nflag=on\nlist=0.1, 0.2,0.3\nname = a b\n");
  CHECK(cfg.get_int("model.width", 52) == 40);
  CHECK(cfg.get_double("train.lr", 1e-3) == 0.002);
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_doubles("list", {}) == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(cfg.get_int("absent", 7) == 7);
  CHECK(cfg.unused_keys() == std::vector<std::string>{"name"});
  CHECK_THROWS_AS(cfg.require_all_used(), UsageError);
  CHECK(cfg.get_string("name", "") == "a b");
  CHECK_NOTHROW(cfg.require_all_used());
  CHECK_THROWS_AS(KeyValueConfig::parse("novalue\n"), UsageError);
  auto bad = KeyValueConfig::parse("x=12abc\ny=maybe");
  CHECK_THROWS_AS(bad.get_int("x", 0), UsageError);
  CHECK_THROWS_AS(bad.get_bool("y", false), UsageError);
}

TEST_CASE("checkpoints: forward is bit-identical after a round-trip") {
  for (bool bn : {false, true}) {
    model::SdrcnnConfig c = sdrcnn::testing::small_config();
    c.batch_norm = bn;
    c.extra_relu = bn;
    model::SdrcnnParams p = model::SdrcnnParams::initialize(c, 3);
    sdrcnn::testing::randomize_params(p, 4, 0.3);
    // Give BN non-trivial running statistics.
    const nn::Tensor pan = random_tensor({2, 1, 16, 16}, 5, 0, 1);
    const nn::Tensor lrms = random_tensor({2, c.bands, 4, 4}, 6, 0, 1);
    model::dense_forward(pan, lrms, p, model::Mode::kTraining);
    const nn::Tensor before = model::predict(pan, lrms, p);

    const auto path = scratch(bn ? "bn.ckpt" : "plain.ckpt");
    io::save_checkpoint(p, path, {{"iteration", "17"}});
    io::Checkpoint loaded = io::load_checkpoint(path);
    CHECK(loaded.params.config() == c);
    CHECK(loaded.meta.at("iteration") == "17");
    CHECK(model::predict(pan, lrms, loaded.params) == before);
    std::size_t tensors = 0;
    loaded.params.visit_state([&](const std::string&, const nn::Tensor&) { ++tensors; });
    std::size_t expected = 0;
    p.visit_state([&](const std::string&, const nn::Tensor&) { ++expected; });
    CHECK(tensors == expected);
  }
  CHECK_THROWS_WITH_AS(io::decode_checkpoint("garbage\n"), "not a checkpoint file", DataError);
  const std::string good = io::encode_checkpoint(model::SdrcnnParams::initialize(sdrcnn::testing::small_config(), 1));
  CHECK_THROWS_AS(io::decode_checkpoint(good.substr(0, good.size() - 3)), DataError);
}

TEST_CASE("png: black, full intensity, monotone rescale") {
  viz::PngOptions rgb;
  rgb.rgb_bands = {0, 1, 2};
  const auto black = viz::decode_png(viz::encode_png(Raster(3, 4, 5, 0.0), rgb));
  CHECK(black.width == 5);
  CHECK(black.height == 4);
  CHECK(black.channels == 3);
  for (auto v : black.pixels) CHECK(v == 0);
  const auto full = viz::decode_png(viz::encode_png(Raster(3, 2, 2, 1.0), rgb));
  for (auto v : full.pixels) CHECK(v == 255);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    if (a <= b) CHECK(viz::to_byte(a, 0, 1) <= viz::to_byte(b, 0, 1));
  }
  viz::PngOptions gray;
  gray.mode = viz::PngMode::kGray;
  gray.max = 2.0;
  const auto g = viz::decode_png(viz::encode_png(Raster(1, 1, 3, std::vector<double>{0, 1, 2}), gray));
  CHECK(g.channels == 1);
  CHECK(g.pixels == std::vector<std::uint8_t>{0, 128, 255});
  CHECK_THROWS_AS(viz::encode_png(Raster(2, 2, 2), rgb), UsageError);
}

TEST_CASE("png: heatmap ramp endpoints and file export") {
  CHECK(viz::heatmap_color(0.0) == std::array<std::uint8_t, 3>{0, 0, 128});
  CHECK(viz::heatmap_color(0.5) == std::array<std::uint8_t, 3>{128, 255, 128});
  CHECK(viz::heatmap_color(1.0) == std::array<std::uint8_t, 3>{128, 0, 0});
  CHECK(viz::heatmap_color(2.0) == viz::heatmap_color(1.0));
  viz::PngOptions heat;
  heat.mode = viz::PngMode::kHeatmap;
  const auto path = scratch("heat.png");
  viz::export_png(random_raster(1, 8, 8, 2), heat, path);
  const auto back = viz::decode_png(io::read_file(path));
  CHECK(back.channels == 3);
  CHECK(back.pixels.size() == 8 * 8 * 3);
}

TEST_CASE("pca: rank-one input gives the rescaled map and constant fill") {
  const Raster m = random_raster(1, 9, 11, 4);
  nn::Tensor f({1, 52, 9, 11});
  for (int c = 0; c < 52; ++c)
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 11; ++x) f.at(0, c, y, x) = m.at(0, y, x);
  std::vector<std::string> warnings;
  const auto previous = set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
  const Raster pcs = viz::pca_features(f);
  set_warning_sink(previous);
  CHECK(warnings.size() == 1);
  const auto [lo, hi] = std::minmax_element(m.values().begin(), m.values().end());
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 11; ++x) {
      CHECK(pcs.at(0, y, x) == doctest::Approx((m.at(0, y, x) - *lo) / (*hi - *lo)).epsilon(1e-10));
      for (int k = 1; k < 4; ++k) CHECK(pcs.at(k, y, x) == 0.5);
    }
}

TEST_CASE("pca: ordering, sign convention, reconstruction") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const nn::Tensor f = random_tensor({1, 52, 10, 12}, seed);
    const viz::PcaDecomposition d = viz::pca_decompose(f);
    const int k = static_cast<int>(d.singular_values.size());
    CHECK(k == 52);
    // Score variances are non-increasing.
    double previous = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      double var = 0.0;
      for (int p = 0; p < 120; ++p) var += d.scores[p * k + j] * d.scores[p * k + j];
      CHECK(var <= previous * (1 + 1e-12));
      previous = var;
      int arg = 0;
      for (int i = 1; i < 52; ++i)
        if (std::abs(d.directions[j * 52 + i]) > std::abs(d.directions[j * 52 + arg])) arg = i;
      CHECK(d.directions[j * 52 + arg] > 0.0);
    }
    double err = 0.0;
    for (int p = 0; p < 120; ++p)
      for (int c = 0; c < 52; ++c) {
        double v = d.mean[c];
        for (int j = 0; j < k; ++j) v += d.scores[p * k + j] * d.directions[j * 52 + c];
        err = std::max(err, std::abs(v - f.at(0, c, p / 12, p % 12)));
      }
    CHECK(err < 1e-8);
    const Raster pcs = viz::pca_features(f);
    CHECK(pcs.bands() == 4);
    for (int b = 0; b < 4; ++b) {
      const auto band = pcs.band(b);
      CHECK(*std::min_element(band.begin(), band.end()) == 0.0);
      CHECK(*std::max_element(band.begin(), band.end()) == 1.0);
    }
  }
  CHECK_THROWS_AS(viz::pca_features(random_tensor({1, 3, 4, 4}, 1)), ShapeError);
}
