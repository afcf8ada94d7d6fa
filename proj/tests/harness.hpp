// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// Small synthetic datasets and the overfit run shared by the training tests
// and the acceptance suite.

#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "sdrcnn/train.hpp"
#include "sdrcnn/wald.hpp"

namespace sdrcnn::testing {

/// Tiles synthetic scenes into `count` samples with `patch` x `patch` GT.
/// Every sample goes to the training split unless `with_split` is set.
inline wald::Dataset synthetic_dataset(std::uint64_t seed, int count, int patch, int bands = 8,
                                       bool with_split = false) {
  wald::SensorModel sensor;
  sensor.bands = bands;
  wald::Dataset ds;
  for (int scene = 0; static_cast<int>(ds.samples.size()) < count; ++scene) {
    const wald::Scene s = wald::synth_scene(seed + scene, 2 * patch, bands);
    auto tiles = wald::make_samples(s.ms, s.pan, patch, patch, sensor,
                                    "scene" + std::to_string(scene));
    for (auto& t : tiles)
      if (static_cast<int>(ds.samples.size()) < count) ds.samples.push_back(std::move(t));
  }
  std::vector<std::string> ids;
  for (const auto& s : ds.samples) ids.push_back(s.id);
  if (with_split) {
    ds.split = wald::split(ids, seed);
  } else {
    ds.split.train = ids;
    ds.split.seed = seed;
  }
  return ds;
}

struct OverfitOutcome {
  double initial = 0.0;  // full training-set L1 before any step
  double final = 0.0;    // at the last check
  double first_batch_loss = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

/// 8 samples of 32x32 GT, batch 4, at most `max_iterations` steps. Stops at
/// the first check (every `check_every` steps) where the full training L1
/// falls below `stop_ratio` times its initial value.
inline OverfitOutcome run_overfit(std::uint64_t seed, int max_iterations = 2000,
                                  double stop_ratio = 0.25, int check_every = 25,
                                  bool spectral_mapping = true) {
  const wald::Dataset ds = synthetic_dataset(seed, 8, 32);
  const auto train_set = ds.select(ds.split.train);
  train::TrainConfig cfg;
  cfg.iterations = max_iterations;
  cfg.batch_size = 4;
  cfg.seed = seed;
  cfg.model.spectral_mapping = spectral_mapping;

  OverfitOutcome out;
  {
    auto init = model::SdrcnnParams::initialize(cfg.model, seed);
    out.initial = train::dataset_l1(train_set, init);
  }
  out.final = out.initial;
  train::TrainOptions opts;
  opts.on_iteration = [&](int it, double loss, model::SdrcnnParams& p) {
    if (it == 0) out.first_batch_loss = loss;
    out.iterations = it + 1;
    if ((it + 1) % check_every != 0) return true;
    out.final = train::dataset_l1(train_set, p);
    return out.final >= stop_ratio * out.initial;
  };
  const auto start = std::chrono::steady_clock::now();
  train::train(cfg, ds, opts);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace sdrcnn::testing
