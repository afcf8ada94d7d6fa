// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// The sdrcnn command-line tool. Exit codes: 0 success, 1 usage error,
// 2 data error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sdrcnn/classical.hpp"
#include "sdrcnn/config.hpp"
#include "sdrcnn/metrics.hpp"
#include "sdrcnn/train.hpp"
#include "sdrcnn/visualize.hpp"
#include "sdrcnn/wald.hpp"

namespace sdrcnn::cli {

struct SimulateSettings {
  int scenes = 4;
  int scene_size = 128;  // MS pixels per side
  int patch = 64;        // GT patch side
  int stride = 64;
};

/// Every configurable value of the tool, read from one key=value file.
struct Settings {
  std::uint64_t seed = 0;
  SimulateSettings simulate;
  wald::SensorModel sensor;
  train::TrainConfig train;
  train::EvalOptions eval;
  std::string eval_split = "test";
  std::vector<std::size_t> ablation_budgets{50000, 100000, 200000};
  viz::PngOptions png;
  double aem_max = 0.0;  // heatmap upper bound; 0 means the map's maximum
};

/// Reads every known key and rejects unknown ones. The sensor ratio also sets
/// the ratio of the classical methods and metrics.
Settings read_settings(KeyValueConfig& cfg);

/// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdrcnn::cli
