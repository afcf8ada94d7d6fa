// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// Training loop, loss smoothing, evaluation over dataset splits and the
// ablation harness.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdrcnn/classical.hpp"
#include "sdrcnn/config.hpp"
#include "sdrcnn/metrics.hpp"
#include "sdrcnn/model.hpp"
#include "sdrcnn/wald.hpp"

namespace sdrcnn::train {

struct TrainConfig {
  model::SdrcnnConfig model;
  int iterations = 5000;
  int batch_size = 4;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  // 0 keeps model.width; otherwise the width is re-budgeted to the largest
  // value whose parameter count does not exceed this target.
  std::size_t param_budget = 0;
  // Validation cadence in iterations; 0 means once per epoch.
  int validate_every = 0;

  void validate() const;
  /// Model config after applying param_budget.
  model::SdrcnnConfig resolved_model() const;
};

/// Reads train.* and model.* keys starting from `base`.
TrainConfig read_train_config(KeyValueConfig& cfg, const TrainConfig& base = {});
/// train.* and model.* lines in key=value form.
std::string format_train_config(const TrainConfig& config);

/// smoothed[i] = mean(raw[max(0, i - window + 1) .. i]).
std::vector<double> smooth_loss(std::span<const double> raw, int window = 100);

struct ValidationPoint {
  int iteration = 0;  // number of optimizer steps taken
  double loss = 0.0;
};

struct LossLog {
  std::vector<double> raw;
  std::vector<ValidationPoint> validation;

  std::vector<double> smoothed(int window = 100) const { return smooth_loss(raw, window); }
  /// iteration,raw,smoothed rows.
  std::string to_csv(int window = 100) const;
};

/// Called after every optimizer step with the 0-based iteration index and its
/// training loss; returning false stops training early.
using IterationHook = std::function<bool(int iteration, double loss, model::SdrcnnParams& params)>;

struct TrainOptions {
  std::optional<std::filesystem::path> checkpoint_dir;  // best.ckpt, final.ckpt
  IterationHook on_iteration;
};

struct TrainResult {
  model::SdrcnnParams params;  // after the last iteration
  model::SdrcnnParams best;    // lowest validation loss (final if no val split)
  LossLog log;
  int iterations_run = 0;
  int best_iteration = 0;
  double best_validation = 0.0;
  std::vector<std::filesystem::path> checkpoints;
};

/// Minimizes mean L1 between the network output and GT over the training
/// split with Adam. Deterministic for a fixed seed. A non-finite loss throws
/// DataError naming the iteration.
TrainResult train(const TrainConfig& config, const wald::Dataset& dataset,
                  const TrainOptions& options = {});

/// Mean L1 over the given samples in inference mode.
double dataset_l1(const std::vector<const wald::SamplePair*>& samples, model::SdrcnnParams& params,
                  int batch_size = 8);

enum class Method { kSdrcnn, kGramSchmidt, kSfim, kBicubic };
Method parse_method(const std::string& name);
std::string method_name(Method m);

enum class EvalMode { kReduced, kFull };
EvalMode parse_mode(const std::string& name);

struct EvalOptions {
  metrics::ReducedOptions reduced;
  metrics::NoReferenceOptions full;
  classical::SfimOptions sfim;
  classical::GsOptions gs;
};

/// Fuses one PAN/LRMS pair. `params` is required for kSdrcnn.
Raster fuse(Method method, const Raster& pan, const Raster& lrms, model::SdrcnnParams* params,
            const EvalOptions& options = {});

/// Reduced mode fuses (pan, lrms) and scores against gt with SAM, ERGAS, SCC
/// and Q2n. Full mode fuses (pan_full, gt) and scores D_lambda, D_s and QNR
/// against the original MS (gt) and PAN (pan_full). Rows are ordered by id.
metrics::MetricReport evaluate(Method method, const std::vector<const wald::SamplePair*>& samples,
                               EvalMode mode, model::SdrcnnParams* params,
                               const EvalOptions& options = {},
                               const std::string& report_name = "");

struct AblationVariant {
  std::string name;
  model::SdrcnnConfig config;
};

/// The 2x2x2 grid over {spectral_mapping, batch_norm, extra_relu}, every
/// variant budgeted to the base parameter count, followed by one run per
/// budget target with the base switches.
std::vector<AblationVariant> ablation_variants(const model::SdrcnnConfig& base,
                                               const std::vector<std::size_t>& budgets = {
                                                   50000, 100000, 200000});

struct AblationResult {
  std::vector<AblationVariant> variants;
  std::vector<metrics::MetricReport> reports;  // test split, reduced mode
  std::vector<LossLog> logs;
};

/// Trains and evaluates every variant with the same seed and dataset split.
AblationResult run_ablation(const TrainConfig& base, const wald::Dataset& dataset,
                            const EvalOptions& options = {},
                            const std::vector<std::size_t>& budgets = {50000, 100000, 200000});

/// Git blob hash ("blob <size>\0" + content) as lowercase hex SHA-1.
std::string git_blob_sha1(std::string_view content);

/// Run manifest text: config lines, seed and the dataset manifest hash.
std::string run_manifest(const TrainConfig& config, const std::filesystem::path& dataset_dir);

}  // namespace sdrcnn::train
