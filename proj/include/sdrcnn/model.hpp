// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// SDRCNN: a single-branch, single-scale pansharpening network.
//
//   I_S   = [PAN | bicubic(LRMS)]                     (B + 1 channels)
//   F_S   = stem(I_S)                                 (width channels)
//   I_R^1 = F_S,        A_1 = F_S + F_R^1
//   I_R^i = A_{i-1},    A_i = A_{i-1} + F_R^i         (dense residual sums)
//   HRMS  = fuse_1x1([A_1 | ... | A_n]) + bicubic(LRMS)
//
// Each block is: depthwise k x k -> 1x1 expand -> ReLU -> 1x1 project, with
// an identity skip around residual blocks only (the stem changes width).

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdrcnn/ops.hpp"
#include "sdrcnn/optimizer.hpp"
#include "sdrcnn/raster.hpp"
#include "sdrcnn/tensor.hpp"

namespace sdrcnn::model {

struct SdrcnnConfig {
  int bands = 8;
  int width = 52;
  int expansion = 5;
  int residual_blocks = 3;
  int kernel = 3;
  int upsample_factor = 4;
  // Ablation switches; the defaults are the published architecture.
  bool spectral_mapping = true;
  bool batch_norm = false;
  bool extra_relu = false;

  // Throws UsageError when an invariant is violated.
  void validate() const;
  friend bool operator==(const SdrcnnConfig&, const SdrcnnConfig&) = default;
};

struct BlockParams {
  nn::ConvWeights depthwise;
  nn::ConvWeights expand;
  nn::ConvWeights project;
  // Present only when batch_norm is enabled, one after each convolution.
  std::optional<nn::BatchNorm> norm_depthwise;
  std::optional<nn::BatchNorm> norm_expand;
  std::optional<nn::BatchNorm> norm_project;
};

class SdrcnnParams {
 public:
  using Visitor = std::function<void(const std::string&, nn::Tensor&)>;
  using ConstVisitor = std::function<void(const std::string&, const nn::Tensor&)>;

  /// Every learnable value and bias set to zero.
  static SdrcnnParams zeros(const SdrcnnConfig& config);
  /// Fan-in scaled normal weights, zero biases, zero fusion layer.
  static SdrcnnParams initialize(const SdrcnnConfig& config, std::uint64_t seed);

  const SdrcnnConfig& config() const { return config_; }

  BlockParams stem;
  std::vector<BlockParams> residual;
  nn::ConvWeights fusion;

  // Learnable tensors by hierarchical name, e.g. "residual.1.expand.weight".
  void visit(const Visitor& fn);
  void visit(const ConstVisitor& fn) const;
  // Learnable tensors plus batch-norm running statistics.
  void visit_state(const Visitor& fn);
  void visit_state(const ConstVisitor& fn) const;

  std::vector<nn::ParamRef> parameters();
  std::size_t count() const;
  void zero_grad();

 private:
  SdrcnnConfig config_;
};

std::size_t param_count(const SdrcnnConfig& config);

/// Largest width whose parameter count does not exceed `target`, with every
/// other field taken from `base`. Throws UsageError if even width 1 is over.
int budget_width(std::size_t target, const SdrcnnConfig& base);
int budget_width(std::size_t target, int bands, int expansion);

enum class Mode { kTraining, kInference };

struct BlockTrace {
  nn::Tensor input;
  nn::Tensor depthwise_out;      // after optional norm, before optional ReLU
  nn::Tensor depthwise_act;
  nn::Tensor expand_out;         // after optional norm, before ReLU
  nn::Tensor hidden;             // ReLU output
  nn::BatchNormCache norm_depthwise;
  nn::BatchNormCache norm_expand;
  nn::BatchNormCache norm_project;
};

struct ForwardTrace {
  Mode mode = Mode::kInference;
  nn::Tensor stem_input;                       // I_S
  nn::Tensor upsampled_lrms;
  nn::Tensor stem_output;                      // F_S
  std::vector<nn::Tensor> residual_inputs;     // I_R^i
  std::vector<nn::Tensor> residual_outputs;    // F_R^i
  std::vector<nn::Tensor> addition_outputs;    // A_i
  nn::Tensor concat;
  nn::Tensor fusion_input;                     // concat, or ReLU(concat)
  nn::Tensor residual_image;
  nn::Tensor hrms;

  BlockTrace stem_trace;
  std::vector<BlockTrace> residual_traces;
  bool backward_done = false;
};

/// Upsampled LRMS and the (B+1)-channel stem input, PAN first.
struct NetworkInput {
  nn::Tensor stem_input;
  nn::Tensor upsampled_lrms;
};

NetworkInput build_input(const nn::Tensor& pan, const nn::Tensor& lrms,
                         int factor = 4);
nn::Tensor build_input(const Raster& pan, const Raster& lrms, int factor = 4);

nn::Tensor block_forward(const nn::Tensor& x, BlockParams& block,
                         const SdrcnnConfig& config, bool residual_skip,
                         Mode mode, BlockTrace* trace);
nn::Tensor block_backward(BlockTrace& trace, BlockParams& block,
                          const SdrcnnConfig& config, bool residual_skip,
                          const nn::Tensor& grad_out);

nn::Tensor stem_forward(const nn::Tensor& stem_input, SdrcnnParams& params,
                        Mode mode = Mode::kInference);
nn::Tensor residual_forward(const nn::Tensor& block_input, SdrcnnParams& params,
                            int index, Mode mode = Mode::kInference);

/// Full forward pass keeping every intermediate needed by backward().
/// Training mode normalizes with batch statistics (and updates running
/// statistics) when batch norm is enabled.
ForwardTrace dense_forward(const nn::Tensor& pan, const nn::Tensor& lrms,
                           SdrcnnParams& params, Mode mode = Mode::kInference);

/// Inference-only forward that drops block internals.
nn::Tensor predict(const nn::Tensor& pan, const nn::Tensor& lrms,
                   SdrcnnParams& params);
Raster predict(const Raster& pan, const Raster& lrms, SdrcnnParams& params);

struct InputGradients {
  nn::Tensor pan;
  nn::Tensor lrms;
  nn::Tensor stem_input;
};

/// Accumulates d(loss)/d(param) into parameter gradient buffers given
/// d(loss)/d(hrms). A trace can be consumed once; a second call throws
/// std::logic_error.
InputGradients backward(ForwardTrace& trace, SdrcnnParams& params,
                        const nn::Tensor& grad_hrms);

}  // namespace sdrcnn::model
