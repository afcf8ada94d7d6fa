// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "sdrcnn/error.hpp"

namespace sdrcnn::model {
namespace {

BlockParams make_block(int in_channels, const SdrcnnConfig& c) {
  const int hidden = c.expansion * c.width;
  BlockParams b;
  b.depthwise = nn::ConvWeights::depthwise(in_channels, c.kernel);
  b.expand = nn::ConvWeights::pointwise(hidden, in_channels);
  b.project = nn::ConvWeights::pointwise(c.width, hidden);
  if (c.batch_norm) {
    b.norm_depthwise = nn::BatchNorm::make(in_channels);
    b.norm_expand = nn::BatchNorm::make(hidden);
    b.norm_project = nn::BatchNorm::make(c.width);
  }
  return b;
}

std::size_t block_count(std::size_t in, std::size_t width, std::size_t expansion,
                        std::size_t kernel, bool norm) {
  const std::size_t hidden = expansion * width;
  std::size_t n = in * kernel * kernel + in;  // depthwise
  n += in * hidden + hidden;                  // expand
  n += hidden * width + width;                // project
  if (norm) n += 2 * (in + hidden + width);
  return n;
}

template <typename Block, typename Fn>
void visit_block(const std::string& prefix, Block& b, bool with_buffers, Fn&& fn) {
  auto conv = [&](const char* name, auto& w) {
    fn(prefix + name + ".weight", w.weight);
    fn(prefix + name + ".bias", w.bias);
  };
  auto norm = [&](const char* name, auto& bn) {
    if (!bn) return;
    fn(prefix + name + ".gamma", bn->gamma);
    fn(prefix + name + ".beta", bn->beta);
    if (with_buffers) {
      fn(prefix + name + ".running_mean", bn->running_mean);
      fn(prefix + name + ".running_var", bn->running_var);
    }
  };
  conv("depthwise", b.depthwise);
  norm("norm_depthwise", b.norm_depthwise);
  conv("expand", b.expand);
  norm("norm_expand", b.norm_expand);
  conv("project", b.project);
  norm("norm_project", b.norm_project);
}

template <typename Params, typename Fn>
void visit_all(Params& p, bool with_buffers, Fn&& fn) {
  visit_block("stem.", p.stem, with_buffers, fn);
  for (std::size_t i = 0; i < p.residual.size(); ++i)
    visit_block("residual." + std::to_string(i) + ".", p.residual[i],
                with_buffers, fn);
  fn("fusion.weight", p.fusion.weight);
  fn("fusion.bias", p.fusion.bias);
}

nn::Tensor apply_norm(nn::Tensor x, std::optional<nn::BatchNorm>& bn,
                      Mode mode, nn::BatchNormCache* cache) {
  if (!bn) return x;
  return nn::batch_norm(x, *bn, mode == Mode::kTraining, cache);
}

nn::Tensor norm_backward(nn::Tensor g, std::optional<nn::BatchNorm>& bn,
                         const nn::BatchNormCache& cache) {
  if (!bn) return g;
  return nn::batch_norm_backward(cache, *bn, g);
}

void add_into(nn::Tensor& acc, const nn::Tensor& x) {
  auto a = acc.data();
  auto b = x.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace

void SdrcnnConfig::validate() const {
  if (bands < 1) throw UsageError("config: bands must be >= 1");
  if (width <= 0) throw UsageError("config: width must be > 0");
  if (expansion < 1) throw UsageError("config: expansion must be >= 1");
  if (residual_blocks < 1)
    throw UsageError("config: residual_blocks must be >= 1");
  if (kernel < 1 || kernel % 2 == 0)
    throw UsageError("config: kernel must be a positive odd integer");
  if (upsample_factor < 1)
    throw UsageError("config: upsample_factor must be >= 1");
}

SdrcnnParams SdrcnnParams::zeros(const SdrcnnConfig& config) {
  config.validate();
  SdrcnnParams p;
  p.config_ = config;
  p.stem = make_block(config.bands + 1, config);
  for (int i = 0; i < config.residual_blocks; ++i)
    p.residual.push_back(make_block(config.width, config));
  p.fusion = nn::ConvWeights::pointwise(config.bands,
                                        config.residual_blocks * config.width);
  return p;
}

SdrcnnParams SdrcnnParams::initialize(const SdrcnnConfig& config,
                                      std::uint64_t seed) {
  SdrcnnParams p = zeros(config);
  std::mt19937_64 rng(seed);
  auto fill = [&](nn::ConvWeights& w) {
    const int fan_in = w.kind == nn::ConvKind::kDepthwise
                           ? w.kernel() * w.kernel()
                           : w.in_channels();
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
    for (double& v : w.weight.data()) v = normal(rng);
  };
  auto fill_block = [&](BlockParams& b) {
    fill(b.depthwise);
    fill(b.expand);
    fill(b.project);
  };
  fill_block(p.stem);
  for (auto& b : p.residual) fill_block(b);
  return p;
}

void SdrcnnParams::visit(const Visitor& fn) { visit_all(*this, false, fn); }
void SdrcnnParams::visit(const ConstVisitor& fn) const {
  visit_all(*this, false, fn);
}
void SdrcnnParams::visit_state(const Visitor& fn) { visit_all(*this, true, fn); }
void SdrcnnParams::visit_state(const ConstVisitor& fn) const {
  visit_all(*this, true, fn);
}

std::vector<nn::ParamRef> SdrcnnParams::parameters() {
  std::vector<nn::ParamRef> refs;
  visit([&](const std::string&, nn::Tensor& t) { refs.emplace_back(t); });
  return refs;
}

std::size_t SdrcnnParams::count() const {
  std::size_t n = 0;
  visit([&](const std::string&, const nn::Tensor& t) { n += t.numel(); });
  return n;
}

void SdrcnnParams::zero_grad() {
  visit([](const std::string&, nn::Tensor& t) {
    t.ensure_grad();
    t.zero_grad();
  });
}

std::size_t param_count(const SdrcnnConfig& c) {
  c.validate();
  const auto w = static_cast<std::size_t>(c.width);
  const auto e = static_cast<std::size_t>(c.expansion);
  const auto k = static_cast<std::size_t>(c.kernel);
  const auto b = static_cast<std::size_t>(c.bands);
  const auto n = static_cast<std::size_t>(c.residual_blocks);
  return block_count(b + 1, w, e, k, c.batch_norm) +
         n * block_count(w, w, e, k, c.batch_norm) + n * w * b + b;
}

int budget_width(std::size_t target, const SdrcnnConfig& base) {
  SdrcnnConfig c = base;
  c.width = 1;
  if (param_count(c) > target)
    throw UsageError("budget_width: target " + std::to_string(target) +
                     " is below the smallest network");
  // The count is strictly increasing in width, so bracket then bisect.
  int lo = 1;
  int hi = 2;
  for (;;) {
    c.width = hi;
    if (param_count(c) > target) break;
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    c.width = mid;
    if (param_count(c) <= target)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

int budget_width(std::size_t target, int bands, int expansion) {
  SdrcnnConfig c;
  c.bands = bands;
  c.expansion = expansion;
  return budget_width(target, c);
}

NetworkInput build_input(const nn::Tensor& pan, const nn::Tensor& lrms,
                         int factor) {
  const nn::Shape4& ps = pan.shape();
  const nn::Shape4& ls = lrms.shape();
  if (ps.c != 1) throw ShapeError("build_input: PAN must have one channel");
  if (ps.n != ls.n || ps.h != ls.h * factor || ps.w != ls.w * factor)
    throw ShapeError("build_input: PAN " + ps.str() + " is not " +
                     std::to_string(factor) + "x LRMS " + ls.str());
  NetworkInput in;
  in.upsampled_lrms = nn::upsample_bicubic(lrms, factor);
  const nn::Tensor parts[] = {pan, in.upsampled_lrms};
  in.stem_input = nn::concat_channels(parts);
  return in;
}

nn::Tensor build_input(const Raster& pan, const Raster& lrms, int factor) {
  return build_input(nn::from_raster(pan), nn::from_raster(lrms), factor)
      .stem_input;
}

nn::Tensor block_forward(const nn::Tensor& x, BlockParams& block,
                         const SdrcnnConfig& config, bool residual_skip,
                         Mode mode, BlockTrace* trace) {
  BlockTrace local;
  BlockTrace& t = trace != nullptr ? *trace : local;
  nn::Tensor d = apply_norm(nn::conv_depthwise(x, block.depthwise),
                            block.norm_depthwise, mode, &t.norm_depthwise);
  nn::Tensor d_act = config.extra_relu ? nn::relu(d) : d;
  nn::Tensor e = apply_norm(nn::conv_pointwise(d_act, block.expand),
                            block.norm_expand, mode, &t.norm_expand);
  nn::Tensor h = nn::relu(e);
  nn::Tensor p = apply_norm(nn::conv_pointwise(h, block.project),
                            block.norm_project, mode, &t.norm_project);
  nn::Tensor out = residual_skip ? nn::add(x, p) : std::move(p);
  if (trace != nullptr) {
    t.input = x;
    t.depthwise_out = std::move(d);
    t.depthwise_act = std::move(d_act);
    t.expand_out = std::move(e);
    t.hidden = std::move(h);
  }
  return out;
}

nn::Tensor block_backward(BlockTrace& t, BlockParams& block,
                          const SdrcnnConfig& config, bool residual_skip,
                          const nn::Tensor& grad_out) {
  nn::Tensor g = norm_backward(grad_out, block.norm_project, t.norm_project);
  g = nn::conv_pointwise_backward(t.hidden, block.project, g);
  g = nn::relu_backward(t.expand_out, g);
  g = norm_backward(std::move(g), block.norm_expand, t.norm_expand);
  g = nn::conv_pointwise_backward(t.depthwise_act, block.expand, g);
  if (config.extra_relu) g = nn::relu_backward(t.depthwise_out, g);
  g = norm_backward(std::move(g), block.norm_depthwise, t.norm_depthwise);
  g = nn::conv_depthwise_backward(t.input, block.depthwise, g);
  if (residual_skip) add_into(g, grad_out);
  return g;
}

nn::Tensor stem_forward(const nn::Tensor& stem_input, SdrcnnParams& params,
                        Mode mode) {
  const SdrcnnConfig& c = params.config();
  if (stem_input.shape().c != c.bands + 1)
    throw ShapeError("stem_forward: expected " + std::to_string(c.bands + 1) +
                     " channels, got " + stem_input.shape().str());
  return block_forward(stem_input, params.stem, c, false, mode, nullptr);
}

nn::Tensor residual_forward(const nn::Tensor& block_input, SdrcnnParams& params,
                            int index, Mode mode) {
  const SdrcnnConfig& c = params.config();
  if (block_input.shape().c != c.width)
    throw ShapeError("residual_forward: expected " + std::to_string(c.width) +
                     " channels, got " + block_input.shape().str());
  if (index < 0 || index >= c.residual_blocks)
    throw ShapeError("residual_forward: block index out of range");
  return block_forward(block_input, params.residual[index], c, true, mode,
                       nullptr);
}

namespace {

ForwardTrace run_forward(const nn::Tensor& pan, const nn::Tensor& lrms,
                         SdrcnnParams& params, Mode mode, bool keep_blocks) {
  const SdrcnnConfig& c = params.config();
  if (lrms.shape().c != c.bands)
    throw ShapeError("dense_forward: LRMS " + lrms.shape().str() + " has " +
                     "wrong band count for a " + std::to_string(c.bands) +
                     "-band network");
  ForwardTrace t;
  t.mode = mode;
  NetworkInput in = build_input(pan, lrms, c.upsample_factor);
  t.stem_input = std::move(in.stem_input);
  t.upsampled_lrms = std::move(in.upsampled_lrms);
  t.stem_output = block_forward(t.stem_input, params.stem, c, false, mode,
                                keep_blocks ? &t.stem_trace : nullptr);
  if (keep_blocks) t.residual_traces.resize(c.residual_blocks);
  const nn::Tensor* running = &t.stem_output;
  for (int i = 0; i < c.residual_blocks; ++i) {
    t.residual_inputs.push_back(*running);
    t.residual_outputs.push_back(
        block_forward(*running, params.residual[i], c, true, mode,
                      keep_blocks ? &t.residual_traces[i] : nullptr));
    t.addition_outputs.push_back(nn::add(*running, t.residual_outputs.back()));
    running = &t.addition_outputs.back();
  }
  t.concat = nn::concat_channels(t.addition_outputs);
  t.fusion_input = c.extra_relu ? nn::relu(t.concat) : t.concat;
  t.residual_image = nn::conv_pointwise(t.fusion_input, params.fusion);
  t.hrms = c.spectral_mapping ? nn::add(t.residual_image, t.upsampled_lrms)
                              : t.residual_image;
  return t;
}

}  // namespace

ForwardTrace dense_forward(const nn::Tensor& pan, const nn::Tensor& lrms,
                           SdrcnnParams& params, Mode mode) {
  return run_forward(pan, lrms, params, mode, true);
}

nn::Tensor predict(const nn::Tensor& pan, const nn::Tensor& lrms,
                   SdrcnnParams& params) {
  return run_forward(pan, lrms, params, Mode::kInference, false).hrms;
}

Raster predict(const Raster& pan, const Raster& lrms, SdrcnnParams& params) {
  return nn::to_raster(
      predict(nn::from_raster(pan), nn::from_raster(lrms), params));
}

InputGradients backward(ForwardTrace& t, SdrcnnParams& params,
                        const nn::Tensor& grad_hrms) {
  if (t.backward_done)
    throw std::logic_error("backward called twice on the same forward trace");
  if (t.residual_traces.size() != t.residual_outputs.size())
    throw std::logic_error("backward needs a trace from dense_forward");
  if (!(grad_hrms.shape() == t.hrms.shape()))
    throw ShapeError("backward: gradient shape " + grad_hrms.shape().str() +
                     " vs output " + t.hrms.shape().str());
  t.backward_done = true;
  const SdrcnnConfig& c = params.config();
  const int n_blocks = c.residual_blocks;

  nn::Tensor g_up(t.upsampled_lrms.shape());
  if (c.spectral_mapping) g_up = grad_hrms;
  nn::Tensor g_fuse =
      nn::conv_pointwise_backward(t.fusion_input, params.fusion, grad_hrms);
  if (c.extra_relu) g_fuse = nn::relu_backward(t.concat, g_fuse);
  std::vector<int> widths(n_blocks, c.width);
  std::vector<nn::Tensor> g_add = nn::split_channels(g_fuse, widths);

  // A_i feeds the concat, A_{i+1} (as a summand) and block i+1 (as I_R^{i+1}).
  nn::Tensor carry(t.stem_output.shape());
  for (int i = n_blocks - 1; i >= 0; --i) {
    nn::Tensor g_a = std::move(g_add[i]);
    add_into(g_a, carry);
    nn::Tensor g_in =
        block_backward(t.residual_traces[i], params.residual[i], c, true, g_a);
    add_into(g_in, g_a);
    carry = std::move(g_in);
  }
  nn::Tensor g_stem_in =
      block_backward(t.stem_trace, params.stem, c, false, carry);

  const int split[] = {1, c.bands};
  auto parts = nn::split_channels(g_stem_in, split);
  add_into(g_up, parts[1]);
  InputGradients grads;
  grads.pan = std::move(parts[0]);
  grads.lrms = nn::upsample_bicubic_backward(g_up, c.upsample_factor);
  grads.stem_input = std::move(g_stem_in);
  return grads;
}

}  // namespace sdrcnn::model
