// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/train.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "sdrcnn/checkpoint.hpp"
#include "sdrcnn/error.hpp"
#include "sdrcnn/ops.hpp"
#include "sdrcnn/raster_io.hpp"

namespace sdrcnn::train {
namespace {

constexpr std::uint64_t kBatchStream = 0x9E3779B97F4A7C15ull;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t range) {
  const std::uint64_t reject = (0 - range) % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x < reject);
  return x % range;
}

// Endless stream of epoch permutations of [0, n).
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::uint64_t seed) : n_(n), rng_(seed ^ kBatchStream) {}

  std::vector<std::size_t> next(std::size_t batch) {
    std::vector<std::size_t> out;
    while (out.size() < batch) {
      if (cursor_ == order_.size()) reshuffle();
      out.push_back(order_[cursor_++]);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void reshuffle() {
    order_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
    for (std::size_t i = n_; i > 1; --i) std::swap(order_[i - 1], order_[bounded(rng_, i)]);
    cursor_ = 0;
  }

  std::size_t n_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

struct Batch {
  nn::Tensor pan;
  nn::Tensor lrms;
  nn::Tensor gt;
};

Batch make_batch(const std::vector<const wald::SamplePair*>& samples,
                 const std::vector<std::size_t>& indices) {
  std::vector<Raster> pans, lrms, gts;
  for (std::size_t i : indices) {
    pans.push_back(samples[i]->pan);
    lrms.push_back(samples[i]->lrms);
    gts.push_back(samples[i]->gt);
  }
  return {nn::stack_rasters(pans), nn::stack_rasters(lrms), nn::stack_rasters(gts)};
}

std::vector<const wald::SamplePair*> sorted_by_id(std::vector<const wald::SamplePair*> samples) {
  std::sort(samples.begin(), samples.end(),
            [](const wald::SamplePair* a, const wald::SamplePair* b) { return a->id < b->id; });
  return samples;
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (iterations < 0) throw UsageError("train.iterations must be >= 0");
  if (batch_size < 1) throw UsageError("train.batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw UsageError("train.learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw UsageError("train.beta1 and train.beta2 must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw UsageError("train.adam_epsilon must be > 0");
  if (validate_every < 0) throw UsageError("train.validate_every must be >= 0");
}

model::SdrcnnConfig TrainConfig::resolved_model() const {
  model::SdrcnnConfig c = model;
  if (param_budget > 0) c.width = model::budget_width(param_budget, c);
  return c;
}

TrainConfig read_train_config(KeyValueConfig& cfg, const TrainConfig& base) {
  TrainConfig t = base;
  t.model = io::read_model_config(cfg, base.model);
  t.iterations = cfg.get_int("train.iterations", t.iterations);
  t.batch_size = cfg.get_int("train.batch_size", t.batch_size);
  t.learning_rate = cfg.get_double("train.learning_rate", t.learning_rate);
  t.beta1 = cfg.get_double("train.beta1", t.beta1);
  t.beta2 = cfg.get_double("train.beta2", t.beta2);
  t.adam_epsilon = cfg.get_double("train.adam_epsilon", t.adam_epsilon);
  t.seed = static_cast<std::uint64_t>(cfg.get_int64("seed", static_cast<long long>(t.seed)));
  const long long budget = cfg.get_int64("train.param_budget", static_cast<long long>(t.param_budget));
  if (budget < 0) throw UsageError("train.param_budget must be >= 0");
  t.param_budget = static_cast<std::size_t>(budget);
  t.validate_every = cfg.get_int("train.validate_every", t.validate_every);
  t.validate();
  return t;
}

std::string format_train_config(const TrainConfig& t) {
  std::ostringstream out;
  out << "seed=" << t.seed << '\n'
      << "train.iterations=" << t.iterations << '\n'
      << "train.batch_size=" << t.batch_size << '\n'
      << "train.learning_rate=" << format_double(t.learning_rate) << '\n'
      << "train.beta1=" << format_double(t.beta1) << '\n'
      << "train.beta2=" << format_double(t.beta2) << '\n'
      << "train.adam_epsilon=" << format_double(t.adam_epsilon) << '\n'
      << "train.param_budget=" << t.param_budget << '\n'
      << "train.validate_every=" << t.validate_every << '\n'
      << io::format_model_config(t.resolved_model());
  return out.str();
}

std::vector<double> smooth_loss(std::span<const double> raw, int window) {
  if (window < 1) throw UsageError("smoothing window must be >= 1");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::size_t first = i + 1 >= static_cast<std::size_t>(window) ? i + 1 - window : 0;
    double s = 0.0;
    for (std::size_t j = first; j <= i; ++j) s += raw[j];
    out[i] = s / static_cast<double>(i + 1 - first);
  }
  return out;
}

std::string LossLog::to_csv(int window) const {
  const auto smooth = smoothed(window);
  std::ostringstream out;
  out << "iteration,raw,smoothed\n";
  for (std::size_t i = 0; i < raw.size(); ++i)
    out << i << ',' << format_double(raw[i]) << ',' << format_double(smooth[i]) << '\n';
  return out.str();
}

double dataset_l1(const std::vector<const wald::SamplePair*>& samples, model::SdrcnnParams& params,
                  int batch_size) {
  if (samples.empty()) throw DataError("no samples to score");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t first = 0; first < samples.size(); first += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = first; i < std::min(samples.size(), first + batch_size); ++i)
      idx.push_back(i);
    const Batch b = make_batch(samples, idx);
    const nn::Tensor pred = model::predict(b.pan, b.lrms, params);
    for (std::size_t i = 0; i < pred.numel(); ++i) total += std::abs(pred.data()[i] - b.gt.data()[i]);
    count += pred.numel();
  }
  return total / static_cast<double>(count);
}

TrainResult train(const TrainConfig& config, const wald::Dataset& dataset,
                  const TrainOptions& options) {
  config.validate();
  const model::SdrcnnConfig mc = config.resolved_model();
  const auto train_set = dataset.select(dataset.split.train);
  const auto val_set = dataset.select(dataset.split.val);
  if (train_set.empty()) throw DataError("training split is empty");
  for (const auto* s : train_set)
    if (s->lrms.bands() != mc.bands)
      throw DataError("sample '" + s->id + "' has " + std::to_string(s->lrms.bands()) +
                      " bands; the model expects " + std::to_string(mc.bands));

  TrainResult result{model::SdrcnnParams::initialize(mc, config.seed),
                     model::SdrcnnParams{}, {}, 0, 0, 0.0, {}};
  model::SdrcnnParams& params = result.params;
  result.best = params;
  nn::Adam adam({config.learning_rate, config.beta1, config.beta2, config.adam_epsilon});
  std::vector<nn::ParamRef> refs = params.parameters();

  const std::size_t batch = std::min<std::size_t>(config.batch_size, train_set.size());
  const int epoch = static_cast<int>((train_set.size() + batch - 1) / batch);
  const int cadence = config.validate_every > 0 ? config.validate_every : epoch;
  BatchSampler sampler(train_set.size(), config.seed);
  double best = std::numeric_limits<double>::infinity();

  auto save = [&](const model::SdrcnnParams& p, const std::string& file, int iteration) {
    if (!options.checkpoint_dir) return;
    const auto path = *options.checkpoint_dir / file;
    io::save_checkpoint(p, path, {{"iteration", std::to_string(iteration)}, {"seed", std::to_string(config.seed)}});
    if (std::find(result.checkpoints.begin(), result.checkpoints.end(), path) == result.checkpoints.end())
      result.checkpoints.push_back(path);
  };

  auto run_validation = [&](int steps) {
    if (val_set.empty()) return;
    const double v = dataset_l1(val_set, params);
    result.log.validation.push_back({steps, v});
    if (v < best) {
      best = v;
      result.best = params;
      result.best_iteration = steps;
      result.best_validation = v;
      save(params, "best.ckpt", steps);
    }
  };

  for (int it = 0; it < config.iterations; ++it) {
    const Batch b = make_batch(train_set, sampler.next(batch));
    model::ForwardTrace trace = model::dense_forward(b.pan, b.lrms, params, model::Mode::kTraining);
    const double loss = nn::l1_loss(trace.hrms, b.gt);
    if (!std::isfinite(loss))
      throw DataError("non-finite training loss at iteration " + std::to_string(it));
    params.zero_grad();
    model::backward(trace, params, nn::l1_loss_backward(trace.hrms, b.gt));
    adam.step(refs);
    result.log.raw.push_back(loss);
    result.iterations_run = it + 1;
    if ((it + 1) % cadence == 0) run_validation(it + 1);
    if (options.on_iteration && !options.on_iteration(it, loss, params)) break;
  }
  if (result.iterations_run % cadence != 0 || result.iterations_run == 0)
    run_validation(result.iterations_run);
  if (val_set.empty()) {
    result.best = params;
    result.best_iteration = result.iterations_run;
    save(params, "best.ckpt", result.iterations_run);
  }
  save(params, "final.ckpt", result.iterations_run);
  return result;
}

Method parse_method(const std::string& name) {
  if (name == "sdrcnn") return Method::kSdrcnn;
  if (name == "gs") return Method::kGramSchmidt;
  if (name == "sfim") return Method::kSfim;
  if (name == "bicubic") return Method::kBicubic;
  throw UsageError("unknown method '" + name + "' (expected sdrcnn, gs, sfim or bicubic)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kSdrcnn: return "sdrcnn";
    case Method::kGramSchmidt: return "gs";
    case Method::kSfim: return "sfim";
    case Method::kBicubic: return "bicubic";
  }
  return "?";
}

EvalMode parse_mode(const std::string& name) {
  if (name == "reduced") return EvalMode::kReduced;
  if (name == "full") return EvalMode::kFull;
  throw UsageError("unknown evaluation mode '" + name + "' (expected reduced or full)");
}

Raster fuse(Method method, const Raster& pan, const Raster& lrms, model::SdrcnnParams* params,
            const EvalOptions& options) {
  switch (method) {
    case Method::kSdrcnn:
      if (!params) throw UsageError("sdrcnn fusion needs model parameters");
      return model::predict(pan, lrms, *params);
    case Method::kGramSchmidt: return classical::gram_schmidt(pan, lrms, options.gs);
    case Method::kSfim: return classical::sfim(pan, lrms, options.sfim);
    case Method::kBicubic: {
      const int ratio = lrms.height() > 0 ? pan.height() / lrms.height() : 1;
      return nn::upsample_bicubic(lrms, ratio);
    }
  }
  throw UsageError("unknown method");
}

metrics::MetricReport evaluate(Method method, const std::vector<const wald::SamplePair*>& samples,
                               EvalMode mode, model::SdrcnnParams* params,
                               const EvalOptions& options, const std::string& report_name) {
  metrics::MetricReport report(report_name.empty() ? method_name(method) : report_name);
  for (const wald::SamplePair* s : sorted_by_id(samples)) {
    if (mode == EvalMode::kReduced) {
      const Raster fused = fuse(method, s->pan, s->lrms, params, options);
      report.add(s->id, metrics::reduced_metrics(fused, s->gt, options.reduced));
    } else {
      if (s->pan_full.empty())
        throw DataError("sample '" + s->id + "' has no full-resolution PAN");
      const Raster fused = fuse(method, s->pan_full, s->gt, params, options);
      report.add(s->id, metrics::full_metrics(fused, s->gt, s->pan_full, options.full));
    }
  }
  return report;
}

std::vector<AblationVariant> ablation_variants(const model::SdrcnnConfig& base,
                                               const std::vector<std::size_t>& budgets) {
  const std::size_t target = model::param_count(base);
  std::vector<AblationVariant> out;
  for (bool sm : {true, false})
    for (bool bn : {false, true})
      for (bool relu : {false, true}) {
        model::SdrcnnConfig c = base;
        c.spectral_mapping = sm;
        c.batch_norm = bn;
        c.extra_relu = relu;
        c.width = model::budget_width(target, c);
        out.push_back({std::string("sm") + (sm ? "1" : "0") + "_bn" + (bn ? "1" : "0") + "_relu" +
                           (relu ? "1" : "0"),
                       c});
      }
  for (std::size_t b : budgets) {
    model::SdrcnnConfig c = base;
    c.width = model::budget_width(b, c);
    out.push_back({"budget_" + std::to_string(b), c});
  }
  return out;
}

AblationResult run_ablation(const TrainConfig& base, const wald::Dataset& dataset,
                            const EvalOptions& options, const std::vector<std::size_t>& budgets) {
  const auto test_set = dataset.select(dataset.split.test);
  if (test_set.empty()) throw DataError("ablation needs a non-empty test split");
  AblationResult result;
  result.variants = ablation_variants(base.resolved_model(), budgets);
  for (const AblationVariant& v : result.variants) {
    TrainConfig cfg = base;
    cfg.model = v.config;
    cfg.param_budget = 0;
    TrainResult trained = train(cfg, dataset);
    result.reports.push_back(
        evaluate(Method::kSdrcnn, test_set, EvalMode::kReduced, &trained.best, options, v.name));
    result.logs.push_back(std::move(trained.log));
  }
  return result;
}

std::string git_blob_sha1(std::string_view content) {
  const std::string data = "blob " + std::to_string(content.size()) + '\0' + std::string(content);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha1(), nullptr))
    throw DataError("SHA-1 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string run_manifest(const TrainConfig& config, const std::filesystem::path& dataset_dir) {
  std::ostringstream out;
  out << "# sdrcnn run manifest\n"
      << "dataset=" << dataset_dir.string() << '\n'
      << "dataset_manifest_sha1=" << git_blob_sha1(io::read_file(dataset_dir / "manifest.txt"))
      << '\n'
      << format_train_config(config);
  return out.str();
}

}  // namespace sdrcnn::train
