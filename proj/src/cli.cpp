// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>

#include "sdrcnn/checkpoint.hpp"
#include "sdrcnn/error.hpp"
#include "sdrcnn/log.hpp"
#include "sdrcnn/raster_io.hpp"

namespace sdrcnn::cli {
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int positive(KeyValueConfig& cfg, const std::string& key, int fallback) {
  const int v = cfg.get_int(key, fallback);
  if (v < 1) throw UsageError(key + " must be >= 1");
  return v;
}

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";

  Settings settings() const {
    KeyValueConfig cfg;
    if (!config_path.empty()) cfg = KeyValueConfig::load(config_path);
    if (seed) cfg.set("seed", std::to_string(*seed));
    return read_settings(cfg);
  }
  fs::path output() const {
    fs::create_directories(out_dir);
    return out_dir;
  }
};

viz::PngOptions preview_options(const Settings& s, int bands) {
  viz::PngOptions o = s.png;
  const int top = *std::max_element(o.rgb_bands.begin(), o.rgb_bands.end());
  if (bands > top) return o;
  if (bands >= 3) {
    o.rgb_bands = {2, 1, 0};
  } else {
    o.mode = viz::PngMode::kGray;
    o.gray_band = 0;
  }
  return o;
}

std::optional<model::SdrcnnParams> load_params(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return io::load_checkpoint(path).params;
}

void write_text(const fs::path& path, const std::string& text) { io::write_file_atomic(path, text); }

void print_summary(const metrics::MetricReport& report, std::ostream& out) {
  out << report.method() << " (" << report.sample_count() << " samples)\n";
  for (auto m : report.metrics()) {
    const auto a = report.summary(m);
    out << "  " << metrics::metric_name(m) << " = " << fmt(a.mean) << " +/- " << fmt(a.std) << '\n';
  }
}

std::vector<const wald::SamplePair*> split_samples(const wald::Dataset& ds, const std::string& name) {
  if (name == "train") return ds.select(ds.split.train);
  if (name == "val") return ds.select(ds.split.val);
  if (name == "test") return ds.select(ds.split.test);
  if (name == "all") {
    std::vector<const wald::SamplePair*> all;
    for (const auto& s : ds.samples) all.push_back(&s);
    return all;
  }
  throw UsageError("unknown split '" + name + "' (expected train, val, test or all)");
}

int cmd_simulate(const Common& c, std::ostream& out) {
  const Settings s = c.settings();
  const fs::path dir = c.output();
  wald::Dataset ds;
  for (int i = 0; i < s.simulate.scenes; ++i) {
    const wald::Scene scene =
        wald::synth_scene(s.seed + i, s.simulate.scene_size, s.sensor.bands, s.sensor.ratio);
    auto tiles = wald::make_samples(scene.ms, scene.pan, s.simulate.patch, s.simulate.stride,
                                    s.sensor, "scene" + std::to_string(i));
    for (auto& t : tiles) ds.samples.push_back(std::move(t));
  }
  if (ds.samples.empty()) throw DataError("no samples produced; scene_size is smaller than patch");
  std::vector<std::string> ids;
  for (const auto& p : ds.samples) ids.push_back(p.id);
  ds.split = wald::split(ids, s.seed);
  wald::write_dataset(dir, ds);
  out << "wrote " << ds.samples.size() << " samples (" << ds.split.train.size() << " train, "
      << ds.split.val.size() << " val, " << ds.split.test.size() << " test) to " << dir.string()
      << '\n';
  return 0;
}

int cmd_train(const Common& c, const std::string& data, std::ostream& out) {
  Settings s = c.settings();
  s.train.seed = s.seed;
  const wald::Dataset ds = wald::read_dataset(data);
  const fs::path dir = c.output();
  train::TrainOptions opts;
  opts.checkpoint_dir = dir;
  const train::TrainResult r = train::train(s.train, ds, opts);
  write_text(dir / "loss.csv", r.log.to_csv());
  std::string val = "iteration,loss\n";
  for (const auto& v : r.log.validation) val += std::to_string(v.iteration) + ',' + fmt(v.loss) + '\n';
  write_text(dir / "validation.csv", val);
  write_text(dir / "run_manifest.txt", train::run_manifest(s.train, data));
  out << "trained " << r.iterations_run << " iterations; final smoothed loss "
      << fmt(r.log.smoothed().back()) << '\n';
  if (!r.log.validation.empty())
    out << "best validation L1 " << fmt(r.best_validation) << " at iteration " << r.best_iteration
        << '\n';
  out << "checkpoints in " << dir.string() << '\n';
  return 0;
}

int cmd_sharpen(const Common& c, const std::string& method, const std::string& pan_path,
                const std::string& lrms_path, const std::string& ckpt, std::ostream& out) {
  const Settings s = c.settings();
  const train::Method m = train::parse_method(method);
  auto params = load_params(ckpt);
  if (m == train::Method::kSdrcnn && !params)
    throw UsageError("--method sdrcnn needs --checkpoint");
  const Raster pan = io::read_raster(pan_path);
  const Raster lrms = io::read_raster(lrms_path);
  const Raster fused = train::fuse(m, pan, lrms, params ? &*params : nullptr, s.eval);
  const fs::path dir = c.output();
  io::write_raster(fused, dir / "fused.msr");
  viz::export_png(fused, preview_options(s, fused.bands()), dir / "fused.png");
  out << "wrote " << (dir / "fused.msr").string() << " (" << fused.bands() << "x" << fused.height()
      << "x" << fused.width() << ")\n";
  return 0;
}

struct EvalArgs {
  std::string method = "sdrcnn";
  std::string mode = "reduced";
  std::string data;
  std::string checkpoint;
  std::string fused;
  std::string gt;
  std::string ms;
  std::string pan;
};

int cmd_eval(const Common& c, const EvalArgs& a, std::ostream& out) {
  const Settings s = c.settings();
  const train::EvalMode mode = train::parse_mode(a.mode);
  metrics::MetricReport report;
  if (!a.fused.empty()) {
    if (!a.data.empty()) throw UsageError("--fused and --data are mutually exclusive");
    const Raster fused = io::read_raster(a.fused);
    report = metrics::MetricReport("fused");
    if (mode == train::EvalMode::kReduced) {
      if (a.gt.empty()) throw UsageError("reduced mode with --fused needs --gt");
      report.add(fs::path(a.fused).stem().string(),
                 metrics::reduced_metrics(fused, io::read_raster(a.gt), s.eval.reduced));
    } else {
      if (a.ms.empty() || a.pan.empty()) throw UsageError("full mode with --fused needs --ms and --pan");
      report.add(fs::path(a.fused).stem().string(),
                 metrics::full_metrics(fused, io::read_raster(a.ms), io::read_raster(a.pan),
                                       s.eval.full));
    }
  } else {
    if (a.data.empty()) throw UsageError("eval needs --data or --fused");
    const train::Method m = train::parse_method(a.method);
    auto params = load_params(a.checkpoint);
    if (m == train::Method::kSdrcnn && !params)
      throw UsageError("--method sdrcnn needs --checkpoint");
    const wald::Dataset ds = wald::read_dataset(a.data);
    const auto samples = split_samples(ds, s.eval_split);
    if (samples.empty()) throw DataError("split '" + s.eval_split + "' is empty");
    report = train::evaluate(m, samples, mode, params ? &*params : nullptr, s.eval);
  }
  const fs::path dir = c.output();
  write_text(dir / ("report_" + report.method() + "_" + a.mode + ".csv"), report.to_csv());
  out << report.to_csv();
  return 0;
}

int cmd_ablate(const Common& c, const std::string& data, std::ostream& out) {
  Settings s = c.settings();
  s.train.seed = s.seed;
  const wald::Dataset ds = wald::read_dataset(data);
  const fs::path dir = c.output();
  const auto result = train::run_ablation(s.train, ds, s.eval, s.ablation_budgets);
  std::string csv;
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    csv += result.reports[i].to_csv(i == 0);
    write_text(dir / ("loss_" + result.variants[i].name + ".csv"), result.logs[i].to_csv());
    out << result.variants[i].name << " (width " << result.variants[i].config.width << ", "
        << model::param_count(result.variants[i].config) << " parameters)\n";
    print_summary(result.reports[i], out);
  }
  write_text(dir / "ablation.csv", csv);
  return 0;
}

int cmd_inspect(const Common& c, const std::string& ckpt, const std::string& pan_path,
                const std::string& lrms_path, std::ostream& out) {
  c.settings();
  auto params = load_params(ckpt);
  const Raster pan = io::read_raster(pan_path);
  const Raster lrms = io::read_raster(lrms_path);
  const auto trace = model::dense_forward(nn::from_raster(pan), nn::from_raster(lrms), *params);
  const fs::path dir = c.output();
  viz::PngOptions gray;
  gray.mode = viz::PngMode::kGray;
  int written = 0;
  for (std::size_t i = 0; i < trace.addition_outputs.size(); ++i) {
    const Raster pcs = viz::pca_features(trace.addition_outputs[i]);
    for (int k = 0; k < pcs.bands(); ++k) {
      gray.gray_band = k;
      viz::export_png(pcs, gray,
                      dir / ("addition" + std::to_string(i + 1) + "_pc" + std::to_string(k + 1) + ".png"));
      ++written;
    }
  }
  out << "wrote " << written << " principal-component images to " << dir.string() << '\n';
  return 0;
}

int cmd_aem(const Common& c, const std::string& fused_path, const std::string& gt_path,
            std::ostream& out) {
  const Settings s = c.settings();
  const Raster map = metrics::aem(io::read_raster(fused_path), io::read_raster(gt_path));
  const auto& v = map.values();
  const double peak = *std::max_element(v.begin(), v.end());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  viz::PngOptions heat;
  heat.mode = viz::PngMode::kHeatmap;
  heat.max = s.aem_max > 0.0 ? s.aem_max : (peak > 0.0 ? peak : 1.0);
  const fs::path dir = c.output();
  io::write_raster(map, dir / "aem.msr");
  viz::export_png(map, heat, dir / "aem.png");
  out << "mean absolute error " << fmt(mean) << ", max " << fmt(peak) << '\n';
  return 0;
}

}  // namespace

Settings read_settings(KeyValueConfig& cfg) {
  Settings s;
  s.seed = static_cast<std::uint64_t>(cfg.get_int64("seed", 0));

  s.simulate.scenes = positive(cfg, "simulate.scenes", s.simulate.scenes);
  s.simulate.scene_size = positive(cfg, "simulate.scene_size", s.simulate.scene_size);
  s.simulate.patch = positive(cfg, "simulate.patch", s.simulate.patch);
  s.simulate.stride = positive(cfg, "simulate.stride", s.simulate.stride);

  s.sensor.bands = positive(cfg, "sensor.bands", s.sensor.bands);
  s.sensor.ms_gain = cfg.get_double("sensor.ms_gain", s.sensor.ms_gain);
  s.sensor.band_gains = cfg.get_doubles("sensor.band_gains", s.sensor.band_gains);
  s.sensor.pan_gain = cfg.get_double("sensor.pan_gain", s.sensor.pan_gain);
  s.sensor.ratio = positive(cfg, "sensor.ratio", s.sensor.ratio);
  s.sensor.kernel_size = positive(cfg, "sensor.kernel_size", s.sensor.kernel_size);
  s.sensor.validate();

  s.train = train::read_train_config(cfg);
  s.train.seed = s.seed;

  auto& e = s.eval;
  e.sfim.ratio = e.gs.ratio = e.reduced.ratio = e.full.ratio = s.sensor.ratio;
  e.full.sensor = s.sensor;
  e.sfim.kernel = cfg.get_int("sfim.kernel", e.sfim.kernel);
  e.sfim.clamp = cfg.get_bool("sfim.clamp", e.sfim.clamp);
  e.sfim.ratio_min = cfg.get_double("sfim.ratio_min", e.sfim.ratio_min);
  e.sfim.ratio_max = cfg.get_double("sfim.ratio_max", e.sfim.ratio_max);
  e.sfim.epsilon = cfg.get_double("sfim.epsilon", e.sfim.epsilon);
  e.sfim.validate();
  e.gs.weights = cfg.get_doubles("gs.weights", e.gs.weights);
  e.gs.epsilon = cfg.get_double("gs.epsilon", e.gs.epsilon);
  e.reduced.q_block = positive(cfg, "metrics.q_block", e.reduced.q_block);
  e.reduced.q_shift = positive(cfg, "metrics.q_shift", e.reduced.q_shift);
  e.full.block = positive(cfg, "metrics.block", e.full.block);
  e.full.p = cfg.get_double("metrics.p", e.full.p);
  e.full.q = cfg.get_double("metrics.q", e.full.q);
  s.eval_split = cfg.get_string("eval.split", s.eval_split);

  std::vector<double> budgets(s.ablation_budgets.begin(), s.ablation_budgets.end());
  budgets = cfg.get_doubles("ablate.budgets", budgets);
  s.ablation_budgets.clear();
  for (double b : budgets) {
    if (!(b >= 1.0)) throw UsageError("ablate.budgets entries must be positive");
    s.ablation_budgets.push_back(static_cast<std::size_t>(b));
  }

  s.png.min = cfg.get_double("png.min", s.png.min);
  s.png.max = cfg.get_double("png.max", s.png.max);
  if (!(s.png.max > s.png.min)) throw UsageError("png.max must exceed png.min");
  const std::vector<double> rgb = cfg.get_doubles("png.rgb_bands", {4, 2, 1});
  if (rgb.size() != 3) throw UsageError("png.rgb_bands needs three band indices");
  for (int i = 0; i < 3; ++i) {
    if (rgb[i] < 0 || rgb[i] != static_cast<int>(rgb[i]))
      throw UsageError("png.rgb_bands entries must be non-negative integers");
    s.png.rgb_bands[i] = static_cast<int>(rgb[i]);
  }
  s.aem_max = cfg.get_double("aem.max", s.aem_max);
  if (s.aem_max < 0.0) throw UsageError("aem.max must be >= 0");

  cfg.require_all_used();
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pansharpening with a dense residual CNN and classical baselines", "sdrcnn"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "key=value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "overrides the seed key");
    sub->add_option("--out-dir", common.out_dir, "output directory")->capture_default_str();
  };

  std::function<int()> action;

  auto* simulate = app.add_subcommand("simulate", "synthesize scenes into a dataset");
  add_common(simulate);
  simulate->callback([&] { action = [&] { return cmd_simulate(common, out); }; });

  std::string data;
  auto* train_cmd = app.add_subcommand("train", "train the network on a dataset");
  add_common(train_cmd);
  train_cmd->add_option("--data", data, "dataset directory")->required();
  train_cmd->callback([&] { action = [&] { return cmd_train(common, data, out); }; });

  std::string method = "sfim", pan, lrms, checkpoint;
  auto* sharpen = app.add_subcommand("sharpen", "fuse one PAN/LRMS pair");
  add_common(sharpen);
  sharpen->add_option("--method", method, "sdrcnn, gs, sfim or bicubic")->capture_default_str();
  sharpen->add_option("--pan", pan, "PAN raster")->required();
  sharpen->add_option("--lrms", lrms, "low-resolution MS raster")->required();
  sharpen->add_option("--checkpoint", checkpoint, "model checkpoint (sdrcnn)");
  sharpen->callback(
      [&] { action = [&] { return cmd_sharpen(common, method, pan, lrms, checkpoint, out); }; });

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "score a method on a dataset split or one fused raster");
  add_common(eval);
  eval->add_option("--method", eval_args.method, "sdrcnn, gs, sfim or bicubic")->capture_default_str();
  eval->add_option("--mode", eval_args.mode, "reduced or full")->capture_default_str();
  eval->add_option("--data", eval_args.data, "dataset directory");
  eval->add_option("--checkpoint", eval_args.checkpoint, "model checkpoint (sdrcnn)");
  eval->add_option("--fused", eval_args.fused, "fused raster to score");
  eval->add_option("--gt", eval_args.gt, "reference raster (reduced mode)");
  eval->add_option("--ms", eval_args.ms, "original MS raster (full mode)");
  eval->add_option("--pan", eval_args.pan, "original PAN raster (full mode)");
  eval->callback([&] { action = [&] { return cmd_eval(common, eval_args, out); }; });

  auto* ablate = app.add_subcommand("ablate", "train and score the ablation variants");
  add_common(ablate);
  ablate->add_option("--data", data, "dataset directory")->required();
  ablate->callback([&] { action = [&] { return cmd_ablate(common, data, out); }; });

  auto* inspect = app.add_subcommand("inspect-features", "PCA images of the addition-layer features");
  add_common(inspect);
  inspect->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  inspect->add_option("--pan", pan, "PAN raster")->required();
  inspect->add_option("--lrms", lrms, "low-resolution MS raster")->required();
  inspect->callback([&] { action = [&] { return cmd_inspect(common, checkpoint, pan, lrms, out); }; });

  std::string fused, gt;
  auto* aem = app.add_subcommand("aem", "absolute error map of a fused raster against GT");
  add_common(aem);
  aem->add_option("--fused", fused, "fused raster")->required();
  aem->add_option("--gt", gt, "reference raster")->required();
  aem->callback([&] { action = [&] { return cmd_aem(common, fused, gt, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  WarningSink previous = set_warning_sink([&err](const std::string& msg) { err << "warning: " << msg << '\n'; });
  int code = 2;
  try {
    code = action();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    code = 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = 2;
  }
  set_warning_sink(std::move(previous));
  return code;
}

}  // namespace sdrcnn::cli
