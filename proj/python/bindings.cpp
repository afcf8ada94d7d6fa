// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <iostream>
#include <sstream>

#include "sdrcnn/checkpoint.hpp"
#include "sdrcnn/classical.hpp"
#include "sdrcnn/cli.hpp"
#include "sdrcnn/error.hpp"
#include "sdrcnn/metrics.hpp"
#include "sdrcnn/model.hpp"
#include "sdrcnn/ops.hpp"
#include "sdrcnn/raster_io.hpp"
#include "sdrcnn/train.hpp"
#include "sdrcnn/visualize.hpp"
#include "sdrcnn/wald.hpp"

namespace py = pybind11;
using namespace sdrcnn;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Accepts (h, w) or (bands, h, w).
Raster to_raster(const Array& a) {
  if (a.ndim() == 2) {
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    return Raster(1, h, w, std::vector<double>(a.data(), a.data() + a.size()));
  }
  if (a.ndim() != 3) throw ShapeError("expected a (bands, height, width) array");
  return Raster(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                static_cast<int>(a.shape(2)), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Raster& r) {
  Array out({r.bands(), r.height(), r.width()});
  std::copy(r.values().begin(), r.values().end(), out.mutable_data());
  return out;
}

Array tensor_to_array(const nn::Tensor& t) {
  const auto& s = t.shape();
  Array out({s.n, s.c, s.h, s.w});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::dict metric_dict(const std::map<metrics::Metric, double>& row) {
  py::dict d;
  for (const auto& [m, v] : row) d[py::str(metrics::metric_name(m))] = v;
  return d;
}

wald::SensorModel sensor_of(int bands, double ms_gain, double pan_gain, int ratio, int kernel_size) {
  wald::SensorModel s;
  s.bands = bands;
  s.ms_gain = ms_gain;
  s.pan_gain = pan_gain;
  s.ratio = ratio;
  s.kernel_size = kernel_size;
  return s;
}

}  // namespace

PYBIND11_MODULE(_sdrcnn, m) {
  m.doc() = "Dense residual pansharpening network, classical baselines and quality metrics";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  py::class_<model::SdrcnnConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("bands", &model::SdrcnnConfig::bands)
      .def_readwrite("width", &model::SdrcnnConfig::width)
      .def_readwrite("expansion", &model::SdrcnnConfig::expansion)
      .def_readwrite("residual_blocks", &model::SdrcnnConfig::residual_blocks)
      .def_readwrite("kernel", &model::SdrcnnConfig::kernel)
      .def_readwrite("ratio", &model::SdrcnnConfig::upsample_factor)
      .def_readwrite("spectral_mapping", &model::SdrcnnConfig::spectral_mapping)
      .def_readwrite("batch_norm", &model::SdrcnnConfig::batch_norm)
      .def_readwrite("extra_relu", &model::SdrcnnConfig::extra_relu)
      .def("param_count", [](const model::SdrcnnConfig& c) { return model::param_count(c); })
      .def("__eq__", [](const model::SdrcnnConfig& a, const model::SdrcnnConfig& b) { return a == b; })
      .def("__repr__", [](const model::SdrcnnConfig& c) { return io::format_model_config(c); });

  m.def("budget_width",
        [](std::size_t target, const model::SdrcnnConfig& base) { return model::budget_width(target, base); },
        py::arg("target"), py::arg("base") = model::SdrcnnConfig{});

  py::class_<model::SdrcnnParams>(m, "Model")
      .def_static("zeros", &model::SdrcnnParams::zeros, py::arg("config") = model::SdrcnnConfig{})
      .def_static("initialize", &model::SdrcnnParams::initialize,
                  py::arg("config") = model::SdrcnnConfig{}, py::arg("seed") = 0)
      .def_static("load", [](const std::filesystem::path& p) { return io::load_checkpoint(p).params; })
      .def("save", [](const model::SdrcnnParams& p, const std::filesystem::path& path) {
        io::save_checkpoint(p, path);
      })
      .def_property_readonly("config", &model::SdrcnnParams::config)
      .def("param_count", &model::SdrcnnParams::count)
      .def("state", [](const model::SdrcnnParams& p) {
        py::dict d;
        p.visit_state([&](const std::string& name, const nn::Tensor& t) { d[py::str(name)] = tensor_to_array(t); });
        return d;
      })
      .def("predict", [](model::SdrcnnParams& p, const Array& pan, const Array& lrms) {
        return to_array(model::predict(to_raster(pan), to_raster(lrms), p));
      }, py::arg("pan"), py::arg("lrms"))
      .def("addition_features", [](model::SdrcnnParams& p, const Array& pan, const Array& lrms) {
        const auto t = model::dense_forward(nn::from_raster(to_raster(pan)), nn::from_raster(to_raster(lrms)), p);
        py::list out;
        for (const auto& a : t.addition_outputs) out.append(tensor_to_array(a));
        return out;
      }, py::arg("pan"), py::arg("lrms"));

  m.def("upsample_bicubic", [](const Array& a, int factor) { return to_array(nn::upsample_bicubic(to_raster(a), factor)); },
        py::arg("image"), py::arg("factor") = 4);

  m.def("synth_scene", [](std::uint64_t seed, int size, int bands, int ratio) {
    const auto s = wald::synth_scene(seed, size, bands, ratio);
    return py::make_tuple(to_array(s.ms), to_array(s.pan));
  }, py::arg("seed"), py::arg("size"), py::arg("bands") = 8, py::arg("ratio") = 4);
  m.def("degrade_ms", [](const Array& ms, double gain, int ratio, int kernel_size) {
    const Raster r = to_raster(ms);
    return to_array(wald::degrade_ms(r, sensor_of(r.bands(), gain, 0.15, ratio, kernel_size)));
  }, py::arg("ms"), py::arg("gain") = 0.30, py::arg("ratio") = 4, py::arg("kernel_size") = 41);
  m.def("degrade_pan", [](const Array& pan, double gain, int ratio, int kernel_size) {
    return to_array(wald::degrade_pan(to_raster(pan), sensor_of(8, 0.30, gain, ratio, kernel_size)));
  }, py::arg("pan"), py::arg("gain") = 0.15, py::arg("ratio") = 4, py::arg("kernel_size") = 41);
  m.def("gaussian_kernel", &wald::gaussian_kernel, py::arg("gain"), py::arg("ratio") = 4, py::arg("size") = 41);
  m.def("split", &wald::split, py::arg("ids"), py::arg("seed"));
  py::class_<wald::DatasetSplit>(m, "DatasetSplit")
      .def_readonly("train", &wald::DatasetSplit::train)
      .def_readonly("val", &wald::DatasetSplit::val)
      .def_readonly("test", &wald::DatasetSplit::test)
      .def_readonly("seed", &wald::DatasetSplit::seed);

  m.def("sfim", [](const Array& pan, const Array& lrms, int ratio, int kernel) {
    classical::SfimOptions o;
    o.ratio = ratio;
    o.kernel = kernel;
    return to_array(classical::sfim(to_raster(pan), to_raster(lrms), o));
  }, py::arg("pan"), py::arg("lrms"), py::arg("ratio") = 4, py::arg("kernel") = 7);
  m.def("gram_schmidt", [](const Array& pan, const Array& lrms, int ratio, std::vector<double> weights) {
    classical::GsOptions o;
    o.ratio = ratio;
    o.weights = std::move(weights);
    return to_array(classical::gram_schmidt(to_raster(pan), to_raster(lrms), o));
  }, py::arg("pan"), py::arg("lrms"), py::arg("ratio") = 4, py::arg("weights") = std::vector<double>{});

  m.def("sam", [](const Array& x, const Array& ref) { return metrics::sam(to_raster(x), to_raster(ref)); });
  m.def("ergas", [](const Array& x, const Array& ref, int ratio) {
    return metrics::ergas(to_raster(x), to_raster(ref), ratio);
  }, py::arg("x"), py::arg("ref"), py::arg("ratio") = 4);
  m.def("scc", [](const Array& x, const Array& ref) { return metrics::scc(to_raster(x), to_raster(ref)); });
  m.def("q2n", [](const Array& x, const Array& ref, int block, int shift) {
    return metrics::q2n(to_raster(x), to_raster(ref), block, shift);
  }, py::arg("x"), py::arg("ref"), py::arg("block") = 32, py::arg("shift") = 32);
  m.def("reduced_metrics", [](const Array& fused, const Array& gt, int ratio) {
    metrics::ReducedOptions o;
    o.ratio = ratio;
    return metric_dict(metrics::reduced_metrics(to_raster(fused), to_raster(gt), o));
  }, py::arg("fused"), py::arg("gt"), py::arg("ratio") = 4);
  m.def("full_metrics", [](const Array& fused, const Array& ms, const Array& pan, int ratio) {
    metrics::NoReferenceOptions o;
    o.ratio = o.sensor.ratio = ratio;
    return metric_dict(metrics::full_metrics(to_raster(fused), to_raster(ms), to_raster(pan), o));
  }, py::arg("fused"), py::arg("ms"), py::arg("pan"), py::arg("ratio") = 4);
  m.def("aem", [](const Array& fused, const Array& gt) { return to_array(metrics::aem(to_raster(fused), to_raster(gt))); });

  m.def("smooth_loss", [](const std::vector<double>& raw, int window) { return train::smooth_loss(raw, window); },
        py::arg("raw"), py::arg("window") = 100);

  m.def("train", [](const std::filesystem::path& dataset, const std::string& config_text,
                    std::optional<std::filesystem::path> checkpoint_dir,
                    train::IterationHook on_iteration) {
    KeyValueConfig cfg = KeyValueConfig::parse(config_text, "config_text");
    const train::TrainConfig tc = train::read_train_config(cfg);
    cfg.require_all_used();
    const wald::Dataset ds = wald::read_dataset(dataset);
    train::TrainOptions opts;
    opts.checkpoint_dir = std::move(checkpoint_dir);
    opts.on_iteration = std::move(on_iteration);
    train::TrainResult r;
    {
      py::gil_scoped_release release;
      r = train::train(tc, ds, opts);
    }
    return py::make_tuple(std::move(r.best), r.log.raw);
  }, py::arg("dataset"), py::arg("config_text") = "", py::arg("checkpoint_dir") = py::none(),
     py::arg("on_iteration") = py::none(),
     "Trains on a dataset directory written by `sdrcnn simulate`; returns (best model, raw losses).");

  m.def("read_raster", [](const std::filesystem::path& p) { return to_array(io::read_raster(p)); });
  m.def("write_raster", [](const Array& a, const std::filesystem::path& p, bool float32) {
    io::write_raster(to_raster(a), p, float32 ? io::DType::kFloat32 : io::DType::kFloat64);
  }, py::arg("image"), py::arg("path"), py::arg("float32") = false);
  m.def("pca_features", [](const Array& features, int components) {
    if (features.ndim() != 3) throw ShapeError("expected a (channels, height, width) array");
    nn::Tensor t({1, static_cast<int>(features.shape(0)), static_cast<int>(features.shape(1)),
                  static_cast<int>(features.shape(2))},
                 std::vector<double>(features.data(), features.data() + features.size()));
    return to_array(viz::pca_features(t, components));
  }, py::arg("features"), py::arg("components") = 4);

  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    py::print(out.str(), py::arg("end") = "");
    if (!err.str().empty()) py::print(err.str(), py::arg("end") = "", py::arg("file") = py::module_::import("sys").attr("stderr"));
    return code;
  }, py::arg("args"), "Runs the command-line tool in-process and returns its exit code.");
}
