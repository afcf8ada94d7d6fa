// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/checkpoint.hpp"

#include <sstream>
#include <vector>

#include "sdrcnn/error.hpp"
#include "sdrcnn/raster_io.hpp"

namespace sdrcnn::io {
namespace {

constexpr const char* kFormatLine = "SDRCNN-CHECKPOINT 1";

struct TensorEntry {
  std::string name;
  nn::Shape4 shape;
  std::size_t bytes = 0;
};

}  // namespace

model::SdrcnnConfig read_model_config(KeyValueConfig& cfg, const model::SdrcnnConfig& base) {
  model::SdrcnnConfig c = base;
  c.bands = cfg.get_int("model.bands", c.bands);
  c.width = cfg.get_int("model.width", c.width);
  c.expansion = cfg.get_int("model.expansion", c.expansion);
  c.residual_blocks = cfg.get_int("model.residual_blocks", c.residual_blocks);
  c.kernel = cfg.get_int("model.kernel", c.kernel);
  c.upsample_factor = cfg.get_int("model.ratio", c.upsample_factor);
  c.spectral_mapping = cfg.get_bool("model.spectral_mapping", c.spectral_mapping);
  c.batch_norm = cfg.get_bool("model.batch_norm", c.batch_norm);
  c.extra_relu = cfg.get_bool("model.extra_relu", c.extra_relu);
  c.validate();
  return c;
}

std::string format_model_config(const model::SdrcnnConfig& c) {
  std::ostringstream out;
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "model.bands=" << c.bands << '\n'
      << "model.width=" << c.width << '\n'
      << "model.expansion=" << c.expansion << '\n'
      << "model.residual_blocks=" << c.residual_blocks << '\n'
      << "model.kernel=" << c.kernel << '\n'
      << "model.ratio=" << c.upsample_factor << '\n'
      << "model.spectral_mapping=" << b(c.spectral_mapping) << '\n'
      << "model.batch_norm=" << b(c.batch_norm) << '\n'
      << "model.extra_relu=" << b(c.extra_relu) << '\n';
  return out.str();
}

std::string encode_checkpoint(const model::SdrcnnParams& params,
                              const std::map<std::string, std::string>& meta) {
  std::ostringstream header;
  std::string blobs;
  header << kFormatLine << '\n' << format_model_config(params.config());
  for (const auto& [k, v] : meta) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw UsageError("checkpoint meta entries cannot contain '=' in keys or newlines");
    header << "meta." << k << '=' << v << '\n';
  }
  params.visit_state([&](const std::string& name, const nn::Tensor& t) {
    const auto& s = t.shape();
    const Raster r(s.n * s.c, s.h, s.w, std::vector<double>(t.data().begin(), t.data().end()));
    const std::string blob = encode_raster(r, DType::kFloat64);
    header << "tensor " << name << ' ' << s.n << ' ' << s.c << ' ' << s.h << ' ' << s.w << ' '
           << blob.size() << '\n';
    blobs += blob;
  });
  header << "data\n";
  return header.str() + blobs;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const auto end = bytes.find('\n', pos);
    if (end == std::string::npos) throw DataError("checkpoint: unexpected end of header");
    std::string line = bytes.substr(pos, end - pos);
    pos = end + 1;
    return line;
  };
  if (next_line() != kFormatLine) throw DataError("not a checkpoint file");

  KeyValueConfig model_keys;
  Checkpoint ck{model::SdrcnnParams::zeros(model::SdrcnnConfig{}), {}};
  std::vector<TensorEntry> entries;
  for (std::string line = next_line(); line != "data"; line = next_line()) {
    if (line.rfind("tensor ", 0) == 0) {
      std::istringstream ls(line.substr(7));
      TensorEntry e;
      if (!(ls >> e.name >> e.shape.n >> e.shape.c >> e.shape.h >> e.shape.w >> e.bytes))
        throw DataError("checkpoint: malformed tensor line '" + line + "'");
      entries.push_back(e);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("checkpoint: malformed header line '" + line + "'");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key.rfind("meta.", 0) == 0) {
      ck.meta[key.substr(5)] = value;
    } else {
      model_keys.set(key, value);
    }
  }

  model::SdrcnnConfig config;
  try {
    config = read_model_config(model_keys);
    model_keys.require_all_used();
  } catch (const UsageError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  ck.params = model::SdrcnnParams::zeros(config);

  std::size_t index = 0;
  ck.params.visit_state([&](const std::string& name, nn::Tensor& t) {
    if (index >= entries.size()) throw DataError("checkpoint: missing tensor " + name);
    const TensorEntry& e = entries[index++];
    if (e.name != name) throw DataError("checkpoint: expected tensor " + name + ", found " + e.name);
    if (!(e.shape == t.shape()))
      throw DataError("checkpoint: tensor " + name + " has shape " + e.shape.str() + ", expected " +
                      t.shape().str());
    if (pos + e.bytes > bytes.size()) throw DataError("checkpoint: unexpected end of data");
    const Raster r = decode_raster(std::string_view(bytes).substr(pos, e.bytes), DType::kFloat64);
    pos += e.bytes;
    if (r.size() != t.numel()) throw DataError("checkpoint: tensor " + name + " size mismatch");
    std::copy(r.values().begin(), r.values().end(), t.data().begin());
  });
  if (index != entries.size()) throw DataError("checkpoint: unexpected extra tensors");
  if (pos != bytes.size()) throw DataError("checkpoint: trailing bytes");
  return ck;
}

void save_checkpoint(const model::SdrcnnParams& params, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& meta) {
  write_file_atomic(path, encode_checkpoint(params, meta));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace sdrcnn::io
