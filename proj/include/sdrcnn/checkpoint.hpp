// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// Model checkpoints: a text header (format line, model.* config keys,
// optional meta.* entries, one line per tensor) followed by one MSR1 float64
// blob per tensor in header order. Batch-norm running statistics are stored
// alongside the learnable tensors.

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "sdrcnn/config.hpp"
#include "sdrcnn/model.hpp"

namespace sdrcnn::io {

/// Reads model.* keys from `cfg`, starting from `base`.
model::SdrcnnConfig read_model_config(KeyValueConfig& cfg, const model::SdrcnnConfig& base = {});
/// model.* lines in key=value form.
std::string format_model_config(const model::SdrcnnConfig& config);

struct Checkpoint {
  model::SdrcnnParams params;
  std::map<std::string, std::string> meta;
};

std::string encode_checkpoint(const model::SdrcnnParams& params,
                              const std::map<std::string, std::string>& meta = {});
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const model::SdrcnnParams& params, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& meta = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sdrcnn::io
