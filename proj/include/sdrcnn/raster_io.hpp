// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// MSR1 raster container.
//
//   offset size  field
//   0      4     magic "MSR1"
//   4      2     version (1)
//   6      2     bands
//   8      4     height
//   12     4     width
//   16     1     dtype (0 = float64, 1 = float32)
//   17     3     reserved, zero
//   20     ...   payload, band-major then row-major
//
// All integers and samples are little-endian.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "sdrcnn/raster.hpp"

namespace sdrcnn::io {

enum class DType : std::uint8_t { kFloat64 = 0, kFloat32 = 1 };

inline constexpr std::size_t kRasterHeaderSize = 20;

std::string encode_raster(const Raster& raster, DType dtype = DType::kFloat64);
/// Throws DataError: "not a raster file", "unsupported version",
/// "unsupported dtype", "dtype mismatch", "unexpected end", "trailing bytes".
Raster decode_raster(std::string_view bytes,
                     std::optional<DType> expected = std::nullopt);

void write_raster(const Raster& raster, const std::filesystem::path& path,
                  DType dtype = DType::kFloat64);
Raster read_raster(const std::filesystem::path& path,
                   std::optional<DType> expected = std::nullopt);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace sdrcnn::io
