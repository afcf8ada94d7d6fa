// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdrcnn/raster_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "sdrcnn/error.hpp"

namespace sdrcnn::io {
namespace {

constexpr char kMagic[4] = {'M', 'S', 'R', '1'};
constexpr std::uint16_t kVersion = 1;

static_assert(std::endian::native == std::endian::little ||
              std::endian::native == std::endian::big);

template <typename T>
void put(std::string& out, T value) {
  auto bits = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.append(bits.data(), bits.size());
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  std::array<char, sizeof(T)> bits;
  std::memcpy(bits.data(), bytes.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  return std::bit_cast<T>(bits);
}

}  // namespace

std::string encode_raster(const Raster& raster, DType dtype) {
  if (raster.bands() > std::numeric_limits<std::uint16_t>::max())
    throw ShapeError("raster has too many bands for MSR1: " + std::to_string(raster.bands()));
  std::string out;
  const std::size_t sample = dtype == DType::kFloat64 ? 8 : 4;
  out.reserve(kRasterHeaderSize + raster.size() * sample);
  out.append(kMagic, 4);
  put<std::uint16_t>(out, kVersion);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(raster.bands()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(raster.height()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(raster.width()));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
  out.append(3, '\0');
  if (dtype == DType::kFloat64) {
    for (double v : raster.values()) put<double>(out, v);
  } else {
    for (double v : raster.values()) put<float>(out, static_cast<float>(v));
  }
  return out;
}

Raster decode_raster(std::string_view bytes, std::optional<DType> expected) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw DataError("not a raster file");
  if (bytes.size() < kRasterHeaderSize) throw DataError("unexpected end of raster header");
  const auto version = get<std::uint16_t>(bytes, 4);
  if (version != kVersion)
    throw DataError("unsupported version " + std::to_string(version));
  const int bands = get<std::uint16_t>(bytes, 6);
  const auto height = get<std::uint32_t>(bytes, 8);
  const auto width = get<std::uint32_t>(bytes, 12);
  const auto code = get<std::uint8_t>(bytes, 16);
  if (code > 1) throw DataError("unsupported dtype code " + std::to_string(code));
  const auto dtype = static_cast<DType>(code);
  if (expected && *expected != dtype) throw DataError("dtype mismatch");
  if (height > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
      width > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
    throw DataError("raster dimensions out of range");

  const std::size_t sample = dtype == DType::kFloat64 ? 8 : 4;
  const std::size_t count = static_cast<std::size_t>(bands) * height * width;
  const std::size_t payload = bytes.size() - kRasterHeaderSize;
  if (payload < count * sample)
    throw DataError("unexpected end of raster payload: expected " +
                    std::to_string(count * sample) + " bytes, found " +
                    std::to_string(payload));
  if (payload > count * sample) throw DataError("trailing bytes after raster payload");

  std::vector<double> values(count);
  std::size_t offset = kRasterHeaderSize;
  if (dtype == DType::kFloat64) {
    for (auto& v : values) {
      v = get<double>(bytes, offset);
      offset += 8;
    }
  } else {
    for (auto& v : values) {
      v = get<float>(bytes, offset);
      offset += 4;
    }
  }
  return Raster(bands, static_cast<int>(height), static_cast<int>(width), std::move(values));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError("write failed: " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot rename into " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_raster(const Raster& raster, const std::filesystem::path& path, DType dtype) {
  write_file_atomic(path, encode_raster(raster, dtype));
}

Raster read_raster(const std::filesystem::path& path, std::optional<DType> expected) {
  try {
    return decode_raster(read_file(path), expected);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace sdrcnn::io
