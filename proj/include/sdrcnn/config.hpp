// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

// UTF-8 key=value configuration files. Blank lines and lines starting with
// '#' are ignored; whitespace around keys and values is trimmed.

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sdrcnn {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  /// Throws UsageError naming `source` and the line for malformed input.
  static KeyValueConfig parse(std::string_view text, const std::string& source = "config");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  // Typed getters mark the key as consumed and return `fallback` if absent.
  std::string get_string(const std::string& key, const std::string& fallback);
  int get_int(const std::string& key, int fallback);
  long long get_int64(const std::string& key, long long fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback);

  /// Keys present in the file that no getter asked for.
  std::vector<std::string> unused_keys() const;
  /// Throws UsageError listing unused keys.
  void require_all_used() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  const std::string* find(const std::string& key);

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

}  // namespace sdrcnn
