// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sdrcnn {

// Tensor/raster dimensions that do not fit the operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that is well-formed but numerically unusable (degenerate
// statistics, NaN loss, bad file contents).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad option values or command-line usage.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sdrcnn
