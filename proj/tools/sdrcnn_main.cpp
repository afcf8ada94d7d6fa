// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "sdrcnn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sdrcnn::cli::run(args, std::cout, std::cerr);
}
