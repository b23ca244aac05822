// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "clinner_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return clinner::cli::run(args);
}
