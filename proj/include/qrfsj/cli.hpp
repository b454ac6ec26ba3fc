#pragma once

#include <string>

#include "qrfsj/forest.hpp"

namespace qrfsj {

struct RunConfig {
  std::string input_csv;
  double train_fraction = 0.8;
  int knn_k = 3;
  ForestConfig forest;
  double confidence_level = 0.90;
  int tau_grid_size = 99;
  std::string output_dir = ".";
};

// Exit codes: 0 success, 2 I/O, 3 data validation, 4 numeric failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitNumeric = 4;

// Dispatches the train/forecast/evaluate/explain/stats subcommands; catches
// module errors and reports them as a single `error: <Tag>: ...` line.
int run_cli(int argc, const char* const* argv);

}  // namespace qrfsj
