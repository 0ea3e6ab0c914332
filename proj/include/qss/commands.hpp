#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qss/mc_oracle.hpp"

// Command entry points behind the CLI. Each returns a process exit code:
//   0 success
//   1 unexpected internal failure
//   2 invalid configuration or options
//   3 a state failed the physicality check
//   4 file I/O failure
//   5 sampled and analytic results disagree beyond 5 sigma

namespace qss {

struct CommonOptions {
  std::string config_path;  // empty: built-in experiment defaults
  std::string out_path;
  bool raw_detection = false;
};

struct GridOptions {
  double g_min = 0.0;
  double g_max = 5.656854249492381;  // twice the ideal unit-gain-product value
  int steps = 101;
};

struct McOptions {
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;
  McPerturbation perturbation;
};

int cmd_report(const CommonOptions& opts);
int cmd_sweep(const CommonOptions& opts, const GridOptions& grid);
int cmd_tv(const CommonOptions& opts, const GridOptions& grid);
int cmd_mc_validate(const CommonOptions& opts, const McOptions& mc);
int cmd_bounds(const CommonOptions& opts);

}  // namespace qss
