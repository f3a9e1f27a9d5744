#pragma once

#include <string>
#include <vector>

#include "mmh/config.hpp"
#include "mmh/metrics.hpp"

namespace mmh {

/// Scenario grid; empty dimensions keep the base configuration's value.
struct SweepGrid {
  std::vector<std::string> schemes;
  std::vector<uint64_t> seeds;
  std::vector<double> arrival_gbps;
  std::vector<double> nu;
  std::vector<double> kappa;
  std::vector<double> epsilon;
  long slots = 0;  // 0 = caller default
};

SweepGrid parse_grid(const std::string& json_text);
SweepGrid load_grid(const std::string& path);

struct SweepCell {
  std::string name;
  RunSummary summary;
  bool failed = false;
  std::string error;
};

struct SweepReport {
  std::vector<SweepCell> cells;
  bool hard_fail = false;       // a queue-bound or monotonicity assertion tripped
  std::string report_json;      // combined tables and ordering/trend checks
};

/// Runs every grid cell (in parallel), writes one summary.json per cell under
/// out_dir, and assembles the comparison report. A failed cell is recorded
/// without aborting the sweep.
SweepReport run_sweep(const ScenarioConfig& base, const SweepGrid& grid, long slots, int jobs,
                      const std::string& out_dir);

}  // namespace mmh
