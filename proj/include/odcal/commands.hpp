#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace odcal {

// Command implementations behind the CLI front end. Each throws
// std::invalid_argument / std::runtime_error with a message naming the
// offending field or file; the CLI maps that to a nonzero exit.

struct GenerateOptions {
  std::string spec_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;  // overrides the spec's seed
};

/// Writes network.json, gt_demand.json, measurements.json and the resolved
/// scenario.json into the output directory. Deterministic per seed.
void cmd_generate(const GenerateOptions& opts);

struct CalibrateOptions {
  std::string scenario_dir;
  bool regularized = true;  // false: baseline (w2 = 0)
  std::optional<int> iterations;
  std::optional<int> rollouts;
  std::optional<std::uint64_t> seed;
  std::string out_dir;  // defaults to the scenario directory
  bool plot = false;
  bool quiet = false;   // suppress the progress line on stdout
};

/// Runs one calibration and writes trace_<mode>_seed<S>.csv plus a result
/// sidecar JSON (same stem) with the final demand and metrics; --plot adds an
/// SVG convergence chart. Returns the trace CSV path.
std::string cmd_calibrate(const CalibrateOptions& opts);

struct CompareOptions {
  std::string trace_a;  // trace CSV path (sidecar JSON expected next to it)
  std::string trace_b;
  std::string out_prefix;  // defaults to "<dir of trace_a>/comparison"
  bool plot = false;
};

/// Emits <prefix>.csv (final metrics per method + signed percent change) and
/// <prefix>_scatter.csv (per-OD ground truth vs calibrated demand); --plot
/// adds a scatter SVG. Both traces must come from the same scenario.
void cmd_compare(const CompareOptions& opts);

}  // namespace odcal
