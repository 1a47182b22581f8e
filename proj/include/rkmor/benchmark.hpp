#pragma once

#include <string>
#include <vector>

#include "rkmor/config.hpp"
#include "rkmor/greedy.hpp"
#include "rkmor/model.hpp"

namespace rkmor {

struct AlgorithmResult {
  AlgorithmSpec spec;
  GreedyRun run;
  int order = 0;
  double max_error = 0.0;
  double seconds = 0.0;  // algorithm wall time, excluding transfer sampling
  std::string curve_file;
  std::string shifts_file;
};

struct BenchmarkResult {
  std::vector<AlgorithmResult> results;
  double sample_seconds = 0.0;  // transfer samples over the evaluation grid
  std::string out_dir;
  std::string summary_file;
  std::string manifest_file;
};

/// Instantiate the configured system (generator or Matrix Market files,
/// relative paths resolved against base_dir).
StateSpaceSystem realize_system(const SystemSpec& spec,
                                const std::string& base_dir);

/// Conjugate pairs +-i w with w log-spaced across [|s_min|, |s_max|] (plus one
/// real midpoint shift when l is odd), the default start for the fixed-point
/// baseline.  Closed under conjugation and spread across the response band.
std::vector<Complex> default_irka_shifts(const StateSpaceSystem& sys, int l);

/// Run every configured algorithm and write the artifacts into out_dir:
/// summary.csv, run_manifest.txt, and per-algorithm curve_<name>.csv and
/// shifts_<name>.csv.  Throws ConfigError on configuration problems and
/// other Error subclasses (annotated with the algorithm name) on numerical
/// failure; the driver maps these to exit codes.
BenchmarkResult run_benchmark(const RunConfig& cfg);

}  // namespace rkmor
