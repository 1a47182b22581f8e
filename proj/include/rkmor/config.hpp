#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rkmor/greedy.hpp"
#include "rkmor/model.hpp"
#include "rkmor/types.hpp"

namespace rkmor {

/// Where the system comes from: a named generator or Matrix Market files.
struct SystemSpec {
  enum class Source { generator, files };
  Source source = Source::generator;

  SystemKind kind = SystemKind::random_stable;
  Index n = 0;
  std::uint32_t seed = 1;
  bool random_mass = false;  // apply gen_random_mass(n, seed + 1)

  std::string path_a, path_e, path_b, path_c;
};

struct AlgorithmSpec {
  Algorithm algo = Algorithm::arksm;
  int l_max = 1;
  double grid_density = 50.0;  // arksm boundary samples per hull edge
  // two_sided_* candidate grid; unset fields fall back to the evaluation grid
  std::optional<double> alpha, beta;
  std::optional<int> k;
  int max_iter = 100;  // irka
  double tol = 1e-6;   // irka
};

struct RunConfig {
  SystemSpec system;
  double eval_alpha = -3.0;
  double eval_beta = 5.0;
  int eval_k = 300;
  std::string out_dir = "out";
  // The seconds column prints as 0 unless enabled, keeping summary.csv
  // byte-reproducible across runs.
  bool timing_in_summary = false;
  std::vector<AlgorithmSpec> algorithms;
  std::string source_text;  // raw config echoed into the run manifest
  std::string base_dir;     // directory of the config file, for data paths
};

/// Parse the INI-style benchmark configuration.  Sections: [system], [grid],
/// [output], and one [algorithm] per algorithm (repeatable, order kept).
/// Unknown sections, unknown keys, and malformed values raise ConfigError
/// with the line number.
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin = "<config>");
RunConfig parse_config_file(const std::string& path);

}  // namespace rkmor
