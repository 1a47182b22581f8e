#include "rkmor/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace rkmor {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, const std::string& origin, int line) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    fail(origin, line, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) fail(origin, line, "trailing junk in number '" + v + "'");
  return x;
}

long to_long(const std::string& v, const std::string& origin, int line) {
  std::size_t used = 0;
  long x = 0;
  try {
    x = std::stol(v, &used);
  } catch (const std::exception&) {
    fail(origin, line, "expected an integer, got '" + v + "'");
  }
  if (used != v.size()) fail(origin, line, "trailing junk in integer '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const std::string& origin, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(origin, line, "expected a boolean, got '" + v + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  RunConfig cfg;
  cfg.source_text = text;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  bool seen_system = false;
  bool system_kind_set = false;
  int line_no = 0;

  auto algo = [&]() -> AlgorithmSpec& {
    if (cfg.algorithms.empty()) {
      fail(origin, line_no, "key outside an [algorithm] section");
    }
    return cfg.algorithms.back();
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section == "system") {
        seen_system = true;
      } else if (section == "algorithm") {
        cfg.algorithms.emplace_back();
      } else if (section != "grid" && section != "output") {
        fail(origin, line_no, "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "empty key");

    if (section == "system") {
      if (key == "kind") {
        system_kind_set = true;
        if (val == "random_stable") {
          cfg.system.kind = SystemKind::random_stable;
        } else if (val == "laplacian_1d") {
          cfg.system.kind = SystemKind::laplacian_1d;
        } else if (val == "diagonal") {
          cfg.system.kind = SystemKind::diagonal;
        } else if (val == "files") {
          cfg.system.source = SystemSpec::Source::files;
        } else {
          fail(origin, line_no, "unknown system kind '" + val + "'");
        }
      } else if (key == "n") {
        cfg.system.n = to_long(val, origin, line_no);
      } else if (key == "seed") {
        cfg.system.seed = std::uint32_t(to_long(val, origin, line_no));
      } else if (key == "mass") {
        if (val == "identity") {
          cfg.system.random_mass = false;
        } else if (val == "random") {
          cfg.system.random_mass = true;
        } else {
          fail(origin, line_no, "mass must be identity or random");
        }
      } else if (key == "a") {
        cfg.system.path_a = val;
      } else if (key == "e") {
        cfg.system.path_e = val;
      } else if (key == "b") {
        cfg.system.path_b = val;
      } else if (key == "c") {
        cfg.system.path_c = val;
      } else {
        fail(origin, line_no, "unknown [system] key '" + key + "'");
      }
    } else if (section == "grid") {
      if (key == "alpha") {
        cfg.eval_alpha = to_double(val, origin, line_no);
      } else if (key == "beta") {
        cfg.eval_beta = to_double(val, origin, line_no);
      } else if (key == "k") {
        cfg.eval_k = int(to_long(val, origin, line_no));
      } else {
        fail(origin, line_no, "unknown [grid] key '" + key + "'");
      }
    } else if (section == "output") {
      if (key == "dir") {
        cfg.out_dir = val;
      } else if (key == "timing_in_summary") {
        cfg.timing_in_summary = to_bool(val, origin, line_no);
      } else {
        fail(origin, line_no, "unknown [output] key '" + key + "'");
      }
    } else if (section == "algorithm") {
      if (key == "name") {
        auto a = algorithm_from_name(val);
        if (!a) fail(origin, line_no, "unknown algorithm '" + val + "'");
        algo().algo = *a;
      } else if (key == "l_max") {
        algo().l_max = int(to_long(val, origin, line_no));
      } else if (key == "grid_density") {
        algo().grid_density = to_double(val, origin, line_no);
      } else if (key == "alpha") {
        algo().alpha = to_double(val, origin, line_no);
      } else if (key == "beta") {
        algo().beta = to_double(val, origin, line_no);
      } else if (key == "k") {
        algo().k = int(to_long(val, origin, line_no));
      } else if (key == "max_iter") {
        algo().max_iter = int(to_long(val, origin, line_no));
      } else if (key == "tol") {
        algo().tol = to_double(val, origin, line_no);
      } else {
        fail(origin, line_no, "unknown [algorithm] key '" + key + "'");
      }
    } else {
      fail(origin, line_no, "key '" + key + "' before any section");
    }
  }

  if (!seen_system) throw ConfigError(origin + ": missing [system] section");
  if (cfg.system.source == SystemSpec::Source::generator) {
    if (!system_kind_set) {
      throw ConfigError(origin + ": [system] needs a kind");
    }
    if (cfg.system.n < 1) {
      throw ConfigError(origin + ": [system] n must be >= 1");
    }
  } else {
    if (cfg.system.path_a.empty() || cfg.system.path_b.empty() ||
        cfg.system.path_c.empty()) {
      throw ConfigError(origin + ": kind = files needs a, b, and c paths");
    }
  }
  if (!(cfg.eval_alpha <= cfg.eval_beta)) {
    throw ConfigError(origin + ": [grid] alpha must not exceed beta");
  }
  if (cfg.eval_k < 1) throw ConfigError(origin + ": [grid] k must be >= 1");
  if (cfg.algorithms.empty()) {
    throw ConfigError(origin + ": at least one [algorithm] section required");
  }
  for (const AlgorithmSpec& a : cfg.algorithms) {
    if (a.l_max < 1) throw ConfigError(origin + ": l_max must be >= 1");
    if (a.alpha && a.beta && !(*a.alpha <= *a.beta)) {
      throw ConfigError(origin + ": [algorithm] alpha must not exceed beta");
    }
    if (a.k && *a.k < 1) {
      throw ConfigError(origin + ": [algorithm] k must be >= 1");
    }
    if (a.max_iter < 1) {
      throw ConfigError(origin + ": max_iter must be >= 1");
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  RunConfig cfg = parse_config_text(text.str(), path);
  cfg.base_dir = std::filesystem::path(path).parent_path().string();
  return cfg;
}

}  // namespace rkmor
