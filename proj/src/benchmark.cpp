#include "rkmor/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "rkmor/format.hpp"
#include "rkmor/remainder.hpp"

namespace rkmor {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

GreedyRun dispatch(const StateSpaceSystem& sys, const AlgorithmSpec& spec,
                   const RunConfig& cfg) {
  switch (spec.algo) {
    case Algorithm::arksm:
      return arksm(sys, spec.l_max, spec.grid_density);
    case Algorithm::two_sided_o1:
    case Algorithm::two_sided_o2:
    case Algorithm::two_sided_o3: {
      const int option = spec.algo == Algorithm::two_sided_o1   ? 1
                         : spec.algo == Algorithm::two_sided_o2 ? 2
                                                                : 3;
      return two_sided_greedy(sys, spec.alpha.value_or(cfg.eval_alpha),
                              spec.beta.value_or(cfg.eval_beta),
                              spec.k.value_or(cfg.eval_k), spec.l_max, option);
    }
    case Algorithm::irka:
      return irka_baseline(sys, default_irka_shifts(sys, spec.l_max),
                           spec.max_iter, spec.tol);
  }
  throw ConfigError("unreachable algorithm kind");
}

void write_curve(const std::string& path, const TransferCache& cache,
                 const StateSpaceSystem& sys, const ReducedModel& rm) {
  FormulaEvaluator fe(sys, rm,
                      rm.two_sided() ? FormulaMode::two_sided
                                     : FormulaMode::one_sided);
  auto xs = reduced_resolve_batch(rm.Ar, rm.Er, rm.br, cache.grid.points);
  std::ofstream out = open_out(path);
  out << "z_imag,abs_h,abs_h_tilde,abs_e_direct,abs_e_formula\n";
  for (std::size_t i = 0; i < cache.grid.points.size(); ++i) {
    if (!cache.valid[i] || !xs[i]) continue;
    const Complex z = cache.grid.points[i];
    const Complex ht = rm.cr.dot(*xs[i]);
    Complex ef;
    try {
      ef = fe.eval_via(cache.solver, z);
    } catch (const Error&) {
      continue;
    }
    out << g17(z.imag()) << ',' << g17(std::abs(cache.h[i])) << ','
        << g17(std::abs(ht)) << ',' << g17(std::abs(cache.h[i] - ht)) << ','
        << g17(std::abs(ef)) << '\n';
  }
}

void write_shifts(const std::string& path, const GreedyRun& run) {
  std::ofstream out = open_out(path);
  if (run.t_shifts.empty()) {
    out << "index,s_re,s_im\n";
    for (std::size_t i = 0; i < run.s_shifts.size(); ++i) {
      out << i + 1 << ',' << g17(run.s_shifts[i].real()) << ','
          << g17(run.s_shifts[i].imag()) << '\n';
    }
  } else {
    out << "index,s_re,s_im,t_re,t_im\n";
    for (std::size_t i = 0; i < run.s_shifts.size(); ++i) {
      out << i + 1 << ',' << g17(run.s_shifts[i].real()) << ','
          << g17(run.s_shifts[i].imag()) << ','
          << g17(run.t_shifts[i].real()) << ','
          << g17(run.t_shifts[i].imag()) << '\n';
    }
  }
}

}  // namespace

StateSpaceSystem realize_system(const SystemSpec& spec,
                                const std::string& base_dir) {
  if (spec.source == SystemSpec::Source::files) {
    return load_system(spec.path_a, spec.path_e, spec.path_b, spec.path_c,
                       base_dir);
  }
  StateSpaceSystem sys = gen_test_system(spec.kind, spec.n, spec.seed);
  if (spec.random_mass) {
    sys = with_mass_matrix(sys, gen_random_mass(spec.n, spec.seed + 1),
                           /*restabilize=*/true);
  }
  return sys;
}

std::vector<Complex> default_irka_shifts(const StateSpaceSystem& sys, int l) {
  auto [s_min, s_max] = extreme_shift_bounds(sys);
  const double lo = std::log10(std::abs(s_min));
  const double hi = std::log10(std::abs(s_max));
  std::vector<Complex> shifts;
  shifts.reserve(std::size_t(l));
  const int pairs = l / 2;
  if (l % 2 == 1) shifts.emplace_back(std::pow(10.0, 0.5 * (lo + hi)), 0.0);
  for (int j = 0; j < pairs; ++j) {
    const double x = pairs == 1 ? hi : lo + (hi - lo) * double(j) / (pairs - 1);
    const double w = std::pow(10.0, x);
    shifts.emplace_back(0.0, w);
    shifts.emplace_back(0.0, -w);
  }
  return shifts;
}

BenchmarkResult run_benchmark(const RunConfig& cfg) {
  BenchmarkResult res;
  res.out_dir = cfg.out_dir;
  fs::create_directories(cfg.out_dir);

  const StateSpaceSystem sys = realize_system(cfg.system, cfg.base_dir);
  const SampleGrid grid = make_grid(cfg.eval_alpha, cfg.eval_beta, cfg.eval_k);

  const auto t_sample = Clock::now();
  const TransferCache cache(sys, grid);
  res.sample_seconds = elapsed(t_sample);

  for (const AlgorithmSpec& spec : cfg.algorithms) {
    AlgorithmResult ar;
    ar.spec = spec;
    const char* name = algorithm_name(spec.algo);
    const auto t0 = Clock::now();
    try {
      ar.run = dispatch(sys, spec, cfg);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw Error(std::string("algorithm ") + name + ": " + e.what());
    }
    ar.seconds = elapsed(t0);
    if (ar.run.models.empty()) {
      throw Error(std::string("algorithm ") + name + ": no model produced");
    }
    const ReducedModel& final_model = ar.run.models.back();
    ar.order = final_model.order;
    ar.max_error = cache.max_error(final_model);

    ar.curve_file = (fs::path(cfg.out_dir) / ("curve_" + std::string(name) + ".csv")).string();
    ar.shifts_file = (fs::path(cfg.out_dir) / ("shifts_" + std::string(name) + ".csv")).string();
    try {
      write_curve(ar.curve_file, cache, sys, final_model);
    } catch (const Error& e) {
      throw Error(std::string("algorithm ") + name + ", curve output: " + e.what());
    }
    write_shifts(ar.shifts_file, ar.run);
    res.results.push_back(std::move(ar));
  }

  res.summary_file = (fs::path(cfg.out_dir) / "summary.csv").string();
  {
    std::ofstream out = open_out(res.summary_file);
    out << "algorithm,order,max_error,solves,seconds\n";
    for (const AlgorithmResult& ar : res.results) {
      out << algorithm_name(ar.spec.algo) << ',' << ar.order << ','
          << g17(ar.max_error) << ',' << ar.run.solve_count << ','
          << g17(cfg.timing_in_summary ? ar.seconds : 0.0) << '\n';
    }
  }

  res.manifest_file = (fs::path(cfg.out_dir) / "run_manifest.txt").string();
  {
    std::ofstream out = open_out(res.manifest_file);
    out << "rkmor run manifest\n";
    out << "version: 0.1.0\n";
    out << "system: n=" << sys.n()
        << " identity_mass=" << (sys.identity_mass ? "yes" : "no") << "\n";
    out << "seed: " << cfg.system.seed << "\n";
    out << "eval_grid: alpha=" << g17(grid.alpha) << " beta=" << g17(grid.beta)
        << " k=" << grid.k << " points=" << grid.points.size() << "\n";
    out << "sample_seconds: " << g17(res.sample_seconds) << "\n";
    for (const AlgorithmResult& ar : res.results) {
      out << "algorithm " << algorithm_name(ar.spec.algo)
          << ": order=" << ar.order << " max_error=" << g17(ar.max_error)
          << " solves=" << ar.run.solve_count << " seconds=" << g17(ar.seconds)
          << " iterations=" << ar.run.iterations
          << " converged=" << (ar.run.converged ? "yes" : "no")
          << " reflected=" << (ar.run.unstable_shift_reflected ? "yes" : "no")
          << " mirrored_lhp=" << (ar.run.mirrored_ritz_left_halfplane ? "yes" : "no")
          << "\n";
      for (const std::string& line : ar.run.log) {
        out << "  " << algorithm_name(ar.spec.algo) << ": " << line << "\n";
      }
    }
    out << "config:\n" << cfg.source_text;
    if (!cfg.source_text.empty() && cfg.source_text.back() != '\n') out << "\n";
  }
  return res;
}

}  // namespace rkmor
