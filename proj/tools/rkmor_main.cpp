#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rkmor/benchmark.hpp"
#include "rkmor/config.hpp"
#include "rkmor/format.hpp"
#include "rkmor/verify.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override,
            long seed_override, bool has_seed) {
  rkmor::RunConfig cfg = rkmor::parse_config_file(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (has_seed) cfg.system.seed = std::uint32_t(seed_override);
  rkmor::BenchmarkResult res = rkmor::run_benchmark(cfg);
  for (const rkmor::AlgorithmResult& ar : res.results) {
    std::cout << rkmor::algorithm_name(ar.spec.algo) << ": order=" << ar.order
              << " max_error=" << rkmor::g17(ar.max_error)
              << " solves=" << ar.run.solve_count << "\n";
  }
  std::cout << "artifacts in " << res.out_dir << "\n";
  return 0;
}

int cmd_verify(const rkmor::VerifyOptions& opts) {
  const auto suites = rkmor::verify_all(opts, std::cout);
  return rkmor::all_passed(suites) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rational Krylov model order reduction toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  long seed_override = 0;
  CLI::App* run = app.add_subcommand("run", "Run a benchmark configuration");
  run->add_option("config", config_path, "Path to the config file")->required();
  run->add_option("--out", out_override, "Output directory override");
  CLI::Option* seed_opt =
      run->add_option("--seed", seed_override, "System seed override");

  rkmor::VerifyOptions vopts;
  CLI::App* verify =
      app.add_subcommand("verify", "Run the numerical invariant suites");
  std::vector<long> sizes;
  long seed_count = 0;
  verify->add_option("--n", sizes, "System sizes (repeatable)");
  verify->add_option("--seeds", seed_count, "Number of seeds (1..N)");
  verify->add_flag("--mutate-g-two-sign", vopts.mutate_g_two_sign,
                   "Fault injection: flip the two-sided formula sign");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      return cmd_run(config_path, out_override, seed_override,
                     seed_opt->count() > 0);
    }
    if (!sizes.empty()) {
      vopts.sizes.assign(sizes.begin(), sizes.end());
    }
    if (seed_count > 0) vopts.seed_count = int(seed_count);
    return cmd_verify(vopts);
  } catch (const rkmor::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rkmor::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const rkmor::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
