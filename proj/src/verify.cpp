#include "rkmor/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "rkmor/format.hpp"
#include "rkmor/random.hpp"
#include "rkmor/remainder.hpp"

namespace rkmor {

namespace {

constexpr double kCentralTol = 1e-7;
constexpr double kInterpTol = 1e-7;
constexpr double kQuadTol = 1e-7;
constexpr double kQuadControlFloor = 1e-4;
constexpr double kDivDiffTol = 1e-9;

SampleGrid battery_grid() { return make_grid(-1.0, 2.0, 50); }  // 101 points

std::vector<Complex> rhp_shifts(RandomStream& rng, int count) {
  std::vector<Complex> s;
  s.reserve(std::size_t(count));
  for (int j = 0; j < count; ++j) {
    s.emplace_back(rng.uniform_in(0.5, 20.0), rng.uniform_in(-20.0, 20.0));
  }
  return s;
}

const char* verdict(bool ok) { return ok ? "ok" : "FAIL"; }

}  // namespace

StateSpaceSystem battery_system(Index n, std::uint32_t seed, bool descriptor) {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, n, seed);
  if (descriptor) {
    sys = with_mass_matrix(sys, gen_random_mass(n, seed + 500),
                           /*restabilize=*/true);
  }
  return sys;
}

int battery_order(std::uint32_t seed) { return 4 + int(seed % 5); }

ShiftSet battery_shifts(std::uint32_t seed, int l) {
  RandomStream rng(seed * 2654435761u + 97u);
  ShiftSet ss;
  const int k_b = int(rng.uniform_int(1, l));
  const int k_c = int(rng.uniform_int(1, l));
  ss.right_shifts = rhp_shifts(rng, k_b);
  ss.left_shifts = rhp_shifts(rng, k_c);
  ss.right_infinity_count = l - k_b;
  ss.left_infinity_count = l - k_c;
  return ss;
}

ShiftSet combined_one_sided_shifts(const ShiftSet& two_sided) {
  ShiftSet one;
  one.right_shifts = two_sided.right_shifts;
  one.right_shifts.insert(one.right_shifts.end(),
                          two_sided.left_shifts.begin(),
                          two_sided.left_shifts.end());
  one.right_infinity_count =
      two_sided.right_infinity_count + two_sided.left_infinity_count;
  return one;
}

double central_worst_ratio(const TransferCache& cache,
                           const StateSpaceSystem& sys, const ReducedModel& rm,
                           bool flip_formula_sign) {
  FormulaEvaluator fe(sys, rm,
                      rm.two_sided() ? FormulaMode::two_sided
                                     : FormulaMode::one_sided);
  auto xs = reduced_resolve_batch(rm.Ar, rm.Er, rm.br, cache.grid.points);
  double worst = 0.0;
  for (std::size_t i = 0; i < cache.grid.points.size(); ++i) {
    if (!cache.valid[i] || !xs[i]) continue;
    const Complex z = cache.grid.points[i];
    Complex ef;
    try {
      ef = fe.eval_via(cache.solver, z);
    } catch (const Error&) {
      continue;
    }
    if (flip_formula_sign) ef = -ef;
    const Complex ht = rm.cr.dot(*xs[i]);
    const Complex ed = cache.h[i] - ht;
    worst = std::max(worst, std::abs(ef - ed) /
                               (1.0 + std::abs(cache.h[i]) + std::abs(ht)));
  }
  return worst;
}

double interpolation_worst_ratio(const StateSpaceSystem& sys,
                                 const ReducedModel& rm) {
  double worst = 0.0;
  auto check = [&](const std::vector<Complex>& shifts) {
    for (const Complex& s : shifts) {
      const Complex h = transfer_eval(sys, s);
      const Complex ht = reduced_transfer_eval(rm, s);
      worst = std::max(worst, std::abs(h - ht) / (1.0 + std::abs(h)));
    }
  };
  check(rm.shifts.right_shifts);
  check(rm.shifts.left_shifts);
  return worst;
}

SuiteResult suite_central_equivalence(const VerifyOptions& opts,
                                      std::ostream& out) {
  SuiteResult res;
  res.name = "central_equivalence";
  res.passed = true;
  int combos = 0;
  const SampleGrid grid = battery_grid();
  for (Index n : opts.sizes) {
    for (int seed = 1; seed <= opts.seed_count; ++seed) {
      const int l = battery_order(std::uint32_t(seed));
      const ShiftSet ss = battery_shifts(std::uint32_t(seed), l);

      const StateSpaceSystem sys = battery_system(n, std::uint32_t(seed), false);
      const TransferCache cache(sys, grid);
      struct Case {
        const char* mode;
        double worst;
      };
      Case cases[3];
      {
        const ReducedModel rm = build_reduced_model(sys, ss);
        cases[0] = {"two_sided",
                    central_worst_ratio(cache, sys, rm, opts.mutate_g_two_sign)};
      }
      {
        const StateSpaceSystem dsys =
            battery_system(n, std::uint32_t(seed), true);
        const TransferCache dcache(dsys, grid);
        const ReducedModel rm = build_reduced_model(dsys, ss);
        cases[1] = {"descriptor", central_worst_ratio(
                                      dcache, dsys, rm, opts.mutate_g_two_sign)};
      }
      {
        const ReducedModel rm =
            build_one_sided_model(sys, combined_one_sided_shifts(ss));
        cases[2] = {"one_sided", central_worst_ratio(cache, sys, rm, false)};
      }
      for (const Case& c : cases) {
        const bool ok = c.worst <= kCentralTol;
        res.passed = res.passed && ok;
        res.worst = std::max(res.worst, c.worst);
        ++combos;
        out << "[central] n=" << n << " seed=" << seed << " mode=" << c.mode
            << " worst=" << g17(c.worst) << " " << verdict(ok) << "\n";
      }
    }
  }
  res.detail = std::to_string(combos) + " combinations, tol " + g17(kCentralTol);
  return res;
}

SuiteResult suite_interpolation_zeros(const VerifyOptions& opts,
                                      std::ostream& out) {
  SuiteResult res;
  res.name = "interpolation_zeros";
  res.passed = true;
  int combos = 0;
  for (Index n : opts.sizes) {
    for (int seed = 1; seed <= opts.seed_count; ++seed) {
      const int l = battery_order(std::uint32_t(seed));
      const ShiftSet ss = battery_shifts(std::uint32_t(seed), l);
      for (const bool descriptor : {false, true}) {
        const StateSpaceSystem sys =
            battery_system(n, std::uint32_t(seed), descriptor);
        double worst = interpolation_worst_ratio(
            sys, build_reduced_model(sys, ss));
        worst = std::max(
            worst, interpolation_worst_ratio(
                       sys, build_one_sided_model(
                                sys, combined_one_sided_shifts(ss))));
        const bool ok = worst <= kInterpTol;
        res.passed = res.passed && ok;
        res.worst = std::max(res.worst, worst);
        ++combos;
        out << "[interp] n=" << n << " seed=" << seed << " mode="
            << (descriptor ? "descriptor" : "standard")
            << " worst=" << g17(worst) << " " << verdict(ok) << "\n";
      }
    }
  }
  res.detail = std::to_string(combos) + " combinations, tol " + g17(kInterpTol);
  return res;
}

SuiteResult suite_quadrature_exactness(const VerifyOptions& opts,
                                       std::ostream& out) {
  SuiteResult res;
  res.name = "quadrature_exactness";
  res.passed = true;
  double control_min = std::numeric_limits<double>::infinity();
  const int systems = std::max(opts.seed_count, 1);
  const int l = 5;
  for (int seed = 1; seed <= systems; ++seed) {
    const bool descriptor = seed % 2 == 0;
    const StateSpaceSystem sys =
        battery_system(30, std::uint32_t(seed), descriptor);
    RandomStream rng(std::uint32_t(seed) * 7919u + 11u);
    ShiftSet ss;
    ss.right_shifts = rhp_shifts(rng, 2);
    ss.left_shifts = rhp_shifts(rng, 2);
    auto [v1, w1] = weighted_lanczos_starts(sys, ss);
    const LanczosFactorization lf = lanczos_biorth(sys, v1, w1, l);
    const QuadratureReport rep = quadrature_exactness_check(
        sys, lf, ss, 2 * l - 1, 5, std::uint32_t(seed) * 31u + 7u);
    const bool ok = rep.max_rel_discrepancy <= kQuadTol &&
                    rep.negative_control_discrepancy > kQuadControlFloor;
    res.passed = res.passed && ok;
    res.worst = std::max(res.worst, rep.max_rel_discrepancy);
    control_min = std::min(control_min, rep.negative_control_discrepancy);
    out << "[quad] seed=" << seed << " mode="
        << (descriptor ? "descriptor" : "standard")
        << " worst=" << g17(rep.max_rel_discrepancy)
        << " control=" << g17(rep.negative_control_discrepancy) << " "
        << verdict(ok) << "\n";
  }
  res.detail = std::to_string(systems) + " systems, degree " +
               std::to_string(2 * l - 1) + ", control min " + g17(control_min);
  return res;
}

SuiteResult suite_divided_differences(const VerifyOptions&, std::ostream& out) {
  SuiteResult res;
  res.name = "divided_differences";
  res.passed = true;
  RandomStream rng(4242u);
  const int sets = 100;
  for (int trial = 1; trial <= sets; ++trial) {
    const int m = int(rng.uniform_int(1, 6));
    const Complex z = Complex(3.0, 0.0) + 2.0 * rng.complex_normal();
    std::vector<Complex> nodes(static_cast<std::size_t>(m));
    for (Complex& lam : nodes) lam = 0.8 * rng.complex_normal();
    // The closed form needs more nodes than numerator roots.
    const int mt = int(rng.uniform_int(0, std::min(3, m - 1)));
    std::vector<Complex> tnodes(static_cast<std::size_t>(mt));
    for (Complex& t : tnodes) t = 0.8 * rng.complex_normal();

    Complex denom(1.0, 0.0);
    for (const Complex& lam : nodes) denom *= z - lam;
    Complex numer(1.0, 0.0);
    for (const Complex& t : tnodes) numer *= z - t;

    const Complex dd1 = divided_difference(
        [&](Complex lam) { return 1.0 / (z - lam); }, nodes);
    const Complex closed1 = 1.0 / denom;
    const Complex dd2 = divided_difference(
        [&](Complex lam) {
          Complex p(1.0, 0.0);
          for (const Complex& t : tnodes) p *= lam - t;
          return p / (z - lam);
        },
        nodes);
    const Complex closed2 = numer / denom;

    const double r1 = std::abs(dd1 - closed1) / std::abs(closed1);
    const double r2 = std::abs(dd2 - closed2) / std::abs(closed2);
    const double worst = std::max(r1, r2);
    res.worst = std::max(res.worst, worst);
    if (worst > kDivDiffTol) {
      res.passed = false;
      out << "[divdiff] trial=" << trial << " m=" << m
          << " worst=" << g17(worst) << " FAIL\n";
    }
  }
  out << "[divdiff] " << sets << " node sets, worst=" << g17(res.worst) << " "
      << verdict(res.passed) << "\n";
  res.detail = std::to_string(sets) + " node sets, tol " + g17(kDivDiffTol);
  return res;
}

std::vector<SuiteResult> verify_all(const VerifyOptions& opts,
                                    std::ostream& out) {
  std::vector<SuiteResult> suites;
  suites.push_back(suite_central_equivalence(opts, out));
  suites.push_back(suite_interpolation_zeros(opts, out));
  suites.push_back(suite_quadrature_exactness(opts, out));
  suites.push_back(suite_divided_differences(opts, out));
  for (const SuiteResult& s : suites) {
    out << "suite " << s.name << ": " << (s.passed ? "PASS" : "FAIL")
        << " (worst " << g17(s.worst) << "; " << s.detail << ")\n";
  }
  out << (all_passed(suites) ? "verify: ALL PASS" : "verify: FAILURES") << "\n";
  return suites;
}

bool all_passed(const std::vector<SuiteResult>& suites) {
  for (const SuiteResult& s : suites) {
    if (!s.passed) return false;
  }
  return true;
}

}  // namespace rkmor
