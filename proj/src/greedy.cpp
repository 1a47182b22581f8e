#include "rkmor/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rkmor/format.hpp"

namespace rkmor {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kRankTol = 1e-12;
constexpr double kExcludeRtol = 1e-12;
constexpr double kPowerTol = 1e-10;
constexpr int kPowerMaxIter = 2000;

bool lex_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Ordering by (|s|, arg s) keeps conjugate pair members apart even when
// their real parts agree only to roundoff, so the elementwise distance
// between consecutive sorted shift vectors measures true movement.
bool mag_less(Complex a, Complex b) {
  const double ma = std::abs(a);
  const double mb = std::abs(b);
  if (ma != mb) return ma < mb;
  return std::arg(a) < std::arg(b);
}

// Candidates within relative distance kExcludeRtol of any listed value are
// exactly a zero or a pole of the surrogates; they are skipped, not scored.
bool excluded_near(Complex z, const std::vector<Complex>& pts) {
  for (const Complex& x : pts) {
    if (std::abs(z - x) <= kExcludeRtol * std::abs(z)) return true;
  }
  return false;
}

std::vector<Complex> boundary_samples(const HullBoundary& hull, int per_edge) {
  std::vector<Complex> out;
  switch (hull.kind) {
    case HullKind::point:
      out.push_back(hull.vertices.front());
      break;
    case HullKind::segment: {
      const Complex a = hull.vertices.front();
      const Complex b = hull.vertices.back();
      if (per_edge == 1) {
        out.push_back(a);
      } else {
        for (int j = 0; j < per_edge; ++j) {
          out.push_back(a + (double(j) / (per_edge - 1)) * (b - a));
        }
      }
      break;
    }
    case HullKind::polygon: {
      const std::size_t m = hull.vertices.size();
      for (std::size_t i = 0; i < m; ++i) {
        const Complex a = hull.vertices[i];
        const Complex b = hull.vertices[(i + 1) % m];
        for (int j = 0; j < per_edge; ++j) {
          out.push_back(a + (double(j) / per_edge) * (b - a));
        }
      }
      break;
    }
  }
  return out;
}

// Indices of the finite surrogate values, best first; ties keep grid order so
// the lowest index wins.
std::vector<std::size_t> ranked_by_value(const std::vector<double>& val) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < val.size(); ++i) {
    if (std::isfinite(val[i])) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return val[a] > val[b];
  });
  return idx;
}

template <typename Op>
Complex dominant_eig(Op&& apply, Index n) {
  ComplexVector x = ComplexVector::Ones(n) / std::sqrt(double(n));
  Complex lam_prev(0.0, 0.0);
  for (int it = 1; it <= kPowerMaxIter; ++it) {
    ComplexVector y = apply(x);
    const Complex lam = x.dot(y);
    const double ny = y.norm();
    if (ny == 0.0) return Complex(0.0, 0.0);
    // A stalled Rayleigh quotient is not convergence (rotation-dominated
    // spectra hold it constant); require the eigenpair residual too.
    const double res = (y - lam * x).norm();
    x = y / ny;
    if (it >= 3 && std::abs(lam - lam_prev) <= kPowerTol * std::abs(lam) &&
        res <= kPowerTol * ny) {
      return lam;
    }
    lam_prev = lam;
  }
  throw NonConvergence("extreme_shift_bounds: power iteration stalled");
}

std::pair<Complex, Complex> dense_extremes(const StateSpaceSystem& sys) {
  std::vector<Complex> ev = generalized_eig(ComplexMatrix(-sys.A), sys.E);
  Complex lo = ev.front(), hi = ev.front();
  for (const Complex& v : ev) {
    const double av = std::abs(v);
    if (av < std::abs(lo) || (av == std::abs(lo) && lex_less(v, lo))) lo = v;
    if (av > std::abs(hi) || (av == std::abs(hi) && lex_less(hi, v))) hi = v;
  }
  return {lo, hi};
}

}  // namespace

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::arksm: return "arksm";
    case Algorithm::two_sided_o1: return "two_sided_o1";
    case Algorithm::two_sided_o2: return "two_sided_o2";
    case Algorithm::two_sided_o3: return "two_sided_o3";
    case Algorithm::irka: return "irka";
  }
  return "unknown";
}

std::optional<Algorithm> algorithm_from_name(const std::string& name) {
  for (Algorithm a : {Algorithm::arksm, Algorithm::two_sided_o1,
                      Algorithm::two_sided_o2, Algorithm::two_sided_o3,
                      Algorithm::irka}) {
    if (name == algorithm_name(a)) return a;
  }
  return std::nullopt;
}

TransferCache::TransferCache(const StateSpaceSystem& sys, SampleGrid g)
    : grid(std::move(g)), solver(sys.A, sys.E) {
  h.resize(grid.points.size());
  valid.resize(grid.points.size());
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    auto x = solver.solve(grid.points[i], sys.b);
    valid[i] = x.has_value();
    h[i] = x ? sys.c.dot(*x) : Complex(0.0, 0.0);
  }
}

double TransferCache::max_error(const ReducedModel& rm) const {
  auto xs = reduced_resolve_batch(rm.Ar, rm.Er, rm.br, grid.points);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    if (!valid[i] || !xs[i]) continue;
    worst = std::max(worst, std::abs(h[i] - rm.cr.dot(*xs[i])));
  }
  return worst;
}

std::pair<Complex, Complex> extreme_shift_bounds(const StateSpaceSystem& sys,
                                                 Index dense_threshold) {
  const Index n = sys.n();
  if (n <= dense_threshold) return dense_extremes(sys);
  try {
    Eigen::PartialPivLU<ComplexMatrix> luA(sys.A);
    if (!lu_nonsingular(luA)) {
      throw SingularShift(Complex(0.0, 0.0),
                          "extreme_shift_bounds: A numerically singular");
    }
    std::optional<Eigen::PartialPivLU<ComplexMatrix>> luE;
    if (!sys.identity_mass) luE.emplace(sys.E);

    auto apply_neg_m = [&](const ComplexVector& x) {  // -E^{-1} A x
      ComplexVector t = sys.A * x;
      if (luE) t = luE->solve(t);
      return ComplexVector(-t);
    };
    auto apply_inv = [&](const ComplexVector& x) {  // (-A)^{-1} E x
      ComplexVector t = sys.identity_mass ? x : ComplexVector(sys.E * x);
      return ComplexVector(-luA.solve(t));
    };
    const Complex hi = dominant_eig(apply_neg_m, n);
    const Complex lo_inv = dominant_eig(apply_inv, n);
    return {Complex(1.0, 0.0) / lo_inv, hi};
  } catch (const NonConvergence&) {
    if (n <= 2 * dense_threshold) return dense_extremes(sys);
    throw;
  }
}

GreedyRun arksm(const StateSpaceSystem& sys, int l_max, double grid_density,
                const GreedyOptions& opts) {
  if (l_max < 2) throw ConfigError("arksm: l_max must be >= 2");
  const int per_edge = int(std::ceil(grid_density));
  if (per_edge < 1) throw ConfigError("arksm: grid_density must be >= 1");

  GreedyRun run;
  run.algorithm = Algorithm::arksm;
  auto [s_min, s_max] = extreme_shift_bounds(sys);

  std::optional<TransferCache> cache;
  if (opts.error_grid) cache.emplace(sys, *opts.error_grid);

  ComplexMatrix V(sys.n(), 0);
  auto append_shift = [&](Complex s) {
    ComplexVector v = solve_shifted(sys.A, sys.E, s, sys.b);
    V = orthonormalize_append(V, v, kRankTol);
    run.s_shifts.push_back(s);
    ++run.solve_count;
  };
  append_shift(s_min);
  if (std::abs(s_min - s_max) >
      kExcludeRtol * std::max(std::abs(s_min), std::abs(s_max))) {
    append_shift(s_max);
  } else {
    run.log.push_back("seed: coincident extreme shifts, single seed " +
                      g17(s_min));
  }

  while (true) {
    ShiftSet ss;
    ss.right_shifts = run.s_shifts;
    ReducedModel rm = project(sys, ProjectionBasis{V, std::nullopt, true}, ss);
    if (opts.keep_models) run.models.push_back(rm);
    if (cache) run.error_history.push_back(cache->max_error(rm));
    if (int(run.s_shifts.size()) >= l_max) break;

    std::vector<Complex> pts;
    pts.reserve(rm.ritz.size() + 2);
    for (const Complex& lam : rm.ritz) {
      pts.push_back(-lam);
      if ((-lam).real() < 0.0) run.mirrored_ritz_left_halfplane = true;
    }
    pts.push_back(s_min);
    pts.push_back(s_max);
    const HullBoundary hull = complex_convex_hull(pts);
    const std::vector<Complex> cand = boundary_samples(hull, per_edge);

    std::vector<Complex> excl = run.s_shifts;
    excl.insert(excl.end(), rm.ritz.begin(), rm.ritz.end());
    std::vector<std::size_t> adm;
    std::vector<Complex> adm_pts;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (excluded_near(cand[i], excl)) continue;
      adm.push_back(i);
      adm_pts.push_back(cand[i]);
    }
    const std::vector<double> est = error_estimate_grid(rm, adm_pts, 1);

    bool accepted = false;
    bool dependent = false;
    for (std::size_t pos : ranked_by_value(est)) {
      const Complex s_new = adm_pts[pos];
      try {
        append_shift(s_new);
        run.log.push_back("order " + std::to_string(run.s_shifts.size()) +
                          ": s=" + g17(s_new) + " surrogate=" + g17(est[pos]));
        accepted = true;
        break;
      } catch (const SingularShift&) {
        run.log.push_back("skipped singular candidate " + g17(s_new));
      } catch (const RankDeficient&) {
        dependent = true;
        run.log.push_back("skipped dependent candidate " + g17(s_new));
      }
    }
    if (!accepted) {
      // Every remaining direction lies in the current span, so the basis
      // is saturated and the run stops at the achieved order.
      if (dependent) {
        run.log.push_back("saturated at order " +
                          std::to_string(run.s_shifts.size()));
        break;
      }
      throw DeadlockNoCandidate("arksm: no admissible boundary candidate");
    }
  }
  run.iterations = int(run.s_shifts.size());
  return run;
}

GreedyRun two_sided_greedy(const StateSpaceSystem& sys, double alpha,
                           double beta, int k, int l_max, int option,
                           const GreedyOptions& opts) {
  if (l_max < 1) throw ConfigError("two_sided_greedy: l_max must be >= 1");
  if (option < 1 || option > 3) {
    throw ConfigError("two_sided_greedy: option must be 1, 2, or 3");
  }
  const SampleGrid grid = make_grid(alpha, beta, k);

  GreedyRun run;
  run.algorithm = option == 1   ? Algorithm::two_sided_o1
                  : option == 2 ? Algorithm::two_sided_o2
                                : Algorithm::two_sided_o3;
  auto [s_min, s_max] = extreme_shift_bounds(sys);
  (void)s_min;

  std::optional<TransferCache> cache;
  if (opts.error_grid) cache.emplace(sys, *opts.error_grid);

  const ComplexMatrix Ah = sys.A.adjoint();
  const ComplexMatrix Eh = sys.identity_mass ? sys.E : sys.E.adjoint();

  ComplexMatrix V(sys.n(), 0);
  ComplexMatrix W(sys.n(), 0);
  auto append_pair = [&](Complex s, Complex t) {
    ComplexVector v = solve_shifted(sys.A, sys.E, s, sys.b);
    ComplexVector w = solve_shifted(Ah, Eh, std::conj(t), sys.c);
    ComplexMatrix Vn = orthonormalize_append(V, v, kRankTol);
    ComplexMatrix Wn = orthonormalize_append(W, w, kRankTol);
    V = std::move(Vn);
    W = std::move(Wn);
    run.s_shifts.push_back(s);
    run.t_shifts.push_back(t);
    run.solve_count += 2;
  };

  const Complex s1(0.0, std::abs(s_max) / 10.0);
  append_pair(s1, std::conj(s1));

  while (true) {
    ShiftSet ss;
    ss.right_shifts = run.s_shifts;
    ss.left_shifts = run.t_shifts;
    ReducedModel rm = project(sys, ProjectionBasis{V, W, true}, ss);
    if (opts.keep_models) run.models.push_back(rm);
    if (cache) run.error_history.push_back(cache->max_error(rm));
    if (int(run.s_shifts.size()) >= l_max) break;

    std::vector<Complex> excl = run.s_shifts;
    excl.insert(excl.end(), run.t_shifts.begin(), run.t_shifts.end());
    excl.insert(excl.end(), rm.ritz.begin(), rm.ritz.end());
    std::vector<Complex> adm_pts;
    for (const Complex& z : grid.points) {
      if (!excluded_near(z, excl)) adm_pts.push_back(z);
    }
    const std::vector<double> est = error_estimate_grid(rm, adm_pts, option);

    bool accepted = false;
    bool dependent = false;
    for (std::size_t pos : ranked_by_value(est)) {
      const Complex s_new = adm_pts[pos];
      try {
        append_pair(s_new, std::conj(s_new));
        run.log.push_back("order " + std::to_string(run.s_shifts.size()) +
                          ": s=" + g17(s_new) + " surrogate=" + g17(est[pos]));
        accepted = true;
        break;
      } catch (const SingularShift&) {
        run.log.push_back("skipped singular candidate " + g17(s_new));
      } catch (const RankDeficient&) {
        dependent = true;
        run.log.push_back("skipped dependent candidate " + g17(s_new));
      }
    }
    if (!accepted) {
      // Span saturation on either side ends the run at the achieved order.
      if (dependent) {
        run.log.push_back("saturated at order " +
                          std::to_string(run.s_shifts.size()));
        break;
      }
      throw DeadlockNoCandidate("two_sided_greedy: every grid point excluded");
    }
  }
  run.iterations = int(run.s_shifts.size());
  return run;
}

ErrorCurve hinf_sweep(const StateSpaceSystem& sys, const ReducedModel& rm,
                      const SampleGrid& grid) {
  return error_direct(sys, rm, grid);
}

GreedyRun irka_baseline(const StateSpaceSystem& sys,
                        std::vector<Complex> initial_shifts, int max_iter,
                        double tol, const GreedyOptions& opts) {
  if (initial_shifts.empty()) {
    throw ConfigError("irka_baseline: empty initial shift set");
  }
  for (const Complex& s : initial_shifts) {
    // Closure within rounding, so a converged shift set restarts cleanly.
    const double ctol = 1e-12 * std::max(1.0, std::abs(s));
    if (std::abs(s.imag()) <= ctol) continue;
    const bool paired =
        std::any_of(initial_shifts.begin(), initial_shifts.end(),
                    [&](const Complex& t) {
                      return std::abs(t - std::conj(s)) <= ctol;
                    });
    if (!paired) {
      throw ConfigError(
          "irka_baseline: initial shifts not closed under conjugation");
    }
  }

  GreedyRun run;
  run.algorithm = Algorithm::irka;

  std::optional<TransferCache> cache;
  if (opts.error_grid) cache.emplace(sys, *opts.error_grid);

  std::vector<Complex> S = std::move(initial_shifts);
  std::sort(S.begin(), S.end(), mag_less);

  for (int it = 1; it <= max_iter; ++it) {
    const int p = int(S.size());
    BasisHalf vb, wb;
    bool retried = false;
    while (true) {
      try {
        vb = rational_basis(sys, S, 0, Side::right);
        wb = rational_basis(sys, S, 0, Side::left);
        break;
      } catch (const SingularShift& e) {
        if (retried) throw;
        retried = true;
        auto hit = std::find(S.begin(), S.end(), e.shift);
        if (hit == S.end()) throw;
        *hit *= 1.0 + 1e-8;
        run.log.push_back("it " + std::to_string(it) +
                          ": singular shift perturbed to " + g17(*hit));
      }
    }
    // A saturated span drops the working order to the achieved rank; the
    // iteration continues on the shift prefix backing the kept columns.
    const Index r = std::min(vb.Q.cols(), wb.Q.cols());
    if (int(r) < p) {
      S.resize(std::size_t(r));
      run.log.push_back("it " + std::to_string(it) + ": order dropped to " +
                        std::to_string(r));
    }
    ShiftSet ss;
    ss.right_shifts = S;
    ss.left_shifts = S;
    ReducedModel rm =
        project(sys,
                ProjectionBasis{ComplexMatrix(vb.Q.leftCols(r)),
                                ComplexMatrix(wb.Q.leftCols(r)), true},
                ss);
    run.solve_count += 2 * p;
    run.iterations = it;

    std::vector<Complex> S_new;
    S_new.reserve(rm.ritz.size());
    for (const Complex& lam : rm.ritz) {
      Complex s = -std::conj(lam);
      if (s.real() <= 0.0) {
        s = Complex(std::abs(s.real()), s.imag());
        run.unstable_shift_reflected = true;
      }
      S_new.push_back(s);
    }
    std::sort(S_new.begin(), S_new.end(), mag_less);

    const bool comparable = S_new.size() == S.size();
    double move2 = 0.0, norm2 = 0.0;
    if (comparable) {
      for (std::size_t j = 0; j < S.size(); ++j) {
        move2 += std::norm(S_new[j] - S[j]);
        norm2 += std::norm(S_new[j]);
      }
      run.log.push_back("it " + std::to_string(it) + ": shift move " +
                        g17(std::sqrt(move2)));
    }
    if (opts.keep_models) run.models.assign(1, rm);
    if (cache) run.error_history.push_back(cache->max_error(rm));

    S = S_new;
    if (comparable && std::sqrt(move2) < tol * std::sqrt(norm2)) {
      run.converged = true;
      break;
    }
  }
  run.s_shifts = S;
  run.t_shifts = S;
  return run;
}

}  // namespace rkmor
