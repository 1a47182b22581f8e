#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rkmor/krylov.hpp"
#include "rkmor/model.hpp"
#include "rkmor/numkernel.hpp"
#include "rkmor/remainder.hpp"
#include "rkmor/types.hpp"

namespace rkmor {

enum class Algorithm { arksm, two_sided_o1, two_sided_o2, two_sided_o3, irka };

const char* algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(const std::string& name);

/// Transfer samples over a fixed grid, shared across reduced models of the
/// same system: one condensation of the full pencil, then one
/// back-substitution per point.  solver stays usable for further per-point
/// work against the same pencil.
struct TransferCache {
  SampleGrid grid;
  std::vector<Complex> h;
  std::vector<char> valid;
  ResolventSolver solver;

  TransferCache(const StateSpaceSystem& sys, SampleGrid grid);

  /// max |h - hr| over points where both transfer functions evaluate.
  double max_error(const ReducedModel& rm) const;
};

struct GreedyOptions {
  bool keep_models = true;
  /// When set, error_history records max |h - hr| over this grid after each
  /// accepted order (each iteration for the fixed-order baseline).
  std::optional<SampleGrid> error_grid;
};

struct GreedyRun {
  Algorithm algorithm = Algorithm::arksm;
  std::vector<Complex> s_shifts;  // accepted right shifts, in order
  std::vector<Complex> t_shifts;  // left partners (empty for arksm)
  std::vector<ReducedModel> models;  // per-order snapshots; last = final
  std::vector<double> error_history;
  long solve_count = 0;  // committed large shifted solves
  int iterations = 0;    // greedy: final order; baseline: sweeps performed
  bool converged = false;
  bool unstable_shift_reflected = false;    // baseline safeguard triggered
  bool mirrored_ritz_left_halfplane = false;  // hull got a mirrored unstable value
  std::vector<std::string> log;
};

/// Smallest- and largest-magnitude eigenvalues of the pencil (-A, E).
/// Dense eigenvalues up to dense_threshold; power/inverse iteration with an
/// all-ones start above, falling back to dense (when n permits) on
/// NonConvergence.
std::pair<Complex, Complex> extreme_shift_bounds(const StateSpaceSystem& sys,
                                                 Index dense_threshold = 2000);

/// Adaptive one-sided selection: seeds with the extreme shifts, then
/// repeatedly samples the hull boundary of the mirrored Ritz values
/// (plus the seeds), ceil(grid_density) points per edge, and accepts the
/// sample maximizing |phi(z)/Lambda(z)|.  One solve per accepted shift.
GreedyRun arksm(const StateSpaceSystem& sys, int l_max,
                double grid_density = 50.0, const GreedyOptions& opts = {});

/// Two-sided selection over the fixed candidate grid make_grid(alpha, beta,
/// k): each round accepts s = argmax of the chosen error surrogate
/// (option 1, 2, or 3), pairs it with t = conj(s), and extends both bases.
/// Two solves per accepted pair.
GreedyRun two_sided_greedy(const StateSpaceSystem& sys, double alpha,
                           double beta, int k, int l_max, int option,
                           const GreedyOptions& opts = {});

/// Max-error sweep of a reduced model over the grid (pole hits excluded).
ErrorCurve hinf_sweep(const StateSpaceSystem& sys, const ReducedModel& rm,
                      const SampleGrid& grid);

/// Fixed-point shift iteration baseline: both bases from the same shift set,
/// next shifts = -conj(Ritz values), sorted; stops when the sorted shift
/// vector moves by less than tol in relative 2-norm.  Shifts crossing into
/// the closed left half-plane are reflected back (flagged).  initial_shifts
/// must be closed under conjugation.
GreedyRun irka_baseline(const StateSpaceSystem& sys,
                        std::vector<Complex> initial_shifts,
                        int max_iter = 100, double tol = 1e-6,
                        const GreedyOptions& opts = {});

}  // namespace rkmor
