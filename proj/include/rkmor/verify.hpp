#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rkmor/greedy.hpp"
#include "rkmor/krylov.hpp"
#include "rkmor/model.hpp"
#include "rkmor/types.hpp"

namespace rkmor {

struct VerifyOptions {
  std::vector<Index> sizes = {20, 40, 100};
  int seed_count = 10;  // seeds 1..seed_count
  // Deliberate fault injection: flips the sign of the two-sided formula so
  // the central suite must fail; exercises the harness itself.
  bool mutate_g_two_sign = false;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;
  std::string detail;
};

/// Deterministic battery building blocks, shared with the acceptance tests.
StateSpaceSystem battery_system(Index n, std::uint32_t seed, bool descriptor);

/// Mixed finite/infinite two-sided interpolation data: k_b, k_c in [1, l]
/// drawn from the seed, right-half-plane shifts, orders at infinity filling
/// up to l on both sides.
ShiftSet battery_shifts(std::uint32_t seed, int l);

/// Right-only data of order 2l: the union of both shift lists plus the
/// combined orders at infinity (the equal-budget one-sided counterpart).
ShiftSet combined_one_sided_shifts(const ShiftSet& two_sided);

int battery_order(std::uint32_t seed);  // l in [4, 8]

/// Worst |e_formula - e_direct| / (1 + |h| + |hr|) over the cached grid.
double central_worst_ratio(const TransferCache& cache,
                           const StateSpaceSystem& sys, const ReducedModel& rm,
                           bool flip_formula_sign = false);

/// Worst |h - hr| / (1 + |h|) over the finite shifts of the model.
double interpolation_worst_ratio(const StateSpaceSystem& sys,
                                 const ReducedModel& rm);

SuiteResult suite_central_equivalence(const VerifyOptions& opts,
                                      std::ostream& out);
SuiteResult suite_interpolation_zeros(const VerifyOptions& opts,
                                      std::ostream& out);
SuiteResult suite_quadrature_exactness(const VerifyOptions& opts,
                                       std::ostream& out);
SuiteResult suite_divided_differences(const VerifyOptions& opts,
                                      std::ostream& out);

std::vector<SuiteResult> verify_all(const VerifyOptions& opts,
                                    std::ostream& out);
bool all_passed(const std::vector<SuiteResult>& suites);

}  // namespace rkmor
