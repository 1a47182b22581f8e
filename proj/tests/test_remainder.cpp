#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "rkmor/errors.hpp"
#include "rkmor/krylov.hpp"
#include "rkmor/model.hpp"
#include "rkmor/numkernel.hpp"
#include "rkmor/random.hpp"
#include "rkmor/remainder.hpp"
#include "rkmor/types.hpp"

using namespace rkmor;

namespace {

Complex transfer_oracle(const StateSpaceSystem& sys, Complex z) {
  ComplexMatrix S = z * sys.E - sys.A;
  ComplexVector x = S.fullPivLu().solve(sys.b);
  return sys.c.dot(x);
}

Complex reduced_oracle(const ReducedModel& rm, Complex z) {
  ComplexMatrix S = z * rm.Er - rm.Ar;
  ComplexVector x = S.fullPivLu().solve(rm.br);
  return rm.cr.dot(x);
}

StateSpaceSystem scalar_system() {
  ComplexMatrix A(1, 1), E(1, 1);
  A(0, 0) = Complex(-2.0, 0.0);
  E(0, 0) = Complex(1.0, 0.0);
  ComplexVector b(1), c(1);
  b(0) = Complex(3.0, 0.0);
  c(0) = Complex(1.0, 0.0);
  return make_system(A, E, b, c);
}

ShiftSet two_sided_shifts_l4() {
  ShiftSet sh;
  sh.right_shifts = {Complex(1.0, 1.0), Complex(3.0, 0.0), Complex(5.0, -2.0),
                     Complex(8.0, 0.0)};
  sh.left_shifts = {Complex(1.0, -1.0), Complex(3.5, 0.0), Complex(5.0, 2.0),
                    Complex(7.0, 0.0)};
  return sh;
}

}  // namespace

TEST_CASE("transfer evaluation") {
  StateSpaceSystem sys = scalar_system();
  // h(0) = c^H (0 - A)^{-1} b = 3/2.
  CHECK(std::abs(transfer_eval(sys, Complex(0.0, 0.0)) - Complex(1.5, 0.0)) <=
        1e-14);

  StateSpaceSystem diag = gen_test_system(SystemKind::diagonal, 5, 1);
  for (Complex z : {Complex(0.0, 0.5), Complex(2.0, -1.0), Complex(0.0, 10.0)}) {
    Complex want(0.0, 0.0);
    for (int i = 1; i <= 5; ++i) want += 1.0 / (z + double(i));
    CHECK(std::abs(transfer_eval(diag, z) - want) <= 1e-12 * std::abs(want));
  }
  CHECK_THROWS_AS(transfer_eval(diag, Complex(-1.0, 0.0)), SingularShift);
}

TEST_CASE("reduced transfer evaluation") {
  StateSpaceSystem sys = gen_test_system(SystemKind::diagonal, 6, 1);
  ShiftSet sh;
  sh.right_shifts = {Complex(1.0, 0.0), Complex(4.0, 1.0)};
  ReducedModel rm = build_one_sided_model(sys, sh);

  for (Complex z : {Complex(0.0, 1.0), Complex(2.0, 0.0)}) {
    const Complex want = reduced_oracle(rm, z);
    CHECK(std::abs(reduced_transfer_eval(rm, z) - want) <=
          1e-10 * (1.0 + std::abs(want)));
  }
  // Er = V^H V = I here, so the Ritz values are poles of hr.
  CHECK_THROWS_AS(reduced_transfer_eval(rm, rm.ritz[0]), SingularShift);
}

TEST_CASE("direct error of an exact reduction vanishes") {
  StateSpaceSystem sys = gen_test_system(SystemKind::diagonal, 2, 1);
  ProjectionBasis basis;
  basis.V = ComplexMatrix::Identity(2, 2);
  ReducedModel rm = project(sys, basis);

  ErrorCurve curve = error_direct(sys, rm, make_grid(-1.0, 1.0, 10));
  for (std::size_t i = 0; i < curve.valid.size(); ++i) {
    if (!curve.valid[i]) continue;
    CHECK(std::abs(curve.e_direct[i]) <= 1e-8 * (1.0 + std::abs(curve.h[i])));
  }
  CHECK(curve.max_abs_error <= 1e-10);
}

TEST_CASE("direct error matches a hand-assembled rank-one projection") {
  StateSpaceSystem sys = gen_test_system(SystemKind::diagonal, 2, 1);
  // v = (A - E)^{-1} b normalized; the reduced model is scalar.
  ComplexVector v(2);
  v << Complex(-0.5, 0.0), Complex(-1.0 / 3.0, 0.0);
  v /= v.norm();
  const Complex ar = v.dot(ComplexMatrix(sys.A) * v);
  const Complex br = v.dot(sys.b);
  const Complex cr = v.dot(sys.c);

  ProjectionBasis basis;
  basis.V = v;
  ShiftSet sh;
  sh.right_shifts = {Complex(1.0, 0.0)};
  ReducedModel rm = project(sys, basis, sh);

  ErrorCurve curve = error_direct(sys, rm, make_grid(-1.0, 0.0, 4));
  for (std::size_t i = 0; i < curve.valid.size(); ++i) {
    REQUIRE(curve.valid[i]);
    const Complex z = curve.grid.points[i];
    const Complex hand = transfer_oracle(sys, z) - std::conj(cr) * br / (z - ar);
    CHECK(std::abs(curve.e_direct[i] - hand) <= 1e-12 * (1.0 + std::abs(hand)));
  }
  // The projected model interpolates h at the shift.
  const Complex h1 = transfer_oracle(sys, Complex(1.0, 0.0));
  const Complex hr1 = std::conj(cr) * br / (Complex(1.0, 0.0) - ar);
  CHECK(std::abs(h1 - hr1) <= 1e-12 * std::abs(h1));
}

TEST_CASE("two-sided formula reproduces the direct error") {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, 40, 3);
  ReducedModel rm = build_reduced_model(sys, two_sided_shifts_l4());
  ErrorCurve curve = error_curve(sys, rm, make_grid(-1.0, 2.0, 50), true);

  int valid = 0;
  for (std::size_t i = 0; i < curve.valid.size(); ++i) {
    if (!curve.valid[i]) continue;
    ++valid;
    CHECK(std::abs(curve.e_formula[i] - curve.e_direct[i]) <=
          1e-8 * (1.0 + std::abs(curve.h[i])));
  }
  CHECK(valid >= 95);
}

TEST_CASE("two-sided formula with descriptor mass and orders at infinity") {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, 30, 9);
  sys = with_mass_matrix(sys, gen_random_mass(30, 10), true);

  ShiftSet sh;
  sh.right_shifts = {Complex(2.0, 1.0)};
  sh.right_infinity_count = 2;
  sh.left_shifts = {Complex(2.0, -1.0)};
  sh.left_infinity_count = 2;
  ReducedModel rm = build_reduced_model(sys, sh);
  REQUIRE(rm.order == 3);

  ErrorCurve curve = error_curve(sys, rm, make_grid(-1.0, 2.0, 50), true);
  for (std::size_t i = 0; i < curve.valid.size(); ++i) {
    if (!curve.valid[i]) continue;
    CHECK(std::abs(curve.e_formula[i] - curve.e_direct[i]) <=
          1e-8 * (1.0 + std::abs(curve.h[i])));
  }
}

TEST_CASE("one-sided formula reproduces the direct error") {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, 30, 4);
  ShiftSet sh;
  sh.right_shifts = {Complex(1.0, 0.0), Complex(2.0, 2.0), Complex(4.0, 0.0)};
  sh.right_infinity_count = 3;
  ReducedModel rm = build_one_sided_model(sys, sh);
  REQUIRE(rm.order == 6);

  ErrorCurve curve = error_curve(sys, rm, make_grid(-1.0, 2.0, 50), true);
  for (std::size_t i = 0; i < curve.valid.size(); ++i) {
    if (!curve.valid[i]) continue;
    CHECK(std::abs(curve.e_formula[i] - curve.e_direct[i]) <=
          1e-8 * (1.0 + std::abs(curve.h[i])));
  }
}

TEST_CASE("formula value vanishes at interpolation points") {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, 25, 5);
  ShiftSet sh;
  sh.right_shifts = {Complex(1.0, 2.0), Complex(4.0, 0.0)};
  sh.left_shifts = {Complex(1.0, -2.0), Complex(5.0, 0.0)};
  ReducedModel rm = build_reduced_model(sys, sh);
  FormulaEvaluator fe(sys, rm, FormulaMode::two_sided);

  for (const Complex& s : sh.right_shifts) {
    CHECK(std::abs(fe.eval(s)) <= 1e-12);
  }
  for (const Complex& t : sh.left_shifts) {
    CHECK(std::abs(fe.eval(t)) <= 1e-12);
  }
  // Interpolation of h itself at both shift families.
  for (const Complex& s : sh.right_shifts) {
    const Complex h = transfer_oracle(sys, s);
    CHECK(std::abs(h - reduced_oracle(rm, s)) <= 1e-7 * (1.0 + std::abs(h)));
  }
  for (const Complex& t : sh.left_shifts) {
    const Complex h = transfer_oracle(sys, t);
    CHECK(std::abs(h - reduced_oracle(rm, t)) <= 1e-7 * (1.0 + std::abs(h)));
  }
}

TEST_CASE("formula vanishes identically for a full-order reduction") {
  StateSpaceSystem sys = gen_test_system(SystemKind::diagonal, 3, 1);
  ShiftSet sh;
  sh.right_shifts = {Complex(1.0, 0.0), Complex(2.0, 1.0), Complex(5.0, 0.0)};
  sh.left_shifts = {Complex(1.5, 0.0), Complex(2.0, -1.0), Complex(6.0, 0.0)};
  ReducedModel rm = build_reduced_model(sys, sh);
  REQUIRE(rm.order == 3);

  ErrorCurve curve = error_curve(sys, rm, make_grid(-1.0, 1.0, 10), true);
  for (std::size_t i = 0; i < curve.valid.size(); ++i) {
    if (!curve.valid[i]) continue;
    CHECK(std::abs(curve.e_formula[i]) <= 1e-8 * (1.0 + std::abs(curve.h[i])));
    CHECK(std::abs(curve.e_direct[i]) <= 1e-8 * (1.0 + std::abs(curve.h[i])));
  }
}

TEST_CASE("formula evaluator rejects mismatched modes and poles") {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, 12, 2);
  ShiftSet sh;
  sh.right_shifts = {Complex(1.0, 0.0), Complex(3.0, 1.0)};
  sh.left_shifts = {Complex(1.0, 0.0), Complex(3.0, -1.0)};
  ReducedModel two = build_reduced_model(sys, sh);
  ShiftSet rh;
  rh.right_shifts = sh.right_shifts;
  ReducedModel one = build_one_sided_model(sys, rh);

  CHECK_THROWS_AS(FormulaEvaluator(sys, two, FormulaMode::one_sided),
                  DimensionMismatch);
  CHECK_THROWS_AS(FormulaEvaluator(sys, one, FormulaMode::two_sided),
                  DimensionMismatch);

  FormulaEvaluator fe(sys, two, FormulaMode::two_sided);
  CHECK_THROWS_AS(fe.eval(two.ritz[0]), PoleAtZ);
}

TEST_CASE("shared-condensation evaluation matches the per-point path") {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, 20, 6);
  sys = with_mass_matrix(sys, gen_random_mass(20, 7), true);
  ShiftSet sh;
  sh.right_shifts = {Complex(1.0, 1.0), Complex(6.0, 0.0)};
  sh.left_shifts = {Complex(1.0, -1.0), Complex(7.0, 0.0)};
  ReducedModel rm = build_reduced_model(sys, sh);
  FormulaEvaluator fe(sys, rm, FormulaMode::two_sided);
  ResolventSolver rs(sys.A, sys.E);

  for (Complex z : {Complex(0.0, 0.3), Complex(0.0, -2.0), Complex(0.0, 40.0),
                    Complex(0.5, 5.0)}) {
    const Complex a = fe.eval(z);
    const Complex b = fe.eval_via(rs, z);
    CHECK(std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("petrov-galerkin residual identities") {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, 20, 8);
  ShiftSet sh;
  sh.right_shifts = {Complex(1.0, 2.0), Complex(3.0, 0.0), Complex(6.0, -1.0)};
  sh.left_shifts = {Complex(1.0, -2.0), Complex(4.0, 0.0), Complex(6.0, 1.0)};
  ReducedModel rm = build_reduced_model(sys, sh);

  const Complex z(0.0, 0.7);
  ResidualPair rp = residual_pair(sys, rm, z);
  CHECK((rm.W->adjoint() * rp.r_b).norm() <= 1e-8 * rp.r_b.norm());
  CHECK((rm.V.adjoint() * rp.r_c).norm() <= 1e-8 * rp.r_c.norm());

  ResidualPair rc = residual_pair_closed(sys, rm, z);
  CHECK((rp.r_b - rc.r_b).norm() <= 1e-7 * rp.r_b.norm());
  CHECK((rp.r_c - rc.r_c).norm() <= 1e-7 * rp.r_c.norm());

  // e(z) = r_c^H (z*E - A)^{-1} r_b.
  ComplexVector x = -solve_shifted(sys.A, sys.E, z, rp.r_b);
  const Complex via_residuals = rp.r_c.dot(x);
  const Complex h = transfer_oracle(sys, z);
  const Complex hr = reduced_oracle(rm, z);
  CHECK(std::abs(via_residuals - (h - hr)) <=
        1e-8 * (1.0 + std::abs(h) + std::abs(hr)));
}

TEST_CASE("divided differences of resolvent kernels") {
  auto f1 = [](Complex lam) { return 1.0 / (Complex(4.0, 0.0) - lam); };
  CHECK(std::abs(divided_difference(f1, {Complex(1.0, 0.0)}) -
                 Complex(1.0 / 3.0, 0.0)) <= 1e-14);

  auto f2 = [](Complex lam) { return 1.0 / (Complex(3.0, 0.0) - lam); };
  CHECK(std::abs(divided_difference(
                     f2, {Complex(1.0, 0.0), Complex(2.0, 0.0)}) -
                 Complex(0.5, 0.0)) <= 1e-14);

  auto f3 = [](Complex lam) { return lam / (Complex(3.0, 0.0) - lam); };
  CHECK(std::abs(divided_difference(
                     f3, {Complex(1.0, 0.0), Complex(2.0, 0.0)}) -
                 Complex(1.5, 0.0)) <= 1e-14);

  CHECK_THROWS_AS(
      divided_difference(f1, {Complex(1.0, 0.0), Complex(1.0, 0.0)}),
      RepeatedNode);
}

TEST_CASE("divided difference closed form and symmetry") {
  RandomStream rng(1313);
  for (int trial = 0; trial < 20; ++trial) {
    const Complex z0 = Complex(4.0, 0.0) + rng.complex_normal();
    auto f = [z0](Complex lam) { return 1.0 / (z0 - lam); };
    std::vector<Complex> nodes;
    const int m = rng.uniform_int(1, 5);
    for (int i = 0; i < m; ++i) nodes.push_back(0.8 * rng.complex_normal());

    // f[x_1..x_m] = 1 / prod_i (z0 - x_i) for the Cauchy kernel.
    Complex want(1.0, 0.0);
    for (const Complex& x : nodes) want /= z0 - x;
    const Complex got = divided_difference(f, nodes);
    CHECK(std::abs(got - want) <= 1e-9 * std::abs(want));

    std::vector<Complex> perm(nodes.rbegin(), nodes.rend());
    CHECK(std::abs(divided_difference(f, perm) - got) <=
          1e-9 * std::abs(got));
  }
}

TEST_CASE("weighted quadrature is exact below twice the step count") {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, 20, 12);
  ShiftSet sh;
  sh.right_shifts = {Complex(1.0, 1.0), Complex(5.0, 0.0)};
  sh.right_infinity_count = 3;
  sh.left_shifts = {Complex(1.0, -1.0), Complex(6.0, 0.0)};
  sh.left_infinity_count = 3;

  const int l = 5;
  auto [v1, w1] = weighted_lanczos_starts(sys, sh);
  LanczosFactorization lf = lanczos_biorth(sys, v1, w1, l);
  QuadratureReport rep = quadrature_exactness_check(sys, lf, sh, 2 * l - 1, 6, 99);
  CHECK(rep.order == l);
  CHECK(rep.degree == 2 * l - 1);
  CHECK(rep.max_rel_discrepancy <= 1e-7);
  CHECK(rep.negative_control_discrepancy > 1e-4);
}

TEST_CASE("full-space quadrature is exact at every degree") {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, 6, 13);
  ShiftSet sh;
  sh.right_shifts = {Complex(2.0, 0.0), Complex(3.0, 1.0)};
  sh.right_infinity_count = 4;
  sh.left_shifts = {Complex(2.5, 0.0), Complex(3.0, -1.0)};
  sh.left_infinity_count = 4;

  auto [v1, w1] = weighted_lanczos_starts(sys, sh);
  LanczosFactorization lf = lanczos_biorth(sys, v1, w1, 6);
  QuadratureReport rep = quadrature_exactness_check(sys, lf, sh, 11, 4, 17);
  CHECK(rep.max_rel_discrepancy <= 1e-7);
  // With steps = n nothing is left to miss: the control degree is exact too.
  CHECK(rep.negative_control_discrepancy <= 1e-7);
}

TEST_CASE("moment matching at infinity") {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, 12, 6);
  const int l = 3;
  ShiftSet sh;
  sh.right_infinity_count = l;
  sh.left_infinity_count = l;
  ReducedModel rm = build_reduced_model(sys, sh);
  REQUIRE(rm.order == l);

  // Full moments c^H M^k E^{-1} b against the reduced expansion at infinity.
  ComplexVector u = sys.b;  // E = I
  ComplexMatrix Mr = rm.Er.fullPivLu().solve(rm.Ar);
  ComplexVector ur = rm.Er.fullPivLu().solve(rm.br);
  for (int k = 0; k < 2 * l; ++k) {
    if (k > 0) {
      u = ComplexMatrix(sys.A) * u;
      ur = Mr * ur;
    }
    const Complex full = sys.c.dot(u);
    const Complex red = rm.cr.dot(ur);
    const double scale = sys.c.norm() * u.norm();
    CHECK(std::abs(full - red) <= 1e-7 * (1.0 + scale));
  }
}

TEST_CASE("error estimates from reduced data") {
  StateSpaceSystem sys = gen_test_system(SystemKind::random_stable, 15, 14);
  ShiftSet sh;
  sh.right_shifts = {Complex(1.0, 0.0), Complex(4.0, 2.0)};
  sh.left_shifts = {Complex(2.0, 0.0), Complex(4.0, -2.0)};
  ReducedModel rm = build_reduced_model(sys, sh);

  // At a shift the surrogate vanishes for every option.
  for (int option = 1; option <= 3; ++option) {
    CHECK(error_estimate(rm, sh.right_shifts[0], option) == 0.0);
  }
  CHECK_THROWS_AS(error_estimate(rm, rm.ritz[0], 1), PoleAtZ);
  CHECK_THROWS_AS(error_estimate(rm, Complex(0.0, 1.0), 4), DimensionMismatch);

  RationalNodePoly lambda{rm.ritz};
  RationalNodePoly phi{rm.shifts.right_shifts};
  RationalNodePoly psi{rm.shifts.left_shifts};
  for (Complex z : {Complex(0.0, 0.5), Complex(0.0, 3.0), Complex(0.0, -9.0)}) {
    const double abs_g = std::exp(2.0 * lambda.log_abs(z) - phi.log_abs(z) -
                                  psi.log_abs(z));
    const double e1 = error_estimate(rm, z, 1);
    CHECK(std::abs(e1 * abs_g - 1.0) <= 1e-10);

    ComplexMatrix S = z * rm.Er - rm.Ar;
    ComplexVector x = S.fullPivLu().solve(rm.br);
    const double e2 = error_estimate(rm, z, 2);
    CHECK(std::abs(e2 - e1 * x.norm()) <= 1e-10 * e2);

    // option 3 times |G(z)| recovers |hr(z)|.
    const double e3 = error_estimate(rm, z, 3);
    const double hr = std::abs(reduced_oracle(rm, z));
    CHECK(std::abs(e3 * abs_g - hr) <= 1e-10 * (1.0 + hr));
  }

  std::vector<Complex> zs = {Complex(0.0, 0.5), rm.ritz[0], Complex(0.0, 3.0)};
  std::vector<double> grid_vals = error_estimate_grid(rm, zs, 1);
  REQUIRE(grid_vals.size() == 3);
  CHECK(grid_vals[0] == error_estimate(rm, zs[0], 1));
  CHECK(std::isinf(grid_vals[1]));
  CHECK(grid_vals[2] == error_estimate(rm, zs[2], 1));
}
