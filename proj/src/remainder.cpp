#include "rkmor/remainder.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rkmor/numkernel.hpp"
#include "rkmor/random.hpp"

namespace rkmor {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPoleRtol = 1e-12;

bool near_any(Complex z, const std::vector<Complex>& set, double rtol) {
  for (const Complex& p : set) {
    if (std::abs(z - p) <= rtol * std::max(std::abs(z), std::abs(p))) {
      return true;
    }
  }
  return false;
}

// Factor-by-factor application of rational functions of M = E^{-1}A.
// E^{-1}A is never formed; every factor costs one multiply plus one solve.
struct OpApplier {
  explicit OpApplier(const StateSpaceSystem& sys, bool want_adjoint)
      : sys(sys), id(sys.identity_mass) {
    if (!id) luE.compute(sys.E);
    if (want_adjoint) {
      Ah = sys.A.adjoint();
      if (!id) Eh = sys.E.adjoint();
    }
  }

  // (M - lam) u = E^{-1} (A - lam E) u
  ComplexVector num(const ComplexVector& u, Complex lam) const {
    ComplexVector t = sys.A * u;
    t -= id ? ComplexVector(lam * u) : ComplexVector(lam * (sys.E * u));
    return id ? t : ComplexVector(luE.solve(t));
  }

  // (M - s)^{-1} u = (A - s E)^{-1} E u
  ComplexVector den(const ComplexVector& u, Complex s) const {
    return solve_shifted(sys.A, sys.E, s,
                         id ? u : ComplexVector(sys.E * u));
  }

  // (M^H - conj(lam)) x = (A - lam E)^H E^{-H} x
  ComplexVector num_adj(const ComplexVector& x, Complex lam) const {
    ComplexVector y = id ? x : ComplexVector(luE.adjoint().solve(x));
    ComplexVector t = sys.A.adjoint() * y;
    if (id) {
      t -= std::conj(lam) * y;
    } else {
      t -= std::conj(lam) * (Eh * y);
    }
    return t;
  }

  // (M^H - conj(t))^{-1} x = E^H (A - t E)^{-H} x
  ComplexVector den_adj(const ComplexVector& x, Complex t) const {
    ComplexVector w = solve_shifted(Ah, id ? idmat() : Eh, std::conj(t), x);
    return id ? w : ComplexVector(Eh * w);
  }

  ComplexMatrix idmat() const {
    return ComplexMatrix::Identity(sys.n(), sys.n());
  }

  const StateSpaceSystem& sys;
  bool id;
  Eigen::PartialPivLU<ComplexMatrix> luE;
  ComplexMatrix Ah, Eh;
};

// g(M) u with g = prod_i (lam - ritz_i) / prod_j (lam - sh_j), interleaved to
// keep intermediate magnitudes balanced.  |sh| <= |ritz|; missing denominator
// factors (orders matched at infinity) leave plain numerator factors.
ComplexVector apply_g(const OpApplier& op, const std::vector<Complex>& ritz,
                      const std::vector<Complex>& sh, ComplexVector u) {
  for (std::size_t i = 0; i < ritz.size(); ++i) {
    u = op.num(u, ritz[i]);
    if (i < sh.size()) u = op.den(u, sh[i]);
  }
  return u;
}

// g(M)^H x, same interleaving.
ComplexVector apply_g_adjoint(const OpApplier& op,
                              const std::vector<Complex>& ritz,
                              const std::vector<Complex>& sh, ComplexVector x) {
  for (std::size_t i = 0; i < ritz.size(); ++i) {
    x = op.num_adj(x, ritz[i]);
    if (i < sh.size()) x = op.den_adj(x, sh[i]);
  }
  return x;
}

// 1/g(z) = prod_j (z - sh_j) / prod_i (z - ritz_i), interleaved.
Complex ratio_inv_g(Complex z, const std::vector<Complex>& ritz,
                    const std::vector<Complex>& sh) {
  Complex r(1.0, 0.0);
  for (std::size_t i = 0; i < ritz.size(); ++i) {
    if (i < sh.size()) r *= z - sh[i];
    r /= z - ritz[i];
  }
  return r;
}

void require_formula_data(const ReducedModel& rm, FormulaMode mode) {
  const int l = rm.order;
  if (int(rm.ritz.size()) != l) {
    throw DimensionMismatch("error formula: Ritz data does not match order");
  }
  if (rm.shifts.right_order() != l) {
    throw DimensionMismatch(
        "error formula: right shift data does not match order");
  }
  if (mode == FormulaMode::two_sided) {
    if (!rm.two_sided()) {
      throw DimensionMismatch("error formula: model is not two-sided");
    }
    if (rm.shifts.left_order() != l) {
      throw DimensionMismatch(
          "error formula: left shift data does not match order");
    }
  } else if (rm.two_sided()) {
    throw DimensionMismatch("error formula: one-sided mode on two-sided model");
  }
}

}  // namespace

Complex transfer_eval(const StateSpaceSystem& sys, Complex z) {
  // (z*E - A)^{-1} b = -(A - z*E)^{-1} b
  return -sys.c.dot(solve_shifted(sys.A, sys.E, z, sys.b));
}

Complex reduced_transfer_eval(const ReducedModel& rm, Complex z) {
  auto res = reduced_resolve_batch(rm.Ar, rm.Er, rm.br, {z});
  if (!res[0]) {
    throw SingularShift(z, "reduced_transfer_eval: z*Er - Ar singular");
  }
  return rm.cr.dot(*res[0]);
}

FormulaEvaluator::FormulaEvaluator(const StateSpaceSystem& sys,
                                   const ReducedModel& rm, FormulaMode mode)
    : sys_(sys), mode_(mode), ritz_(rm.ritz) {
  require_formula_data(rm, mode);
  phi_.roots = rm.shifts.right_shifts;
  psi_.roots = rm.shifts.left_shifts;
  OpApplier op(sys, /*want_adjoint=*/true);
  if (mode == FormulaMode::two_sided) {
    ComplexVector u = op.id ? sys.b : ComplexVector(op.luE.solve(sys.b));
    p_ = apply_g(op, ritz_, phi_.roots, std::move(u));   // g_b(M) E^{-1} b
    q_ = apply_g_adjoint(op, ritz_, psi_.roots, sys.c);  // g_c(M)^H c
  } else {
    p_ = sys.b;
    q_ = apply_g_adjoint(op, ritz_, phi_.roots, sys.c);  // G(M)^H c
  }
}

Complex FormulaEvaluator::eval(Complex z) const {
  if (near_any(z, ritz_, kPoleRtol)) {
    throw PoleAtZ(z, "error formula: z coincides with a Ritz value");
  }
  if (mode_ == FormulaMode::two_sided) {
    // (z*I - M)^{-1} p = -(A - z*E)^{-1} E p
    ComplexVector Ep = sys_.identity_mass ? p_ : ComplexVector(sys_.E * p_);
    ComplexVector x = solve_shifted(sys_.A, sys_.E, z, Ep);
    const Complex bilinear = -q_.dot(x);
    return ratio_inv_g(z, ritz_, phi_.roots) *
           ratio_inv_g(z, ritz_, psi_.roots) * bilinear;
  }
  // (z*E - A)^{-1} b = -(A - z*E)^{-1} b
  ComplexVector x = solve_shifted(sys_.A, sys_.E, z, p_);
  const Complex bilinear = -q_.dot(x);
  return ratio_inv_g(z, ritz_, phi_.roots) * bilinear;
}

Complex FormulaEvaluator::eval_via(const ResolventSolver& rs, Complex z) const {
  if (near_any(z, ritz_, kPoleRtol)) {
    throw PoleAtZ(z, "error formula: z coincides with a Ritz value");
  }
  ComplexVector rhs =
      (mode_ == FormulaMode::two_sided && !sys_.identity_mass)
          ? ComplexVector(sys_.E * p_)
          : p_;
  auto x = rs.solve(z, rhs);
  if (!x) {
    throw SingularShift(z, "error formula: z*E - A numerically singular");
  }
  const Complex bilinear = q_.dot(*x);
  if (mode_ == FormulaMode::two_sided) {
    return ratio_inv_g(z, ritz_, phi_.roots) *
           ratio_inv_g(z, ritz_, psi_.roots) * bilinear;
  }
  return ratio_inv_g(z, ritz_, phi_.roots) * bilinear;
}

Complex error_formula(const StateSpaceSystem& sys, const ReducedModel& rm,
                      Complex z, FormulaMode mode) {
  return FormulaEvaluator(sys, rm, mode).eval(z);
}

ErrorCurve error_curve(const StateSpaceSystem& sys, const ReducedModel& rm,
                       const SampleGrid& grid, bool with_formula) {
  const std::size_t m = grid.points.size();
  const Complex nan(std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN());
  ErrorCurve out;
  out.grid = grid;
  out.h.assign(m, nan);
  out.h_tilde.assign(m, nan);
  out.e_direct.assign(m, nan);
  if (with_formula) out.e_formula.assign(m, nan);
  out.valid.assign(m, false);

  ResolventSolver reduced(rm.Ar, rm.Er);
  std::optional<FormulaEvaluator> fe;
  if (with_formula) {
    fe.emplace(sys, rm,
               rm.two_sided() ? FormulaMode::two_sided
                              : FormulaMode::one_sided);
  }

  for (std::size_t i = 0; i < m; ++i) {
    const Complex z = grid.points[i];
    bool ok = true;
    try {
      out.h[i] = transfer_eval(sys, z);
    } catch (const SingularShift&) {
      ok = false;
    }
    if (ok) {
      auto xr = reduced.solve(z, rm.br);
      if (xr) {
        out.h_tilde[i] = rm.cr.dot(*xr);
        out.e_direct[i] = out.h[i] - out.h_tilde[i];
      } else {
        ok = false;
      }
    }
    if (ok && with_formula) {
      try {
        out.e_formula[i] = fe->eval(z);
      } catch (const PoleAtZ&) {
        ok = false;
      } catch (const SingularShift&) {
        ok = false;
      }
    }
    out.valid[i] = ok;
    if (ok) {
      out.max_abs_error = std::max(out.max_abs_error, std::abs(out.e_direct[i]));
    }
  }
  return out;
}

ErrorCurve error_direct(const StateSpaceSystem& sys, const ReducedModel& rm,
                        const SampleGrid& grid) {
  return error_curve(sys, rm, grid, /*with_formula=*/false);
}

ResidualPair residual_pair(const StateSpaceSystem& sys, const ReducedModel& rm,
                           Complex z) {
  ComplexMatrix Sr = z * rm.Er - rm.Ar;
  Eigen::PartialPivLU<ComplexMatrix> lu(Sr);
  if (!lu_nonsingular(lu)) {
    throw SingularShift(z, "residual_pair: z*Er - Ar numerically singular");
  }
  const ComplexMatrix& W = rm.W ? *rm.W : rm.V;
  ComplexVector y_b = lu.solve(rm.br);
  ComplexVector y_c = lu.adjoint().solve(rm.cr);
  ComplexVector x_b = rm.V * y_b;
  ComplexVector x_c = W * y_c;
  ResidualPair rp;
  rp.z = z;
  ComplexMatrix S = z * sys.E - sys.A;
  rp.r_b = sys.b - S * x_b;
  rp.r_c = sys.c - S.adjoint() * x_c;
  return rp;
}

ResidualPair residual_pair_closed(const StateSpaceSystem& sys,
                                  const ReducedModel& rm, Complex z) {
  require_formula_data(rm, rm.two_sided() ? FormulaMode::two_sided
                                          : FormulaMode::one_sided);
  if (near_any(z, rm.ritz, kPoleRtol)) {
    throw PoleAtZ(z, "residual_pair_closed: z coincides with a Ritz value");
  }
  OpApplier op(sys, /*want_adjoint=*/true);
  ComplexVector u = op.id ? sys.b : ComplexVector(op.luE.solve(sys.b));
  ComplexVector p = apply_g(op, rm.ritz, rm.shifts.right_shifts, std::move(u));
  const std::vector<Complex>& tsh =
      rm.two_sided() ? rm.shifts.left_shifts : rm.shifts.right_shifts;
  ComplexVector q = apply_g_adjoint(op, rm.ritz, tsh, sys.c);

  ResidualPair rp;
  rp.z = z;
  const Complex inv_gb = ratio_inv_g(z, rm.ritz, rm.shifts.right_shifts);
  const Complex inv_gc = ratio_inv_g(z, rm.ritz, tsh);
  rp.r_b = (op.id ? p : ComplexVector(sys.E * p)) * inv_gb;
  rp.r_c = q * std::conj(inv_gc);
  return rp;
}

Complex divided_difference(const std::function<Complex(Complex)>& f,
                           const std::vector<Complex>& nodes) {
  const std::size_t m = nodes.size();
  if (m == 0) throw DimensionMismatch("divided_difference: no nodes");
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (nodes[i] == nodes[j]) {
        throw RepeatedNode("divided_difference: coincident nodes");
      }
    }
  }
  std::vector<Complex> d(m);
  for (std::size_t i = 0; i < m; ++i) d[i] = f(nodes[i]);
  for (std::size_t k = 1; k < m; ++k) {
    for (std::size_t i = m - 1; i >= k; --i) {
      d[i] = (d[i] - d[i - 1]) / (nodes[i] - nodes[i - k]);
    }
  }
  return d[m - 1];
}

std::pair<ComplexVector, ComplexVector> weighted_lanczos_starts(
    const StateSpaceSystem& sys, const ShiftSet& shifts) {
  OpApplier op(sys, /*want_adjoint=*/true);
  // v1 = phi(M)^{-1} E^{-1} b: successive (M - s_j)^{-1}.
  ComplexVector v = op.id ? sys.b : ComplexVector(op.luE.solve(sys.b));
  for (const Complex& s : shifts.right_shifts) v = op.den(v, s);
  // w1 = psi(M)^{-H} c: successive (M^H - conj(t_j))^{-1}.
  ComplexVector w = sys.c;
  for (const Complex& t : shifts.left_shifts) w = op.den_adj(w, t);
  return {std::move(v), std::move(w)};
}

QuadratureReport quadrature_exactness_check(const StateSpaceSystem& sys,
                                            const LanczosFactorization& lf,
                                            const ShiftSet& shifts, int degree,
                                            int trials, std::uint32_t seed) {
  if (degree < 0 || trials < 1) {
    throw DimensionMismatch("quadrature_exactness_check: bad degree/trials");
  }
  const int l = lf.steps;
  const ComplexMatrix& T = lf.T;
  auto [v1, w1] = weighted_lanczos_starts(sys, shifts);
  OpApplier op(sys, /*want_adjoint=*/false);

  // Scale-balanced coefficients: a_k ~ zeta_k / theta^k with theta ~ ||T||_2
  // keeps the Horner terms comparable, so exactness is measured, not
  // conditioning.
  const double t1 = T.cwiseAbs().colwise().sum().maxCoeff();
  const double tinf = T.cwiseAbs().rowwise().sum().maxCoeff();
  const double theta = std::max(1.0, std::sqrt(t1 * tinf));

  auto route_full = [&](const std::vector<Complex>& coef) {
    // w1^H P(M) v1 by Horner on vectors.
    ComplexVector u = coef.back() * v1;
    for (int k = int(coef.size()) - 2; k >= 0; --k) {
      u = op.num(u, Complex(0.0, 0.0));  // u <- M u
      u += coef[std::size_t(k)] * v1;
    }
    return w1.dot(u);
  };
  auto route_reduced = [&](const std::vector<Complex>& coef) {
    ComplexVector y = ComplexVector::Zero(l);
    y(0) = coef.back();
    for (int k = int(coef.size()) - 2; k >= 0; --k) {
      y = T * y;
      y(0) += coef[std::size_t(k)];
    }
    return lf.m0 * y(0);
  };
  auto rel_gap = [](Complex a, Complex b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
  };

  RandomStream rng(seed);
  auto draw = [&](int deg) {
    std::vector<Complex> coef(std::size_t(deg) + 1);
    double w = 1.0;
    for (int k = 0; k <= deg; ++k) {
      coef[std::size_t(k)] = rng.complex_normal() * w;
      w /= theta;
    }
    return coef;
  };

  QuadratureReport rep;
  rep.order = l;
  rep.degree = degree;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    auto coef = draw(degree);
    rep.max_rel_discrepancy = std::max(
        rep.max_rel_discrepancy, rel_gap(route_full(coef), route_reduced(coef)));
  }
  {
    // Negative control P = Lambda^2, Lambda the Ritz polynomial of T.
    // Cayley-Hamilton zeroes the reduced route, so the gap is the pure
    // degree-2l quadrature error.  Runs where both routes sit at the
    // rounding floor of the factor recursion (l = n) clamp to zero.
    const std::vector<Complex> ritz =
        generalized_eig(T, ComplexMatrix::Identity(l, l));
    ComplexVector u = v1;
    double umax = u.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (const Complex& lam : ritz) {
        u = op.num(u, Complex(0.0, 0.0)) - lam * u;
        umax = std::max(umax, u.norm());
      }
    }
    const Complex full = w1.dot(u);
    ComplexVector y = ComplexVector::Zero(l);
    y(0) = Complex(1.0, 0.0);
    double ymax = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Complex& lam : ritz) {
        y = T * y - lam * y;
        ymax = std::max(ymax, y.norm());
      }
    }
    const Complex reduced = lf.m0 * y(0);
    const double guard = 64.0 * double(2 * l + 1) * kEps;
    const double ffloor = guard * w1.norm() * umax;
    const double rfloor = guard * std::abs(lf.m0) * std::max(ymax, 1.0);
    if (std::abs(full) <= ffloor && std::abs(reduced) <= rfloor) {
      rep.negative_control_discrepancy = 0.0;
    } else {
      rep.negative_control_discrepancy =
          std::abs(full - reduced) /
          std::max({std::abs(full), std::abs(reduced), 1e-300});
    }
  }
  return rep;
}

double error_estimate(const ReducedModel& rm, Complex z, int option) {
  if (option < 1 || option > 3) {
    throw DimensionMismatch("error_estimate: option must be 1, 2, or 3");
  }
  if (near_any(z, rm.ritz, kPoleRtol)) {
    throw PoleAtZ(z, "error_estimate: z coincides with a Ritz value");
  }
  RationalNodePoly lambda{rm.ritz};
  RationalNodePoly phi{rm.shifts.right_shifts};
  double log_inv_g;
  if (rm.two_sided()) {
    RationalNodePoly psi{rm.shifts.left_shifts};
    log_inv_g = phi.log_abs(z) + psi.log_abs(z) - 2.0 * lambda.log_abs(z);
  } else {
    log_inv_g = phi.log_abs(z) - lambda.log_abs(z);
  }
  const double base = std::exp(log_inv_g);
  if (option == 1) return base;
  auto res = reduced_resolve_batch(rm.Ar, rm.Er, rm.br, {z});
  if (!res[0]) {
    throw PoleAtZ(z, "error_estimate: z*Er - Ar singular");
  }
  if (option == 2) return base * res[0]->norm();
  return base * std::abs(rm.cr.dot(*res[0]));
}

std::vector<double> error_estimate_grid(const ReducedModel& rm,
                                        const std::vector<Complex>& zs,
                                        int option) {
  if (option < 1 || option > 3) {
    throw DimensionMismatch("error_estimate_grid: option must be 1, 2, or 3");
  }
  const double inf = std::numeric_limits<double>::infinity();
  RationalNodePoly lambda{rm.ritz};
  RationalNodePoly phi{rm.shifts.right_shifts};
  RationalNodePoly psi{rm.shifts.left_shifts};
  const bool two = rm.two_sided();

  std::optional<ResolventSolver> rs;
  if (option > 1) rs.emplace(rm.Ar, rm.Er);

  std::vector<double> out(zs.size(), inf);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const Complex z = zs[i];
    if (near_any(z, rm.ritz, kPoleRtol)) continue;
    const double log_inv_g =
        two ? phi.log_abs(z) + psi.log_abs(z) - 2.0 * lambda.log_abs(z)
            : phi.log_abs(z) - lambda.log_abs(z);
    const double base = std::exp(log_inv_g);
    if (option == 1) {
      out[i] = base;
      continue;
    }
    auto x = rs->solve(z, rm.br);
    if (!x) continue;
    out[i] = option == 2 ? base * x->norm() : base * std::abs(rm.cr.dot(*x));
  }
  return out;
}

}  // namespace rkmor
