#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "rkmor/krylov.hpp"
#include "rkmor/model.hpp"
#include "rkmor/numkernel.hpp"
#include "rkmor/types.hpp"

namespace rkmor {

/// Monic polynomial kept as its root list; evaluation never forms
/// coefficients.
struct RationalNodePoly {
  std::vector<Complex> roots;

  Complex eval(Complex z) const {
    Complex p(1.0, 0.0);
    for (const Complex& r : roots) p *= z - r;
    return p;
  }
  double log_abs(Complex z) const {
    double s = 0.0;
    for (const Complex& r : roots) s += std::log(std::abs(z - r));
    return s;
  }
};

/// h(z) = c^H (z*E - A)^{-1} b.  Throws SingularShift at poles.
Complex transfer_eval(const StateSpaceSystem& sys, Complex z);

/// hr(z) = cr^H (z*Er - Ar)^{-1} br.  Throws SingularShift at reduced poles.
Complex reduced_transfer_eval(const ReducedModel& rm, Complex z);

struct ErrorCurve {
  SampleGrid grid;
  std::vector<Complex> h;
  std::vector<Complex> h_tilde;
  std::vector<Complex> e_direct;
  std::vector<Complex> e_formula;  // empty when not requested
  std::vector<bool> valid;         // false: pole hit, excluded from max
  double max_abs_error = 0.0;      // max |e_direct| over valid points
};

enum class FormulaMode { two_sided, one_sided };

/// Remainder formula for the reduction error, evaluated by chained solves
/// (E^{-1}A is never formed).  For a two-sided model of order l built from
/// shifts S (plus m_b orders at infinity) and T (plus m_c):
///
///   e(z) = 1/(g_b(z) g_c(z)) * c^H g_c(M) (z*I - M)^{-1} g_b(M) E^{-1} b,
///   g_b = Lambda/phi,  g_c = Lambda/psi,  M = E^{-1} A,
///
/// with Lambda the monic characteristic polynomial of Er^{-1} Ar (root list =
/// Ritz values), phi(z) = prod (z - s_j), psi(z) = prod (z - t_j).  Orders at
/// infinity shorten phi/psi, leaving plain Lambda factors.  The one-sided
/// variant uses the single function G = Lambda/phi of the order-d model:
///
///   h(z) - hr(z) = 1/G(z) * c^H G(M) (z*E - A)^{-1} b.
class FormulaEvaluator {
 public:
  FormulaEvaluator(const StateSpaceSystem& sys, const ReducedModel& rm,
                   FormulaMode mode);

  /// Throws PoleAtZ when z coincides with a Ritz value; SingularShift when
  /// z*E - A is singular.
  Complex eval(Complex z) const;

  /// Same value through a shared condensation of the full pencil (rs must be
  /// ResolventSolver(sys.A, sys.E)); one back-substitution per z instead of
  /// one factorization.
  Complex eval_via(const ResolventSolver& rs, Complex z) const;

 private:
  const StateSpaceSystem& sys_;
  FormulaMode mode_;
  std::vector<Complex> ritz_;
  RationalNodePoly phi_, psi_;
  ComplexVector p_;  // two-sided: g_b(M) E^{-1} b;  one-sided: b
  ComplexVector q_;  // two-sided: g_c(M)^H c;      one-sided: G(M)^H c
};

Complex error_formula(const StateSpaceSystem& sys, const ReducedModel& rm,
                      Complex z, FormulaMode mode);

/// h - hr over the grid; pole hits flagged invalid and excluded.
ErrorCurve error_direct(const StateSpaceSystem& sys, const ReducedModel& rm,
                        const SampleGrid& grid);

/// As error_direct, optionally filling e_formula as well (mode inferred from
/// the model's sidedness).
ErrorCurve error_curve(const StateSpaceSystem& sys, const ReducedModel& rm,
                       const SampleGrid& grid, bool with_formula);

/// Petrov-Galerkin residuals at z, in defining form:
///   r_b = b - (z*E - A) x_b,   r_c = c - (z*E - A)^H x_c,
/// x_b = V (z*Er - Ar)^{-1} br,  x_c = W (z*Er - Ar)^{-H} cr.
struct ResidualPair {
  ComplexVector r_b;
  ComplexVector r_c;
  Complex z;
};

ResidualPair residual_pair(const StateSpaceSystem& sys, const ReducedModel& rm,
                           Complex z);

/// Closed forms  r_b = E g_b(M) E^{-1} b / g_b(z),
///               r_c = [c^H g_c(M) / g_c(z)]^H  for the two-route check.
ResidualPair residual_pair_closed(const StateSpaceSystem& sys,
                                  const ReducedModel& rm, Complex z);

/// Newton divided difference f[nodes...] by the standard recursion.
/// Throws RepeatedNode on coincident nodes.
Complex divided_difference(const std::function<Complex(Complex)>& f,
                           const std::vector<Complex>& nodes);

/// Start vectors v1 = phi(M)^{-1} E^{-1} b and w1 = psi(M)^{-H} c for the
/// weighted Lanczos process.
std::pair<ComplexVector, ComplexVector> weighted_lanczos_starts(
    const StateSpaceSystem& sys, const ShiftSet& shifts);

/// Two-route check of Gauss-type exactness: for random polynomials P with
/// deg P = degree,
///   c^H psi(M)^{-1} P(M) phi(M)^{-1} E^{-1} b  vs  m0 * e1^T P(T) e1.
/// Coefficients are drawn scale-balanced against ||T||.  One degree-2l
/// polynomial serves as the negative control.
struct QuadratureReport {
  int order = 0;
  int degree = 0;
  int trials = 0;
  double max_rel_discrepancy = 0.0;
  double negative_control_discrepancy = 0.0;
};

QuadratureReport quadrature_exactness_check(const StateSpaceSystem& sys,
                                            const LanczosFactorization& lf,
                                            const ShiftSet& shifts, int degree,
                                            int trials,
                                            std::uint32_t seed = 1234);

/// Cheap upper-bound style error surrogates of the remark on estimates:
///   option 1:  1/|G(z)|
///   option 2:  1/|G(z)| * ||(z*Er - Ar)^{-1} br||
///   option 3:  1/|G(z)| * |cr^H (z*Er - Ar)^{-1} br|
/// evaluated in log magnitude.  z equal to a shift gives exactly 0;
/// z at a Ritz value throws PoleAtZ.
double error_estimate(const ReducedModel& rm, Complex z, int option);

/// Batch variant over many z; poles and singular reduced solves come back
/// as +infinity so that callers can exclude them.
std::vector<double> error_estimate_grid(const ReducedModel& rm,
                                        const std::vector<Complex>& zs,
                                        int option);

}  // namespace rkmor
