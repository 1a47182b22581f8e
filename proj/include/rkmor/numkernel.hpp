#pragma once

#include <optional>
#include <vector>

#include "rkmor/errors.hpp"
#include "rkmor/types.hpp"

namespace rkmor {

/// Numerical nonsingularity test for a computed factorization.  The pivot
/// ratio catches exact singularity that the condition estimator can miss,
/// the estimator catches gradual ill-conditioning the pivots can hide.
bool lu_nonsingular(const Eigen::PartialPivLU<ComplexMatrix>& lu);

/// Solve (A - sigma*E) x = rhs by partial-pivoted LU.
/// Throws SingularShift when the shifted pencil is numerically singular
/// (reciprocal condition estimate below machine epsilon).
ComplexVector solve_shifted(const ComplexMatrix& A, const ComplexMatrix& E,
                            Complex sigma, const ComplexVector& rhs);

/// Eigenvalues of N^{-1} M, unordered, with multiplicity.
/// Throws SingularMass when N is numerically singular.
std::vector<Complex> generalized_eig(const ComplexMatrix& M,
                                     const ComplexMatrix& N);

/// Append one vector to an orthonormal basis by two-pass Gram-Schmidt.
/// Throws RankDeficient when the orthogonalized residual norm falls below
/// tol * ||v||.  V may have zero columns.
ComplexMatrix orthonormalize_append(const ComplexMatrix& V,
                                    const ComplexVector& v, double tol);

enum class HullKind { polygon, segment, point };

struct HullBoundary {
  std::vector<Complex> vertices;  // counterclockwise, subset of the inputs
  HullKind kind = HullKind::polygon;
};

/// Convex hull of points in the complex plane (Andrew monotone chain).
/// Collinear inputs collapse to the two extreme points (kind = segment);
/// coincident inputs collapse to one point (kind = point).
HullBoundary complex_convex_hull(const std::vector<Complex>& points);

/// Resolvent solver for a fixed pencil: one upfront triangularization of
/// E^{-1} A, then each (z*E - A)^{-1} rhs costs a triangular-type solve.
class ResolventSolver {
 public:
  ResolventSolver(const ComplexMatrix& A, const ComplexMatrix& E);

  /// (z*E - A)^{-1} rhs, or nullopt when z*E - A is numerically singular
  /// (z within relative distance ~1e-12 of a pencil eigenvalue).
  std::optional<ComplexVector> solve(Complex z, const ComplexVector& rhs) const;

  Index size() const { return T_.rows(); }

 private:
  ComplexMatrix U_;  // unitary:  E^{-1} A = U T U^H
  ComplexMatrix T_;  // upper triangular
  Eigen::PartialPivLU<ComplexMatrix> luE_;
  bool identity_mass_ = false;
  double diag_scale_ = 0.0;  // max |T_ii|
};

/// (z_k*Er - Ar)^{-1} rhs for every z_k, sharing one condensation of the
/// pencil.  Singular elements come back as nullopt, in input order.
std::vector<std::optional<ComplexVector>> reduced_resolve_batch(
    const ComplexMatrix& Ar, const ComplexMatrix& Er, const ComplexVector& rhs,
    const std::vector<Complex>& zs);

}  // namespace rkmor
