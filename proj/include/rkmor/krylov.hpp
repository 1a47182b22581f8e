#pragma once

#include <optional>
#include <vector>

#include "rkmor/model.hpp"
#include "rkmor/types.hpp"

namespace rkmor {

/// Interpolation data of a combined rational/standard Krylov reduction.
/// The right space matches h at the finite shifts s_j and the first
/// right_infinity_count moments at infinity; the left side likewise with t_j.
struct ShiftSet {
  std::vector<Complex> right_shifts;  // s_j, finite
  std::vector<Complex> left_shifts;   // t_j, finite
  int right_infinity_count = 0;       // m_b
  int left_infinity_count = 0;        // m_c

  int right_order() const {
    return int(right_shifts.size()) + right_infinity_count;
  }
  int left_order() const {
    return int(left_shifts.size()) + left_infinity_count;
  }
};

enum class Side { right, left };

/// One orthonormal half of a projection pair.  requested counts the vectors
/// asked for; Q.cols() < requested means rank deficiency truncated growth.
struct BasisHalf {
  ComplexMatrix Q;
  int requested = 0;
  int achieved() const { return int(Q.cols()); }
};

/// Orthonormal basis of the combined Krylov space
///   right: CK(E^{-1}A, E^{-1}b, shifts, m_std)
///   left:  CK((A E^{-1})^H, E^{-H}c, shifts, m_std)
/// Finite-shift vectors come first, then the standard Krylov vectors.
/// Repeated shifts switch the rational part to the full product chain.
BasisHalf rational_basis(const StateSpaceSystem& sys,
                         const std::vector<Complex>& shifts, int m_std,
                         Side side);

struct ProjectionBasis {
  ComplexMatrix V;
  std::optional<ComplexMatrix> W;  // absent: one-sided, W = V
  bool orthonormal = true;
};

/// Three-term nonsymmetric Lanczos factorization of M = E^{-1}A:
///   M Vhat_l = Vhat_l T + gamma_next * vnext e_l^T,   What^H Vhat = I,
///   T tridiagonal with alpha on the diagonal, beta above, gamma below.
/// m0 records the raw moment w1^H v1 before biorthogonal scaling.
struct LanczosFactorization {
  ComplexMatrix Vhat;
  ComplexMatrix What;
  ComplexMatrix T;
  ComplexVector next_v;
  ComplexVector next_w;
  Complex gamma_next{0.0, 0.0};
  Complex beta_next{0.0, 0.0};
  Complex m0{0.0, 0.0};
  int steps = 0;
};

/// Throws Breakdown when |w^H v| < breakdown_tol * ||w|| * ||v|| at any step.
LanczosFactorization lanczos_biorth(const StateSpaceSystem& sys,
                                    const ComplexVector& v1,
                                    const ComplexVector& w1, int steps,
                                    double breakdown_tol = 1e-12);

/// Petrov-Galerkin reduced model  hr(z) = cr^H (z*Er - Ar)^{-1} br  with
///   Ar = W^H A V,  Er = W^H E V,  br = W^H b,  cr = V^H c
/// and Ritz values eig(Er^{-1} Ar), sorted by (real, imag).
struct ReducedModel {
  ComplexMatrix Ar, Er;
  ComplexVector br, cr;
  std::vector<Complex> ritz;
  ShiftSet shifts;
  ComplexMatrix V;
  std::optional<ComplexMatrix> W;
  int order = 0;

  bool two_sided() const { return W.has_value(); }
};

/// Throws SingularReducedMass when W^H E V is numerically singular.
ReducedModel project(const StateSpaceSystem& sys, const ProjectionBasis& basis,
                     ShiftSet shifts = {});

/// Convenience: build both halves from a ShiftSet and project.
/// Requires right_order() == left_order() (square oblique projection).
ReducedModel build_reduced_model(const StateSpaceSystem& sys,
                                 const ShiftSet& shifts);

/// One-sided variant from the right data of the ShiftSet only.
ReducedModel build_one_sided_model(const StateSpaceSystem& sys,
                                   const ShiftSet& shifts);

}  // namespace rkmor
