#include "rkmor/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "rkmor/numkernel.hpp"

namespace rkmor {

namespace {

// Residual-norm fraction below which a new direction counts as dependent.
constexpr double kRankTol = 1e-12;

bool has_repeats(const std::vector<Complex>& shifts) {
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    for (std::size_t j = i + 1; j < shifts.size(); ++j) {
      if (shifts[i] == shifts[j]) return true;
    }
  }
  return false;
}

// Applies E^{-1} (or E^{-H}) once the LU of E is in hand.
struct MassSolver {
  explicit MassSolver(const StateSpaceSystem& sys) : identity(sys.identity_mass) {
    if (!identity) lu.compute(sys.E);
  }
  ComplexVector solve(const ComplexVector& x) const {
    return identity ? x : ComplexVector(lu.solve(x));
  }
  ComplexVector solve_adjoint(const ComplexVector& x) const {
    return identity ? x : ComplexVector(lu.adjoint().solve(x));
  }
  bool identity;
  Eigen::PartialPivLU<ComplexMatrix> lu;
};

}  // namespace

BasisHalf rational_basis(const StateSpaceSystem& sys,
                         const std::vector<Complex>& shifts, int m_std,
                         Side side) {
  if (m_std < 0) throw DimensionMismatch("rational_basis: m_std negative");
  const Index n = sys.n();
  BasisHalf out;
  out.requested = int(shifts.size()) + m_std;
  out.Q = ComplexMatrix(n, 0);

  const bool left = (side == Side::left);
  ComplexMatrix Ah, Eh;
  if (left) {
    Ah = sys.A.adjoint();
    Eh = sys.E.adjoint();
  }
  const ComplexMatrix& As = left ? Ah : sys.A;
  const ComplexMatrix& Es = left ? Eh : sys.E;
  const ComplexVector& start = left ? sys.c : sys.b;
  auto shift_of = [&](std::size_t j) {
    return left ? std::conj(shifts[j]) : shifts[j];
  };
  MassSolver mass(sys);
  auto mass_solve = [&](const ComplexVector& x) {
    return left ? mass.solve_adjoint(x) : mass.solve(x);
  };

  auto append = [&](const ComplexVector& v) -> bool {
    try {
      out.Q = orthonormalize_append(out.Q, v, kRankTol);
      return true;
    } catch (const RankDeficient&) {
      return false;
    }
  };

  // Rational part.  Distinct shifts admit the single-solve vectors
  // (A - s_j E)^{-1} b; repeated shifts need the full product chain
  // prod_j (E^{-1}A - s_j)^{-1} applied to E^{-1} b.
  bool truncated = false;
  if (has_repeats(shifts)) {
    ComplexVector u;
    for (std::size_t j = 0; j < shifts.size() && !truncated; ++j) {
      const ComplexVector rhs = (j == 0) ? start : ComplexVector(Es * u);
      u = solve_shifted(As, Es, shift_of(j), rhs);
      if (!append(u)) truncated = true;
    }
  } else {
    for (std::size_t j = 0; j < shifts.size() && !truncated; ++j) {
      if (!append(solve_shifted(As, Es, shift_of(j), start))) truncated = true;
    }
  }

  // Standard Krylov part from E^{-1} b (left: (A E^{-1})^H from E^{-H} c).
  if (!truncated && m_std > 0) {
    ComplexVector kv = mass_solve(start);
    for (int i = 0; i < m_std && !truncated; ++i) {
      if (i > 0) kv = mass_solve(ComplexVector(As * kv));
      if (!append(kv)) truncated = true;
    }
  }
  return out;
}

LanczosFactorization lanczos_biorth(const StateSpaceSystem& sys,
                                    const ComplexVector& v1,
                                    const ComplexVector& w1, int steps,
                                    double breakdown_tol) {
  const Index n = sys.n();
  if (v1.size() != n || w1.size() != n) {
    throw DimensionMismatch("lanczos_biorth: start vector length mismatch");
  }
  if (steps < 1 || steps > n) {
    throw DimensionMismatch("lanczos_biorth: steps out of range");
  }
  MassSolver mass(sys);
  auto apply_op = [&](const ComplexVector& x) {  // M x = E^{-1} A x
    return mass.solve(ComplexVector(sys.A * x));
  };
  auto apply_op_adj = [&](const ComplexVector& x) {  // M^H x = A^H E^{-H} x
    return ComplexVector(sys.A.adjoint() * mass.solve_adjoint(x));
  };

  LanczosFactorization f;
  f.steps = steps;
  f.m0 = w1.dot(v1);
  const double nv = v1.norm();
  const double nw = w1.norm();
  if (std::abs(f.m0) < breakdown_tol * nv * nw || f.m0 == Complex(0.0, 0.0)) {
    throw Breakdown(1, "lanczos_biorth: w1^H v1 numerically zero");
  }

  f.Vhat.resize(n, steps);
  f.What.resize(n, steps);
  f.T = ComplexMatrix::Zero(steps, steps);
  f.Vhat.col(0) = v1 / nv;
  f.What.col(0) = w1 / std::conj(f.m0 / nv);

  ComplexVector r, s;
  for (int j = 0; j < steps; ++j) {
    const ComplexVector Mv = apply_op(f.Vhat.col(j));
    const Complex alpha = f.What.col(j).dot(Mv);
    f.T(j, j) = alpha;
    r = Mv - alpha * f.Vhat.col(j);
    if (j > 0) r -= f.T(j - 1, j) * f.Vhat.col(j - 1);
    s = apply_op_adj(f.What.col(j)) - std::conj(alpha) * f.What.col(j);
    if (j > 0) s -= std::conj(f.T(j, j - 1)) * f.What.col(j - 1);

    const Complex delta = s.dot(r);
    const bool vanished =
        std::abs(delta) < breakdown_tol * r.norm() * s.norm() ||
        delta == Complex(0.0, 0.0);
    const Complex gamma = std::sqrt(std::abs(delta));
    const Complex beta =
        (gamma == Complex(0.0, 0.0)) ? Complex(0.0, 0.0) : delta / gamma;

    if (j + 1 < steps) {
      if (vanished) {
        throw Breakdown(j + 2, "lanczos_biorth: recurrence broke down");
      }
      f.T(j + 1, j) = gamma;
      f.T(j, j + 1) = beta;
      f.Vhat.col(j + 1) = r / gamma;
      f.What.col(j + 1) = s / std::conj(beta);
    } else {
      f.gamma_next = gamma;
      f.beta_next = beta;
      if (gamma != Complex(0.0, 0.0)) {
        f.next_v = r / gamma;
        f.next_w = s / std::conj(beta);
      } else {
        f.next_v = ComplexVector::Zero(n);
        f.next_w = ComplexVector::Zero(n);
      }
    }
  }
  return f;
}

ReducedModel project(const StateSpaceSystem& sys, const ProjectionBasis& basis,
                     ShiftSet shifts) {
  const ComplexMatrix& V = basis.V;
  const ComplexMatrix& W = basis.W ? *basis.W : basis.V;
  if (V.rows() != sys.n() || W.rows() != sys.n() || V.cols() != W.cols()) {
    throw DimensionMismatch("project: basis shape mismatch");
  }
  ReducedModel rm;
  rm.Ar = W.adjoint() * sys.A * V;
  rm.Er = W.adjoint() * sys.E * V;
  rm.br = W.adjoint() * sys.b;
  rm.cr = V.adjoint() * sys.c;
  rm.order = int(V.cols());
  rm.shifts = std::move(shifts);
  rm.V = V;
  if (basis.W) rm.W = W;
  try {
    rm.ritz = generalized_eig(rm.Ar, rm.Er);
  } catch (const SingularMass&) {
    throw SingularReducedMass("project: W^H E V numerically singular");
  }
  std::sort(rm.ritz.begin(), rm.ritz.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return rm;
}

ReducedModel build_reduced_model(const StateSpaceSystem& sys,
                                 const ShiftSet& shifts) {
  if (shifts.right_order() != shifts.left_order()) {
    throw DimensionMismatch(
        "build_reduced_model: right and left orders differ");
  }
  BasisHalf vb = rational_basis(sys, shifts.right_shifts,
                                shifts.right_infinity_count, Side::right);
  BasisHalf wb = rational_basis(sys, shifts.left_shifts,
                                shifts.left_infinity_count, Side::left);
  const Index l = std::min(vb.Q.cols(), wb.Q.cols());
  ProjectionBasis basis;
  basis.V = vb.Q.leftCols(l);
  basis.W = ComplexMatrix(wb.Q.leftCols(l));
  return project(sys, basis, shifts);
}

ReducedModel build_one_sided_model(const StateSpaceSystem& sys,
                                   const ShiftSet& shifts) {
  BasisHalf vb = rational_basis(sys, shifts.right_shifts,
                                shifts.right_infinity_count, Side::right);
  ProjectionBasis basis;
  basis.V = vb.Q;
  return project(sys, basis, shifts);
}

}  // namespace rkmor
