#include "rkmor/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rkmor {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Relative distance below which z counts as hitting a pencil eigenvalue.
constexpr double kSingularRtol = 1e-12;

void require_square_pair(const ComplexMatrix& A, const ComplexMatrix& E,
                         const char* where) {
  if (A.rows() != A.cols() || E.rows() != E.cols() || A.rows() != E.rows()) {
    std::ostringstream os;
    os << where << ": incompatible shapes " << A.rows() << "x" << A.cols()
       << " and " << E.rows() << "x" << E.cols();
    throw DimensionMismatch(os.str());
  }
}

}  // namespace

bool lu_nonsingular(const Eigen::PartialPivLU<ComplexMatrix>& lu) {
  const auto d = lu.matrixLU().diagonal();
  if (d.size() == 0) return true;
  double dmax = 0.0;
  double dmin = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < d.size(); ++i) {
    const double a = std::abs(d(i));
    dmax = std::max(dmax, a);
    dmin = std::min(dmin, a);
  }
  if (!(dmin > kEps * dmax)) return false;
  return lu.rcond() >= kEps;
}

ComplexVector solve_shifted(const ComplexMatrix& A, const ComplexMatrix& E,
                            Complex sigma, const ComplexVector& rhs) {
  require_square_pair(A, E, "solve_shifted");
  if (rhs.size() != A.rows()) {
    throw DimensionMismatch("solve_shifted: rhs length does not match pencil");
  }
  ComplexMatrix S = A - sigma * E;
  Eigen::PartialPivLU<ComplexMatrix> lu(S);
  if (!lu_nonsingular(lu)) {
    std::ostringstream os;
    os << "solve_shifted: pencil A - sigma*E numerically singular at sigma = ("
       << sigma.real() << ", " << sigma.imag() << ")";
    throw SingularShift(sigma, os.str());
  }
  return lu.solve(rhs);
}

std::vector<Complex> generalized_eig(const ComplexMatrix& M,
                                     const ComplexMatrix& N) {
  require_square_pair(M, N, "generalized_eig");
  const Index n = M.rows();
  if (n == 0) return {};
  Eigen::PartialPivLU<ComplexMatrix> lu(N);
  if (!lu_nonsingular(lu)) {
    throw SingularMass("generalized_eig: N numerically singular");
  }
  ComplexMatrix X = lu.solve(M);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(X, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error("generalized_eig: eigenvalue iteration failed");
  }
  const auto& vals = es.eigenvalues();
  return std::vector<Complex>(vals.data(), vals.data() + n);
}

ComplexMatrix orthonormalize_append(const ComplexMatrix& V,
                                    const ComplexVector& v, double tol) {
  if (V.cols() > 0 && V.rows() != v.size()) {
    throw DimensionMismatch("orthonormalize_append: length mismatch");
  }
  const double vnorm = v.norm();
  ComplexVector w = v;
  // Two passes of modified Gram-Schmidt; the second pass removes the
  // components reintroduced by rounding in the first.
  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = 0; j < V.cols(); ++j) {
      w -= V.col(j) * V.col(j).dot(w);
    }
  }
  const double res = w.norm();
  if (!(res > tol * vnorm) || res == 0.0) {
    std::ostringstream os;
    os << "orthonormalize_append: residual norm " << res
       << " below tolerance " << tol * vnorm;
    throw RankDeficient(os.str(), res);
  }
  ComplexMatrix out(v.size(), V.cols() + 1);
  out.leftCols(V.cols()) = V;
  out.col(V.cols()) = w / res;
  return out;
}

HullBoundary complex_convex_hull(const std::vector<Complex>& points) {
  if (points.empty()) {
    throw DimensionMismatch("complex_convex_hull: empty point set");
  }
  double scale = 0.0;
  for (const Complex& p : points) scale = std::max(scale, std::abs(p));
  const double tol = kSingularRtol * std::max(scale, 1e-300);

  std::vector<Complex> pts = points;
  std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<Complex> uniq;
  for (const Complex& p : pts) {
    if (uniq.empty() || std::abs(p - uniq.back()) > tol) uniq.push_back(p);
  }

  if (uniq.size() == 1) return HullBoundary{{uniq[0]}, HullKind::point};

  auto cross = [](Complex o, Complex a, Complex b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
  };
  const double area_tol = tol * scale;

  auto build_chain = [&](auto first, auto last) {
    std::vector<Complex> chain;
    for (auto it = first; it != last; ++it) {
      while (chain.size() >= 2 &&
             cross(chain[chain.size() - 2], chain.back(), *it) <= area_tol) {
        chain.pop_back();
      }
      chain.push_back(*it);
    }
    return chain;
  };
  std::vector<Complex> lower = build_chain(uniq.begin(), uniq.end());
  std::vector<Complex> upper = build_chain(uniq.rbegin(), uniq.rend());

  std::vector<Complex> hull(lower.begin(), lower.end() - 1);
  hull.insert(hull.end(), upper.begin(), upper.end() - 1);

  if (hull.size() <= 2) {
    // Collinear input: the two extreme points, boundary = the segment.
    return HullBoundary{{uniq.front(), uniq.back()}, HullKind::segment};
  }
  return HullBoundary{std::move(hull), HullKind::polygon};
}

ResolventSolver::ResolventSolver(const ComplexMatrix& A,
                                 const ComplexMatrix& E) {
  require_square_pair(A, E, "ResolventSolver");
  identity_mass_ = E.isIdentity(1e-14);
  ComplexMatrix M;
  if (identity_mass_) {
    M = A;
  } else {
    luE_.compute(E);
    if (!lu_nonsingular(luE_)) {
      throw SingularMass("ResolventSolver: mass matrix numerically singular");
    }
    M = luE_.solve(A);
  }
  Eigen::ComplexSchur<ComplexMatrix> schur(M, /*computeU=*/true);
  if (schur.info() != Eigen::Success) {
    throw Error("ResolventSolver: Schur iteration failed");
  }
  U_ = schur.matrixU();
  T_ = schur.matrixT();
  diag_scale_ =
      T_.rows() > 0 ? T_.diagonal().cwiseAbs().maxCoeff() : 0.0;
}

std::optional<ComplexVector> ResolventSolver::solve(
    Complex z, const ComplexVector& rhs) const {
  const Index n = T_.rows();
  if (rhs.size() != n) {
    throw DimensionMismatch("ResolventSolver::solve: rhs length mismatch");
  }
  const double sep_scale = std::max(std::abs(z), diag_scale_);
  for (Index i = 0; i < n; ++i) {
    if (std::abs(z - T_(i, i)) <= kSingularRtol * sep_scale) {
      return std::nullopt;
    }
  }
  // (z*E - A)^{-1} = U (z*I - T)^{-1} U^H E^{-1}
  ComplexVector y = U_.adjoint() * (identity_mass_ ? rhs : luE_.solve(rhs));
  for (Index i = n - 1; i >= 0; --i) {
    Complex s = y(i);
    for (Index j = i + 1; j < n; ++j) s += T_(i, j) * y(j);
    y(i) = s / (z - T_(i, i));
  }
  return U_ * y;
}

std::vector<std::optional<ComplexVector>> reduced_resolve_batch(
    const ComplexMatrix& Ar, const ComplexMatrix& Er, const ComplexVector& rhs,
    const std::vector<Complex>& zs) {
  ResolventSolver solver(Ar, Er);
  std::vector<std::optional<ComplexVector>> out;
  out.reserve(zs.size());
  for (const Complex& z : zs) out.push_back(solver.solve(z, rhs));
  return out;
}

}  // namespace rkmor
