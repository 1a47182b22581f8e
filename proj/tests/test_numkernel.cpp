#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "rkmor/errors.hpp"
#include "rkmor/numkernel.hpp"
#include "rkmor/random.hpp"
#include "rkmor/types.hpp"

using namespace rkmor;

namespace {

ComplexMatrix random_matrix(Index rows, Index cols, RandomStream& rng) {
  ComplexMatrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = rng.complex_normal();
  return M;
}

ComplexVector random_vector(Index n, RandomStream& rng) {
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.complex_normal();
  return v;
}

bool lex_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Roots of det(M - x*N): det sampled at n+1 points, coefficients recovered by
// a Vandermonde solve, roots read off the companion matrix.  Shares no code
// path with generalized_eig.
std::vector<Complex> pencil_roots_oracle(const ComplexMatrix& M,
                                         const ComplexMatrix& N) {
  const Index n = M.rows();
  ComplexMatrix vand(n + 1, n + 1);
  ComplexVector dets(n + 1);
  for (Index k = 0; k <= n; ++k) {
    const Complex x(0.7 * double(k) - 1.0, 0.3 * double(k) + 0.1);
    Complex p(1.0, 0.0);
    for (Index j = 0; j <= n; ++j) {
      vand(k, j) = p;
      p *= x;
    }
    dets(k) = ComplexMatrix(M - x * N).determinant();
  }
  ComplexVector coef = vand.fullPivLu().solve(dets);
  ComplexMatrix C = ComplexMatrix::Zero(n, n);
  for (Index i = 1; i < n; ++i) C(i, i - 1) = Complex(1.0, 0.0);
  for (Index i = 0; i < n; ++i) C(i, n - 1) = -coef(i) / coef(n);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(C, false);
  std::vector<Complex> roots(es.eigenvalues().data(),
                             es.eigenvalues().data() + n);
  std::sort(roots.begin(), roots.end(), lex_less);
  return roots;
}

// Hull membership by the counterclockwise half-plane test.
bool inside_polygon(const std::vector<Complex>& hull, Complex p, double tol) {
  const std::size_t m = hull.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Complex a = hull[i];
    const Complex b = hull[(i + 1) % m];
    const double cr = (b.real() - a.real()) * (p.imag() - a.imag()) -
                      (b.imag() - a.imag()) * (p.real() - a.real());
    if (cr < -tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("solve_shifted inverts the shifted pencil") {
  ComplexMatrix A(1, 1), E(1, 1);
  A(0, 0) = Complex(-2.0, 0.0);
  E(0, 0) = Complex(1.0, 0.0);
  ComplexVector rhs(1);
  rhs(0) = Complex(1.0, 0.0);

  ComplexVector x = solve_shifted(A, E, Complex(0.0, 0.0), rhs);
  CHECK(std::abs(x(0) - Complex(-0.5, 0.0)) < 1e-14);

  ComplexVector x0 = solve_shifted(A, E, Complex(3.0, 1.0), ComplexVector::Zero(1));
  CHECK(x0.norm() == 0.0);
}

TEST_CASE("solve_shifted residual bound on random pencils") {
  RandomStream rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 30;
    ComplexMatrix A = random_matrix(n, n, rng);
    ComplexMatrix E = ComplexMatrix::Identity(n, n) +
                      0.2 * random_matrix(n, n, rng);
    ComplexVector rhs = random_vector(n, rng);
    const Complex sigma = rng.complex_normal();

    ComplexVector x = solve_shifted(A, E, sigma, rhs);
    ComplexMatrix S = A - sigma * E;
    const double res = (S * x - rhs).norm();
    CHECK(res <= 1e-10 * (S.norm() * x.norm() + rhs.norm()));
  }
}

TEST_CASE("solve_shifted rejects eigenvalue shifts") {
  ComplexMatrix A = ComplexMatrix::Zero(2, 2);
  A(0, 0) = Complex(1.0, 0.0);
  A(1, 1) = Complex(2.0, 0.0);
  ComplexMatrix E = ComplexMatrix::Identity(2, 2);
  ComplexVector rhs = ComplexVector::Ones(2);
  CHECK_THROWS_AS(solve_shifted(A, E, Complex(1.0, 0.0), rhs), SingularShift);
}

TEST_CASE("generalized_eig on diagonal pairs") {
  ComplexMatrix M = ComplexMatrix::Zero(2, 2);
  M(0, 0) = Complex(1.0, 0.0);
  M(1, 1) = Complex(2.0, 0.0);
  ComplexMatrix N = ComplexMatrix::Identity(2, 2);

  std::vector<Complex> ev = generalized_eig(M, N);
  std::sort(ev.begin(), ev.end(), lex_less);
  REQUIRE(ev.size() == 2);
  CHECK(std::abs(ev[0] - Complex(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(ev[1] - Complex(2.0, 0.0)) < 1e-12);

  ev = generalized_eig(ComplexMatrix::Identity(3, 3),
                       2.0 * ComplexMatrix::Identity(3, 3));
  for (const Complex& v : ev) CHECK(std::abs(v - Complex(0.5, 0.0)) < 1e-12);
}

TEST_CASE("generalized_eig matches the characteristic-polynomial roots") {
  RandomStream rng(202);
  for (int trial = 0; trial < 4; ++trial) {
    const Index n = 5;
    ComplexMatrix M = random_matrix(n, n, rng);
    ComplexMatrix N = ComplexMatrix::Identity(n, n) +
                      0.3 * random_matrix(n, n, rng);

    std::vector<Complex> got = generalized_eig(M, N);
    std::sort(got.begin(), got.end(), lex_less);
    std::vector<Complex> want = pencil_roots_oracle(M, N);
    double scale = 1.0;
    for (const Complex& v : want) scale = std::max(scale, std::abs(v));
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(std::abs(got[i] - want[i]) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("generalized_eig eigenvalue sum equals trace") {
  RandomStream rng(303);
  for (Index n : {3, 7, 12}) {
    ComplexMatrix M = random_matrix(n, n, rng);
    ComplexMatrix N = ComplexMatrix::Identity(n, n) +
                      0.3 * random_matrix(n, n, rng);
    std::vector<Complex> ev = generalized_eig(M, N);
    Complex sum(0.0, 0.0);
    for (const Complex& v : ev) sum += v;
    const Complex tr = ComplexMatrix(N.partialPivLu().solve(M)).trace();
    CHECK(std::abs(sum - tr) <= 1e-8 * std::max(1.0, std::abs(tr)));
  }
}

TEST_CASE("generalized_eig rejects singular mass") {
  ComplexMatrix M = ComplexMatrix::Identity(3, 3);
  ComplexMatrix N = ComplexMatrix::Zero(3, 3);
  N(0, 0) = Complex(1.0, 0.0);
  N(1, 1) = Complex(1.0, 0.0);
  CHECK_THROWS_AS(generalized_eig(M, N), SingularMass);
}

TEST_CASE("orthonormalize_append normalizes the first column") {
  ComplexMatrix V(2, 0);
  ComplexVector v(2);
  v << Complex(3.0, 0.0), Complex(4.0, 0.0);
  ComplexMatrix out = orthonormalize_append(V, v, 1e-12);
  REQUIRE(out.cols() == 1);
  // Unit phase freedom: rotate so the first entry is real positive.
  const Complex phase = out(0, 0) / std::abs(out(0, 0));
  CHECK(std::abs(out(0, 0) / phase - Complex(0.6, 0.0)) < 1e-14);
  CHECK(std::abs(out(1, 0) / phase - Complex(0.8, 0.0)) < 1e-14);
}

TEST_CASE("orthonormalize_append rejects dependent vectors") {
  RandomStream rng(404);
  ComplexMatrix V(6, 0);
  for (int j = 0; j < 3; ++j) {
    V = orthonormalize_append(V, random_vector(6, rng), 1e-12);
  }
  CHECK_THROWS_AS(orthonormalize_append(V, ComplexVector(V.col(1)), 1e-12),
                  RankDeficient);
  ComplexVector mix = V.col(0) * Complex(0.3, 0.1) - V.col(2) * Complex(0.0, 2.0);
  CHECK_THROWS_AS(orthonormalize_append(V, mix, 1e-12), RankDeficient);
}

TEST_CASE("orthonormalize_append keeps bases orthonormal") {
  RandomStream rng(505);
  ComplexMatrix V(50, 0);
  for (int j = 0; j < 8; ++j) {
    V = orthonormalize_append(V, random_vector(50, rng), 1e-12);
  }
  ComplexMatrix G = V.adjoint() * V;
  CHECK((G - ComplexMatrix::Identity(8, 8)).norm() <= 1e-12);

  // Span is preserved step by step, so the 100-column build stays tight too.
  ComplexMatrix W(120, 0);
  for (int j = 0; j < 100; ++j) {
    W = orthonormalize_append(W, random_vector(120, rng), 1e-12);
  }
  ComplexMatrix GW = W.adjoint() * W;
  CHECK((GW - ComplexMatrix::Identity(100, 100)).norm() <= 1e-10);
}

TEST_CASE("convex hull of a triangle") {
  std::vector<Complex> pts = {Complex(0, 0), Complex(1, 0), Complex(0, 1)};
  HullBoundary hull = complex_convex_hull(pts);
  CHECK(hull.kind == HullKind::polygon);
  REQUIRE(hull.vertices.size() == 3);
  CHECK(hull.vertices[0] == Complex(0, 0));
  CHECK(hull.vertices[1] == Complex(1, 0));
  CHECK(hull.vertices[2] == Complex(0, 1));
}

TEST_CASE("convex hull collapses collinear input to a segment") {
  std::vector<Complex> pts = {Complex(2, 0), Complex(0, 0), Complex(3, 0),
                              Complex(1, 0)};
  HullBoundary hull = complex_convex_hull(pts);
  CHECK(hull.kind == HullKind::segment);
  REQUIRE(hull.vertices.size() == 2);
  CHECK(hull.vertices[0] == Complex(0, 0));
  CHECK(hull.vertices[1] == Complex(3, 0));

  HullBoundary single = complex_convex_hull({Complex(2, -1)});
  CHECK(single.kind == HullKind::point);
  REQUIRE(single.vertices.size() == 1);
  CHECK(single.vertices[0] == Complex(2, -1));
}

TEST_CASE("convex hull drops interior points of the unit square") {
  std::vector<Complex> pts = {Complex(0, 0), Complex(1, 0), Complex(0, 1),
                              Complex(1, 1), Complex(0.5, 0.5)};
  HullBoundary hull = complex_convex_hull(pts);
  CHECK(hull.kind == HullKind::polygon);
  REQUIRE(hull.vertices.size() == 4);
  CHECK(hull.vertices[0] == Complex(0, 0));
  CHECK(hull.vertices[1] == Complex(1, 0));
  CHECK(hull.vertices[2] == Complex(1, 1));
  CHECK(hull.vertices[3] == Complex(0, 1));
}

TEST_CASE("convex hull contains every input point") {
  RandomStream rng(606);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Complex> pts;
    const int m = rng.uniform_int(3, 40);
    for (int i = 0; i < m; ++i) pts.push_back(rng.complex_normal());
    HullBoundary hull = complex_convex_hull(pts);
    double scale = 0.0;
    for (const Complex& p : pts) scale = std::max(scale, std::abs(p));

    for (const Complex& v : hull.vertices) {
      const bool is_input =
          std::any_of(pts.begin(), pts.end(), [&](Complex p) {
            return std::abs(p - v) <= 1e-12 * scale;
          });
      CHECK(is_input);
    }
    if (hull.kind == HullKind::polygon) {
      REQUIRE(hull.vertices.size() >= 3);
      for (const Complex& p : pts) {
        CHECK(inside_polygon(hull.vertices, p, 1e-9 * scale * scale));
      }
    }
  }
}

TEST_CASE("resolvent solver matches direct solves and flags poles") {
  RandomStream rng(707);
  const Index n = 12;
  ComplexMatrix A = random_matrix(n, n, rng);
  ComplexMatrix E = ComplexMatrix::Identity(n, n) +
                    0.2 * random_matrix(n, n, rng);
  ComplexVector rhs = random_vector(n, rng);
  ResolventSolver solver(A, E);
  CHECK(solver.size() == n);

  for (int k = 0; k < 8; ++k) {
    const Complex z = 2.0 * rng.complex_normal();
    auto x = solver.solve(z, rhs);
    REQUIRE(x.has_value());
    // (z*E - A) x = rhs, i.e. -(A - z*E) x = rhs.
    ComplexVector direct = -solve_shifted(A, E, z, rhs);
    CHECK((*x - direct).norm() <= 1e-10 * std::max(1.0, direct.norm()));
  }

  const Complex pole = generalized_eig(A, E)[0];
  CHECK(!solver.solve(pole, rhs).has_value());
}

TEST_CASE("batched reduced resolves") {
  ComplexMatrix Ar(1, 1), Er(1, 1);
  Ar(0, 0) = Complex(-1.0, 0.0);
  Er(0, 0) = Complex(1.0, 0.0);
  ComplexVector rhs(1);
  rhs(0) = Complex(1.0, 0.0);

  CHECK(reduced_resolve_batch(Ar, Er, rhs, {}).empty());

  auto out = reduced_resolve_batch(Ar, Er, rhs,
                                   {Complex(0.0, 0.0), Complex(1.0, 0.0)});
  REQUIRE(out.size() == 2);
  REQUIRE(out[0].has_value());
  REQUIRE(out[1].has_value());
  CHECK(std::abs((*out[0])(0) - Complex(1.0, 0.0)) < 1e-14);
  CHECK(std::abs((*out[1])(0) - Complex(0.5, 0.0)) < 1e-14);

  // Pole hit reported per element, not as a failure of the batch.
  auto mixed = reduced_resolve_batch(Ar, Er, rhs,
                                     {Complex(-1.0, 0.0), Complex(2.0, 0.0)});
  REQUIRE(mixed.size() == 2);
  CHECK(!mixed[0].has_value());
  REQUIRE(mixed[1].has_value());
  CHECK(std::abs((*mixed[1])(0) - Complex(1.0 / 3.0, 0.0)) < 1e-14);
}

TEST_CASE("batched reduced resolve agrees with per-point dense solves") {
  RandomStream rng(808);
  const Index l = 10;
  ComplexMatrix Ar = random_matrix(l, l, rng);
  ComplexMatrix Er = ComplexMatrix::Identity(l, l) +
                     0.3 * random_matrix(l, l, rng);
  ComplexVector rhs = random_vector(l, rng);

  std::vector<Complex> zs;
  for (int i = 0; i < 50; ++i) zs.push_back(3.0 * rng.complex_normal());

  auto batch = reduced_resolve_batch(Ar, Er, rhs, zs);
  REQUIRE(batch.size() == zs.size());
  for (std::size_t k = 0; k < zs.size(); ++k) {
    REQUIRE(batch[k].has_value());
    ComplexMatrix S = zs[k] * Er - Ar;
    ComplexVector direct = S.partialPivLu().solve(rhs);
    CHECK((*batch[k] - direct).norm() <= 1e-10 * direct.norm());
  }
}
