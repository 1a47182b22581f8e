#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rkmor/errors.hpp"
#include "rkmor/types.hpp"

namespace rkmor {

/// Single-input single-output descriptor system  h(z) = c^H (z*E - A)^{-1} b.
/// E is nonsingular by construction (validated in make_system).
struct StateSpaceSystem {
  ComplexMatrix E;
  ComplexMatrix A;
  ComplexVector b;
  ComplexVector c;
  bool identity_mass = false;

  Index n() const { return A.rows(); }
};

/// Validates shapes, finiteness, and nonsingularity of E.
StateSpaceSystem make_system(ComplexMatrix A, ComplexMatrix E, ComplexVector b,
                             ComplexVector c);

enum class SystemKind { random_stable, laplacian_1d, diagonal };

/// Deterministic test systems.
///  random_stable: dense real normal entries, spectrum shifted into the open
///                 left half-plane when needed;  b, c normal entries.
///  laplacian_1d:  second-difference matrix scaled by -(n+1)^2, b = c = ones.
///  diagonal:      A = diag(-1, ..., -n), b = c = ones.
StateSpaceSystem gen_test_system(SystemKind kind, Index n, std::uint32_t seed);

/// Well-conditioned random mass matrix E = I + G/(2*||G||_2).
ComplexMatrix gen_random_mass(Index n, std::uint32_t seed);

/// Replace the mass matrix; optionally re-stabilize the pencil by shifting
/// the spectrum of E^{-1}A into the open left half-plane.
StateSpaceSystem with_mass_matrix(const StateSpaceSystem& sys, ComplexMatrix E,
                                  bool restabilize);

/// Imaginary-axis sample grid: {-i*10^x} for x log-spaced in [alpha, beta],
/// the origin, and the conjugate points; 2k+1 points sorted by imaginary part.
struct SampleGrid {
  double alpha = 0.0;
  double beta = 0.0;
  int k = 0;
  std::vector<Complex> points;
};

SampleGrid make_grid(double alpha, double beta, int k);

/// General dense Matrix Market reader: array and coordinate layouts,
/// real / integer / complex fields, general / symmetric / hermitian /
/// skew-symmetric storage.
ComplexMatrix load_matrix_market(const std::string& path);

/// Array-format Matrix Market writer; 17 significant digits so that
/// load -> save -> load round-trips bit-exactly.
void save_matrix_market_array(const std::string& path, const ComplexMatrix& M);

/// Assemble a system from Matrix Market files.  path_e empty means E = I.
/// b and c files must hold n x 1 (or 1 x n) data.  Relative paths are
/// resolved against data_root.
StateSpaceSystem load_system(const std::string& path_a,
                             const std::string& path_e,
                             const std::string& path_b,
                             const std::string& path_c,
                             const std::string& data_root = "");

}  // namespace rkmor
