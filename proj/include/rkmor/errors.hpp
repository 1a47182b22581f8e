#pragma once

#include <stdexcept>
#include <string>

#include "rkmor/types.hpp"

namespace rkmor {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A shifted pencil A - sigma*E (or z*E - A) is numerically singular.
struct SingularShift : Error {
  explicit SingularShift(Complex shift, const std::string& what)
      : Error(what), shift(shift) {}
  Complex shift;
};

// Mass matrix (E, N, or a reduced counterpart) is numerically singular.
struct SingularMass : Error {
  using Error::Error;
};

// Reduced mass W^H E V is singular; the oblique projection does not exist.
struct SingularReducedMass : Error {
  using Error::Error;
};

// A vector to be appended lies (numerically) in the span of the basis.
struct RankDeficient : Error {
  explicit RankDeficient(const std::string& what, double residual_norm = 0.0)
      : Error(what), residual_norm(residual_norm) {}
  double residual_norm;
};

// Serious breakdown of the nonsymmetric Lanczos recurrence.
struct Breakdown : Error {
  explicit Breakdown(int step, const std::string& what)
      : Error(what), step(step) {}
  int step;
};

// Recursive divided differences require pairwise distinct nodes.
struct RepeatedNode : Error {
  using Error::Error;
};

// Evaluation point coincides with a pole of the requested quantity.
struct PoleAtZ : Error {
  explicit PoleAtZ(Complex z, const std::string& what) : Error(what), z(z) {}
  Complex z;
};

struct ParseError : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// Iterative eigenvalue estimation failed to settle.
struct NonConvergence : Error {
  using Error::Error;
};

// Every candidate shift of a greedy sweep was excluded or failed.
struct DeadlockNoCandidate : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rkmor
