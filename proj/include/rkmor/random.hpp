#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rkmor/types.hpp"

namespace rkmor {

/// Deterministic deviates built directly on mt19937 output so that streams
/// never depend on standard-library distribution internals.
class RandomStream {
 public:
  explicit RandomStream(std::uint32_t seed) : gen_(seed) {}

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    const std::uint64_t hi = gen_() >> 5;  // 27 bits
    const std::uint64_t lo = gen_() >> 6;  // 26 bits
    return (static_cast<double>(hi) * 67108864.0 + static_cast<double>(lo)) *
           (1.0 / 9007199254740992.0);
  }

  double uniform_in(double a, double b) { return a + (b - a) * uniform(); }

  /// Inclusive on both ends.
  int uniform_int(int lo, int hi) {
    const int span = hi - lo + 1;
    int k = static_cast<int>(uniform() * span);
    if (k >= span) k = span - 1;
    return lo + k;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u = uniform();
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u));  // 1-u in (0,1]
    const double th = 6.283185307179586476925287 * v;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return Complex(re, im);
  }

 private:
  std::mt19937 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rkmor
