#pragma once

// Shared randomness helpers for the test binaries. Every generator takes an
// explicit engine so each TEST_CASE seeds its own and stays order independent.

#include <random>

#include "cex/complex.hpp"
#include "cex/sphere.hpp"

namespace cex::testutil {

using Rng = std::mt19937_64;

inline Complex<double> rand_complex(Rng& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng)};
}

// Uniform-ish over the sphere: homogeneous pair with both components drawn
// from the unit box, rejecting pairs too close to (0 : 0). Hits both charts.
inline SpherePoint<double> rand_sphere_point(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Complex<double> z{u(rng), u(rng)};
    Complex<double> w{u(rng), u(rng)};
    if (norm(z) + norm(w) > 1e-4) return SpherePoint<double>(z, w);
  }
}

}  // namespace cex::testutil
