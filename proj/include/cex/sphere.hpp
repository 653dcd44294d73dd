#pragma once

// Points on the Riemann sphere in homogeneous coordinates (z : w), kept
// normalized so max(|z|, |w|) stays in [1/2, 1]. All geometry is done in the
// chordal metric sigma(p, q) = 2 |z1 w2 - z2 w1| / (|p| |q|), which has
// diameter 2 and needs no chart case analysis.

#include <limits>
#include <stdexcept>

#include "cex/complex.hpp"
#include "cex/scalar.hpp"

namespace cex {

template <class R>
struct SpherePoint {
  Complex<R> z;
  Complex<R> w;

  SpherePoint() : z(R(0)), w(R(1)) {}
  SpherePoint(Complex<R> zz, Complex<R> ww) : z(std::move(zz)), w(std::move(ww)) {
    normalize();
  }

  static SpherePoint zero() { return SpherePoint(Complex<R>(R(0)), Complex<R>(R(1))); }
  static SpherePoint infinity() {
    return SpherePoint(Complex<R>(R(1)), Complex<R>(R(0)));
  }
  static SpherePoint affine(const Complex<R>& v) {
    return SpherePoint(v, Complex<R>(R(1)));
  }

  template <class S>
  static SpherePoint from(const SpherePoint<S>& o) {
    SpherePoint p;
    p.z = Complex<R>::from(o.z);
    p.w = Complex<R>::from(o.w);
    return p;  // already normalized in the source lane; close enough here
  }

  void normalize() {
    R az = cex::abs(z);
    R aw = cex::abs(w);
    R s = az < aw ? aw : az;
    if (s == 0) throw std::invalid_argument("SpherePoint: (0 : 0) is not a point");
    if (s < R(0.5) || s > R(1)) {
      z /= s;
      w /= s;
    }
  }

  bool at_infinity() const { return w.re == 0 && w.im == 0; }

  // Affine coordinate z/w. Caller checks at_infinity() first.
  Complex<R> affine_value() const { return z / w; }
};

template <class R>
R norm_sq(const SpherePoint<R>& p) {
  return norm(p.z) + norm(p.w);
}

template <class R>
Complex<R> cross_term(const SpherePoint<R>& p, const SpherePoint<R>& q) {
  return p.z * q.w - q.z * p.w;
}

template <class R>
R chordal(const SpherePoint<R>& p, const SpherePoint<R>& q) {
  using std::sqrt;
  R c = abs(cross_term(p, q));
  return (R(2) * c) / sqrt(norm_sq(p) * norm_sq(q));
}

// Squared chordal distance without any square roots; the cheap form for
// threshold comparisons in hot loops.
template <class R>
R chordal_sq(const SpherePoint<R>& p, const SpherePoint<R>& q) {
  R c = norm(cross_term(p, q));
  return R(4) * c / (norm_sq(p) * norm_sq(q));
}

// log sigma(p, q) as a double; safe for distances far below double range.
// Returns -inf for coincident points.
template <class R>
double log_chordal(const SpherePoint<R>& p, const SpherePoint<R>& q) {
  return 0.5 * log_as_double(chordal_sq(p, q));
}

}  // namespace cex
