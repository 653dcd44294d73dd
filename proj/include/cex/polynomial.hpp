#pragma once

// Dense univariate polynomials with complex coefficients, ascending order.
// Includes the homogeneous (binary form) evaluation used for maps on the
// sphere and a Durand-Kerner root finder that works on any scalar lane.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "cex/complex.hpp"
#include "cex/scalar.hpp"

namespace cex {

template <class R>
using Poly = std::vector<Complex<R>>;

template <class R>
R max_coeff_abs(const Poly<R>& p) {
  R m(0);
  for (const auto& c : p) {
    R a = abs(c);
    if (a > m) m = a;
  }
  return m;
}

// Highest index with |coeff| > tol. Returns -1 for the zero polynomial.
template <class R>
int degree(const Poly<R>& p, const R& tol = R(0)) {
  for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i) {
    if (abs(p[i]) > tol) return i;
  }
  return -1;
}

template <class R>
Complex<R> horner(const Poly<R>& p, const Complex<R>& x) {
  if (p.empty()) return Complex<R>(R(0));
  Complex<R> acc = p.back();
  for (int i = static_cast<int>(p.size()) - 2; i >= 0; --i) {
    acc = acc * x + p[i];
  }
  return acc;
}

template <class R>
Poly<R> derivative(const Poly<R>& p) {
  Poly<R> d;
  for (size_t i = 1; i < p.size(); ++i) {
    d.push_back(p[i] * R(static_cast<double>(i)));
  }
  return d;
}

// Evaluate the binary form sum c_i z^i w^(D-i) for the form degree D >= deg p.
// No divisions, so it is total on normalized homogeneous coordinates.
template <class R>
Complex<R> horner_homogeneous(const Poly<R>& p, int form_degree,
                              const Complex<R>& z, const Complex<R>& w) {
  if (p.empty()) return Complex<R>(R(0));
  // powers of w up to form_degree
  Complex<R> acc(R(0));
  Complex<R> wp(R(1));
  // acc = sum_i c_i z^i w^(D-i); iterate from i = D down to 0 so that
  // acc*z + c_i*w^(D-i) assembles the sum with one w-power per level.
  for (int i = form_degree; i >= 0; --i) {
    Complex<R> ci = i < static_cast<int>(p.size()) ? p[i] : Complex<R>(R(0));
    acc = acc * z + ci * wp;
    if (i > 0) wp = wp * w;
  }
  return acc;
}

struct RootFindError : std::runtime_error {
  double residual;
  explicit RootFindError(const std::string& what, double res)
      : std::runtime_error(what), residual(res) {}
};

// Durand-Kerner (Weierstrass) iteration. Expects a polynomial whose exact
// leading coefficient is nonzero; zero roots and degree handling are the
// caller's business. Deterministic starting spiral.
template <class R>
std::vector<Complex<R>> durand_kerner(const Poly<R>& poly, int max_iter = 500) {
  int n = static_cast<int>(poly.size()) - 1;
  if (n < 1) return {};
  Poly<R> monic(poly);
  Complex<R> lead = monic.back();
  for (auto& c : monic) c = c / lead;
  if (n == 1) return {-monic[0]};

  R bound(1);
  for (int i = 0; i < n; ++i) {
    R a = abs(monic[i]);
    if (a + R(1) > bound) bound = a + R(1);
  }

  std::vector<Complex<R>> r(n);
  double two_pi = 6.283185307179586;
  for (int k = 0; k < n; ++k) {
    // spiral of radii inside the Cauchy bound; the 0.2025 phase offset keeps
    // the start away from real-axis symmetries
    double th = two_pi * (static_cast<double>(k) / n + 0.2025);
    R rad = bound * R(0.35 + 0.55 * (k + 1) / static_cast<double>(n));
    r[k] = Complex<R>(rad * R(std::cos(th)), rad * R(std::sin(th)));
  }

  R eps = std::numeric_limits<R>::epsilon();
  R tol = eps * R(64);
  for (int it = 0; it < max_iter; ++it) {
    R worst(0);
    for (int k = 0; k < n; ++k) {
      Complex<R> num = horner(monic, r[k]);
      Complex<R> den(R(1));
      for (int j = 0; j < n; ++j) {
        if (j != k) den = den * (r[k] - r[j]);
      }
      if (den.re == 0 && den.im == 0) {
        // coincident iterates; nudge deterministically
        r[k] += Complex<R>(tol * R(k + 1), tol);
        worst = bound;
        continue;
      }
      Complex<R> delta = num / den;
      r[k] -= delta;
      R step = abs(delta) / (R(1) + abs(r[k]));
      if (step > worst) worst = step;
    }
    if (worst <= tol) return r;
  }
  // multiple roots converge linearly and may stop above tol; accept clusters
  // whose residual is still small, otherwise report the failure
  R resid(0);
  for (int k = 0; k < n; ++k) {
    R a = abs(horner(monic, r[k]));
    if (a > resid) resid = a;
  }
  using std::pow;
  if (resid < pow(eps, 0.5) * R(1e3)) return r;
  throw RootFindError("durand_kerner: no convergence", to_double(resid));
}

}  // namespace cex
