#pragma once

// A rational map f = P/Q on the Riemann sphere, held as the homogeneous lift
// F(z, w) = (P_h(z, w), Q_h(z, w)) of degree d = max(deg P, deg Q).
//
// The key identity: with W = dP_h/dz dQ_h/dw - dP_h/dw dQ_h/dz (a binary form
// of degree 2d - 2), the derivative of f in the chordal metric is
//
//   f#(p) = (|W(p)| / d) * ||p||^2 / ||F(p)||^2,   ||(z, w)||^2 = |z|^2 + |w|^2.
//
// This is chart independent and vanishes exactly on the critical set, which is
// the projective root set of W. Root multiplicity m of W gives local degree
// m + 1, so the local degrees automatically satisfy Riemann-Hurwitz.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cex/polynomial.hpp"
#include "cex/sphere.hpp"

namespace cex {

struct MapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class R>
struct CriticalPoint {
  SpherePoint<R> location;
  int local_degree;  // >= 2
};

namespace detail {

// |det| of a complex matrix via LU with partial pivoting; destroys m.
template <class R>
R lu_abs_det(std::vector<std::vector<Complex<R>>>& m) {
  int n = static_cast<int>(m.size());
  R det_abs(1);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    R best = norm(m[col][col]);
    for (int row = col + 1; row < n; ++row) {
      R v = norm(m[row][col]);
      if (v > best) {
        best = v;
        piv = row;
      }
    }
    if (best == 0) return R(0);
    if (piv != col) std::swap(m[piv], m[col]);
    det_abs *= abs(m[col][col]);
    for (int row = col + 1; row < n; ++row) {
      Complex<R> factor = m[row][col] / m[col][col];
      for (int k = col; k < n; ++k) {
        m[row][k] -= factor * m[col][k];
      }
    }
  }
  return det_abs;
}

}  // namespace detail

template <class R>
class RationalMap {
 public:
  RationalMap(Poly<R> num, Poly<R> den) : num_(std::move(num)), den_(std::move(den)) {
    int dn = degree(num_);
    int dd = degree(den_);
    if (dd < 0) throw MapError("RationalMap: zero denominator");
    if (dn < 0) throw MapError("RationalMap: zero numerator (constant map)");
    num_.resize(dn + 1);
    den_.resize(dd + 1);
    d_ = std::max(dn, dd);
    if (d_ < 1) throw MapError("RationalMap: degree 0 (constant map)");
    check_resultant();
    build_wronskian();
  }

  int map_degree() const { return d_; }
  const Poly<R>& numerator() const { return num_; }
  const Poly<R>& denominator() const { return den_; }
  const Poly<R>& wronskian_form() const { return wron_; }

  SpherePoint<R> evaluate(const SpherePoint<R>& p) const {
    Complex<R> f1 = horner_homogeneous(num_, d_, p.z, p.w);
    Complex<R> f2 = horner_homogeneous(den_, d_, p.z, p.w);
    R scale = norm(f1) + norm(f2);
    if (scale == 0) {
      throw MapError("RationalMap::evaluate: lift vanished (malformed map)");
    }
    return SpherePoint<R>(f1, f2);
  }

  // Derivative in the chordal metric. Exact zero on the critical set.
  R spherical_derivative(const SpherePoint<R>& p) const {
    Complex<R> f1 = horner_homogeneous(num_, d_, p.z, p.w);
    Complex<R> f2 = horner_homogeneous(den_, d_, p.z, p.w);
    Complex<R> wv = horner_homogeneous(wron_, 2 * d_ - 2, p.z, p.w);
    return abs(wv) * norm_sq(p) / (R(d_) * (norm(f1) + norm(f2)));
  }

  struct Step {
    SpherePoint<R> next;
    double log_fsharp;  // log f#(p), -inf at critical points
  };

  // One orbit step with the derivative ledger entry, sharing the lift
  // evaluations between the image and f#.
  Step step(const SpherePoint<R>& p) const {
    Complex<R> f1 = horner_homogeneous(num_, d_, p.z, p.w);
    Complex<R> f2 = horner_homogeneous(den_, d_, p.z, p.w);
    R fn = norm(f1) + norm(f2);
    if (fn == 0) throw MapError("RationalMap::step: lift vanished (malformed map)");
    Complex<R> wv = horner_homogeneous(wron_, 2 * d_ - 2, p.z, p.w);
    double lf = 0.5 * log_as_double(norm(wv)) + log_as_double(norm_sq(p)) -
                log_as_double(fn) - std::log(static_cast<double>(d_));
    return {SpherePoint<R>(f1, f2), lf};
  }

  // Critical points with local degrees; computed on first use. Sum of
  // (local_degree - 1) is checked against 2d - 2.
  const std::vector<CriticalPoint<R>>& critical_points() const {
    if (!crit_) crit_ = compute_critical_points();
    return *crit_;
  }

 private:
  void check_resultant() const {
    // Sylvester resultant of the two degree-d binary forms. Scale invariant
    // score; a vanishing resultant means a common projective root, i.e. the
    // written fraction hides a common factor.
    int n = 2 * d_;
    std::vector<std::vector<Complex<R>>> m(n, std::vector<Complex<R>>(n, Complex<R>(R(0))));
    for (int row = 0; row < d_; ++row) {
      for (int i = 0; i <= d_; ++i) {
        int col = row + (d_ - i);
        Complex<R> c = i < static_cast<int>(num_.size()) ? num_[i] : Complex<R>(R(0));
        m[row][col] = c;
      }
    }
    for (int row = 0; row < d_; ++row) {
      for (int i = 0; i <= d_; ++i) {
        int col = row + (d_ - i);
        Complex<R> c = i < static_cast<int>(den_.size()) ? den_[i] : Complex<R>(R(0));
        m[d_ + row][col] = c;
      }
    }
    R det = detail::lu_abs_det(m);
    R np = max_coeff_abs(num_);
    R nq = max_coeff_abs(den_);
    using std::pow;
    R scale = pow(np, d_) * pow(nq, d_);
    if (scale == 0 || det / scale < R(1e-10)) {
      throw MapError("RationalMap: resultant vanishes within tolerance (common factor or degenerate pair)");
    }
  }

  void build_wronskian() {
    // W = sum over i, j of d (i - j) p_i q_j z^(i+j-1) w^(2d-2-(i+j-1))
    wron_.assign(2 * d_ - 1, Complex<R>(R(0)));
    for (int i = 0; i < static_cast<int>(num_.size()); ++i) {
      if (num_[i].re == 0 && num_[i].im == 0) continue;
      for (int j = 0; j < static_cast<int>(den_.size()); ++j) {
        if (i == j) continue;
        if (den_[j].re == 0 && den_[j].im == 0) continue;
        int mdx = i + j - 1;
        if (mdx < 0 || mdx > 2 * d_ - 2) continue;
        wron_[mdx] += num_[i] * den_[j] * R(static_cast<double>(d_ * (i - j)));
      }
    }
  }

  std::vector<CriticalPoint<R>> compute_critical_points() const {
    using std::pow;
    R eps = std::numeric_limits<R>::epsilon();
    R wmax = max_coeff_abs(wron_);
    if (wmax == 0) {
      throw MapError("RationalMap: Wronskian identically zero (degenerate map)");
    }
    R coeff_tol = wmax * pow(eps, 0.75);

    // univariate restriction W(z, 1): trim numerically-zero top and bottom
    int top = degree(wron_, coeff_tol);
    int inf_mult = (2 * d_ - 2) - top;
    int zero_mult = 0;
    while (zero_mult <= top && abs(wron_[zero_mult]) <= coeff_tol) ++zero_mult;

    Poly<R> core(wron_.begin() + zero_mult, wron_.begin() + top + 1);
    std::vector<CriticalPoint<R>> out;
    if (zero_mult > 0) {
      out.push_back({SpherePoint<R>::zero(), zero_mult + 1});
    }
    if (inf_mult > 0) {
      out.push_back({SpherePoint<R>::infinity(), inf_mult + 1});
    }

    if (degree(core) >= 1) {
      auto roots = durand_kerner(core);
      // greedy clustering; multiple roots land in a blob of radius about
      // eps^(1/m), so the merge tolerance is deliberately coarse and the
      // real multiplicity is read off derivative-order vanishing below
      R merge_tol = pow(eps, 0.25);
      std::sort(roots.begin(), roots.end(), [](const Complex<R>& a, const Complex<R>& b) {
        if (a.re != b.re) return a.re < b.re;
        return a.im < b.im;
      });
      std::vector<std::vector<Complex<R>>> clusters;
      for (const auto& r : roots) {
        if (!clusters.empty()) {
          Complex<R> c = cluster_mean(clusters.back());
          if (abs(r - c) < merge_tol * (R(1) + abs(c))) {
            clusters.back().push_back(r);
            continue;
          }
        }
        clusters.push_back({r});
      }
      for (auto& cl : clusters) {
        Complex<R> center = cluster_mean(cl);
        int mult = static_cast<int>(cl.size());
        center = polish_root(core, center, mult);
        int measured = vanishing_order(core, center);
        if (measured < 1) {
          R resid = abs(horner(core, center));
          throw RootFindError(
              "critical_points: polished root fails to vanish", to_double(resid));
        }
        out.push_back({SpherePoint<R>::affine(center), measured + 1});
      }
    }

    int rh = 0;
    for (const auto& c : out) rh += c.local_degree - 1;
    if (rh != 2 * d_ - 2) {
      throw MapError(
          "critical_points: local degrees sum to " + std::to_string(rh) +
          ", expected " + std::to_string(2 * d_ - 2) +
          " (root clustering failed)");
    }
    for (const auto& c : out) {
      R fs = spherical_derivative(c.location);
      if (!(fs < R(1e-8))) {
        throw RootFindError("critical_points: residual spherical derivative too large",
                            to_double(fs));
      }
    }
    std::sort(out.begin(), out.end(), [](const CriticalPoint<R>& a, const CriticalPoint<R>& b) {
      if (a.location.at_infinity() != b.location.at_infinity())
        return a.location.at_infinity() < b.location.at_infinity();
      if (a.location.at_infinity()) return false;
      Complex<R> va = a.location.affine_value();
      Complex<R> vb = b.location.affine_value();
      if (va.re != vb.re) return va.re < vb.re;
      return va.im < vb.im;
    });
    return out;
  }

  static Complex<R> cluster_mean(const std::vector<Complex<R>>& v) {
    Complex<R> s(R(0));
    for (const auto& x : v) s += x;
    return s * (R(1) / R(static_cast<double>(v.size())));
  }

  // Newton on the (mult-1)-th derivative, where the root is simple.
  static Complex<R> polish_root(const Poly<R>& p, Complex<R> x, int mult) {
    Poly<R> g = p;
    for (int i = 1; i < mult; ++i) g = derivative(g);
    Poly<R> gp = derivative(g);
    for (int it = 0; it < 60; ++it) {
      Complex<R> gv = horner(g, x);
      Complex<R> gd = horner(gp, x);
      if (gd.re == 0 && gd.im == 0) break;
      Complex<R> delta = gv / gd;
      x -= delta;
      if (abs(delta) <= std::numeric_limits<R>::epsilon() * (R(1) + abs(x)) * R(4)) break;
    }
    return x;
  }

  // Smallest j with |p^(j)(x)| above the multiplicity tolerance, scale aware.
  static int vanishing_order(const Poly<R>& p, const Complex<R>& x) {
    Poly<R> g = p;
    R ax = abs(x);
    for (int j = 0; j <= static_cast<int>(p.size()); ++j) {
      R scale(0);
      R xp(1);
      for (const auto& c : g) {
        scale += abs(c) * xp;
        xp *= (ax > R(1) ? ax : R(1));
      }
      if (scale == 0) return j;  // derivative identically zero; treat as nonvanishing order
      if (abs(horner(g, x)) > R(1e-8) * scale) return j;
      g = derivative(g);
    }
    return static_cast<int>(p.size());
  }

  Poly<R> num_;
  Poly<R> den_;
  int d_ = 0;
  Poly<R> wron_;  // coefficients of z^m w^(2d-2-m)
  mutable std::optional<std::vector<CriticalPoint<R>>> crit_;
};

// Distance from a point to the critical set, as log sigma (double).
template <class R>
double log_dist_to_crit(const SpherePoint<R>& p,
                        const std::vector<CriticalPoint<R>>& crit,
                        int* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < crit.size(); ++i) {
    double d = log_chordal(p, crit[i].location);
    if (d < best) {
      best = d;
      if (argmin) *argmin = static_cast<int>(i);
    }
  }
  return best;
}

// Rebuild the same map in another precision lane. Coefficients convert
// exactly when the target lane is wider.
template <class To, class From>
RationalMap<To> convert_map(const RationalMap<From>& f) {
  Poly<To> num, den;
  num.reserve(f.numerator().size());
  den.reserve(f.denominator().size());
  for (const auto& c : f.numerator()) num.push_back(Complex<To>::template from<From>(c));
  for (const auto& c : f.denominator()) den.push_back(Complex<To>::template from<From>(c));
  return RationalMap<To>(std::move(num), std::move(den));
}

}  // namespace cex
