#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cex/orbit.hpp"
#include "cex/polynomial.hpp"
#include "cex/rational_map.hpp"
#include "cex/scalar.hpp"
#include "cex/sphere.hpp"

namespace cex {

// ---------------------------------------------------------------------------
// Homogeneous form helpers shared by the family machinery and the engine.

// d/dz of sum_i p_i z^i w^(D-i); slot i of the result holds (i+1) p_{i+1}.
template <class R>
Poly<R> form_partial_z(const Poly<R>& p) {
  Poly<R> out;
  if (p.size() <= 1) return out;
  out.reserve(p.size() - 1);
  for (size_t i = 1; i < p.size(); ++i) {
    out.push_back(p[i] * Complex<R>(R(static_cast<double>(i)), R(0)));
  }
  return out;
}

// d/dw of the same form; slot i holds (D - i) p_i, one w-power lower.
template <class R>
Poly<R> form_partial_w(const Poly<R>& p, int form_degree) {
  Poly<R> out(p.size(), Complex<R>(R(0), R(0)));
  for (size_t i = 0; i < p.size(); ++i) {
    double k = static_cast<double>(form_degree) - static_cast<double>(i);
    out[i] = p[i] * Complex<R>(R(k), R(0));
  }
  while (!out.empty() && out.back().re == 0 && out.back().im == 0) out.pop_back();
  return out;
}

// Wronskian bracket of two degree-d coefficient lists, matching the
// convention used inside RationalMap: [p,q]_m = d sum_{i+j=m+1} (i-j) p_i q_j.
template <class R>
Poly<R> wronskian_bracket(const Poly<R>& p, const Poly<R>& q, int d) {
  Poly<R> w(static_cast<size_t>(2 * d - 1), Complex<R>(R(0), R(0)));
  for (int i = 0; i < static_cast<int>(p.size()); ++i) {
    for (int j = 0; j < static_cast<int>(q.size()); ++j) {
      if (i == j) continue;
      int m = i + j - 1;
      if (m < 0 || m > 2 * d - 2) continue;
      w[static_cast<size_t>(m)] +=
          p[i] * q[j] * Complex<R>(R(static_cast<double>(d) * (i - j)), R(0));
    }
  }
  return w;
}

// Exact polynomial division: returns the quotient only when the remainder
// comes out as exact zeros, which is what the bundled families produce.
template <class R>
std::optional<Poly<R>> exact_divide(const Poly<R>& num, const Poly<R>& den) {
  int dn = degree(num);
  int dd = degree(den);
  if (dd < 0 || dn < dd) return std::nullopt;
  Poly<R> rem = num;
  rem.resize(static_cast<size_t>(dn) + 1, Complex<R>(R(0), R(0)));
  Poly<R> quot(static_cast<size_t>(dn - dd) + 1, Complex<R>(R(0), R(0)));
  for (int k = dn - dd; k >= 0; --k) {
    Complex<R> c = rem[static_cast<size_t>(k + dd)] / den[static_cast<size_t>(dd)];
    quot[static_cast<size_t>(k)] = c;
    for (int j = 0; j <= dd; ++j) {
      rem[static_cast<size_t>(k + j)] -= c * den[static_cast<size_t>(j)];
    }
  }
  for (const auto& r : rem) {
    if (!(r.re == 0 && r.im == 0)) return std::nullopt;
  }
  return quot;
}

// ---------------------------------------------------------------------------

template <class R>
struct CriticalPath {
  CriticalPoint<R> base;     // location and local degree at a = 0
  bool at_infinity = false;  // the path sits at infinity for every parameter
  bool moving = false;       // location depends on the parameter
  bool collides = false;     // another critical point lies on its forward orbit
};

template <class R>
struct CriticalSample {
  SpherePoint<R> location;
  Complex<R> vel_z{0.0, 0.0};  // d/da of the stored representative
  Complex<R> vel_w{0.0, 0.0};
};

// Orbit of a critical point together with the parameter derivative carried
// as a homogeneous velocity in the same gauge as the stored representative.
template <class R>
struct ParamOrbit {
  std::vector<SpherePoint<R>> points;  // points[k] is the k-th iterate of c_l
  std::vector<Complex<R>> vel_z, vel_w;
  std::vector<Complex<R>> xi_prime;  // affine (vz w - z vw)/w^2 where defined
  std::vector<double> sph_speed;     // chordal speed 2|vz w - z vw|/||p||^2
  int certified_horizon = 0;
  bool precision_exhausted = false;
};

struct TransversalitySums {
  std::vector<double> spherical_partial;       // all-positive metric convention
  std::vector<Complex<double>> chart_partial;  // complex affine-chart convention
  Complex<double> xi_ratio{0.0, 0.0};          // xi'_m / Df^(m-1)(v), recursion route
  bool chart_ok = true;        // false if the orbit crossed a chart degeneracy
  bool nondegenerate = true;   // |last chart partial| above the threshold
  double threshold = 1e-8;
};

// A one-parameter perturbation f_a = (P + a D)/Q of a rational map, linear
// in the parameter. The direction u = D/Q; its reduced form is kept
// separately so u can be evaluated at poles shared with Q.
template <class R>
class RationalFamily {
 public:
  RationalFamily(Poly<R> num, Poly<R> den, Poly<R> dir, double param_radius)
      : num_(std::move(num)),
        den_(std::move(den)),
        dir_(std::move(dir)),
        eps_(param_radius),
        base_(num_, den_) {
    if (!(eps_ > 0)) throw MapError("family: parameter radius must be positive");
    d_ = base_.map_degree();
    if (degree(dir_) > d_) {
      throw MapError("family: direction degree exceeds the map degree");
    }
    num_pad_ = num_;
    num_pad_.resize(static_cast<size_t>(d_) + 1, Complex<R>(R(0), R(0)));
    den_pad_ = den_;
    den_pad_.resize(static_cast<size_t>(d_) + 1, Complex<R>(R(0), R(0)));
    dir_pad_ = dir_;
    dir_pad_.resize(static_cast<size_t>(d_) + 1, Complex<R>(R(0), R(0)));

    dwron_ = wronskian_bracket(dir_pad_, den_pad_, d_);
    moving_ = false;
    for (const auto& c : dwron_) {
      if (!(c.re == 0 && c.im == 0)) moving_ = true;
    }

    if (auto q = exact_divide(dir_, den_)) {
      u_num_ = *q;
      u_den_ = Poly<R>{Complex<R>(R(1), R(0))};
    } else {
      u_num_ = dir_;
      u_den_ = den_;
    }
    u_deg_ = std::max(degree(u_num_), degree(u_den_));

    build_paths();
    validate_structure();
  }

  const RationalMap<R>& base() const { return base_; }
  int map_degree() const { return d_; }
  double param_radius() const { return eps_; }
  const std::vector<CriticalPath<R>>& paths() const { return paths_; }
  const Poly<R>& numerator_padded() const { return num_pad_; }
  const Poly<R>& denominator_padded() const { return den_pad_; }
  const Poly<R>& direction_padded() const { return dir_pad_; }

  // Largest local degree among the critical points.
  int max_local_degree() const {
    int k = 2;
    for (const auto& p : paths_) k = std::max(k, p.base.local_degree);
    return k;
  }

  // Indices of the critical paths the construction follows: those with no
  // other critical point on their forward orbit.
  std::vector<int> tracked() const {
    std::vector<int> out;
    for (size_t i = 0; i < paths_.size(); ++i) {
      if (!paths_[i].collides) out.push_back(static_cast<int>(i));
    }
    return out;
  }

  // The map at parameter a: (P + a D)/Q with the degree pinned.
  RationalMap<R> map_at(const R& a) const {
    check_radius(a);
    Poly<R> pa = num_pad_;
    for (size_t i = 0; i < pa.size(); ++i) {
      pa[i] += dir_pad_[i] * Complex<R>(a, R(0));
    }
    if (degree(pa) != degree(num_)) {
      throw MapError("family: numerator degree drop at the requested parameter");
    }
    RationalMap<R> f(pa, den_);
    if (f.map_degree() != d_) {
      throw MapError("family: degree drop at the requested parameter");
    }
    return f;
  }

  // Direction value u(p) in the affine chart. first = numerator lift,
  // second = denominator lift; the caller decides how to combine them.
  std::pair<Complex<R>, Complex<R>> direction_lift(const SpherePoint<R>& p) const {
    return {horner_homogeneous(u_num_, u_deg_, p.z, p.w),
            horner_homogeneous(u_den_, u_deg_, p.z, p.w)};
  }

  // Location of the l-th critical point at parameter a, with the velocity of
  // the representative. Fixed paths are free; moving paths are continued by
  // a stepwise Newton iteration on the appropriate Wronskian derivative.
  CriticalSample<R> critical_at(int l, const R& a) const {
    check_radius(a);
    const CriticalPath<R>& path = paths_.at(static_cast<size_t>(l));
    CriticalSample<R> out;
    if (!moving_ || path.at_infinity) {
      out.location = path.base.location;
      return out;
    }
    int mult = path.base.local_degree - 1;
    Poly<R> g = base_wron_affine();
    Poly<R> dg = dwron_;
    for (int i = 0; i < mult - 1; ++i) {
      g = derivative(g);
      dg = derivative(dg);
    }
    // g still depends on a through W_a = W_base + a dW; track both parts.
    Complex<R> x = path.base.location.affine_value();
    R astep = R(eps_) / R(1024.0);
    R done(0);
    R target = a;
    int guard = 0;
    bool finished = false;
    while (!finished) {
      R remaining = target - done;
      if (remaining == 0) break;
      R mag = remaining < 0 ? R(-remaining) : remaining;
      R anext;
      if (mag <= astep) {
        anext = target;  // land exactly so the loop terminates
      } else {
        anext = done + (remaining < 0 ? R(-astep) : astep);
      }
      if (!newton_refine(g, dg, anext, x)) {
        // halve the parameter step and retry from the same anchor
        astep /= R(2);
        if (astep < R(eps_) * R(9.5367431640625e-07)) {  // eps / 2^20
          throw MapError("family: critical path continuation failed");
        }
        continue;
      }
      done = anext;
      finished = (done == target);
      if (++guard > 2000000) {
        throw MapError("family: critical path continuation did not terminate");
      }
    }
    out.location = SpherePoint<R>::affine(x);
    // implicit differentiation: c' = -dW^(m-1)/da / (W^(m-1))' at the root
    Poly<R> ga = g;
    ga.resize(std::max(g.size(), dg.size()), Complex<R>(R(0), R(0)));
    for (size_t i = 0; i < dg.size(); ++i) {
      ga[i] += dg[i] * Complex<R>(a, R(0));
    }
    Complex<R> denom = horner(derivative(ga), x);
    Complex<R> numer = horner(dg, x);
    if (norm(denom) == 0) {
      throw MapError("family: critical path velocity is singular");
    }
    Complex<R> cdot = Complex<R>(R(0), R(0)) - numer / denom;
    // the stored representative is (x t, t); its velocity is (c' t, 0)
    out.vel_z = cdot * out.location.w;
    out.vel_w = Complex<R>(R(0), R(0));
    return out;
  }

  // All critical locations at parameter a, in path order.
  std::vector<CriticalPoint<R>> critical_set_at(const R& a) const {
    std::vector<CriticalPoint<R>> out;
    out.reserve(paths_.size());
    for (size_t l = 0; l < paths_.size(); ++l) {
      auto cs = critical_at(static_cast<int>(l), a);
      out.push_back({cs.location, paths_[l].base.local_degree});
    }
    return out;
  }

  // Orbit of the critical value v_l(a) with the ledger anchored there.
  OrbitTrace<R> value_orbit(int l, const R& a, int n, double tol = 1e-6) const {
    RationalMap<R> f = map_at(a);
    auto cs = critical_at(l, a);
    SpherePoint<R> v = f.evaluate(cs.location);
    OrbitTrace<R> tr = iterate_orbit(f, v, n, tol);
    tr.start_index = 1;
    return tr;
  }

  // Critical point orbit with its parameter derivative, carried as a
  // homogeneous velocity in the gauge of the stored representative.
  ParamOrbit<R> orbit_with_param_derivative(int l, const R& a, int n,
                                            double tol = 1e-6) const {
    using Wd = Wider<R>;
    check_radius(a);
    RationalMap<R> f = map_at(a);
    RationalMap<Wd> fw = convert_map<Wd>(f);

    Poly<R> pa = num_pad_;
    for (size_t i = 0; i < pa.size(); ++i) pa[i] += dir_pad_[i] * Complex<R>(a, R(0));
    Poly<R> dpz = form_partial_z(pa);
    Poly<R> dpw = form_partial_w(pa, d_);
    Poly<R> dqz = form_partial_z(den_pad_);
    Poly<R> dqw = form_partial_w(den_pad_, d_);

    ParamOrbit<R> out;
    auto cs = critical_at(l, a);
    SpherePoint<R> p = cs.location;
    Complex<R> vz = cs.vel_z, vw = cs.vel_w;
    SpherePoint<Wd> pw = SpherePoint<Wd>::template from<R>(p);

    auto record = [&](const SpherePoint<R>& q, const Complex<R>& qz, const Complex<R>& qw) {
      out.points.push_back(q);
      out.vel_z.push_back(qz);
      out.vel_w.push_back(qw);
      Complex<R> cross = qz * q.w - q.z * qw;
      out.sph_speed.push_back(to_double(R(2) * abs(cross) / norm_sq(q)));
      if (norm(q.w) == 0) {
        // a vanishing velocity is zero in every chart, even at infinity
        if (norm(cross) == 0) {
          out.xi_prime.push_back(Complex<R>(R(0), R(0)));
        } else {
          double inf = std::numeric_limits<double>::infinity();
          out.xi_prime.push_back(Complex<R>(R(inf), R(inf)));
        }
      } else {
        out.xi_prime.push_back(cross / (q.w * q.w));
      }
    };
    record(p, vz, vw);

    for (int k = 0; k < n; ++k) {
      Complex<R> f1 = horner_homogeneous(pa, d_, p.z, p.w);
      Complex<R> f2 = horner_homogeneous(den_pad_, d_, p.z, p.w);
      Complex<R> nz = horner_homogeneous(dpz, d_ - 1, p.z, p.w) * vz +
                      horner_homogeneous(dpw, d_ - 1, p.z, p.w) * vw +
                      horner_homogeneous(dir_pad_, d_, p.z, p.w);
      Complex<R> nw = horner_homogeneous(dqz, d_ - 1, p.z, p.w) * vz +
                      horner_homogeneous(dqw, d_ - 1, p.z, p.w) * vw;
      R s = abs(f1);
      R s2 = abs(f2);
      if (s2 > s) s = s2;
      if (s == 0) throw MapError("family: orbit lift vanished");
      if (s < R(0.5) || s > R(1)) {
        Complex<R> inv(R(1) / s, R(0));
        f1 = f1 * inv;
        f2 = f2 * inv;
        nz = nz * inv;
        nw = nw * inv;
      }
      SpherePoint<R> q = p;
      // keep the stored representative in exactly the velocity gauge
      q.z = f1;
      q.w = f2;
      pw = fw.evaluate(pw);
      double drift = chordal(SpherePoint<Wd>::template from<R>(q), pw);
      if (!(drift <= tol)) {
        out.precision_exhausted = true;
        out.certified_horizon = k;
        return out;
      }
      p = q;
      vz = nz;
      vw = nw;
      record(p, vz, vw);
    }
    out.certified_horizon = n;
    return out;
  }

  // Partial sums of the transversality series in both conventions, plus the
  // independently recursed ratio xi'_m / Df^(m-1)(v_l).
  TransversalitySums transversality(int l, const R& a, int m) const {
    if (m < 1) throw MapError("transversality: need at least one term");
    ParamOrbit<R> po = orbit_with_param_derivative(l, a, m);
    if (po.certified_horizon < m) {
      throw MapError("transversality: precision exhausted before the requested length");
    }
    RationalMap<R> f = map_at(a);
    const auto& crit = f.critical_points();

    TransversalitySums out;
    out.spherical_partial.reserve(static_cast<size_t>(m));
    out.chart_partial.reserve(static_cast<size_t>(m));

    double log_sph = 0.0;   // log of the spherical derivative along v_l
    double log_mag = 0.0;   // log magnitude of the chart derivative
    Complex<double> phase(1.0, 0.0);
    double sum_sph = 0.0;
    Complex<double> sum_chart(0.0, 0.0);

    for (int n = 0; n < m; ++n) {
      const SpherePoint<R>& xi_n = po.points[static_cast<size_t>(n)];
      if (n >= 1) {
        double ld = log_dist_to_crit(xi_n, crit);
        if (ld < std::log(1e-12)) {
          throw MapError("transversality: critical orbit hits a critical point at time " +
                         std::to_string(n));
        }
      }
      // spherical numerator: chordal speed of the image under da, via the lift
      Complex<R> f1 = horner_homogeneous(num_pad_, d_, xi_n.z, xi_n.w) +
                      horner_homogeneous(dir_pad_, d_, xi_n.z, xi_n.w) * Complex<R>(a, R(0));
      Complex<R> f2 = horner_homogeneous(den_pad_, d_, xi_n.z, xi_n.w);
      Complex<R> dlift = horner_homogeneous(dir_pad_, d_, xi_n.z, xi_n.w);
      R fn = norm(f1) + norm(f2);
      double kappa = to_double(R(2) * abs(dlift) * abs(f2) / fn);
      sum_sph += kappa * std::exp(-log_sph);
      out.spherical_partial.push_back(sum_sph);

      // chart numerator u(xi_n) through the reduced direction
      auto ul = direction_lift(xi_n);
      if (norm(ul.second) == 0) {
        out.chart_ok = false;
        out.chart_partial.push_back(Complex<double>(
            std::numeric_limits<double>::quiet_NaN(), 0.0));
      } else {
        Complex<R> uval = ul.first / ul.second;
        Complex<double> t(to_double(uval.re), to_double(uval.im));
        t = t * Complex<double>(std::exp(-log_mag), 0.0) * conj(phase);
        sum_chart += t;
        out.chart_partial.push_back(sum_chart);
      }

      // extend the derivative products along the critical value orbit
      const SpherePoint<R>& xi_next = po.points[static_cast<size_t>(n + 1)];
      if (n + 1 < m) {
        R fsharp = f.spherical_derivative(xi_next);
        double lf = log_as_double(fsharp);
        log_sph += lf;
        if (log_sph < -700.0) {
          throw MapError("transversality: derivative underflow at time " +
                         std::to_string(n + 1));
        }
        auto mul = chart_multiplier(f, xi_next);
        if (!mul) {
          out.chart_ok = false;
        } else {
          log_mag += mul->first;
          phase = phase * mul->second;
        }
      }
    }

    // cross-check ratio from the velocity recursion: xi'_m / Df^(m-1)(v)
    const SpherePoint<R>& last = po.points[static_cast<size_t>(m)];
    if (norm(last.w) == 0) {
      out.chart_ok = false;
      out.xi_ratio = Complex<double>(std::numeric_limits<double>::quiet_NaN(), 0.0);
    } else {
      const Complex<R>& xp = po.xi_prime[static_cast<size_t>(m)];
      Complex<double> xd(to_double(xp.re), to_double(xp.im));
      out.xi_ratio = xd * Complex<double>(std::exp(-log_mag), 0.0) * conj(phase);
    }
    if (!out.chart_partial.empty()) {
      Complex<double> lim = out.chart_partial.back();
      double mag = std::sqrt(lim.re * lim.re + lim.im * lim.im);
      out.nondegenerate = mag > out.threshold && std::isfinite(mag);
    }
    return out;
  }

 private:
  void check_radius(const R& a) const {
    R aa = a < 0 ? R(-a) : a;
    if (aa > R(eps_)) {
      throw MapError("family: parameter outside the configured radius");
    }
  }

  Poly<R> base_wron_affine() const { return base_.wronskian_form(); }

  // chart derivative f'(xi) = w^2 W(z,w)/(d F2(z,w)^2) as (log magnitude, phase)
  std::optional<std::pair<double, Complex<double>>> chart_multiplier(
      const RationalMap<R>& f, const SpherePoint<R>& p) const {
    Complex<R> wv = horner_homogeneous(f.wronskian_form(), 2 * d_ - 2, p.z, p.w);
    Complex<R> f2 = horner_homogeneous(f.denominator(), d_, p.z, p.w);
    if (norm(f2) == 0 || norm(wv) == 0) return std::nullopt;
    Complex<R> val = p.w * p.w * wv;
    double lm = 0.5 * (log_as_double(norm(val)) - log_as_double(norm(f2) * norm(f2))) -
                std::log(static_cast<double>(d_));
    // phase of val / f2^2
    Complex<R> ph = val / f2;
    ph = ph / f2;
    R m = abs(ph);
    if (m == 0) return std::nullopt;
    Complex<double> unit(to_double(ph.re / m), to_double(ph.im / m));
    return std::make_pair(lm, unit);
  }

  bool newton_refine(const Poly<R>& g, const Poly<R>& dg, const R& a, Complex<R>& x) const {
    Poly<R> ga = g;
    ga.resize(std::max(g.size(), dg.size()), Complex<R>(R(0), R(0)));
    for (size_t i = 0; i < dg.size(); ++i) ga[i] += dg[i] * Complex<R>(a, R(0));
    Poly<R> gp = derivative(ga);
    Complex<R> cur = x;
    R tol = R(std::pow(2.0, -0.75 * static_cast<double>(precision_bits<R>())));
    for (int it = 0; it < 60; ++it) {
      Complex<R> num = horner(ga, cur);
      Complex<R> den = horner(gp, cur);
      if (norm(den) == 0) return false;
      Complex<R> dx = num / den;
      cur -= dx;
      R scale = abs(cur);
      if (scale < R(1)) scale = R(1);
      if (abs(dx) <= tol * scale) {
        if (abs(cur) > R(1e6)) return false;  // left the affine chart
        x = cur;
        return true;
      }
      if (abs(cur) > R(1e8)) return false;
    }
    return false;
  }

  void build_paths() {
    const auto& crit = base_.critical_points();
    base_wron_ = base_.wronskian_form();
    paths_.clear();
    for (const auto& c : crit) {
      CriticalPath<R> p;
      p.base = c;
      p.at_infinity = c.location.at_infinity();
      p.moving = moving_ && !p.at_infinity;
      paths_.push_back(p);
    }
    if (moving_) {
      // a critical point at infinity persists only if the direction cannot
      // raise the Wronskian degree on the parameter interval
      int top = degree(base_wron_);
      for (int m = top + 1; m < static_cast<int>(dwron_.size()); ++m) {
        const auto& c = dwron_[static_cast<size_t>(m)];
        if (!(c.re == 0 && c.im == 0)) {
          throw MapError("family: critical point at infinity does not persist");
        }
      }
      if (top >= 0 && top < static_cast<int>(dwron_.size())) {
        R lead_move = abs(dwron_[static_cast<size_t>(top)]);
        R lead_base = abs(base_wron_[static_cast<size_t>(top)]);
        if (lead_move * R(eps_) > R(0.5) * lead_base) {
          throw MapError("family: critical multiplicities may change on the interval");
        }
      }
    }
    // collision scan: does some other critical point lie on the forward
    // orbit? The point itself reappearing is a cycle, which is fine.
    for (size_t i = 0; i < paths_.size(); ++i) {
      SpherePoint<R> p = paths_[i].base.location;
      for (int k = 0; k < 64 && !paths_[i].collides; ++k) {
        p = base_.evaluate(p);
        for (size_t j = 0; j < paths_.size(); ++j) {
          if (j == i) continue;
          if (chordal(p, paths_[j].base.location) < 1e-12) {
            paths_[i].collides = true;
            break;
          }
        }
      }
    }
  }

  void validate_structure() const {
    const double probes[] = {0.0, 0.5, -0.5, 1.0, -1.0};
    for (double t : probes) {
      R a = R(eps_) * R(t);
      RationalMap<R> f = map_at(a);
      auto crit = critical_set_at(a);
      if (crit.size() != paths_.size()) {
        throw MapError("family: critical point count changed on the interval");
      }
      for (const auto& c : crit) {
        if (!(to_double(f.spherical_derivative(c.location)) < 1e-8)) {
          throw MapError("family: continued point is not critical at a probe parameter");
        }
      }
      for (size_t i = 0; i < crit.size(); ++i) {
        for (size_t j = i + 1; j < crit.size(); ++j) {
          if (chordal(crit[i].location, crit[j].location) < 1e-9) {
            throw MapError("family: critical points collide on the interval");
          }
        }
      }
    }
  }

  Poly<R> num_, den_, dir_;
  double eps_;
  RationalMap<R> base_;
  int d_ = 0;
  Poly<R> num_pad_, den_pad_, dir_pad_;
  Poly<R> base_wron_, dwron_;
  Poly<R> u_num_, u_den_;
  int u_deg_ = 0;
  bool moving_ = false;
  std::vector<CriticalPath<R>> paths_;
};

// |Df_a^n(v_l(a)) / Df_b^n(v_l(b)) - 1| through the two derivative ledgers.
template <class R>
double distortion_ratio(const RationalFamily<R>& fam, int l, const R& a, const R& b,
                        int n) {
  OrbitTrace<R> ta = fam.value_orbit(l, a, n);
  OrbitTrace<R> tb = fam.value_orbit(l, b, n);
  if (ta.certified_horizon < n || tb.certified_horizon < n) {
    throw MapError("distortion_ratio: precision exhausted before n");
  }
  return std::abs(std::exp(ta.ledger[static_cast<size_t>(n)] -
                           tb.ledger[static_cast<size_t>(n)]) -
                  1.0);
}

// Bundled base families available by name.
template <class R>
RationalFamily<R> make_builtin_family(const std::string& name, double param_radius) {
  auto poly = [](std::initializer_list<double> cs) {
    Poly<R> p;
    for (double c : cs) p.push_back(Complex<R>(R(c), R(0)));
    return p;
  };
  if (name == "lattes2") {
    // f_a(z) = 1 + a - 2/z^2; direction u = 1
    return RationalFamily<R>(poly({-2.0, 0.0, 1.0}), poly({0.0, 0.0, 1.0}),
                             poly({0.0, 0.0, 1.0}), param_radius);
  }
  throw MapError("unknown builtin family: " + name);
}

}  // namespace cex
