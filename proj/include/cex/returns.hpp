#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cex/orbit.hpp"
#include "cex/rational_map.hpp"

namespace cex {

// Nested neighborhoods U' > U > U^2 around the critical points. U^2 always
// has radius delta^2; only the two outer radii are free.
struct NeighborhoodSystem {
  double delta_prime;
  double delta;

  NeighborhoodSystem(double dp, double d) : delta_prime(dp), delta(d) {
    if (!(d > 0) || !(dp > d)) {
      throw std::invalid_argument("NeighborhoodSystem: need 0 < delta < delta_prime");
    }
    if (!(dp < 1)) {
      throw std::invalid_argument("NeighborhoodSystem: delta_prime must stay below 1");
    }
  }

  // closed balls of radius delta_prime must stay pairwise disjoint
  template <class R>
  void validate(const std::vector<CriticalPoint<R>>& crit) const {
    for (size_t i = 0; i < crit.size(); ++i) {
      for (size_t j = i + 1; j < crit.size(); ++j) {
        if (!(chordal(crit[i].location, crit[j].location) > 2 * delta_prime)) {
          throw MapError("NeighborhoodSystem: components overlap at this parameter");
        }
      }
    }
  }
};

enum class ReturnKind { Essential, Inessential, Pseudo, BoundReturn, Unclassified };
enum class DepthClass { Deep, Shallow };

struct ReturnEvent {
  int time = 0;
  int component = -1;
  int depth_r = 0;  // dist in [e^(-r-1/2), e^(-r+1/2))
  ReturnKind kind = ReturnKind::Unclassified;
  DepthClass depth = DepthClass::Shallow;
  int bound_period = 0;
  bool partner_valid = true;
  bool bound_truncated = false;
  int free_period = -1;  // to the next free return; -1 if the trace ends first
  double log_dist = 0.0;
};

inline int depth_from_log_dist(double log_dist) {
  return static_cast<int>(std::ceil(-log_dist - 0.5));
}

// Core of the pointwise bound period: given log separations from the partner
// orbit (entry j-1 is step j) and the partner's own log distances to the
// critical set, find the largest p with sep_j <= e^(-beta j) dist_j for all
// j <= p. Runs on plain sequences so synthetic fixtures can drive it.
inline int bound_period_scan(const std::vector<double>& log_sep,
                             const std::vector<double>& partner_log_dist,
                             double beta, bool* truncated = nullptr) {
  if (truncated) *truncated = false;
  size_t n = std::min(log_sep.size(), partner_log_dist.size());
  int p = 0;
  for (size_t i = 0; i < n; ++i) {
    double j = static_cast<double>(i + 1);
    if (!(log_sep[i] <= -beta * j + partner_log_dist[i])) return p;
    p = static_cast<int>(i + 1);
  }
  if (truncated) *truncated = true;  // ran out of data while still bound
  return p;
}

// Pointwise bound period of a return at trace index return_index: the orbit
// is compared against the early orbit of the critical point it returned to,
// at the same parameter.
template <class R>
int bound_period_pointwise(const OrbitTrace<R>& trace, int return_index,
                           const OrbitTrace<R>& partner,
                           const std::vector<CriticalPoint<R>>& crit, double beta,
                           bool* truncated = nullptr) {
  if (partner.start_index != 1) {
    throw MapError("bound period: partner must be a critical value orbit");
  }
  if (truncated) *truncated = false;
  int p = 0;
  for (int j = 1;; ++j) {
    if (return_index + j > trace.length()) {
      if (truncated) *truncated = true;
      break;
    }
    if (j - 1 >= static_cast<int>(partner.points.size())) {
      throw MapError("bound period: partner orbit too short; extend beyond time " +
                     std::to_string(j));
    }
    double lsep =
        log_chordal(trace.points[static_cast<size_t>(return_index + j)],
                    partner.points[static_cast<size_t>(j - 1)]);
    double lpd = log_dist_to_crit(partner.points[static_cast<size_t>(j - 1)], crit);
    if (!(lsep <= -beta * j + lpd)) break;
    p = j;
  }
  return p;
}

// Scan an orbit for returns into U', classify their depth, and attach
// pointwise bound periods. Returns inside an active bound period are
// recorded but start no binding of their own. partner_ok[k] is false for
// components whose critical orbit runs into another critical point; returns
// there get an empty bound period and are excluded from expansion audits.
template <class R>
std::vector<ReturnEvent> detect_returns(const OrbitTrace<R>& trace,
                                        const std::vector<CriticalPoint<R>>& crit,
                                        const NeighborhoodSystem& nbhd,
                                        const std::vector<OrbitTrace<R>>& partners,
                                        const std::vector<bool>& partner_ok,
                                        double beta) {
  if (partners.size() != crit.size() || partner_ok.size() != crit.size()) {
    throw MapError("detect_returns: one partner orbit per critical component");
  }
  std::vector<ReturnEvent> out;
  const double log_dp = std::log(nbhd.delta_prime);
  const double log_d = std::log(nbhd.delta);
  const double log_d2 = 2.0 * std::log(nbhd.delta);
  int bound_until = -1;
  int last_free = -1;
  int first = trace.start_index == 0 ? 1 : 0;  // the critical point itself is not a return
  for (int i = first; i <= trace.length(); ++i) {
    int nu = i + trace.start_index;
    int comp = -1;
    double ld = log_dist_to_crit(trace.points[static_cast<size_t>(i)], crit, &comp);
    if (!(ld <= log_dp)) continue;
    ReturnEvent ev;
    ev.time = nu;
    ev.component = comp;
    ev.log_dist = ld;
    ev.depth_r = depth_from_log_dist(ld);
    ev.depth = ld <= log_d2 ? DepthClass::Deep : DepthClass::Shallow;
    if (nu <= bound_until) {
      ev.kind = ReturnKind::BoundReturn;
      ev.partner_valid = partner_ok[static_cast<size_t>(comp)];
      out.push_back(ev);
      continue;
    }
    ev.kind = ld > log_d ? ReturnKind::Pseudo : ReturnKind::Unclassified;
    if (partner_ok[static_cast<size_t>(comp)]) {
      bool trunc = false;
      ev.bound_period = bound_period_pointwise(trace, i, partners[static_cast<size_t>(comp)],
                                               crit, beta, &trunc);
      ev.bound_truncated = trunc;
    } else {
      ev.partner_valid = false;
    }
    bound_until = nu + ev.bound_period;
    if (last_free >= 0) {
      out[static_cast<size_t>(last_free)].free_period =
          nu - (out[static_cast<size_t>(last_free)].time +
                out[static_cast<size_t>(last_free)].bound_period);
    }
    last_free = static_cast<int>(out.size());
    out.push_back(ev);
  }
  return out;
}

// One starting point of the interval bound condition: a curve sample is
// iterated under the map at its own parameter.
template <class R>
struct IntervalBoundInput {
  const RationalMap<R>* map = nullptr;
  SpherePoint<R> start;
};

struct IntervalBoundResult {
  int p = 0;
  bool truncated = false;
  bool stable = true;  // halving the host sampling kept the same p
};

// Interval version of the bound period: every curve sample continues under
// its own parameter, every host point under every sampled parameter, and the
// separation condition must hold against the partner orbit at every sampled
// parameter simultaneously.
//
// skip_log_dist handles partner orbits that pass through (or next to) another
// critical point, as happens when one critical value lands on a second
// critical point of the same map: there the allowance e^(-beta j) * dist
// vanishes and the comparison carries no information, while the local degree
// already controls the curve through such a step. Comparisons at indices
// where the partner sits below this log-distance are skipped; the default
// never skips.
template <class R>
IntervalBoundResult bound_period_interval(
    const std::vector<IntervalBoundInput<R>>& curve,
    const std::vector<SpherePoint<R>>& host,
    const std::vector<const OrbitTrace<R>*>& partners,
    const std::vector<std::vector<CriticalPoint<R>>>& crit_per_param, double beta,
    int max_p, double skip_log_dist = -std::numeric_limits<double>::infinity()) {
  if (curve.empty()) throw MapError("bound_period_interval: no curve samples");
  if (partners.size() != curve.size() || crit_per_param.size() != curve.size()) {
    throw MapError("bound_period_interval: one partner and critical set per parameter");
  }
  for (const auto* t : partners) {
    if (t->start_index != 1) {
      throw MapError("bound_period_interval: partners must be critical value orbits");
    }
  }

  auto run = [&](size_t host_stride, bool* trunc) -> int {
    std::vector<SpherePoint<R>> pts;
    std::vector<const RationalMap<R>*> maps;
    for (const auto& c : curve) {
      pts.push_back(c.start);
      maps.push_back(c.map);
    }
    for (size_t h = 0; h < host.size(); h += host_stride) {
      for (const auto& c : curve) {
        pts.push_back(host[h]);
        maps.push_back(c.map);
      }
    }
    if (trunc) *trunc = false;
    int p = 0;
    for (int j = 1; j <= max_p; ++j) {
      for (size_t m = 0; m < pts.size(); ++m) pts[m] = maps[m]->evaluate(pts[m]);
      bool hold = true;
      for (size_t b = 0; b < partners.size() && hold; ++b) {
        const auto& ptr = *partners[b];
        if (j - 1 >= static_cast<int>(ptr.points.size())) {
          throw MapError("bound_period_interval: partner orbit too short; extend beyond time " +
                         std::to_string(j));
        }
        const auto& pb = ptr.points[static_cast<size_t>(j - 1)];
        double lpd = log_dist_to_crit(pb, crit_per_param[b]);
        if (lpd <= skip_log_dist) continue;  // vacuous allowance, see above
        double bound = -beta * j + lpd;
        for (const auto& q : pts) {
          if (!(log_chordal(q, pb) <= bound)) {
            hold = false;
            break;
          }
        }
      }
      if (!hold) return p;
      p = j;
    }
    if (trunc) *trunc = true;
    return p;
  };

  IntervalBoundResult out;
  bool trunc_full = false;
  out.p = run(1, &trunc_full);
  out.truncated = trunc_full;
  if (host.size() > 1) {
    int p_half = run(2, nullptr);
    out.stable = (p_half == out.p);
  }
  return out;
}

struct BasicAssumptionResult {
  bool pass = true;
  int first_violation = -1;
};

// Slow recurrence scan on a plain log-distance sequence: entry i belongs to
// absolute time first_time + i, and the inclusive condition is
// log dist >= log Kb - 2 alpha k for all 1 <= k <= up_to.
inline BasicAssumptionResult basic_assumption_scan(const std::vector<double>& log_dist,
                                                   int first_time, double log_Kb,
                                                   double alpha, int up_to) {
  BasicAssumptionResult out;
  for (size_t i = 0; i < log_dist.size(); ++i) {
    int k = first_time + static_cast<int>(i);
    if (k < 1) continue;
    if (k > up_to) break;
    if (!(log_dist[i] >= log_Kb - 2.0 * alpha * k)) {
      out.pass = false;
      out.first_violation = k;
      break;
    }
  }
  return out;
}

template <class R>
BasicAssumptionResult basic_assumption_check(const OrbitTrace<R>& trace,
                                             const std::vector<CriticalPoint<R>>& crit,
                                             double Kb, double alpha, int up_to) {
  std::vector<double> ld;
  ld.reserve(trace.points.size());
  for (const auto& p : trace.points) ld.push_back(log_dist_to_crit(p, crit));
  return basic_assumption_scan(ld, trace.start_index, std::log(Kb), alpha, up_to);
}

struct OutsideExpansion {
  double lambda_hat = 0.0;    // min |Df^n(z)|^(1/n) over samples avoiding U
  double lambda_enter = 0.0;  // same over segments that first re-enter U
  int avoided = 0;            // samples that stayed outside for the horizon
  int entered = 0;            // samples whose first re-entry landed in U
};

// Empirical expansion outside U: sample the sphere, drop the points starting
// inside U, and take the worst per-step growth among orbits that stay out of
// U for the whole horizon. Segments that re-enter U early feed the second
// statistic instead.
template <class R>
OutsideExpansion outside_expansion_estimate(
    const RationalMap<R>& f, const std::vector<CriticalPoint<R>>& crit,
    const NeighborhoodSystem& nbhd, int horizon, int n_samples, uint64_t seed,
    const std::vector<SpherePoint<R>>* sample_override = nullptr) {
  if (horizon < 1) throw MapError("outside_expansion_estimate: horizon must be positive");
  const double log_d = std::log(nbhd.delta);

  std::vector<SpherePoint<R>> samples;
  if (sample_override) {
    samples = *sample_override;
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    samples.reserve(static_cast<size_t>(n_samples));
    while (static_cast<int>(samples.size()) < n_samples) {
      double u = 2.0 * unit(rng) - 1.0;  // area-uniform height on the sphere
      double phi = 6.283185307179586 * unit(rng);
      double rxy = std::sqrt(std::max(0.0, 1.0 - u * u));
      Complex<R> z(R(rxy * std::cos(phi)), R(rxy * std::sin(phi)));
      Complex<R> w(R(1.0 - u), R(0));
      if (to_double(norm(z) + norm(w)) < 1e-12) continue;  // too close to (0:0)
      samples.emplace_back(z, w);
    }
  }

  OutsideExpansion out;
  out.lambda_hat = std::numeric_limits<double>::infinity();
  out.lambda_enter = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (log_dist_to_crit(s, crit) <= log_d) continue;  // starts inside U
    SpherePoint<R> q = s;
    double ledger = 0.0;
    bool entered = false;
    for (int k = 1; k <= horizon; ++k) {
      auto st = f.step(q);
      q = st.next;
      ledger += st.log_fsharp;
      if (log_dist_to_crit(q, crit) <= log_d) {
        double rate = std::exp(ledger / k);
        if (rate < out.lambda_enter) out.lambda_enter = rate;
        ++out.entered;
        entered = true;
        break;
      }
    }
    if (!entered) {
      double rate = std::exp(ledger / horizon);
      if (rate < out.lambda_hat) out.lambda_hat = rate;
      ++out.avoided;
    }
  }
  if (out.avoided == 0) {
    throw MapError("outside_expansion_estimate: U too large for the horizon");
  }
  return out;
}

struct BoundExpansionCheck {
  bool length_lower = false;  // p >= d_i r / (2 Gamma), up to slack
  bool length_upper = false;  // p <= 2 d_i r / gamma, up to slack
  bool growth = false;        // |Df^p| >= e^((gamma/2d_i) p), up to slack
  bool evaluable = false;     // ledger covered the whole bound period
  int p = 0;
  int r = 0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double ledger_gain = 0.0;
  double growth_needed = 0.0;
};

// Length bracket and growth threshold for one return, from raw quantities.
// The growth flag stays false until a ledger gain is supplied.
inline BoundExpansionCheck bound_expansion_core(int r, int p, int local_degree, double Gamma,
                                                double gamma, double slack = 2.0) {
  BoundExpansionCheck out;
  out.p = p;
  out.r = r;
  double di = static_cast<double>(local_degree);
  out.lower_bound = di * r / (2.0 * Gamma) / slack;
  out.upper_bound = 2.0 * di * r / gamma * slack;
  out.length_lower = p >= out.lower_bound;
  out.length_upper = p <= out.upper_bound;
  out.growth_needed = gamma * p / (2.0 * di) - std::log(slack);
  return out;
}

// Audit one return against the expected bound period bracket and the
// derivative growth through the bound period. Reports raw quantities and
// never throws; callers decide what a failure means.
template <class R>
BoundExpansionCheck check_bound_expansion(const OrbitTrace<R>& trace,
                                          const ReturnEvent& ev, int local_degree,
                                          double Gamma, double gamma, double slack = 2.0) {
  BoundExpansionCheck out =
      bound_expansion_core(ev.depth_r, ev.bound_period, local_degree, Gamma, gamma, slack);
  int i0 = ev.time - trace.start_index;
  int i1 = i0 + ev.bound_period;
  if (i0 >= 0 && i1 <= trace.length()) {
    out.evaluable = true;
    out.ledger_gain = trace.ledger[static_cast<size_t>(i1)] -
                      trace.ledger[static_cast<size_t>(i0)];
    out.growth = out.ledger_gain >= out.growth_needed;
  }
  return out;
}

}  // namespace cex
