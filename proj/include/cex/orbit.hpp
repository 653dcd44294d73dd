#pragma once

#include <stdexcept>
#include <vector>

#include "cex/rational_map.hpp"
#include "cex/scalar.hpp"
#include "cex/sphere.hpp"

namespace cex {

// An orbit segment together with its derivative ledger and the horizon up to
// which a shadow run at twice the precision confirmed the points.
//
// points[k] is the k-th iterate of the start point; ledger[k] is the log of
// the spherical derivative of the k-step composition at the start point, so
// ledger[0] == 0 and increments are the per-step log f# values. start_index
// records the absolute time of points[0] (1 for critical value orbits, where
// the ledger is anchored at the critical value rather than the critical
// point, whose first step would poison every entry with -inf).
template <class R>
struct OrbitTrace {
  std::vector<SpherePoint<R>> points;
  std::vector<double> ledger;
  int certified_horizon = 0;
  bool precision_exhausted = false;
  int start_index = 0;

  int length() const { return static_cast<int>(points.size()) - 1; }
};

// Iterate with a lockstep partner in the next wider lane. The trace is
// truncated at the first step where the two lanes drift apart by more than
// divergence_tol in the chordal metric, so everything stored is certified.
template <class R>
OrbitTrace<R> iterate_orbit(const RationalMap<R>& f, const SpherePoint<R>& start,
                            int n, double divergence_tol = 1e-6) {
  using W = Wider<R>;
  if (n < 0) throw std::invalid_argument("iterate_orbit: negative length");

  OrbitTrace<R> out;
  out.points.reserve(static_cast<size_t>(n) + 1);
  out.ledger.reserve(static_cast<size_t>(n) + 1);
  out.points.push_back(start);
  out.ledger.push_back(0.0);

  RationalMap<W> fw = convert_map<W>(f);
  SpherePoint<W> pw = SpherePoint<W>::template from<R>(start);

  for (int k = 0; k < n; ++k) {
    auto s = f.step(out.points.back());
    pw = fw.evaluate(pw);
    double drift = chordal(SpherePoint<W>::template from<R>(s.next), pw);
    if (!(drift <= divergence_tol)) {
      out.precision_exhausted = true;
      out.certified_horizon = k;
      return out;
    }
    out.points.push_back(s.next);
    out.ledger.push_back(out.ledger.back() + s.log_fsharp);
  }
  out.certified_horizon = n;
  return out;
}

struct LyapunovEstimate {
  double lower = 0.0;
  double upper = 0.0;
};

// Min and max of ledger[k]/k over the certified back half of the orbit. The
// two agree when the ledger is exactly linear.
template <class R>
LyapunovEstimate lyapunov_estimates(const OrbitTrace<R>& trace) {
  int h = trace.certified_horizon;
  if (h > trace.length()) h = trace.length();
  if (h < 10) {
    throw std::invalid_argument("lyapunov_estimates: certified horizon below 10");
  }
  LyapunovEstimate est;
  est.lower = std::numeric_limits<double>::infinity();
  est.upper = -std::numeric_limits<double>::infinity();
  for (int k = (h + 1) / 2; k <= h; ++k) {
    double rate = trace.ledger[static_cast<size_t>(k)] / k;
    if (rate < est.lower) est.lower = rate;
    if (rate > est.upper) est.upper = rate;
  }
  return est;
}

}  // namespace cex
