#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cex/constants.hpp"
#include "cex/family.hpp"
#include "cex/returns.hpp"

namespace cex {

// One parameter sample of a partition element: the map at that parameter,
// the current orbit point of the tracked critical value, and a lockstep
// shadow in the next wider lane that certifies every step.
template <class R>
struct SampleFlow {
  using W = Wider<R>;

  R a;
  RationalMap<R> f;
  std::optional<RationalMap<W>> f_wide;  // absent on throwaway trial flows
  std::vector<CriticalPoint<R>> crit;
  std::vector<int> crit_path;  // map critical index -> family path index
  SpherePoint<R> p;
  SpherePoint<W> p_wide;
  double ledger = 0.0;  // log |Df^(n-1)| at the critical value, at time n
  double last_drift = 0.0;
  bool drifted = false;
  double drift_tol = 1e-6;

  void advance() {
    auto st = f.step(p);
    p = st.next;
    ledger += st.log_fsharp;
    if (f_wide) {
      p_wide = f_wide->evaluate(p_wide);
      last_drift = to_double(chordal(SpherePoint<W>::template from<R>(p), p_wide));
      if (!(last_drift <= drift_tol)) drifted = true;
    }
  }

  double log_dist(int* comp = nullptr) const { return log_dist_to_crit(p, crit, comp); }
};

// Build the flow of tracked critical l at parameter a, advanced to the given
// absolute time (time 1 is the critical value itself). Trial flows used only
// to probe split geometry skip the wide shadow.
template <class R>
SampleFlow<R> make_flow(const RationalFamily<R>& fam, const RationalFamily<Wider<R>>& fam_wide,
                        int l, const R& a, int to_time, double drift_tol,
                        bool with_shadow = true) {
  using W = Wider<R>;
  if (to_time < 1) throw MapError("make_flow: time starts at 1");
  auto cs = fam.critical_at(l, a);
  SampleFlow<R> flow{a,          fam.map_at(a),           {}, {}, {},
                     SpherePoint<R>::zero(), SpherePoint<W>::zero()};
  flow.drift_tol = drift_tol;
  flow.crit = flow.f.critical_points();
  flow.p = flow.f.evaluate(cs.location);
  if (with_shadow) {
    W aw = convert_real<W, R>(a);
    auto cs_wide = fam_wide.critical_at(l, aw);
    flow.f_wide = fam_wide.map_at(aw);
    flow.p_wide = flow.f_wide->evaluate(cs_wide.location);
  }

  // align the map's critical list with the family's path indexing
  flow.crit_path.assign(flow.crit.size(), -1);
  for (size_t i = 0; i < flow.crit.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < fam.paths().size(); ++j) {
      auto pj = fam.critical_at(static_cast<int>(j), a);
      double d = to_double(chordal(flow.crit[i].location, pj.location));
      if (d < best) {
        best = d;
        flow.crit_path[i] = static_cast<int>(j);
      }
    }
    if (!(best < 1e-6)) {
      throw MapError("make_flow: critical point does not match any family path");
    }
  }

  for (int t = 1; t < to_time; ++t) flow.advance();
  return flow;
}

enum class ElementStatus { Active, Escaped, Deleted, BlindDeleted };

// A bound-period expansion check waiting for its window to close: registered
// at the return, evaluated once the element reaches time + p. The ledger
// value at the return is stored absolutely so the check survives splits
// (children rebuild their own ledgers but the scale is shared).
struct PendingBound {
  int time = 0;
  int r = 0;
  int p = 0;
  int local_degree = 2;
  double base_ledger = 0.0;
};

inline const char* status_name(ElementStatus s) {
  switch (s) {
    case ElementStatus::Active: return "active";
    case ElementStatus::Escaped: return "escaped";
    case ElementStatus::Deleted: return "deleted";
    case ElementStatus::BlindDeleted: return "blind-deleted";
  }
  return "?";
}

// A parameter interval with three sampled flows and the bookkeeping the
// window loop needs: binding horizon, escape situation, accumulated
// shortfall, and audit anchors.
template <class R>
struct PartitionElement {
  int id = 0;
  int l = 0;
  R a_lo{}, a_hi{};
  ElementStatus status = ElementStatus::Active;
  std::string reason;  // set when status is Deleted

  SampleFlow<R> lo, mid, hi;
  int time = 1;

  PartitionElement(int id_, int l_, R lo_a, R hi_a, SampleFlow<R> flo, SampleFlow<R> fmid,
                   SampleFlow<R> fhi)
      : id(id_),
        l(l_),
        a_lo(std::move(lo_a)),
        a_hi(std::move(hi_a)),
        lo(std::move(flo)),
        mid(std::move(fmid)),
        hi(std::move(fhi)) {}

  int bound_until = 0;
  bool escape_open = false;
  int escape_anchor = 0;
  double shortfall = 0.0;  // accumulated escape shortfall T_n

  // set when the engine's resolution budget ran out: the element keeps
  // iterating and stays deletable, but is never subdivided again and is
  // left out of the fine-scale audit populations
  bool coarse = false;

  int free_returns = 0;
  int bound_steps = 0;

  // doubling audit anchor: the endpoint separation at the last free return.
  // Splits preserve it by re-measuring the child's own endpoints at the
  // anchor time while the flows are rebuilt.
  int last_free_time = -1;
  double last_free_sep = 0.0;

  // expansion checks not yet evaluable; inherited through splits
  std::vector<PendingBound> pending;

  R width() const { return a_hi - a_lo; }

  double diam() const {
    double a = to_double(chordal(lo.p, mid.p));
    double b = to_double(chordal(mid.p, hi.p));
    double c = to_double(chordal(lo.p, hi.p));
    return std::max({a, b, c});
  }

  // Nearest approach to the critical set over the three samples: the
  // discrete surrogate for "the parameter curve meets the neighborhood".
  // Reports the returning component of the closest sample.
  double min_log_dist(int* comp = nullptr, const SampleFlow<R>** which = nullptr) const {
    double best = std::numeric_limits<double>::infinity();
    for (const SampleFlow<R>* s : {&lo, &mid, &hi}) {
      int c = -1;
      double ld = s->log_dist(&c);
      if (ld < best) {
        best = ld;
        if (comp) *comp = c;
        if (which) *which = s;
      }
    }
    return best;
  }

  bool any_drifted() const { return lo.drifted || mid.drifted || hi.drifted; }

  double endpoint_sep() const { return to_double(chordal(lo.p, hi.p)); }

  void advance() {
    lo.advance();
    mid.advance();
    hi.advance();
    ++time;
  }
};

// Whitney size bound at a point inside U: dist / (log dist)^2.
inline double whitney_bound(double log_dist) {
  return std::exp(log_dist) / (log_dist * log_dist);
}

// dist in [e^(-r-1/2), e^(-r+1/2)) around a critical point, as in returns.hpp

template <class R>
PartitionElement<R> seed_element(const RationalFamily<R>& fam,
                                 const RationalFamily<Wider<R>>& fam_wide, int id, int l,
                                 const R& a_lo, const R& a_hi, double drift_tol) {
  R mid = (a_lo + a_hi) / R(2);
  PartitionElement<R> el(id, l, a_lo, a_hi, make_flow(fam, fam_wide, l, a_lo, 1, drift_tol),
                         make_flow(fam, fam_wide, l, mid, 1, drift_tol),
                         make_flow(fam, fam_wide, l, a_hi, 1, drift_tol));
  el.time = 1;
  return el;
}

// Split into m equal parameter intervals. Children share endpoints exactly,
// so widths telescope to the parent width with no measure leakage. Each
// child's flows are rebuilt from scratch and advanced to the parent's time;
// the orbit bookkeeping (binding, escape, shortfall, pending audits) is
// inherited. The doubling-audit anchor survives too: while the flows are
// rebuilt we stop at the anchor time and measure the child's own endpoint
// separation there, which is exactly what the doubling bound quantifies over
// for a nested subinterval.
template <class R>
std::vector<PartitionElement<R>> split_element(const RationalFamily<R>& fam,
                                               const RationalFamily<Wider<R>>& fam_wide,
                                               const PartitionElement<R>& parent, int m,
                                               int* next_id, double drift_tol,
                                               bool with_shadow = true) {
  std::vector<R> bounds;
  bounds.push_back(parent.a_lo);
  for (int j = 1; j < m; ++j) {
    bounds.push_back(parent.a_lo + (parent.a_hi - parent.a_lo) * R(j) / R(m));
  }
  bounds.push_back(parent.a_hi);

  const bool anchored = parent.last_free_time >= 1 && parent.last_free_time <= parent.time;
  const int stop = anchored ? parent.last_free_time : parent.time;

  std::vector<PartitionElement<R>> out;
  out.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    const R& c_lo = bounds[static_cast<size_t>(j)];
    const R& c_hi = bounds[static_cast<size_t>(j + 1)];
    R mid = (c_lo + c_hi) / R(2);
    PartitionElement<R> ch(
        (*next_id)++, parent.l, c_lo, c_hi,
        make_flow(fam, fam_wide, parent.l, c_lo, stop, drift_tol, with_shadow),
        make_flow(fam, fam_wide, parent.l, mid, stop, drift_tol, with_shadow),
        make_flow(fam, fam_wide, parent.l, c_hi, stop, drift_tol, with_shadow));
    ch.time = stop;
    if (anchored) {
      ch.last_free_time = parent.last_free_time;
      ch.last_free_sep = ch.endpoint_sep();
      while (ch.time < parent.time) ch.advance();
    }
    ch.bound_until = parent.bound_until;
    ch.escape_open = parent.escape_open;
    ch.escape_anchor = parent.escape_anchor;
    ch.shortfall = parent.shortfall;
    ch.free_returns = parent.free_returns;
    ch.bound_steps = parent.bound_steps;
    ch.pending = parent.pending;
    out.push_back(std::move(ch));
  }
  return out;
}

// Host curve for the interval bound period of an inessential return: a
// straight segment through the two endpoint representatives, of total
// chordal length e^(-r)/r^2, symmetric about the endpoints, with the central
// part between the endpoints deleted. Returns an empty list when the curve
// already fills the host length.
template <class R>
std::vector<SpherePoint<R>> build_host_curve(const SpherePoint<R>& p_lo,
                                             const SpherePoint<R>& p_hi, int r,
                                             int count = 64) {
  std::vector<SpherePoint<R>> out;
  double g = to_double(chordal(p_lo, p_hi));
  if (!(g > 0)) return out;
  double host_len = std::exp(-static_cast<double>(r)) / (static_cast<double>(r) * r);
  if (!(host_len > g)) return out;

  // align the homogeneous representatives so interpolation is short
  Complex<R> s = p_lo.z * conj(p_hi.z) + p_lo.w * conj(p_hi.w);
  R sa = abs(s);
  if (sa == 0) return out;  // antipodal endpoints; no meaningful segment
  Complex<R> phase = s;
  phase /= sa;
  Complex<R> hz = p_hi.z * phase;
  Complex<R> hw = p_hi.w * phase;

  double ext = (host_len - g) / (2.0 * g);  // flank length in curve units
  int per_flank = count / 2;
  for (int k = 1; k <= per_flank; ++k) {
    double t = -ext * k / per_flank;
    for (int side = 0; side < 2; ++side) {
      R tt = R(side == 0 ? t : 1.0 - t);
      Complex<R> fz = p_lo.z + (hz - p_lo.z) * tt;
      Complex<R> fw = p_lo.w + (hw - p_lo.w) * tt;
      if (to_double(norm(fz) + norm(fw)) < 1e-30) continue;
      out.emplace_back(fz, fw);
    }
  }
  return out;
}

// One deletion, kept for reporting and for the star upgrade rule.
template <class R>
struct DeletionRecord {
  int element_id = 0;
  int l = 0;
  R a_lo{}, a_hi{};
  int time = 0;
  std::string reason;
};

// Delete elements of other critical indices that overlap a deletion made in
// the window [alpha_hat n, 2 alpha_hat n]. The donor piece must not be
// smaller than the target: a size inversion means the bookkeeping broke and
// is a hard error. Returns the indices of the upgraded elements.
template <class R>
std::vector<size_t> star_upgrade(std::vector<PartitionElement<R>>& elems,
                                 const std::vector<DeletionRecord<R>>& log, double alpha_hat,
                                 int n) {
  std::vector<size_t> upgraded;
  double t_lo = alpha_hat * n;
  double t_hi = 2.0 * alpha_hat * n;
  for (const auto& rec : log) {
    if (rec.time < t_lo || rec.time > t_hi) continue;
    for (size_t i = 0; i < elems.size(); ++i) {
      auto& el = elems[i];
      if (el.status != ElementStatus::Active || el.l == rec.l) continue;
      bool overlap = !(el.a_hi <= rec.a_lo || el.a_lo >= rec.a_hi);
      if (!overlap) continue;
      if (el.width() > rec.a_hi - rec.a_lo) {
        throw MapError("star upgrade: deleted piece smaller than its target (size inversion)");
      }
      el.status = ElementStatus::Deleted;
      el.reason = "star";
      upgraded.push_back(i);
    }
  }
  return upgraded;
}

}  // namespace cex
