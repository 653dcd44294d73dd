#pragma once

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cex/element.hpp"
#include "cex/history_count.hpp"

namespace cex {

// Rebuild a family in another scalar lane. Coefficients convert exactly when
// widening, which is the only direction the engine uses.
template <class To, class From>
RationalFamily<To> convert_family(const RationalFamily<From>& fam) {
  auto cv = [](const Poly<From>& p) {
    Poly<To> q(p.size());
    for (size_t i = 0; i < p.size(); ++i) q[i] = Complex<To>::template from<From>(p[i]);
    return q;
  };
  return RationalFamily<To>(cv(fam.numerator_padded()), cv(fam.denominator_padded()),
                            cv(fam.direction_padded()), fam.param_radius());
}

struct EssentialReturnRow {
  int l = 0;
  int time = 0;
  double measure = 0.0;
  double deleted = 0.0;
};

struct AuditRow {
  int element_id = 0;
  int l = 0;
  int time = 0;
  std::string what;
  double value = 0.0;
  double bound = 0.0;
};

struct ElementRow {
  double a_lo = 0.0;
  double a_hi = 0.0;
  int l = 0;
  std::string status;
  int last_return = -1;
  double exponent_lower = 0.0;
};

struct WindowReport {
  int index = 0;
  int n_begin = 0;
  int n_end = 0;
  double active_begin = 0.0;
  double active_end = 0.0;
  double deleted_basic = 0.0;
  double deleted_ld = 0.0;
  double deleted_exponent = 0.0;
  double deleted_precision = 0.0;
  double deleted_star = 0.0;
  double blind_deleted = 0.0;
  int elements_end = 0;
  int splits = 0;
  int split_children = 0;
  int ls_splits = 0;  // of the splits, large-scale events outside U
  int free_returns = 0;
  int bound_steps = 0;
  int essential = 0;
  int inessential = 0;
  int pseudo = 0;
  int collision_skipped = 0;
  int doubling_checked = 0;
  int doubling_passed = 0;
  int boundexp_checked = 0;
  int boundexp_passed = 0;
  int escapes_closed = 0;
  int escapes_capped = 0;
  // resolution-budget truncation: pieces frozen this window, their returns
  // (recorded but not audited at the fine scale), and the coarse population
  // left at the window end
  int coarse_new = 0;
  int coarse_returns = 0;
  int coarse_elements = 0;
  double coarse_width = 0.0;
  double ld_bound = 0.0;        // e^(n (eps2 - theta tau)) at the window end
  double ld_deleted_fraction = 0.0;
  double blind_bound = 0.0;     // e^(-q_blind n) at the window end
  double blind_fraction = 0.0;
};

struct ExclusionReport {
  int n1 = 0;
  double omega_width = 0.0;
  double retained_width = 0.0;  // active plus escaped at the end of the run
  double deleted_width = 0.0;
  double retained_fraction = 1.0;
  double conservation_defect = 0.0;
  std::vector<WindowReport> windows;
  std::vector<EssentialReturnRow> essential_rows;  // aggregated per (time, l)
  double worst_essential_ratio = 0.0;  // max over rows of deleted / (measure e^(-alpha nu))
  int essential_total = 0;
  std::vector<AuditRow> violations;
  double doubling_pass_fraction = 1.0;
  double boundexp_pass_fraction = 1.0;
  std::vector<ElementRow> elements;
  std::map<int, int> return_histogram;  // essential returns by depth r
  // admissible depth histories consistent with the observed essential
  // returns; enumerated only while the totals stay small enough for the
  // combinatorial count to be meaningful
  std::string histories_exact = "1";
  std::string histories_bound = "1";
  double star_constant = 4.0;
  // how much of the final retained measure ran coarse (budget-truncated)
  double coarse_fraction = 0.0;
  int resolution_budget = 0;
};

struct EngineParams {
  double epsilon = 1e-6;  // half-width of the seed parameter interval about the base
  int windows = 2;
  double drift_tol = 1e-6;
  int host_samples = 64;
  int max_split = 4096;
  int start_phase_cap = 4096;
  int threads = 1;  // upper bound on workers; the scheduler stays deterministic
  // resolution budget: the partition stops subdividing once this many pieces
  // are alive; further pieces continue coarse (the true partition cardinality
  // grows exponentially in time, so any desk run must truncate somewhere,
  // and the report states how much measure runs coarse)
  int max_elements = 20000;
  // called after each finished window, e.g. for progress output
  std::function<void(const WindowReport&)> on_window;
};

// Drives the parameter exclusion over dyadic time windows: grows the seed
// interval through the start phase, then per window refines the partition at
// free returns, applies the deletion rules, and audits what the theory
// predicts about what was kept.
template <class R>
class ExclusionEngine {
 public:
  ExclusionEngine(RationalFamily<R> fam, ConstantsLedger constants, EngineParams par)
      : fam_(std::move(fam)),
        fam_wide_(convert_family<Wider<R>>(fam_)),
        cst_(constants),
        par_(par) {
    auto bad = cst_.validate();
    if (!bad.empty()) throw MapError("engine: constants ledger invalid: " + bad.front());
    if (!(par_.epsilon > 0) || par_.epsilon > fam_.param_radius()) {
      throw MapError("engine: epsilon must lie in (0, family radius]");
    }
    if (par_.windows < 1) throw MapError("engine: need at least one window");
    log_delta_ = std::log(cst_.delta);
    log_delta_prime_ = std::log(cst_.delta_prime);
    log_kb_ = std::log(cst_.kb);
    // smallest admissible child width: 2^-(bits-8) of the seed width
    min_width_ = R(2) * R(par_.epsilon);
    for (int i = 0; i < precision_bits<R>() - 8; ++i) min_width_ /= R(2);
  }

  ExclusionReport run() {
    seed();
    report_.n1 = start_phase();
    for (int w = 0; w < par_.windows; ++w) run_window(w);
    finalize();
    return report_;
  }

  const std::vector<PartitionElement<R>>& alive() const { return elements_; }
  const std::vector<ElementRow>& graveyard() const { return graveyard_rows_; }
  const ExclusionReport& report() const { return report_; }

 private:
  void seed() {
    R eps = R(par_.epsilon);
    omega_width_ = R(0);
    for (int l : fam_.tracked()) {
      elements_.push_back(seed_element(fam_, fam_wide_, next_id_++, l, -eps, eps,
                                       par_.drift_tol));
      omega_width_ += elements_.back().width();
    }
    if (elements_.empty()) throw MapError("engine: family has no tracked critical paths");
    live_ = static_cast<int>(elements_.size());
    report_.omega_width = to_double(omega_width_);
    report_.resolution_budget = par_.max_elements;
  }

  // Advance every seed until its parameter curve first reaches the full
  // partition scale: the Whitney size at a return, or S outside U. The window
  // grid starts at the latest such time so all flows share it.
  int start_phase() {
    int n1 = 1;
    for (auto& el : elements_) {
      while (true) {
        if (el.time > par_.start_phase_cap) {
          throw MapError("engine: start phase did not reach partition scale");
        }
        double ld = el.min_log_dist();
        double dm = el.diam();
        double bound = ld <= log_delta_ ? whitney_bound(ld) : cst_.S;
        if (dm >= bound) break;
        el.advance();
        if (el.any_drifted()) {
          throw MapError("engine: precision exhausted during the start phase");
        }
      }
      n1 = std::max(n1, el.time);
    }
    for (auto& el : elements_) {
      while (el.time < n1) {
        el.advance();
        if (el.any_drifted()) {
          throw MapError("engine: precision exhausted during the start phase");
        }
      }
    }
    return n1;
  }

  void run_window(int w) {
    const int n_begin = report_.n1 << w;
    const int n_end = report_.n1 << (w + 1);
    WindowReport rep;
    rep.index = w;
    rep.n_begin = n_begin;
    rep.n_end = n_end;
    rep.active_begin = to_double(active_width());

    // deletions made for one critical can force out overlapping elements of
    // the others when they land in the star window
    auto upgraded = star_upgrade(elements_, deletion_log_, cst_.alpha_hat, n_begin);
    for (size_t i : upgraded) {
      record_deletion(elements_[i], n_begin, "star", &rep.deleted_star);
    }
    sweep_dead();
    live_ = static_cast<int>(elements_.size());

    std::vector<PartitionElement<R>> queue = std::move(elements_);
    elements_.clear();
    std::vector<PartitionElement<R>> alive;
    while (!queue.empty()) {
      PartitionElement<R> el = std::move(queue.back());
      queue.pop_back();
      bool consumed = false;
      while (el.status == ElementStatus::Active && el.time < n_end) {
        el.advance();
        if (el.any_drifted()) {
          record_deletion(el, el.time, "precision", &rep.deleted_precision);
          break;
        }
        if (!process_time(el, queue, rep, n_end)) {
          consumed = true;
          break;
        }
      }
      if (consumed) continue;
      if (el.status == ElementStatus::Active) window_end(el, n_end, rep);
      if (el.status == ElementStatus::Active) {
        alive.push_back(std::move(el));
      } else {
        bury(el);
      }
    }
    elements_ = std::move(alive);

    rep.active_end = to_double(active_width());
    rep.elements_end = static_cast<int>(elements_.size());
    R coarse_w(0);
    for (const auto& el : elements_) {
      if (el.coarse) {
        ++rep.coarse_elements;
        coarse_w += el.width();
      }
    }
    rep.coarse_width = to_double(coarse_w);
    rep.ld_bound = std::exp(n_end * (cst_.epsilon2 - cst_.theta * cst_.tau));
    rep.ld_deleted_fraction =
        rep.active_begin > 0 ? rep.deleted_ld / rep.active_begin : 0.0;
    rep.blind_bound = std::exp(-cst_.q_blind * n_end);
    rep.blind_fraction =
        rep.active_begin > 0 ? rep.blind_deleted / rep.active_begin : 0.0;
    report_.windows.push_back(rep);
    if (par_.on_window) par_.on_window(report_.windows.back());
  }

  // A child fits its partition size when its image is within the Whitney
  // bound at its own nearest approach inside U, or within the outside scale
  // S everywhere else.
  bool element_fits(const PartitionElement<R>& el) const {
    double ld = el.min_log_dist();
    double bound = ld <= log_delta_ ? whitney_bound(ld) : cst_.S;
    return el.diam() <= bound;
  }

  // Basic assumption at time n, inclusive, on all three samples.
  bool ba_pass(const PartitionElement<R>& el, int n) const {
    const double ba_floor = log_kb_ - 2.0 * cst_.alpha * n;
    for (const SampleFlow<R>* s : {&el.lo, &el.mid, &el.hi}) {
      if (!(s->log_dist() >= ba_floor)) return false;
    }
    return true;
  }

  // Endpoint separation must at least double between consecutive free
  // returns; the anchor survives splits (split_element re-measures it).
  void doubling_audit(PartitionElement<R>& el, int n, WindowReport& rep) {
    const double sep = el.endpoint_sep();
    if (el.last_free_time >= 1 && el.last_free_sep > 0) {
      ++rep.doubling_checked;
      if (sep >= 2.0 * el.last_free_sep) {
        ++rep.doubling_passed;
      } else {
        if (std::getenv("CEX_DBG")) {
          std::fprintf(stderr,
                       "DBL el%d t%d anchor t%d sep %.3e last %.3e bound_until %d ld %.3f "
                       "diam %.3e width %.3e\n",
                       el.id, n, el.last_free_time, sep, el.last_free_sep, el.bound_until,
                       el.min_log_dist(), el.diam(), to_double(el.width()));
        }
        report_.violations.push_back(
            {el.id, el.l, n, "doubling", sep, 2.0 * el.last_free_sep});
      }
    }
    el.last_free_time = n;
    el.last_free_sep = sep;
  }

  // All events at el.time. Returns false when el was replaced by children
  // (they are pushed onto the queue or buried); deletions keep el in place
  // with its status set.
  bool process_time(PartitionElement<R>& el, std::vector<PartitionElement<R>>& queue,
                    WindowReport& rep, int n_end) {
    resolve_pending(el, rep);

    const int n = el.time;
    int comp = -1;
    const SampleFlow<R>* closest = nullptr;
    const double ld = el.min_log_dist(&comp, &closest);
    const bool in_u = ld <= log_delta_;
    const bool in_up = ld <= log_delta_prime_;
    const double dm = el.diam();
    const bool free_time = n > el.bound_until;

    // an open escape situation closes when the curve regains outside scale
    if (el.escape_open && !in_u && n >= el.escape_anchor && dm >= cst_.S) {
      el.shortfall += n - el.escape_anchor;
      el.escape_open = false;
      ++rep.escapes_closed;
    }

    if (el.coarse) {
      // budget-truncated piece: it keeps flowing and faces every deletion
      // rule, but is never subdivided and skips the fine-scale audits
      if (in_up) {
        if (free_time) ++rep.coarse_returns;
        if (!ba_pass(el, n)) {
          record_deletion(el, n, "basic", &rep.deleted_basic);
          return true;
        }
        if (free_time && in_u && ld <= 2.0 * log_delta_) {
          el.escape_anchor = el.escape_open ? std::max(el.escape_anchor, n) : n;
          el.escape_open = true;
        }
      }
      return true;
    }

    // the partition refines at free times only: at a return inside U to the
    // Whitney size, anywhere else back to the outside scale S when the curve
    // has grown past it (the large-scale event)
    const double bound = in_u ? whitney_bound(ld) : cst_.S;
    if (free_time && dm > bound) {
      auto kids = refine(el, bound, rep);
      if (kids.empty()) {
        if (el.status != ElementStatus::Active || !el.coarse) return true;
        // freshly frozen by the budget: record this step's return coarsely
        return process_time(el, queue, rep, n_end);
      }
      if (!in_u) ++rep.ls_splits;
      for (auto& kid : kids) {
        if (kid.any_drifted()) {
          record_deletion(kid, kid.time, "precision", &rep.deleted_precision);
          bury(kid);
          continue;
        }
        if (!process_time(kid, queue, rep, n_end)) continue;
        if (kid.status == ElementStatus::Active) {
          queue.push_back(std::move(kid));
        } else {
          bury(kid);
        }
      }
      return false;
    }

    if (in_up && free_time) {
      if (in_u) {
        handle_free_return(el, n, comp, closest, ld, dm, rep, n_end);
      } else {
        // pseudo-return: a free-time approach that stays short of U. The
        // basic assumption still applies, but no bound period attaches and
        // the doubling chain is untouched: its anchors are returns into U
        // only, and a pseudo approach right before a fold would re-anchor at
        // the worst moment
        ++rep.pseudo;
        if (!ba_pass(el, n)) {
          record_deletion(el, n, "basic", &rep.deleted_basic);
          return true;
        }
      }
    } else if (in_up) {
      // a visit to U' during a bound period: not a free return, but the
      // basic assumption still applies
      ++el.bound_steps;
      ++rep.bound_steps;
      if (!ba_pass(el, n)) record_deletion(el, n, "basic", &rep.deleted_basic);
    }
    return true;
  }

  // A free return into U: classify, check the basic assumption, open the
  // bound period, and run the per-return audits.
  void handle_free_return(PartitionElement<R>& el, int n, int comp,
                          const SampleFlow<R>* closest, double ld, double dm,
                          WindowReport& rep, int n_end) {
    ++el.free_returns;
    ++rep.free_returns;
    const int r = static_cast<int>(std::ceil(-ld - 0.5));

    const bool essential = dm >= 0.5 * whitney_bound(ld);
    if (essential) {
      ++rep.essential;
    } else {
      ++rep.inessential;
    }

    const bool ba_ok = ba_pass(el, n);
    const double width_d = to_double(el.width());
    if (essential) {
      auto& agg = essential_agg_[{n, el.l}];
      agg.first += width_d;
      if (!ba_ok) agg.second += width_d;
      essential_events_.push_back({n, r});
    }
    if (!ba_ok) {
      record_deletion(el, n, "basic", &rep.deleted_basic);
      return;
    }

    // bound period through the interval machinery; the partner orbit is the
    // returned critical's value orbit at each sampled parameter (fine for a
    // colliding path too: its value orbit is still well defined, it just is
    // not tracked as a separate parameter curve)
    int path = comp >= 0 && closest ? closest->crit_path[static_cast<size_t>(comp)] : -1;
    int p = 0;
    if (path < 0) {
      ++rep.collision_skipped;
    } else {
      const int max_p = n_end - n;  // capped at the window remainder
      if (max_p >= 1) {
        std::vector<IntervalBoundInput<R>> curve = {
            {&el.lo.f, el.lo.p}, {&el.mid.f, el.mid.p}, {&el.hi.f, el.hi.p}};
        std::vector<OrbitTrace<R>> partner_store;
        partner_store.reserve(3);
        for (const SampleFlow<R>* s : {&el.lo, &el.mid, &el.hi}) {
          partner_store.push_back(
              fam_.value_orbit(path, s->a, max_p + 1, par_.drift_tol));
        }
        std::vector<const OrbitTrace<R>*> partners = {
            &partner_store[0], &partner_store[1], &partner_store[2]};
        std::vector<std::vector<CriticalPoint<R>>> crits = {el.lo.crit, el.mid.crit,
                                                            el.hi.crit};
        std::vector<SpherePoint<R>> host;
        if (!essential) {
          host = build_host_curve(el.lo.p, el.hi.p, r, par_.host_samples);
        }
        try {
          // partner comparisons pause while the partner orbit dips below the
          // deep scale delta^2; that is where a collision-borne partner sits
          // exactly on another critical point and the allowance vanishes
          auto bp = bound_period_interval(curve, host, partners, crits, cst_.beta, max_p,
                                          2.0 * log_delta_);
          p = bp.p;
          if (p > 0 && !bp.truncated) {
            el.pending.push_back(
                {n, r, p, closest->crit[static_cast<size_t>(comp)].local_degree,
                 el.mid.ledger});
          }
        } catch (const MapError&) {
          // partner orbit lost certification before the scan finished; the
          // return stays unbound and is excluded from the audits
          report_.violations.push_back({el.id, el.l, n, "partner-exhausted", 0.0, 0.0});
          p = 0;
        }
      }
    }

    doubling_audit(el, n, rep);

    if (p > 0) el.bound_until = n + p;

    // a deep return opens (or extends) an escape situation
    if (ld <= 2.0 * log_delta_) {
      int anchor = n + p;
      el.escape_anchor = el.escape_open ? std::max(el.escape_anchor, anchor) : anchor;
      el.escape_open = true;
    }
  }

  // Freeze el at its current resolution: the budget has no room for more
  // pieces. Sticky for the rest of the run.
  void freeze(PartitionElement<R>& el, WindowReport& rep) {
    el.coarse = true;
    ++rep.coarse_new;
  }

  // Split el into the least number of equal pieces that all fit the
  // partition rule: the Whitney size at their own nearest approach inside U,
  // the outside scale S elsewhere. The search seeds at diam/bound and
  // brackets geometrically with the wide shadows off; the accepted count is
  // rebuilt with full certification. When the curve has grown too far for
  // any admissible count, halving still makes progress and the recursion
  // localizes whatever part of the curve drove the bound. The element
  // freezes instead when the resolution budget has no room.
  std::vector<PartitionElement<R>> refine(PartitionElement<R>& el, double bound,
                                          WindowReport& rep) {
    auto too_narrow = [&](int m) { return el.width() / R(m) < min_width_; };
    if (too_narrow(2)) {
      record_deletion(el, el.time, "precision", &rep.deleted_precision);
      return {};
    }
    // budget headroom, measured in children one split may produce; when even
    // the diameter estimate overflows it, freeze before paying for any trial
    const int avail = par_.max_elements - live_ + 1;
    if (avail < 2) {
      freeze(el, rep);
      return {};
    }
    const double dm = el.diam();
    const double est_d = std::ceil(dm / bound);
    if (est_d > static_cast<double>(avail)) {
      freeze(el, rep);
      return {};
    }

    const int cap = std::min(par_.max_split, avail);
    int m = 2;
    bool least_count = false;
    if (est_d > static_cast<double>(cap)) {
      // too wide for one admissible split: cut as fine as allowed and let the
      // per-child reprocessing finish one level down
      m = cap;
    } else {
      auto fits_m = [&](int trial) {
        int scratch_id = next_id_;
        auto kids =
            split_element(fam_, fam_wide_, el, trial, &scratch_id, par_.drift_tol, false);
        for (const auto& k : kids) {
          if (!element_fits(k)) return false;
        }
        return true;
      };
      // bracket the least sufficient count around the diameter estimate:
      // lo always fails, hi always works
      int seed = std::max(2, static_cast<int>(est_d));
      int lo = 1;
      int hi = -1;
      for (int trial = seed; trial <= cap; trial *= 2) {
        if (too_narrow(trial)) {
          record_deletion(el, el.time, "precision", &rep.deleted_precision);
          return {};
        }
        if (fits_m(trial)) {
          hi = trial;
          break;
        }
        lo = trial;
      }
      if (hi < 0 && lo < cap && !too_narrow(cap) && fits_m(cap)) {
        hi = cap;
      }
      if (hi < 0) {
        if (cap < par_.max_split) {
          // the search was budget-limited, not curvature-limited: freeze
          // rather than churn out children that cannot fit
          freeze(el, rep);
          return {};
        }
        m = 2;  // curvature beat the estimate; halving still makes progress
      } else {
        while (hi - lo > 1) {
          int trial = lo + (hi - lo) / 2;
          if (too_narrow(trial)) break;
          if (fits_m(trial)) {
            hi = trial;
          } else {
            lo = trial;
          }
        }
        m = hi;
        least_count = true;
      }
    }
    if (too_narrow(m)) {
      record_deletion(el, el.time, "precision", &rep.deleted_precision);
      return {};
    }
    auto kids = split_element(fam_, fam_wide_, el, m, &next_id_, par_.drift_tol, true);
    live_ += static_cast<int>(kids.size()) - 1;
    if (least_count) {
      // children inside U are meant to bracket [bound/2, bound]; stragglers
      // far below that band are itemized, not fatal
      for (const auto& k : kids) {
        double kd = k.diam();
        if (k.min_log_dist() <= log_delta_ && kd < bound / 3.0) {
          report_.violations.push_back(
              {k.id, k.l, k.time, "split-underflow", kd, bound / 2.0});
        }
      }
    }
    ++rep.splits;
    rep.split_children += static_cast<int>(kids.size());
    return kids;
  }

  void resolve_pending(PartitionElement<R>& el, WindowReport& rep) {
    for (auto it = el.pending.begin(); it != el.pending.end();) {
      if (it->time + it->p <= el.time) {
        const double gain = el.mid.ledger - it->base_ledger;
        auto core = bound_expansion_core(it->r, it->p, it->local_degree, cst_.Gamma,
                                         cst_.gammaI, 2.0);
        ++rep.boundexp_checked;
        bool ok = core.length_lower && core.length_upper && gain >= core.growth_needed;
        if (ok) {
          ++rep.boundexp_passed;
        } else {
          if (!core.length_lower) {
            report_.violations.push_back({el.id, el.l, it->time, "bound-lower",
                                          static_cast<double>(it->p), core.lower_bound});
          }
          if (!core.length_upper) {
            report_.violations.push_back({el.id, el.l, it->time, "bound-upper",
                                          static_cast<double>(it->p), core.upper_bound});
          }
          if (core.length_lower && core.length_upper) {
            report_.violations.push_back(
                {el.id, el.l, it->time, "bound-growth", gain, core.growth_needed});
          }
        }
        it = el.pending.erase(it);
      } else {
        ++it;
      }
    }
  }

  void window_end(PartitionElement<R>& el, int n_end, WindowReport& rep) {
    resolve_pending(el, rep);
    // an unresolved escape charges the rest of the window and carries over
    if (el.escape_open && el.escape_anchor < n_end) {
      el.shortfall += n_end - el.escape_anchor;
      el.escape_anchor = n_end;
      ++rep.escapes_capped;
    }
    if (el.shortfall >= 6.0 * cst_.h * cst_.alpha * n_end) {
      el.status = ElementStatus::BlindDeleted;
      el.reason = "blind";
      deletion_log_.push_back({el.id, el.l, el.a_lo, el.a_hi, n_end, "blind"});
      deleted_width_ += el.width();
      rep.blind_deleted += to_double(el.width());
      --live_;
      return;
    }
    if (el.shortfall >= cst_.tau * n_end) {
      record_deletion(el, n_end, "large-deviation", &rep.deleted_ld);
      return;
    }
    // restoration: the ledger must certify the bootstrap exponent by now
    if (el.mid.ledger < cst_.gammaB * (n_end - 1)) {
      record_deletion(el, n_end, "exponent", &rep.deleted_exponent);
    }
  }

  void record_deletion(PartitionElement<R>& el, int time, const std::string& reason,
                       double* bucket) {
    el.status = ElementStatus::Deleted;
    el.reason = reason;
    deletion_log_.push_back({el.id, el.l, el.a_lo, el.a_hi, time, reason});
    deleted_width_ += el.width();
    if (bucket) *bucket += to_double(el.width());
    --live_;
  }

  ElementRow make_row(const PartitionElement<R>& el) const {
    ElementRow row;
    row.a_lo = to_double(el.a_lo);
    row.a_hi = to_double(el.a_hi);
    row.l = el.l;
    switch (el.status) {
      case ElementStatus::Active: row.status = "active"; break;
      case ElementStatus::Escaped: row.status = "escaped"; break;
      case ElementStatus::BlindDeleted: row.status = "blind-deleted"; break;
      case ElementStatus::Deleted: row.status = "deleted(" + el.reason + ")"; break;
    }
    row.last_return = el.last_free_time;
    row.exponent_lower = el.time > 1 ? el.mid.ledger / (el.time - 1) : 0.0;
    return row;
  }

  void bury(const PartitionElement<R>& el) { graveyard_rows_.push_back(make_row(el)); }

  void sweep_dead() {
    std::vector<PartitionElement<R>> alive;
    alive.reserve(elements_.size());
    for (auto& el : elements_) {
      if (el.status == ElementStatus::Active) {
        alive.push_back(std::move(el));
      } else {
        bury(el);
      }
    }
    elements_ = std::move(alive);
  }

  R active_width() const {
    R w(0);
    for (const auto& el : elements_) w += el.width();
    return w;
  }

  void finalize() {
    for (auto& el : elements_) {
      if (el.escape_open) el.status = ElementStatus::Escaped;
    }
    R retained = active_width();
    report_.retained_width = to_double(retained);
    report_.deleted_width = to_double(deleted_width_);
    report_.retained_fraction =
        report_.omega_width > 0 ? report_.retained_width / report_.omega_width : 0.0;
    report_.conservation_defect =
        std::abs(to_double(omega_width_ - retained - deleted_width_));
    R coarse_w(0);
    for (const auto& el : elements_) {
      if (el.coarse) coarse_w += el.width();
    }
    report_.coarse_fraction =
        report_.omega_width > 0 ? to_double(coarse_w) / report_.omega_width : 0.0;

    for (const auto& [key, agg] : essential_agg_) {
      report_.essential_rows.push_back({key.second, key.first, agg.first, agg.second});
      double cap = agg.first * std::exp(-cst_.alpha * key.first);
      double ratio = cap > 0 ? agg.second / cap : (agg.second > 0 ? 1e300 : 0.0);
      report_.worst_essential_ratio = std::max(report_.worst_essential_ratio, ratio);
    }
    report_.essential_total = static_cast<int>(essential_events_.size());

    int dbl_checked = 0, dbl_passed = 0, bex_checked = 0, bex_passed = 0;
    for (const auto& wr : report_.windows) {
      dbl_checked += wr.doubling_checked;
      dbl_passed += wr.doubling_passed;
      bex_checked += wr.boundexp_checked;
      bex_passed += wr.boundexp_passed;
    }
    report_.doubling_pass_fraction =
        dbl_checked > 0 ? static_cast<double>(dbl_passed) / dbl_checked : 1.0;
    report_.boundexp_pass_fraction =
        bex_checked > 0 ? static_cast<double>(bex_passed) / bex_checked : 1.0;

    if (!essential_events_.empty()) {
      long long rsum = 0;
      int dmin = essential_events_.front().second;
      for (const auto& [nu, r] : essential_events_) {
        rsum += r;
        dmin = std::min(dmin, r);
        ++report_.return_histogram[r];
      }
      int s = static_cast<int>(essential_events_.size());
      if (rsum <= 96 && s <= 24) {
        report_.histories_exact =
            history_count(static_cast<int>(rsum), s, std::max(1, dmin)).str();
        report_.histories_bound = history_bound(static_cast<int>(rsum), s).str();
      } else {
        report_.histories_exact = "n/a";
        report_.histories_bound = "n/a";
      }
    }

    for (const auto& el : elements_) report_.elements.push_back(make_row(el));
    report_.elements.insert(report_.elements.end(), graveyard_rows_.begin(),
                            graveyard_rows_.end());
  }

  RationalFamily<R> fam_;
  RationalFamily<Wider<R>> fam_wide_;
  ConstantsLedger cst_;
  EngineParams par_;
  double log_delta_ = 0.0;
  double log_delta_prime_ = 0.0;
  double log_kb_ = 0.0;
  R min_width_{};
  R omega_width_{};
  R deleted_width_{};
  int next_id_ = 0;
  int live_ = 0;  // alive elements, measured against the resolution budget
  std::vector<PartitionElement<R>> elements_;
  // dead elements survive only as report rows; keeping their full flows
  // (wide shadows included) was the dominant memory cost of a long run
  std::vector<ElementRow> graveyard_rows_;
  std::vector<DeletionRecord<R>> deletion_log_;
  std::map<std::pair<int, int>, std::pair<double, double>> essential_agg_;
  std::vector<std::pair<int, int>> essential_events_;
  ExclusionReport report_;
};

}  // namespace cex
