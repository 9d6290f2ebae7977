#pragma once

// Phase 2: place every session of an assigned patient in time and space.

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rsp/feas.hpp"
#include "rsp/prune.hpp"
#include "rsp/rng.hpp"
#include "rsp/solve_common.hpp"

namespace rsp {

namespace agenda_detail {

using Cost6 = std::array<std::int64_t, 6>;

inline Cost6& operator+=(Cost6& a, const Cost6& b) {
  for (std::size_t i = 0; i < 6; ++i) a[i] += b[i];
  return a;
}
inline Cost6& operator-=(Cost6& a, const Cost6& b) {
  for (std::size_t i = 0; i < 6; ++i) a[i] -= b[i];
  return a;
}
inline Cost6 operator+(Cost6 a, const Cost6& b) { return a += b; }

inline CostVector to_cost(const Cost6& c) { return CostVector{c[0], c[1], c[2], c[3], c[4], c[5]}; }

inline constexpr double kUnitsPerSecond = 8000000;

/// Static, per-session facts the search needs.
struct SessionData {
  bool active = false;
  std::size_t patient = 0;
  std::size_t op = 0;
  bool individual = true;
  bool optional = false;
  int min = 0, ideal = 0;
  std::vector<StartSlot> starts;  // value order: closest to the preference first
  std::size_t unpruned_starts = 0;
  std::vector<std::size_t> locs;
  std::vector<Window> forbidden;
  std::vector<Window> blocked_starts;  // optimized variant: extended starts that can never work
  Cost6 lexmin{};                      // cheapest option, lexicographically
  Cost6 levelmin{};                    // cheapest option per level
};

/// Incrementally maintained partial agenda plus the hard-rule checks that apply to it.
class State {
 public:
  State(const Problem& pb, const DenseBoard& b, Variant v) : pb_(pb), board_(b), variant_(v) {
    const auto& g = pb.grid();
    periods_ = static_cast<std::size_t>(g.num_periods());
    width_ = static_cast<std::size_t>(std::max(1, g.max_slots()));
    const auto ns = pb.num_sessions();
    data_.resize(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      auto& d = data_[s];
      const auto& ss = pb.session(s);
      d.active = session_active(pb, b, s);
      d.patient = pb.patient_of(s);
      d.individual = ss.is_individual();
      d.optional = ss.is_optional();
      d.min = ss.min_length;
      d.ideal = ss.ideal_length;
      d.locs = pb.locations_in(ss.macro_location);
      d.forbidden = pb.patient(d.patient).forbidden;
      if (!d.active) continue;
      d.op = b.op_of_patient[d.patient];
      d.starts = session_starts(pb, b, s, v);
      d.unpruned_starts = session_starts(pb, b, s, Variant::basic).size();
      order_values(s);
      if (v == Variant::optimized) d.blocked_starts = prune_detail::forbidden_starts(pb, s);
      compute_minima(s);
    }

    open_.assign(pb.num_locations() * periods_ * width_, 0);
    for (std::size_t l = 0; l < pb.num_locations(); ++l)
      for (const auto& w : pb.location(l).open)
        if (g.has_period(w.period))
          for (Slot t = std::max(0, w.start); t < std::min(w.end, g.slots_in(w.period)); ++t)
            open_[idx(l, w.period, t)] = 1;

    std::map<std::string, std::size_t> macro_ids;
    loc_macro_.resize(pb.num_locations());
    for (const auto& [name, locs] : pb.macro_locations()) {
      const auto m = macro_locs_.size();
      macro_locs_.push_back(locs);
      for (auto l : locs) loc_macro_[l] = m;
    }
    a12_bad_.assign(macro_locs_.size() * periods_, 0);

    placed_.assign(ns, std::nullopt);
    count_.assign(pb.num_locations() * periods_ * width_, 0);
    op_placed_.assign(pb.num_operators(), {});
    reserved_.assign(pb.num_patients(), 0);
    ind_len_.assign(pb.num_operators(), 0);
  }

  const Problem& problem() const { return pb_; }
  Variant variant() const { return variant_; }
  const SessionData& data(std::size_t s) const { return data_[s]; }
  const std::optional<DensePlacement>& at(std::size_t s) const { return placed_[s]; }
  const DenseAgenda& agenda() const { return placed_; }
  std::int64_t reserved(std::size_t patient) const { return reserved_[patient]; }
  std::int64_t individual_length(std::size_t op) const { return ind_len_[op]; }
  int a12_bad_total() const { return a12_total_; }

  const Window* shift(std::size_t s, int period) const { return pb_.op(data_[s].op).shift_in(period); }

  Cost6 cost_of(std::size_t s, const std::optional<DensePlacement>& p) const {
    Cost6 c{};
    const auto& d = data_[s];
    if (!p) {
      if (d.optional) c[3] = 1;
      return c;
    }
    c[0] = std::abs(p->length - d.ideal);
    const auto& pref = pb_.session(s).preference;
    if (pref && d.individual) {
      const int dper = std::abs(p->period - pref->period);
      const int dstart = p->period == pref->period ? std::abs(p->start - pref->start) : 0;
      if (pref->priority == Priority::high) {
        c[1] = dper;
        c[2] = dstart;
      } else if (d.optional) {
        c[4] = dper;
        c[5] = dstart;
      }
    }
    return c;
  }

  /// Hard rules A2-A8, A10, A11, A13 for placing s at p against everything already placed.
  /// s itself must not be placed.
  bool fits(std::size_t s, const DensePlacement& p) const {
    const auto& d = data_[s];
    const Window* sh = shift(s, p.period);
    if (!sh) return false;
    if (p.length < d.min || p.length > d.ideal) return false;
    if (p.start < sh->start || p.start + p.length > sh->end) return false;
    if (p.before < 0 || p.after < 0 || p.ext_start() < sh->start || p.ext_end() > sh->end) return false;
    if (std::find(d.locs.begin(), d.locs.end(), p.location) == d.locs.end()) return false;
    const auto& forced = pb_.session(s).forced_time;
    if (forced && (forced->period != p.period || forced->slot != p.start)) return false;
    for (const auto& f : d.forbidden)
      if (f.period == p.period && p.ext_start() < f.end && f.start < p.ext_end()) return false;

    for (auto q : pb_.sessions_of(d.patient))
      if (q != s && placed_[q] && placed_[q]->period == p.period) return false;

    for (auto q : op_placed_[d.op]) {
      const auto& o = *placed_[q];
      if (o.period != p.period) continue;
      const auto& e = data_[q];
      if (d.individual && e.individual) {
        if (p.start < o.start + o.length && o.start < p.start + p.length) return false;
        if (p.location == o.location &&
            (fair_slack_violated(d.min, d.ideal, p.length, e.min, e.ideal, o.length) ||
             fair_slack_violated(e.min, e.ideal, o.length, d.min, d.ideal, p.length)))
          return false;
      }
      if (p.location != o.location && p.ext_start() < o.ext_end() && o.ext_start() < p.ext_end()) return false;
    }

    const int cap = pb_.location(p.location).capacity;
    if (cap > 0)
      for (Slot t = p.ext_start(); t < p.ext_end(); ++t) {
        auto i = idx(p.location, p.period, t);
        if (open_[i] && count_[i] + 1 > cap) return false;
      }
    return true;
  }

  void add(std::size_t s, const DensePlacement& p) {
    placed_[s] = p;
    op_placed_[data_[s].op].push_back(s);
    reserved_[data_[s].patient] += p.ext_length();
    if (data_[s].individual) ind_len_[data_[s].op] += p.length;
    for (Slot t = p.ext_start(); t < p.ext_end(); ++t) ++count_[idx(p.location, p.period, t)];
    refresh_a12(p.location, p.period);
  }

  void remove(std::size_t s) {
    const auto p = *placed_[s];
    placed_[s].reset();
    auto& v = op_placed_[data_[s].op];
    v.erase(std::find(v.begin(), v.end(), s));
    reserved_[data_[s].patient] -= p.ext_length();
    if (data_[s].individual) ind_len_[data_[s].op] -= p.length;
    for (Slot t = p.ext_start(); t < p.ext_end(); ++t) --count_[idx(p.location, p.period, t)];
    refresh_a12(p.location, p.period);
  }

  /// Extension bounds for a core placement under the variant, ignoring other sessions.
  ExtBounds ext_bounds(std::size_t s, const DensePlacement& core) const {
    return extension_bounds(pb_, s, *shift(s, core.period), core.start, core.length, variant_);
  }

  /// Longest individual part tried at a start. Only the optimized variant knows that a part
  /// running past the shift end can never be placed; the basic one tries up to IDEAL and lets
  /// the hard-rule check reject it.
  int max_length(std::size_t s, int period, Slot t) const {
    const auto& d = data_[s];
    return variant_ == Variant::basic ? d.ideal : std::min(d.ideal, shift(s, period)->end - t);
  }

  /// Optimized variant: extended starts inside a blocked range never lead anywhere.
  bool ext_start_allowed(std::size_t s, int period, Slot x) const {
    return !prune_detail::in_any(data_[s].blocked_starts, period, x);
  }

  /// Largest extended length reachable from a core placement, ignoring other sessions.
  int max_ext_length(std::size_t s, const DensePlacement& core) const {
    auto e = ext_bounds(s, core);
    int before = 0, after = 0;
    while (before < e.max_before && free_of_forbidden(s, core.period, core.start - before - 1)) ++before;
    while (after < e.max_after && free_of_forbidden(s, core.period, core.start + core.length + after)) ++after;
    return core.length + std::min(e.max_total, before + after);
  }

  bool a12_ok_macro(std::size_t macro) const {
    for (std::size_t per = 0; per < periods_; ++per)
      if (a12_bad_[macro * periods_ + per]) return false;
    return true;
  }
  std::size_t macro_of_location(std::size_t l) const { return loc_macro_[l]; }
  std::size_t num_macros() const { return macro_locs_.size(); }

 private:
  std::size_t idx(std::size_t loc, int per, Slot t) const {
    return (loc * periods_ + static_cast<std::size_t>(per)) * width_ + static_cast<std::size_t>(t);
  }

  bool free_of_forbidden(std::size_t s, int period, Slot t) const {
    for (const auto& f : data_[s].forbidden)
      if (f.period == period && f.contains(t)) return false;
    return true;
  }

  void refresh_a12(std::size_t loc, int per) {
    const auto m = loc_macro_[loc];
    const auto& locs = macro_locs_[m];
    if (locs.size() < 2) return;
    int bad = 0;
    const int slots = pb_.grid().slots_in(per);
    for (Slot t = 0; t < slots; ++t) {
      int hi = count_[idx(locs[0], per, t)], lo = hi;
      for (auto l : locs) {
        hi = std::max(hi, count_[idx(l, per, t)]);
        lo = std::min(lo, count_[idx(l, per, t)]);
      }
      if (hi - lo > 2) ++bad;
    }
    auto& cell = a12_bad_[m * periods_ + static_cast<std::size_t>(per)];
    a12_total_ += bad - cell;
    cell = bad;
  }

  void order_values(std::size_t s) {
    auto& d = data_[s];
    const auto& pref = pb_.session(s).preference;
    auto key = [&](const StartSlot& x) {
      if (!pref) return std::tuple(0, x.first, x.second);
      if (x.first == pref->period) return std::tuple(0, std::abs(x.second - pref->start), x.second);
      return std::tuple(1 + std::abs(x.first - pref->period), x.first, x.second);
    };
    std::stable_sort(d.starts.begin(), d.starts.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  }

  void compute_minima(std::size_t s) {
    auto& d = data_[s];
    std::optional<Cost6> lex;
    Cost6 lvl;
    lvl.fill(std::numeric_limits<std::int64_t>::max());
    auto consider = [&](const Cost6& c) {
      if (!lex || c < *lex) lex = c;
      for (std::size_t i = 0; i < 6; ++i) lvl[i] = std::min(lvl[i], c[i]);
    };
    if (d.optional) consider(cost_of(s, std::nullopt));
    for (auto [per, t] : d.starts)
      for (int len = d.min; len <= max_length(s, per, t); ++len)
        consider(cost_of(s, DensePlacement{per, t, len, 0, 0, 0}));
    if (lex) {
      d.lexmin = *lex;
      d.levelmin = lvl;
    }
  }

  const Problem& pb_;
  const DenseBoard& board_;
  Variant variant_;
  std::size_t periods_ = 0, width_ = 0;
  std::vector<SessionData> data_;
  std::vector<char> open_;
  std::vector<std::size_t> loc_macro_;
  std::vector<std::vector<std::size_t>> macro_locs_;
  std::vector<int> a12_bad_;
  int a12_total_ = 0;

  DenseAgenda placed_;
  std::vector<int> count_;
  std::vector<std::vector<std::size_t>> op_placed_;
  std::vector<std::int64_t> reserved_;
  std::vector<std::int64_t> ind_len_;
};

/// Lexicographic maximum of two vectors.
inline const Cost6& lex_max(const Cost6& a, const Cost6& b) { return a < b ? b : a; }

/// Exhaustive branch and bound: core decisions (period, start, length, location) first, then a
/// feasibility search over supervised extensions for every core that beats the incumbent.
///
/// Sessions are grouped by operator. Restricted to one operator (`only_op`), the search solves a
/// relaxation: other operators' sessions are absent and the room-balance rule A12 is dropped,
/// since it is the one rule that more sessions can repair. Every candidate placement evaluated
/// costs one work unit, so the size of the start domains shows up directly in the effort.
class AgendaBnB {
 public:
  AgendaBnB(const Problem& pb, const DenseBoard& b, Variant v, Budget& budget,
            std::optional<std::size_t> only_op = std::nullopt)
      : pb_(pb), st_(pb, b, v), budget_(budget), relaxed_(only_op.has_value()) {
    for (std::size_t s = 0; s < pb.num_sessions(); ++s)
      if (st_.data(s).active && (!only_op || st_.data(s).op == *only_op)) order_.push_back(s);
    std::stable_sort(order_.begin(), order_.end(), [&](auto a, auto b) {
      const auto &da = st_.data(a), &db = st_.data(b);
      return std::tuple(da.op, da.optional, da.unpruned_starts, pb.session(a).id) <
             std::tuple(db.op, db.optional, db.unpruned_starts, pb.session(b).id);
    });
    const auto n = order_.size();
    suffix_lex_.assign(n + 1, Cost6{});
    suffix_lvl_.assign(n + 1, Cost6{});
    for (std::size_t i = n; i-- > 0;) {
      suffix_lex_[i] = suffix_lex_[i + 1] + st_.data(order_[i]).lexmin;
      suffix_lvl_[i] = suffix_lvl_[i + 1] + st_.data(order_[i]).levelmin;
    }
    remaining_of_patient_.assign(pb.num_patients(), 0);
    for (auto s : order_) ++remaining_of_patient_[st_.data(s).patient];
    for (std::size_t p = 0; p < pb.num_patients(); ++p)
      if (remaining_of_patient_[p] > 0) active_patients_.push_back(p);
    pending_need_.assign(pb.num_operators(), 0);
    shift_total_.assign(pb.num_operators(), 0);
    for (std::size_t o = 0; o < pb.num_operators(); ++o) shift_total_[o] = pb.op(o).shift_slots();
    for (auto s : order_) {
      const auto& d = st_.data(s);
      if (d.individual && !d.optional) pending_need_[d.op] += d.ideal;
    }
    comp_bound_.assign(n + 1, Cost6{});
  }

  /// Operators with at least one active session, in search order.
  std::vector<std::size_t> operators() const {
    std::vector<std::size_t> ops;
    for (auto s : order_)
      if (ops.empty() || ops.back() != st_.data(s).op) ops.push_back(st_.data(s).op);
    return ops;
  }

  /// Lower bounds per operator (indexed by operator) on what its sessions will cost.
  void set_operator_bounds(const std::vector<Cost6>& lb) {
    // Backwards: `inner` sums per-session minima within the current operator, `later` bounds
    // everything after it. At an operator's first session its own bound may be stronger.
    Cost6 inner{}, later{};
    for (std::size_t i = order_.size(); i-- > 0;) {
      const auto op = st_.data(order_[i]).op;
      if (i + 1 < order_.size() && st_.data(order_[i + 1]).op != op) {
        later = comp_bound_[i + 1];  // everything from the next operator on
        inner = Cost6{};
      }
      inner += st_.data(order_[i]).lexmin;
      const bool first_of_op = i == 0 || st_.data(order_[i - 1]).op != op;
      comp_bound_[i] = (first_of_op ? lex_max(inner, lb[op]) : inner) + later;
    }
  }

  /// Stops the search once the shared budget has been used up to `cap` units.
  void set_cap(std::uint64_t cap) { cap_ = cap; }

  /// A mandatory active session with no start at all makes the instance unsatisfiable.
  bool structurally_infeasible() const {
    for (auto s : order_)
      if (!st_.data(s).optional && st_.data(s).starts.empty()) return true;
    return false;
  }

  Cost6 root_bound() const { return lower_bound(0, Cost6{}); }

  /// Searches for agendas strictly better than `bound`; returns false if the budget ran out.
  template <class OnSolution>
  bool run(std::optional<Cost6>& bound, OnSolution&& on_solution) {
    bound_ = &bound;
    on_solution_ = [&](const DenseAgenda& a, const Cost6& c) { on_solution(a, c); };
    return core(0, Cost6{});
  }

 private:
  bool tick() { return budget_.tick() && budget_.used() < cap_; }

  Cost6 lower_bound(std::size_t depth, const Cost6& partial) const {
    Cost6 a = lex_max(partial + suffix_lex_[depth], partial + comp_bound_[depth]);
    Cost6 b = partial + suffix_lvl_[depth];
    std::int64_t energetic = 0;
    for (std::size_t o = 0; o < pending_need_.size(); ++o)
      energetic += std::max<std::int64_t>(0, pending_need_[o] - (shift_total_[o] - st_.individual_length(o)));
    b[0] = partial[0] + std::max(suffix_lvl_[depth][0], energetic);
    return lex_max(a, b);
  }

  bool beats(const Cost6& lb) const { return !*bound_ || lb < **bound_; }

  bool core(std::size_t depth, const Cost6& partial) {
    if (!tick()) return false;
    if (!beats(lower_bound(depth, partial))) return true;
    if (depth == order_.size()) return extensions();

    const auto s = order_[depth];
    const auto& d = st_.data(s);
    const bool counts_need = d.individual && !d.optional;
    if (counts_need) pending_need_[d.op] -= d.ideal;
    bool complete = true;

    for (auto [per, t] : d.starts) {
      // Shorter parts only cost more, so the first length that cannot beat the bound ends the loop.
      for (int len = st_.max_length(s, per, t); len >= d.min && complete; --len) {
        if (!tick()) {
          complete = false;
          break;
        }
        DensePlacement p{per, t, len, 0, 0, 0};
        const Cost6 c = st_.cost_of(s, p);
        if (!beats(partial + c + suffix_lex_[depth + 1])) break;
        for (auto loc : d.locs) {
          p.location = loc;
          if (!tick()) {
            complete = false;
            break;
          }
          if (!st_.fits(s, p)) continue;
          st_.add(s, p);
          complete = descend(s, depth, partial + c);
          st_.remove(s);
          if (!complete) break;
        }
      }
      if (!complete) break;
    }
    if (complete && d.optional) complete = descend(s, depth, partial + st_.cost_of(s, std::nullopt));
    if (counts_need) pending_need_[d.op] += d.ideal;
    return complete;
  }

  bool descend(std::size_t s, std::size_t depth, const Cost6& partial) {
    const auto patient = st_.data(s).patient;
    --remaining_of_patient_[patient];
    bool ok = true;
    if (remaining_of_patient_[patient] == 0) {
      std::int64_t reachable = 0;
      for (auto q : pb_.sessions_of(patient))
        if (st_.at(q)) reachable += st_.max_ext_length(q, *st_.at(q));
      ok = reachable >= pb_.patient(patient).min_daily_length;
    }
    bool complete = !ok || core(depth + 1, partial);
    ++remaining_of_patient_[patient];
    return complete;
  }

  // ---- extension phase -------------------------------------------------------------------

  bool extensions() {
    ext_order_.clear();
    for (auto s : order_)
      if (st_.at(s)) ext_order_.push_back(s);
    std::stable_sort(ext_order_.begin(), ext_order_.end(), [&](auto a, auto b) {
      return std::tuple(st_.macro_of_location(st_.at(a)->location), st_.data(a).patient) <
             std::tuple(st_.macro_of_location(st_.at(b)->location), st_.data(b).patient);
    });
    ext_left_patient_.assign(pb_.num_patients(), 0);
    ext_left_macro_.assign(st_.num_macros(), 0);
    for (auto s : ext_order_) {
      ++ext_left_patient_[st_.data(s).patient];
      ++ext_left_macro_[st_.macro_of_location(st_.at(s)->location)];
    }
    found_ = false;
    return ext(0);
  }

  bool ext(std::size_t i) {
    if (!tick()) return false;
    if (i == ext_order_.size()) {
      for (auto p : active_patients_)
        if (st_.reserved(p) < pb_.patient(p).min_daily_length) return true;
      if (!relaxed_ && st_.a12_bad_total() != 0) return true;
      Cost6 c{};
      for (auto s : order_) c += st_.cost_of(s, st_.at(s));
      if (!beats(c)) return true;
      found_ = true;
      on_solution_(st_.agenda(), c);  // expected to tighten *bound_
      return true;
    }

    const auto s = ext_order_[i];
    const auto core_pl = *st_.at(s);
    const auto patient = st_.data(s).patient;
    const auto macro = st_.macro_of_location(core_pl.location);
    const auto e = st_.ext_bounds(s, core_pl);
    const bool wants_more = st_.reserved(patient) < pb_.patient(patient).min_daily_length;
    const bool optimized = st_.variant() == Variant::optimized;

    options_scratch_.clear();
    for (int lb = 0; lb <= e.max_before; ++lb) {
      if (optimized && lb > 0 && !st_.ext_start_allowed(s, core_pl.period, core_pl.start - lb)) continue;
      for (int la = 0; la <= std::min(e.max_after, e.max_total - lb); ++la) options_scratch_.emplace_back(lb, la);
    }
    auto options = options_scratch_;
    std::stable_sort(options.begin(), options.end(), [&](const auto& a, const auto& b) {
      const int ta = a.first + a.second, tb = b.first + b.second;
      return wants_more ? ta > tb : ta < tb;
    });

    --ext_left_patient_[patient];
    --ext_left_macro_[macro];
    st_.remove(s);
    bool complete = true;
    for (auto [lb, la] : options) {
      DensePlacement p = core_pl;
      p.before = lb;
      p.after = la;
      if (!tick()) {
        complete = false;
        break;
      }
      if (!st_.fits(s, p)) continue;
      st_.add(s, p);
      bool ok = true;
      if (ext_left_patient_[patient] == 0 && st_.reserved(patient) < pb_.patient(patient).min_daily_length)
        ok = false;
      if (ok && !relaxed_ && ext_left_macro_[macro] == 0 && !st_.a12_ok_macro(macro)) ok = false;
      if (ok) complete = ext(i + 1);
      st_.remove(s);
      if (!complete || found_) break;
    }
    st_.add(s, core_pl);
    ++ext_left_patient_[patient];
    ++ext_left_macro_[macro];
    return complete;
  }

  const Problem& pb_;
  State st_;
  Budget& budget_;
  bool relaxed_;
  std::uint64_t cap_ = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::size_t> order_;
  std::vector<Cost6> suffix_lex_, suffix_lvl_, comp_bound_;
  std::vector<int> remaining_of_patient_;
  std::vector<std::int64_t> pending_need_, shift_total_;
  std::optional<Cost6>* bound_ = nullptr;
  std::function<void(const DenseAgenda&, const Cost6&)> on_solution_;

  std::vector<std::size_t> ext_order_;
  std::vector<int> ext_left_patient_, ext_left_macro_;
  std::vector<std::pair<int, int>> options_scratch_;
  std::vector<std::size_t> active_patients_;
  bool found_ = false;
};

/// Penalised local search over complete (possibly infeasible) agendas.
///
/// The search key is (unplaced mandatory sessions, daily-minimum deficit, unbalanced slots,
/// then the six cost levels); moves are accepted only when the key strictly decreases, while
/// ruin-and-recreate steps may also move sideways.
class LocalSearch {
 public:
  using Key = std::array<std::int64_t, 9>;

  LocalSearch(const Problem& pb, const DenseBoard& b, Variant v, Budget& budget, Rng& rng)
      : pb_(pb), st_(pb, b, v), budget_(budget), rng_(rng) {
    for (std::size_t s = 0; s < pb.num_sessions(); ++s)
      if (st_.data(s).active) active_.push_back(s);
    deficit_.assign(pb.num_patients(), 0);
    for (auto s : active_) {
      if (!st_.data(s).optional) ++unplaced_mandatory_;
      else cost_ += st_.cost_of(s, std::nullopt);
    }
    for (auto s : active_) update_deficit(st_.data(s).patient);
  }

  const State& state() const { return st_; }

  Key key() const {
    return {unplaced_mandatory_, deficit_total_, st_.a12_bad_total(), cost_[0], cost_[1], cost_[2],
            cost_[3],            cost_[4],       cost_[5]};
  }
  bool feasible() const { return unplaced_mandatory_ == 0 && deficit_total_ == 0 && st_.a12_bad_total() == 0; }
  const Cost6& cost() const { return cost_; }

  /// Greedy insertion: mandatory sessions first, tightest start domains first.
  void construct() {
    auto order = active_;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      const auto &da = st_.data(a), &db = st_.data(b);
      return std::tuple(da.optional, da.starts.size(), pb_.session(a).id) <
             std::tuple(db.optional, db.starts.size(), pb_.session(b).id);
    });
    for (auto s : order) insert_best(s);
    for (auto s : order) extend_for_deficit(st_.data(s).patient);
    for (auto s : order)
      if (!st_.at(s) && !st_.data(s).optional) repack(s);
    charge();
  }

  /// Moves without improvement after which, once a feasible agenda is known, the exact search
  /// is the better use of the budget.
  static constexpr std::uint64_t kStagnation = 5000;

  /// Runs until the budget reaches `until` units or the search stagnates; `on_feasible` sees
  /// every feasible improvement.
  template <class OnFeasible>
  void run(std::uint64_t until, OnFeasible&& on_feasible) {
    if (active_.empty()) return;
    report(on_feasible);
    std::uint64_t since_improvement = 0;
    while (budget_.used() < until && !budget_.exhausted() && !(best_ && since_improvement >= kStagnation)) {
      const Key before = key();
      if (since_improvement > 400 && rng_.bernoulli(0.05)) ruin_and_recreate();
      else move();
      charge();
      if (key() < before) {
        since_improvement = 0;
        report(on_feasible);
      } else {
        ++since_improvement;
      }
    }
  }

 private:
  template <class OnFeasible>
  void report(OnFeasible& on_feasible) {
    if (feasible() && (!best_ || cost_ < *best_)) {
      best_ = cost_;
      on_feasible(st_.agenda(), cost_);
    }
  }

  // A move costs one unit per placement it checks, so its units are comparable to the exact
  // search's and large moves are not undercharged.
  bool check(std::size_t s, const DensePlacement& p) {
    ++checks_;
    return st_.fits(s, p);
  }
  void charge() { budget_.tick(1 + std::exchange(checks_, 0)); }

  void update_deficit(std::size_t patient) {
    const std::int64_t d = std::max<std::int64_t>(0, pb_.patient(patient).min_daily_length - st_.reserved(patient));
    deficit_total_ += d - deficit_[patient];
    deficit_[patient] = d;
  }

  // Applies a replacement unconditionally if the new placement fits; returns false (and leaves
  // the state untouched) otherwise.
  bool apply(std::size_t s, const std::optional<DensePlacement>& np) {
    const auto old = st_.at(s);
    if (old) st_.remove(s);
    if (np && !check(s, *np)) {
      if (old) st_.add(s, *old);
      return false;
    }
    if (np) st_.add(s, *np);
    cost_ -= st_.cost_of(s, old);
    cost_ += st_.cost_of(s, np);
    if (!st_.data(s).optional) unplaced_mandatory_ += (old ? 1 : 0) - (np ? 1 : 0);
    update_deficit(st_.data(s).patient);
    return true;
  }

  /// Tries a replacement and keeps it only if the key strictly improves.
  bool attempt(std::size_t s, const std::optional<DensePlacement>& np) {
    const Key before = key();
    const auto old = st_.at(s);
    if (!apply(s, np)) return false;
    if (key() < before) return true;
    apply(s, old);
    return false;
  }

  /// Cheapest fitting core (no extensions) for s, if any.
  std::optional<DensePlacement> best_core(std::size_t s) {
    const auto& d = st_.data(s);
    std::optional<DensePlacement> best;
    Cost6 best_cost{};
    for (auto [per, t] : d.starts) {
      const Window* sh = st_.shift(s, per);
      for (int len = std::min(d.ideal, sh->end - t); len >= d.min; --len) {
        DensePlacement p{per, t, len, 0, 0, 0};
        const Cost6 c = st_.cost_of(s, p);
        if (best && !(c < best_cost)) continue;
        for (auto loc : d.locs) {
          p.location = loc;
          if (check(s, p)) {
            best = p;
            best_cost = c;
            break;
          }
        }
      }
    }
    return best;
  }

  void insert_best(std::size_t s) {
    const auto was = st_.at(s);
    if (was) apply(s, std::nullopt);
    if (auto p = best_core(s)) apply(s, *p);
    else if (was) apply(s, was);
  }

  /// Grows extensions one slot at a time until the patient's daily minimum is reached.
  void extend_for_deficit(std::size_t patient) {
    for (auto s : pb_.sessions_of(patient)) {
      while (deficit_[patient] > 0 && st_.at(s)) {
        auto p = *st_.at(s);
        const auto e = st_.ext_bounds(s, p);
        if (p.before + p.after >= e.max_total) break;
        bool grown = false;
        if (p.before < e.max_before && ext_ok(s, p.period, p.start - p.before - 1)) {
          auto q = p;
          ++q.before;
          grown = apply(s, q);
        }
        if (!grown && p.after < e.max_after) {
          auto q = p;
          ++q.after;
          grown = apply(s, q);
        }
        if (!grown) break;
      }
    }
  }

  bool ext_ok(std::size_t s, int period, Slot x) const {
    return st_.variant() == Variant::basic || st_.ext_start_allowed(s, period, x);
  }

  DensePlacement clip(std::size_t s, DensePlacement p) const {
    const Window* sh = st_.shift(s, p.period);
    if (!sh) return p;
    const auto e = extension_bounds(pb_, s, *sh, p.start, p.length, st_.variant());
    p.before = std::clamp(p.before, 0, std::max(0, e.max_before));
    p.after = std::clamp(p.after, 0, std::max(0, e.max_after));
    if (p.before + p.after > e.max_total) p.after = std::max(0, e.max_total - p.before);
    if (p.before + p.after > e.max_total) p.before = std::max(0, e.max_total);
    return p;
  }

  /// Runs `change` and keeps its effect only if the key improves (or stays equal when
  /// `sideways`); `touched` must list every session `change` may modify.
  template <class Change>
  void trial(std::vector<std::size_t> touched, bool sideways, Change&& change) {
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    std::vector<std::optional<DensePlacement>> saved;
    for (auto q : touched) saved.push_back(st_.at(q));
    const Key before = key();
    change();
    const Key after = key();
    if (after < before || (sideways && after == before)) return;
    for (auto q : touched) apply(q, std::nullopt);
    for (std::size_t i = 0; i < touched.size(); ++i)
      if (saved[i]) apply(touched[i], saved[i]);
  }

  std::vector<std::size_t> with_patient_sessions(std::vector<std::size_t> v) const {
    const auto n = v.size();
    for (std::size_t i = 0; i < n; ++i)
      for (auto q : pb_.sessions_of(st_.data(v[i]).patient)) v.push_back(q);
    return v;
  }

  void move() {
    if (unplaced_mandatory_ > 0 && rng_.bernoulli(0.5)) {
      for (std::size_t tries = 0; tries < 4; ++tries) {
        auto s = active_[rng_.index(active_.size())];
        if (!st_.at(s) && !st_.data(s).optional) {
          if (!try_reinsert(s)) rng_.bernoulli(0.5) ? repack(s) : kick_for(s);
          return;
        }
      }
    }
    if (deficit_total_ > 0 && rng_.bernoulli(0.2)) {
      for (std::size_t tries = 0; tries < 8; ++tries) {
        auto s = active_[rng_.index(active_.size())];
        if (deficit_[st_.data(s).patient] > 0) {
          repack(s);
          return;
        }
      }
    }
    const auto s = active_[rng_.index(active_.size())];
    const auto& d = st_.data(s);
    const auto cur = st_.at(s);
    if (!cur) {
      try_reinsert(s);
      return;
    }
    auto p = *cur;
    switch (rng_.index(6)) {
      case 0: {  // shift start
        static constexpr int deltas[] = {-2, -1, 1, 2};
        p.start += deltas[rng_.index(4)];
        attempt(s, clip(s, p));
        break;
      }
      case 1: {  // change length
        p.length += rng_.bernoulli(0.5) ? 1 : -1;
        if (rng_.bernoulli(0.5)) p.start += cur->length - p.length;  // keep the end fixed
        attempt(s, clip(s, p));
        break;
      }
      case 2: {  // change location
        if (d.locs.size() < 2) break;
        p.location = d.locs[rng_.index(d.locs.size())];
        attempt(s, p);
        break;
      }
      case 3: {  // toggle optional
        if (d.optional) attempt(s, std::nullopt);
        break;
      }
      case 4:  // move period or re-place anywhere
        try_reinsert(s);
        break;
      default: {  // transfer or resize extension
        switch (rng_.index(4)) {
          case 0: --p.before, ++p.after; break;
          case 1: ++p.before, --p.after; break;
          case 2: rng_.bernoulli(0.5) ? ++p.before : ++p.after; break;
          default: rng_.bernoulli(0.5) ? --p.before : --p.after; break;
        }
        if (p.before < 0 || p.after < 0) break;
        const auto e = st_.ext_bounds(s, p);
        if (p.before > e.max_before || p.after > e.max_after || p.before + p.after > e.max_total) break;
        if (p.before > 0 && !ext_ok(s, p.period, p.ext_start())) break;
        attempt(s, p);
        break;
      }
    }
  }

  /// Lifts s and puts it at its cheapest fitting core, extending if the patient needs it.
  bool try_reinsert(std::size_t s) {
    const Key before = key();
    trial(with_patient_sessions({s}), false, [&] {
      const auto cur = st_.at(s);
      if (cur) apply(s, std::nullopt);
      auto p = best_core(s);
      if (!p) {
        if (cur) apply(s, cur);
        return;
      }
      apply(s, *p);
      extend_for_deficit(st_.data(s).patient);
    });
    return key() < before;
  }

  /// Lifts all sessions of the operator of s and packs them back at minimum length, earliest
  /// start first, before growing lengths again. Used when s cannot be placed at all.
  void repack(std::size_t s) {
    const auto op = st_.data(s).op;
    std::vector<std::size_t> lifted;
    for (auto q : active_)
      if (st_.data(q).op == op) lifted.push_back(q);
    auto order = lifted;
    rng_.shuffle(order);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      const auto &da = st_.data(a), &db = st_.data(b);
      return std::tuple(da.optional, da.starts.size()) < std::tuple(db.optional, db.starts.size());
    });
    trial(with_patient_sessions(lifted), true, [&] {
      // Lengths sized for the daily minimum first; if that strands a mandatory session (usually
      // through slack fairness), everything goes in at minimum length and extensions cover the rest.
      for (bool shortest : {false, true}) {
        for (auto q : lifted) apply(q, std::nullopt);
        for (auto q : order) insert_compact(q, shortest);
        const bool stranded = std::any_of(order.begin(), order.end(),
                                          [&](auto q) { return !st_.data(q).optional && !st_.at(q); });
        if (!stranded) break;
      }
      for (auto q : order) extend_for_deficit(st_.data(q).patient);
      for (auto q : order) grow(q);
    });
  }

  /// First fitting placement in chronological order, as short as the patient's daily minimum
  /// allows (or at minimum length when `shortest`).
  void insert_compact(std::size_t s, bool shortest = false) {
    const auto& d = st_.data(s);
    const std::int64_t need = pb_.patient(d.patient).min_daily_length - st_.reserved(d.patient);
    const int target = shortest ? d.min : static_cast<int>(std::clamp<std::int64_t>(need, d.min, d.ideal));
    auto starts = d.starts;
    std::sort(starts.begin(), starts.end());
    for (int len = target; len >= d.min; --len)
      for (auto [per, t] : starts)
        for (auto loc : d.locs)
          if (apply(s, DensePlacement{per, t, len, 0, 0, loc})) return;
  }

  /// Lengthens a placed session one slot at a time while it still fits.
  void grow(std::size_t s) {
    while (st_.at(s) && st_.at(s)->length < st_.data(s).ideal) {
      auto p = *st_.at(s);
      ++p.length;
      p = clip(s, p);
      if (!apply(s, p)) break;
    }
  }

  /// Frees room for an unplaceable mandatory session by lifting one session of the same
  /// operator, then re-inserting both.
  void kick_for(std::size_t s) {
    const auto op = st_.data(s).op;
    std::vector<std::size_t> mates;
    for (auto q : active_)
      if (q != s && st_.at(q) && st_.data(q).op == op) mates.push_back(q);
    if (mates.empty()) return;
    const auto victim = mates[rng_.index(mates.size())];
    trial(with_patient_sessions({s, victim}), true, [&] {
      apply(victim, std::nullopt);
      if (auto p = best_core(s)) apply(s, *p);
      insert_best(victim);
      extend_for_deficit(st_.data(s).patient);
      extend_for_deficit(st_.data(victim).patient);
    });
  }

  /// Lifts every session of one operator in one period and re-inserts them in random order.
  void ruin_and_recreate() {
    const auto pick = active_[rng_.index(active_.size())];
    const auto op = st_.data(pick).op;
    const int period = st_.at(pick) ? st_.at(pick)->period : -1;
    std::vector<std::size_t> lifted;
    for (auto q : active_)
      if (st_.data(q).op == op && (period < 0 || !st_.at(q) || st_.at(q)->period == period)) lifted.push_back(q);
    trial(with_patient_sessions(lifted), true, [&] {
      for (auto q : lifted) apply(q, std::nullopt);
      auto order = lifted;
      rng_.shuffle(order);
      std::stable_sort(order.begin(), order.end(),
                       [&](auto a, auto b) { return !st_.data(a).optional && st_.data(b).optional; });
      for (auto q : order) insert_best(q);
      for (auto q : order) extend_for_deficit(st_.data(q).patient);
    });
  }

  const Problem& pb_;
  State st_;
  Budget& budget_;
  Rng& rng_;
  std::uint64_t checks_ = 0;
  std::vector<std::size_t> active_;
  std::int64_t unplaced_mandatory_ = 0;
  std::int64_t deficit_total_ = 0;
  std::vector<std::int64_t> deficit_;
  Cost6 cost_{};
  std::optional<Cost6> best_;
};

}  // namespace agenda_detail

/// Solves the agenda phase for a fixed board.
///
/// Exact mode: greedy seed followed by branch and bound. Anytime mode: greedy insertion and
/// penalised local search for part of the budget, then the same branch and bound seeded with the
/// best agenda found, so small instances still end with an optimality proof.
inline SolveReport<AgendaSolution> solve_agenda(const Instance& inst, const BoardSolution& board,
                                                const SolveConfig& cfg, Variant variant) {
  using namespace agenda_detail;
  cfg.validate();
  if (auto issues = validate_instance(inst); !issues.empty())
    throw std::invalid_argument("invalid instance: " + issues.front().entity + ": " + issues.front().issue);
  const Problem pb(inst);
  const DenseBoard b = to_dense(pb, board);
  if (!board_feasible(pb, b)) throw std::invalid_argument("board is not feasible");

  SolveReport<AgendaSolution> report;
  Budget budget(cfg, kUnitsPerSecond);
  Incumbent<AgendaSolution> inc(cfg, budget, report);
  std::optional<Cost6> best;

  auto offer = [&](const DenseAgenda& a, const Cost6& c) {
    if (best && !(c < *best)) return;
    if (!agenda_feasible(pb, b, a)) return;  // the checker has the last word
    const auto checked = agenda_cost_unchecked(pb, b, a);
    if (checked != to_cost(c)) throw std::logic_error("agenda cost bookkeeping diverged from feas");
    best = c;
    inc.offer(from_dense(pb, a), checked);
  };

  auto finish = [&](Outcome o) {
    report.outcome = o;
    report.work = budget.used();
    report.wall_time = budget.elapsed();
    return report;
  };

  {
    AgendaBnB probe(pb, b, variant, budget);
    if (probe.structurally_infeasible()) return finish(Outcome::Unsatisfiable);
  }

  Rng rng(mix_seed(cfg.seed, 0xA6E4DA));
  {
    LocalSearch ls(pb, b, variant, budget, rng);
    ls.construct();
    if (ls.feasible()) offer(ls.state().agenda(), ls.cost());
    if (cfg.mode == Mode::anytime) ls.run(budget.limit() / 4, offer);
  }

  AgendaBnB bnb(pb, b, variant, budget);
  if (best && !(bnb.root_bound() < *best)) return finish(Outcome::OptimumFound);

  // Operators only interact through location capacity and room balance, so solving each one
  // alone gives a lower bound, and when the separate optima fit together they are the optimum.
  const auto ops = bnb.operators();
  std::vector<Cost6> op_bound(pb.num_operators(), Cost6{});
  std::vector<char> proved_op(pb.num_operators(), 0);
  DenseAgenda merged(pb.num_sessions());
  // An operator left unproved makes the global search hopeless on all but tiny instances, so
  // this phase gets most of what remains. The first round shares it evenly; the second retries
  // the operators that ran out with everything the easy ones left over.
  const std::uint64_t phase_end = budget.used() + (budget.limit() - std::min(budget.limit(), budget.used())) * 7 / 8;
  for (int round = 0; round < 2; ++round) {
    std::vector<std::size_t> todo;
    for (auto op : ops)
      if (!proved_op[op]) todo.push_back(op);
    for (std::size_t i = 0; i < todo.size() && !budget.exhausted(); ++i) {
      AgendaBnB sub(pb, b, variant, budget, todo[i]);
      const auto left = phase_end > budget.used() ? phase_end - budget.used() : 0;
      sub.set_cap(budget.used() + left / (todo.size() - i));
      std::optional<Cost6> sub_best;
      DenseAgenda sub_sol;
      const bool proved = sub.run(sub_best, [&](const DenseAgenda& a, const Cost6& c) {
        sub_best = c;
        sub_sol = a;
      });
      if (proved && !sub_best) return finish(Outcome::Unsatisfiable);
      if (proved) {
        proved_op[todo[i]] = 1;
        op_bound[todo[i]] = *sub_best;
        for (std::size_t s = 0; s < sub_sol.size(); ++s)
          if (sub_sol[s]) merged[s] = sub_sol[s];
      } else {
        op_bound[todo[i]] = sub.root_bound();
      }
    }
  }
  const bool all_proved = std::all_of(ops.begin(), ops.end(), [&](auto op) { return proved_op[op] != 0; });
  if (budget.exhausted()) return finish(best ? Outcome::Satisfiable : Outcome::Unknown);

  Cost6 total{};
  for (auto op : ops) total += op_bound[op];
  if (all_proved && agenda_feasible(pb, b, merged)) {
    offer(merged, total);
    return finish(Outcome::OptimumFound);
  }
  if (best && !(total < *best)) return finish(Outcome::OptimumFound);

  bnb.set_operator_bounds(op_bound);
  const bool complete = bnb.run(best, offer);
  if (complete) return finish(best ? Outcome::OptimumFound : Outcome::Unsatisfiable);
  return finish(best ? Outcome::Satisfiable : Outcome::Unknown);
}

}  // namespace rsp

