#pragma once

// Ground-truth feasibility and cost evaluation for boards and agendas.
// Every solver, the oracle and the service defer to these functions.

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsp/model.hpp"
#include "rsp/solution.hpp"

namespace rsp {

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

/// Board keyed by positions: operator position per patient position (kNoIndex when missing).
struct DenseBoard {
  std::vector<std::size_t> op_of_patient;
};

struct DensePlacement {
  int period = 0;
  Slot start = 0;
  int length = 0;
  int before = 0;
  int after = 0;
  std::size_t location = 0;

  bool operator==(const DensePlacement&) const = default;
  Slot ext_start() const { return start - before; }
  Slot ext_end() const { return start + length + after; }
  int ext_length() const { return length + before + after; }
};

/// Placement per session position; nullopt = not scheduled.
using DenseAgenda = std::vector<std::optional<DensePlacement>>;

class CostUndefined : public std::domain_error {
 public:
  CostUndefined() : std::domain_error("cost undefined") {}
};

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

inline DenseBoard to_dense(const Problem& pb, const BoardSolution& sol) {
  DenseBoard b{std::vector<std::size_t>(pb.num_patients(), kNoIndex)};
  for (const auto& [pid, oid] : sol.assignment) b.op_of_patient[pb.require_patient(pid)] = pb.require_operator(oid);
  return b;
}

inline BoardSolution from_dense(const Problem& pb, const DenseBoard& b) {
  BoardSolution sol;
  for (std::size_t p = 0; p < b.op_of_patient.size(); ++p)
    if (b.op_of_patient[p] != kNoIndex) sol.assignment[pb.patient(p).id] = pb.op(b.op_of_patient[p]).id;
  return sol;
}

inline DenseAgenda to_dense(const Problem& pb, const AgendaSolution& sol) {
  DenseAgenda a(pb.num_sessions());
  for (const auto& [sid, pl] : sol.placements) {
    auto s = pb.require_session(sid);
    if (pl.session != sid) throw StructuralError("placement keyed by session " + std::to_string(sid) +
                                                 " names session " + std::to_string(pl.session));
    a[s] = DensePlacement{pl.period, pl.start, pl.length, pl.before, pl.after, pb.require_location(pl.location)};
  }
  return a;
}

inline AgendaSolution from_dense(const Problem& pb, const DenseAgenda& a) {
  AgendaSolution sol;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (!a[s]) continue;
    const auto& d = *a[s];
    int sid = pb.session(s).id;
    sol.placements[sid] = SessionPlacement{sid, d.period, d.start, d.length, d.before, d.after, pb.location(d.location).id};
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Sinks
// ---------------------------------------------------------------------------

/// Collects full violation records.
struct ViolationSink {
  std::vector<Violation> out;
  RuleMask enabled = ~RuleMask{0};

  bool wants(Rule r) const { return (enabled & bit(r)) != 0; }
  template <class Make>
  void report(Rule r, Make&& make) {
    if (wants(r)) out.push_back(make());
  }
};

/// Records only which rules fire; never builds strings.
struct MaskSink {
  RuleMask enabled = ~RuleMask{0};
  RuleMask fired = 0;

  bool wants(Rule r) const { return (enabled & bit(r)) != 0 && (fired & bit(r)) == 0; }
  template <class Make>
  void report(Rule r, Make&&) {
    fired |= bit(r) & enabled;
  }
};

namespace detail {

inline std::string pent(const Problem& pb, std::size_t p) { return "patient:" + std::to_string(pb.patient(p).id); }
inline std::string oent(const Problem& pb, std::size_t o) { return "operator:" + std::to_string(pb.op(o).id); }
inline std::string sent(const Problem& pb, std::size_t s) { return "session:" + std::to_string(pb.session(s).id); }
inline std::string lent(const Problem& pb, std::size_t l) { return "location:" + std::to_string(pb.location(l).id); }

inline bool overlaps(int a0, int a1, int b0, int b1) { return a0 < b1 && b0 < a1; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Board
// ---------------------------------------------------------------------------

/// Contract time an operator spends on its assigned patients.
///
/// A patient alone at one of its session macro-locations charges its daily minimum there;
/// a patient sharing a macro-location with another of the operator's patients charges that
/// session's minimum length instead. Each patient contributes the sum of its distinct
/// charged values.
inline std::int64_t operator_workload(const Problem& pb, const DenseBoard& b, std::size_t op) {
  std::vector<std::size_t> mine;
  for (std::size_t p = 0; p < b.op_of_patient.size(); ++p)
    if (b.op_of_patient[p] == op) mine.push_back(p);

  std::map<std::string, int> patients_at;
  for (auto p : mine) {
    std::set<std::string> locs;
    for (auto s : pb.sessions_of(p)) locs.insert(pb.session(s).macro_location);
    for (const auto& l : locs) ++patients_at[l];
  }

  std::int64_t total = 0;
  for (auto p : mine) {
    std::set<int> values;
    for (auto s : pb.sessions_of(p)) {
      const auto& ss = pb.session(s);
      if (patients_at[ss.macro_location] < 2) values.insert(pb.patient(p).min_daily_length);
      else values.insert(ss.min_length);
    }
    for (int v : values) total += v;
  }
  return total;
}

template <class Sink>
void check_board(const Problem& pb, const DenseBoard& b, Sink& sink) {
  using namespace detail;
  if (b.op_of_patient.size() != pb.num_patients()) throw StructuralError("board size mismatch");

  for (std::size_t p = 0; p < pb.num_patients(); ++p)
    if (b.op_of_patient[p] == kNoIndex)
      sink.report(Rule::B1, [&] { return Violation{Rule::B1, {pent(pb, p)}, "patient has no assignment"}; });

  for (std::size_t o = 0; o < pb.num_operators(); ++o) {
    const auto& op = pb.op(o);
    std::vector<std::size_t> mine;
    for (std::size_t p = 0; p < pb.num_patients(); ++p)
      if (b.op_of_patient[p] == o) mine.push_back(p);

    if (op.total_time && sink.wants(Rule::B2)) {
      auto w = operator_workload(pb, b, o);
      if (w > *op.total_time)
        sink.report(Rule::B2, [&] {
          return Violation{Rule::B2, {oent(pb, o)},
                           "workload " + std::to_string(w) + " exceeds total_time " + std::to_string(*op.total_time)};
        });
    }
    if (op.max_patients && static_cast<int>(mine.size()) > *op.max_patients)
      sink.report(Rule::B3, [&] {
        return Violation{Rule::B3, {oent(pb, o)},
                         std::to_string(mine.size()) + " patients exceed max " + std::to_string(*op.max_patients)};
      });
    for (const auto& [t, limit] : op.type_limits) {
      auto n = std::count_if(mine.begin(), mine.end(), [&](auto p) { return pb.patient(p).ptype == t; });
      if (n > limit)
        sink.report(Rule::B4, [&] {
          return Violation{Rule::B4, {oent(pb, o)},
                           std::to_string(n) + " patients of type " + t.key() + " exceed limit " + std::to_string(limit)};
        });
    }
    if (!op.is_fictitious())
      for (auto p : mine)
        if (!op.qualifications.count(pb.patient(p).ptype.value))
          sink.report(Rule::B5, [&] {
            return Violation{Rule::B5, {oent(pb, o), pent(pb, p)},
                             "operator not qualified for " + std::string(to_string(pb.patient(p).ptype.value))};
          });
  }
}

inline std::vector<Violation> check_board(const Problem& pb, const BoardSolution& sol) {
  ViolationSink sink;
  check_board(pb, to_dense(pb, sol), sink);
  return std::move(sink.out);
}

inline CostVector board_cost_unchecked(const Problem& pb, const DenseBoard& b) {
  CostVector c(kBoardLevels);
  for (std::size_t p = 0; p < pb.num_patients(); ++p) {
    auto o = b.op_of_patient[p];
    if (o == kNoIndex) continue;
    const auto& pat = pb.patient(p);
    int oid = pb.op(o).id;
    c[0] += preference_weight(pat.preferred_operators, oid);
    c[1] += oid == kFictitiousOperator ? 1 : 0;
    c[2] += preference_weight(pat.history_preferences, oid);
  }
  return c;
}

inline CostVector board_cost(const Problem& pb, const BoardSolution& sol) {
  auto b = to_dense(pb, sol);
  MaskSink sink;
  check_board(pb, b, sink);
  if (sink.fired) throw CostUndefined();
  return board_cost_unchecked(pb, b);
}

// ---------------------------------------------------------------------------
// Agenda
// ---------------------------------------------------------------------------

/// True when a session's patient is assigned to a real operator, i.e. it takes part in the agenda.
inline bool session_active(const Problem& pb, const DenseBoard& b, std::size_t s) {
  auto o = b.op_of_patient[pb.patient_of(s)];
  return o != kNoIndex && !pb.op(o).is_fictitious();
}

/// Slack-fairness patterns between two individual sessions of one operator sharing a location,
/// evaluated for the ordered pair (1, 2). Returns true when any pattern forbids the pair.
inline bool fair_slack_violated(int min1, int ideal1, int len1, int min2, int ideal2, int len2) {
  const int slack1 = ideal1 - len1, slack2 = ideal2 - len2;
  const bool absorbable = slack1 <= ideal2 - min2 && slack2 <= ideal1 - min1;
  if (absorbable && std::abs(slack1 - slack2) > 1) return true;
  if (slack1 > ideal2 - min2 && len2 > min2) return true;
  if (absorbable && ideal2 < ideal1 && slack1 < slack2) return true;
  return false;
}

/// Contribution of one session (scheduled or not) to the six agenda levels.
inline CostVector session_cost(const SessionSpec& ss, const std::optional<DensePlacement>& pl) {
  CostVector c(kAgendaLevels);
  if (!pl) {
    if (ss.is_optional()) c[3] = 1;
    return c;
  }
  c[0] = std::abs(pl->length - ss.ideal_length);
  if (ss.preference && ss.is_individual()) {
    const auto& pref = *ss.preference;
    const int dper = std::abs(pl->period - pref.period);
    const int dstart = pl->period == pref.period ? std::abs(pl->start - pref.start) : 0;
    if (pref.priority == Priority::high) {
      c[1] = dper;
      c[2] = dstart;
    } else if (ss.is_optional()) {
      c[4] = dper;
      c[5] = dstart;
    }
  }
  return c;
}

template <class Sink>
void check_agenda(const Problem& pb, const DenseBoard& b, const DenseAgenda& a, Sink& sink) {
  using namespace detail;
  if (a.size() != pb.num_sessions()) throw StructuralError("agenda size mismatch");
  if (b.op_of_patient.size() != pb.num_patients()) throw StructuralError("board size mismatch");
  const auto& g = pb.grid();

  auto op_of = [&](std::size_t s) { return b.op_of_patient[pb.patient_of(s)]; };
  auto shift_of = [&](std::size_t s, int period) -> const Window* {
    auto o = op_of(s);
    if (o == kNoIndex) return nullptr;
    return pb.op(o).shift_in(period);
  };

  std::vector<std::size_t> placed;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (a[s]) placed.push_back(s);
    else if (session_active(pb, b, s) && !pb.session(s).is_optional())
      sink.report(Rule::A1, [&] { return Violation{Rule::A1, {sent(pb, s)}, "mandatory session not scheduled"}; });
  }

  // Unary rules.
  for (auto s : placed) {
    const auto& ss = pb.session(s);
    const auto& pl = *a[s];
    const Window* shift = g.has_period(pl.period) ? shift_of(s, pl.period) : nullptr;

    if (sink.wants(Rule::A2)) {
      if (!shift)
        sink.report(Rule::A2, [&] { return Violation{Rule::A2, {sent(pb, s)}, "operator has no shift in period"}; });
      else if (pl.start < shift->start || pl.start + pl.length > shift->end)
        sink.report(Rule::A2, [&] { return Violation{Rule::A2, {sent(pb, s)}, "individual part outside operator shift"}; });
      if (pl.length < ss.min_length || pl.length > ss.ideal_length)
        sink.report(Rule::A2, [&] {
          return Violation{Rule::A2, {sent(pb, s)}, "length " + std::to_string(pl.length) + " outside [min, ideal]"};
        });
    }
    if (pb.location(pl.location).macro_location != ss.macro_location)
      sink.report(Rule::A3, [&] {
        return Violation{Rule::A3, {sent(pb, s), lent(pb, pl.location)}, "location outside session macro-location"};
      });
    if (sink.wants(Rule::A4)) {
      bool bad = pl.before < 0 || pl.after < 0;
      if (shift) bad = bad || pl.before > pl.start - shift->start || pl.after > shift->end - pl.start - pl.length;
      if (bad)
        sink.report(Rule::A4, [&] { return Violation{Rule::A4, {sent(pb, s)}, "supervised extension outside shift"}; });
    }
    if (sink.wants(Rule::A11))
      for (const auto& f : pb.patient(pb.patient_of(s)).forbidden)
        if (f.period == pl.period && overlaps(pl.ext_start(), pl.ext_end(), f.start, f.end)) {
          sink.report(Rule::A11, [&] {
            return Violation{Rule::A11, {sent(pb, s), pent(pb, pb.patient_of(s))}, "session overlaps forbidden time"};
          });
          break;
        }
    if (ss.forced_time && (ss.forced_time->period != pl.period || ss.forced_time->slot != pl.start))
      sink.report(Rule::A13, [&] { return Violation{Rule::A13, {sent(pb, s)}, "forced time not respected"}; });
  }

  // Pairwise rules.
  for (std::size_t i = 0; i < placed.size(); ++i) {
    for (std::size_t j = i + 1; j < placed.size(); ++j) {
      const auto s1 = placed[i], s2 = placed[j];
      const auto &p1 = *a[s1], &p2 = *a[s2];
      if (p1.period != p2.period) continue;
      const auto &ss1 = pb.session(s1), &ss2 = pb.session(s2);

      if (pb.patient_of(s1) == pb.patient_of(s2))
        sink.report(Rule::A6, [&] {
          return Violation{Rule::A6, {sent(pb, s1), sent(pb, s2)}, "two sessions of one patient in the same period"};
        });

      const auto o1 = op_of(s1);
      if (o1 == kNoIndex || o1 != op_of(s2)) continue;

      if (ss1.is_individual() && ss2.is_individual()) {
        if (overlaps(p1.start, p1.start + p1.length, p2.start, p2.start + p2.length))
          sink.report(Rule::A5, [&] {
            return Violation{Rule::A5, {sent(pb, s1), sent(pb, s2), oent(pb, o1)}, "individual parts overlap"};
          });
        if (p1.location == p2.location && sink.wants(Rule::A7) &&
            (fair_slack_violated(ss1.min_length, ss1.ideal_length, p1.length, ss2.min_length, ss2.ideal_length,
                                 p2.length) ||
             fair_slack_violated(ss2.min_length, ss2.ideal_length, p2.length, ss1.min_length, ss1.ideal_length,
                                 p1.length)))
          sink.report(Rule::A7, [&] {
            return Violation{Rule::A7, {sent(pb, s1), sent(pb, s2)}, "individual slack not distributed fairly"};
          });
      }
      if (p1.location != p2.location && overlaps(p1.ext_start(), p1.ext_end(), p2.ext_start(), p2.ext_end()))
        sink.report(Rule::A8, [&] {
          return Violation{Rule::A8, {sent(pb, s1), sent(pb, s2), oent(pb, o1)}, "operator in two locations at once"};
        });
    }
  }

  if (sink.wants(Rule::A9)) {
    for (std::size_t p = 0; p < pb.num_patients(); ++p) {
      auto o = b.op_of_patient[p];
      if (o == kNoIndex || pb.op(o).is_fictitious()) continue;
      std::int64_t total = 0;
      for (auto s : pb.sessions_of(p))
        if (a[s]) total += a[s]->ext_length();
      if (total < pb.patient(p).min_daily_length)
        sink.report(Rule::A9, [&] {
          return Violation{Rule::A9, {pent(pb, p)},
                           "reserved " + std::to_string(total) + " < daily minimum " +
                               std::to_string(pb.patient(p).min_daily_length)};
        });
    }
  }

  if (!sink.wants(Rule::A10) && !sink.wants(Rule::A12)) return;

  // Occupancy of extended intervals per (location, period, slot).
  const int periods = g.num_periods();
  const int width = g.max_slots();
  std::vector<int> count(pb.num_locations() * static_cast<std::size_t>(periods * width), 0);
  auto at = [&](std::size_t loc, int per, int t) -> int& {
    return count[(loc * static_cast<std::size_t>(periods) + static_cast<std::size_t>(per)) *
                     static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(t)];
  };
  for (auto s : placed) {
    const auto& pl = *a[s];
    if (!g.has_period(pl.period)) continue;
    const int lo = std::max(0, pl.ext_start()), hi = std::min(g.slots_in(pl.period), pl.ext_end());
    for (int t = lo; t < hi; ++t) ++at(pl.location, pl.period, t);
  }

  if (sink.wants(Rule::A10)) {
    for (std::size_t l = 0; l < pb.num_locations(); ++l) {
      const auto& loc = pb.location(l);
      if (loc.capacity <= 0) continue;
      for (const auto& w : loc.open) {
        if (!g.has_period(w.period)) continue;
        for (int t = std::max(0, w.start); t < std::min(w.end, g.slots_in(w.period)); ++t)
          if (at(l, w.period, t) > loc.capacity) {
            sink.report(Rule::A10, [&] {
              return Violation{Rule::A10, {lent(pb, l)},
                               std::to_string(at(l, w.period, t)) + " concurrent sessions exceed capacity " +
                                   std::to_string(loc.capacity) + " at period " + std::to_string(w.period) +
                                   " slot " + std::to_string(t)};
            });
            break;
          }
      }
    }
  }

  if (sink.wants(Rule::A12)) {
    for (const auto& [macro, locs] : pb.macro_locations()) {
      if (locs.size() < 2) continue;
      for (int per = 0; per < periods; ++per) {
        for (int t = 0; t < g.slots_in(per); ++t) {
          int hi = std::numeric_limits<int>::min(), lo = std::numeric_limits<int>::max();
          std::size_t hi_loc = 0, lo_loc = 0;
          for (auto l : locs) {
            if (at(l, per, t) > hi) hi = at(l, per, t), hi_loc = l;
            if (at(l, per, t) < lo) lo = at(l, per, t), lo_loc = l;
          }
          if (hi - lo > 2) {
            sink.report(Rule::A12, [&] {
              return Violation{Rule::A12, {lent(pb, hi_loc), lent(pb, lo_loc)},
                               "unbalanced use of macro-location " + macro + " (" + std::to_string(hi) + " vs " +
                                   std::to_string(lo) + ") at period " + std::to_string(per) + " slot " +
                                   std::to_string(t)};
            });
            goto next_macro;
          }
        }
      }
    next_macro:;
    }
  }
}

inline std::vector<Violation> check_agenda(const Problem& pb, const BoardSolution& board, const AgendaSolution& sol) {
  ViolationSink sink;
  check_agenda(pb, to_dense(pb, board), to_dense(pb, sol), sink);
  return std::move(sink.out);
}

inline CostVector agenda_cost_unchecked(const Problem& pb, const DenseBoard& b, const DenseAgenda& a) {
  CostVector c(kAgendaLevels);
  for (std::size_t s = 0; s < pb.num_sessions(); ++s)
    if (session_active(pb, b, s)) c += session_cost(pb.session(s), a[s]);
  return c;
}

inline CostVector agenda_cost(const Problem& pb, const BoardSolution& board, const AgendaSolution& sol) {
  auto b = to_dense(pb, board);
  auto a = to_dense(pb, sol);
  MaskSink sink;
  check_agenda(pb, b, a, sink);
  if (sink.fired) throw CostUndefined();
  return agenda_cost_unchecked(pb, b, a);
}

inline bool board_feasible(const Problem& pb, const DenseBoard& b) {
  MaskSink sink;
  check_board(pb, b, sink);
  return sink.fired == 0;
}

inline bool agenda_feasible(const Problem& pb, const DenseBoard& b, const DenseAgenda& a) {
  MaskSink sink;
  check_agenda(pb, b, a, sink);
  return sink.fired == 0;
}

}  // namespace rsp
