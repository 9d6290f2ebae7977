#pragma once

// Brute-force reference solvers for tiny instances. They share only the feas checker with the
// real solvers, never their search code.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rsp/feas.hpp"

namespace rsp {

struct OracleLimits {
  std::size_t max_patients = 5;
  std::size_t max_operators = 3;  // real operators; -1 comes on top
  std::size_t max_sessions = 3;
  int max_slots_per_period = 12;
};

class OracleLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Patient and operator counts bound the board enumeration; sessions and slots bound the agenda one.
inline void check_oracle_limits(const Instance& inst, const OracleLimits& lim, bool agenda) {
  std::size_t real_ops = 0;
  for (const auto& o : inst.operators)
    if (!o.is_fictitious()) ++real_ops;
  if (inst.patients.size() > lim.max_patients) throw OracleLimitError("too many patients for the oracle");
  if (real_ops > lim.max_operators) throw OracleLimitError("too many operators for the oracle");
  if (!agenda) return;
  if (inst.sessions.size() > lim.max_sessions) throw OracleLimitError("too many sessions for the oracle");
  for (int p = 0; p < inst.grid.num_periods(); ++p)
    if (inst.grid.slots_in(p) > lim.max_slots_per_period) throw OracleLimitError("periods too long for the oracle");
}

struct BoardOracleResult {
  CostVector cost;
  BoardSolution solution;
};

/// Every operator choice for every patient, patients in id order and operator ids ascending;
/// the first assignment reaching the minimum cost is returned.
inline std::optional<BoardOracleResult> oracle_board(const Instance& inst, const OracleLimits& lim = {}) {
  check_oracle_limits(inst, lim, false);
  const Problem pb(inst);
  const auto np = pb.num_patients(), no = pb.num_operators();

  std::vector<std::size_t> patients(np), ops(no);
  for (std::size_t i = 0; i < np; ++i) patients[i] = i;
  for (std::size_t i = 0; i < no; ++i) ops[i] = i;
  std::sort(patients.begin(), patients.end(), [&](auto a, auto b) { return pb.patient(a).id < pb.patient(b).id; });
  std::sort(ops.begin(), ops.end(), [&](auto a, auto b) { return pb.op(a).id < pb.op(b).id; });

  std::optional<BoardOracleResult> best;
  if (no == 0) return best;
  std::vector<std::size_t> digit(np, 0);
  DenseBoard b{std::vector<std::size_t>(np, kNoIndex)};
  while (true) {
    for (std::size_t i = 0; i < np; ++i) b.op_of_patient[patients[i]] = ops[digit[i]];
    if (board_feasible(pb, b)) {
      auto c = board_cost_unchecked(pb, b);
      if (!best || c < best->cost) best = BoardOracleResult{c, from_dense(pb, b)};
    }
    // Odometer with the last patient varying fastest keeps the enumeration lexicographic.
    std::size_t i = np;
    while (i > 0 && ++digit[i - 1] == no) digit[--i] = 0;
    if (i == 0) break;
  }
  return best;
}

struct AgendaOracleResult {
  CostVector cost;
  AgendaSolution solution;
};

namespace oracle_detail {

inline constexpr RuleMask kCoreRules =
    bit(Rule::A2) | bit(Rule::A3) | bit(Rule::A5) | bit(Rule::A6) | bit(Rule::A7) | bit(Rule::A13);
inline constexpr RuleMask kExtensionRules = bit(Rule::A4) | bit(Rule::A8) | bit(Rule::A10) | bit(Rule::A11);

struct Fix {
  std::size_t session;
  int period;
  Slot start;
};

/// Plain enumeration of every agenda over the session tuple space.
class AgendaEnumerator {
 public:
  AgendaEnumerator(const Problem& pb, const DenseBoard& b, std::optional<Fix> fix, bool optimize)
      : pb_(pb), b_(b), fix_(fix), optimize_(optimize), a_(pb.num_sessions()) {
    for (std::size_t s = 0; s < pb.num_sessions(); ++s)
      if (session_active(pb, b, s)) order_.push_back(s);
    std::sort(order_.begin(), order_.end(), [&](auto x, auto y) { return pb.session(x).id < pb.session(y).id; });
    if (fix_) {
      auto it = std::find(order_.begin(), order_.end(), fix_->session);
      if (it == order_.end()) throw std::invalid_argument("fixed session is not active");
      std::rotate(order_.begin(), it, it + 1);
    }
  }

  void run() { core(0); }

  bool found() const { return found_; }
  const std::optional<CostVector>& best_cost() const { return best_cost_; }
  const DenseAgenda& best() const { return best_; }

 private:
  bool ok(RuleMask rules) const {
    MaskSink sink;
    sink.enabled = rules;
    check_agenda(pb_, b_, a_, sink);
    return sink.fired == 0;
  }

  bool done() const { return found_ && !optimize_; }

  void core(std::size_t i) {
    if (done()) return;
    if (i == order_.size()) {
      auto c = agenda_cost_unchecked(pb_, b_, a_);
      if (best_cost_ && !(c < *best_cost_)) return;
      leaf_cost_ = c;
      ext(0);
      return;
    }
    const auto s = order_[i];
    const auto& ss = pb_.session(s);
    const auto& g = pb_.grid();
    for (int per = 0; per < g.num_periods(); ++per) {
      if (fix_ && i == 0 && per != fix_->period) continue;
      for (Slot t = 0; t < g.slots_in(per); ++t) {
        if (fix_ && i == 0 && t != fix_->start) continue;
        for (int len = ss.min_length; len <= ss.ideal_length; ++len) {
          for (auto loc : pb_.locations_in(ss.macro_location)) {
            a_[s] = DensePlacement{per, t, len, 0, 0, loc};
            if (ok(kCoreRules)) core(i + 1);
            if (done()) return;
          }
        }
      }
    }
    a_[s].reset();
    if (ss.is_optional() && !(fix_ && i == 0)) core(i + 1);
  }

  void ext(std::size_t i) {
    if (done()) return;
    if (i == order_.size()) {
      if (ok(~RuleMask{0})) {
        found_ = true;
        best_cost_ = leaf_cost_;
        best_ = a_;
      }
      return;
    }
    const auto s = order_[i];
    if (!a_[s]) return ext(i + 1);
    const auto core_pl = *a_[s];
    const int slots = pb_.grid().slots_in(core_pl.period);
    for (int lb = 0; lb <= core_pl.start; ++lb) {
      for (int la = 0; la <= slots - core_pl.start - core_pl.length; ++la) {
        a_[s]->before = lb;
        a_[s]->after = la;
        if (ok(kExtensionRules) && daily_minimum_settled(i)) ext(i + 1);
        if (done() || (found_ && best_cost_ == leaf_cost_)) {
          a_[s] = core_pl;
          return;
        }
      }
    }
    a_[s] = core_pl;
  }

  // Once every session of a patient has its extensions fixed, the patient's reserved time is final.
  bool daily_minimum_settled(std::size_t i) const {
    const auto patient = pb_.patient_of(order_[i]);
    for (std::size_t j = i + 1; j < order_.size(); ++j)
      if (pb_.patient_of(order_[j]) == patient) return true;
    std::int64_t total = 0;
    for (auto q : pb_.sessions_of(patient))
      if (a_[q]) total += a_[q]->ext_length();
    return total >= pb_.patient(patient).min_daily_length;
  }

  const Problem& pb_;
  const DenseBoard& b_;
  std::optional<Fix> fix_;
  bool optimize_;
  std::vector<std::size_t> order_;
  DenseAgenda a_;
  std::optional<CostVector> best_cost_;
  CostVector leaf_cost_;
  DenseAgenda best_;
  bool found_ = false;
};

}  // namespace oracle_detail

/// Minimum-cost agenda by exhaustive enumeration: every period, every grid slot, every length in
/// [MIN, IDEAL], every location of the macro-location and every extension pair, or "unscheduled"
/// for optional sessions. Sessions are enumerated in id order; the first optimum found wins.
inline std::optional<AgendaOracleResult> oracle_agenda(const Instance& inst, const BoardSolution& board,
                                                       const OracleLimits& lim = {}) {
  check_oracle_limits(inst, lim, true);
  const Problem pb(inst);
  const auto b = to_dense(pb, board);
  oracle_detail::AgendaEnumerator e(pb, b, std::nullopt, true);
  e.run();
  if (!e.found()) return std::nullopt;
  return AgendaOracleResult{*e.best_cost(), from_dense(pb, e.best())};
}

/// Whether any feasible agenda starts session `session_id` at (period, slot).
inline bool oracle_exists_feasible_with(const Instance& inst, const BoardSolution& board, int session_id, int period,
                                        Slot start, const OracleLimits& lim = {}) {
  check_oracle_limits(inst, lim, true);
  const Problem pb(inst);
  const auto b = to_dense(pb, board);
  const auto s = pb.require_session(session_id);
  if (!session_active(pb, b, s)) return false;
  oracle_detail::AgendaEnumerator e(pb, b, oracle_detail::Fix{s, period, start}, false);
  e.run();
  return e.found();
}

}  // namespace rsp
