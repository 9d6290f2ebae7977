#pragma once

// Phase 1: assign every patient to an operator.

#include <algorithm>
#include <array>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "rsp/feas.hpp"
#include "rsp/rng.hpp"
#include "rsp/solve_common.hpp"

namespace rsp {

namespace board_detail {

using Cost3 = std::array<std::int64_t, 3>;

inline Cost3 operator+(Cost3 a, const Cost3& b) {
  for (int i = 0; i < 3; ++i) a[i] += b[i];
  return a;
}
inline Cost3 operator-(Cost3 a, const Cost3& b) {
  for (int i = 0; i < 3; ++i) a[i] -= b[i];
  return a;
}

inline CostVector to_cost(const Cost3& c) { return CostVector{c[0], c[1], c[2]}; }

// Roughly calibrated so that the work budget runs out well before the wall-clock cutoff.
inline constexpr double kUnitsPerSecond = 1000000;

/// Precomputed view of the board problem plus the mutable search state.
class BoardSearch {
 public:
  explicit BoardSearch(const Problem& pb) : pb_(pb), np_(pb.num_patients()), no_(pb.num_operators()) {
    std::map<std::string, int> macro_ids;
    for (std::size_t s = 0; s < pb.num_sessions(); ++s)
      macro_ids.emplace(pb.session(s).macro_location, static_cast<int>(macro_ids.size()));
    nm_ = macro_ids.size();

    sessions_.resize(np_);
    macros_.resize(np_);
    for (std::size_t p = 0; p < np_; ++p) {
      for (auto s : pb.sessions_of(p)) {
        int m = macro_ids.at(pb.session(s).macro_location);
        sessions_[p].push_back({m, pb.session(s).min_length});
        if (std::find(macros_[p].begin(), macros_[p].end(), m) == macros_[p].end()) macros_[p].push_back(m);
      }
    }

    // Type-limit slots: limit_slot_[o * np + p] indexes op o's limits, or -1.
    limit_slot_.assign(no_ * np_, -1);
    limits_.resize(no_);
    for (std::size_t o = 0; o < no_; ++o) {
      for (const auto& [t, n] : pb.op(o).type_limits) {
        for (std::size_t p = 0; p < np_; ++p)
          if (pb.patient(p).ptype == t) limit_slot_[o * np_ + p] = static_cast<int>(limits_[o].size());
        limits_[o].push_back(n);
      }
    }

    cost_.resize(np_ * no_);
    candidates_.resize(np_);
    min_cost_.resize(np_);
    for (std::size_t p = 0; p < np_; ++p) {
      const auto& pat = pb.patient(p);
      for (std::size_t o = 0; o < no_; ++o) {
        const auto& op = pb.op(o);
        cost_[p * no_ + o] = {preference_weight(pat.preferred_operators, op.id), op.is_fictitious() ? 1 : 0,
                              preference_weight(pat.history_preferences, op.id)};
        if (statically_allowed(p, o)) candidates_[p].push_back(o);
      }
      std::sort(candidates_[p].begin(), candidates_[p].end(), [&](auto a, auto b) {
        const auto &ca = cost(p, a), &cb = cost(p, b);
        return ca != cb ? ca < cb : pb.op(a).id < pb.op(b).id;
      });
      if (!candidates_[p].empty()) min_cost_[p] = cost(p, candidates_[p].front());
    }
    reset();
  }

  const Cost3& cost(std::size_t p, std::size_t o) const { return cost_[p * no_ + o]; }
  const std::vector<std::size_t>& candidates(std::size_t p) const { return candidates_[p]; }
  const Cost3& min_cost(std::size_t p) const { return min_cost_[p]; }
  std::size_t num_patients() const { return np_; }
  std::size_t num_operators() const { return no_; }

  void reset() {
    assign_.assign(np_, kNoIndex);
    members_.assign(no_, {});
    type_count_.assign(no_, {});
    for (std::size_t o = 0; o < no_; ++o) type_count_[o].assign(limits_[o].size(), 0);
    at_macro_.assign(no_ * nm_, 0);
    pending_.assign(no_ * nm_, 0);
    for (std::size_t p = 0; p < np_; ++p)
      for (auto o : candidates_[p])
        for (int m : macros_[p]) ++pending_[o * nm_ + static_cast<std::size_t>(m)];
    cost_sum_ = {0, 0, 0};
  }

  std::size_t op_of(std::size_t p) const { return assign_[p]; }
  const std::vector<std::size_t>& assignment() const { return assign_; }
  const Cost3& cost_sum() const { return cost_sum_; }

  /// B3/B4 admit one more patient p on o.
  bool has_room(std::size_t p, std::size_t o) const {
    const auto& op = pb_.op(o);
    if (op.max_patients && static_cast<int>(members_[o].size()) >= *op.max_patients) return false;
    int slot = limit_slot_[o * np_ + p];
    return slot < 0 || type_count_[o][static_cast<std::size_t>(slot)] < limits_[o][static_cast<std::size_t>(slot)];
  }

  void place(std::size_t p, std::size_t o) {
    assign_[p] = o;
    members_[o].push_back(p);
    int slot = limit_slot_[o * np_ + p];
    if (slot >= 0) ++type_count_[o][static_cast<std::size_t>(slot)];
    for (int m : macros_[p]) ++at_macro_[o * nm_ + static_cast<std::size_t>(m)];
    cost_sum_ = cost_sum_ + cost(p, o);
  }

  void unplace(std::size_t p) {
    auto o = assign_[p];
    assign_[p] = kNoIndex;
    auto& mem = members_[o];
    mem.erase(std::find(mem.begin(), mem.end(), p));
    int slot = limit_slot_[o * np_ + p];
    if (slot >= 0) --type_count_[o][static_cast<std::size_t>(slot)];
    for (int m : macros_[p]) --at_macro_[o * nm_ + static_cast<std::size_t>(m)];
    cost_sum_ = cost_sum_ - cost(p, o);
  }

  /// Marks p as decided for the purpose of "could still join" bookkeeping.
  void settle(std::size_t p) {
    for (auto o : candidates_[p])
      for (int m : macros_[p]) --pending_[o * nm_ + static_cast<std::size_t>(m)];
  }
  void unsettle(std::size_t p) {
    for (auto o : candidates_[p])
      for (int m : macros_[p]) ++pending_[o * nm_ + static_cast<std::size_t>(m)];
  }

  /// Exact contract time of operator o for its current members.
  std::int64_t workload(std::size_t o) const {
    std::int64_t total = 0;
    for (auto q : members_[o]) {
      values_.clear();
      for (auto [m, mn] : sessions_[q])
        values_.push_back(at_macro_[o * nm_ + static_cast<std::size_t>(m)] >= 2 ? mn : pb_.patient(q).min_daily_length);
      std::sort(values_.begin(), values_.end());
      values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
      for (int v : values_) total += v;
    }
    return total;
  }

  /// Lower bound on o's workload over every completion of the settled patients.
  std::int64_t workload_lb(std::size_t o) const {
    std::int64_t total = 0;
    for (auto q : members_[o]) {
      const int dur = pb_.patient(q).min_daily_length;
      values_.clear();
      std::int64_t extra = 0;
      for (auto [m, mn] : sessions_[q]) {
        auto idx = o * nm_ + static_cast<std::size_t>(m);
        if (at_macro_[idx] >= 2) values_.push_back(mn);
        else if (pending_[idx] == 0) values_.push_back(dur);
      }
      std::sort(values_.begin(), values_.end());
      values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
      for (auto [m, mn] : sessions_[q]) {
        auto idx = o * nm_ + static_cast<std::size_t>(m);
        if (at_macro_[idx] >= 2 || pending_[idx] == 0) continue;
        bool covered = std::binary_search(values_.begin(), values_.end(), dur) ||
                       std::binary_search(values_.begin(), values_.end(), mn);
        if (!covered) extra = std::max<std::int64_t>(extra, std::min(dur, mn));
      }
      for (int v : values_) total += v;
      total += extra;
    }
    return total;
  }

  bool within_time(std::size_t o) const {
    const auto& tt = pb_.op(o).total_time;
    return !tt || workload(o) <= *tt;
  }
  bool within_time_lb(std::size_t o) const {
    const auto& tt = pb_.op(o).total_time;
    return !tt || workload_lb(o) <= *tt;
  }

  bool all_within_time() const {
    for (std::size_t o = 0; o < no_; ++o)
      if (!within_time(o)) return false;
    return true;
  }

  std::optional<std::size_t> fictitious() const { return pb_.fictitious_index(); }

 private:
  bool statically_allowed(std::size_t p, std::size_t o) const {
    const auto& op = pb_.op(o);
    if (op.is_fictitious()) return true;
    const auto& pat = pb_.patient(p);
    if (!op.qualifications.count(pat.ptype.value)) return false;
    if (op.max_patients && *op.max_patients < 1) return false;
    int slot = limit_slot_[o * np_ + p];
    if (slot >= 0 && limits_[o][static_cast<std::size_t>(slot)] < 1) return false;
    if (op.total_time) {
      int least = pat.min_daily_length;
      for (auto [m, mn] : sessions_[p]) least = std::min(least, mn);
      if (least > *op.total_time) return false;
    }
    return true;
  }

  const Problem& pb_;
  std::size_t np_, no_, nm_ = 0;
  std::vector<std::vector<std::pair<int, int>>> sessions_;  // (macro, MIN) per patient
  std::vector<std::vector<int>> macros_;                    // distinct macros per patient
  std::vector<int> limit_slot_;
  std::vector<std::vector<int>> limits_;
  std::vector<Cost3> cost_;
  std::vector<std::vector<std::size_t>> candidates_;
  std::vector<Cost3> min_cost_;

  std::vector<std::size_t> assign_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::vector<int>> type_count_;
  std::vector<int> at_macro_;
  std::vector<int> pending_;
  Cost3 cost_sum_{};
  mutable std::vector<int> values_;
};

/// Depth-first branch and bound over a fixed patient order.
///
/// In `improve` mode it looks for assignments strictly cheaper than `bound`; in canonical mode it
/// returns the first assignment (in the given order) whose cost equals `bound`.
class BranchAndBound {
 public:
  BranchAndBound(BoardSearch& s, Budget& budget, std::vector<std::size_t> order, bool by_cost)
      : s_(s), budget_(budget), order_(std::move(order)), by_cost_(by_cost) {
    suffix_.assign(order_.size() + 1, Cost3{0, 0, 0});
    for (std::size_t i = order_.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + s_.min_cost(order_[i]);
  }

  template <class OnLeaf>
  bool run_improve(std::optional<Cost3>& bound, OnLeaf&& on_leaf) {
    canonical_ = false;
    bound_ = &bound;
    s_.reset();
    return dfs(0, on_leaf);
  }

  template <class OnLeaf>
  bool run_canonical(const Cost3& target, OnLeaf&& on_leaf) {
    canonical_ = true;
    std::optional<Cost3> b = target;
    bound_ = &b;
    s_.reset();
    found_ = false;
    return dfs(0, on_leaf);
  }

  bool found() const { return found_; }

 private:
  // Returns false when the budget ran out (search incomplete).
  template <class OnLeaf>
  bool dfs(std::size_t depth, OnLeaf& on_leaf) {
    if (!budget_.tick()) return false;
    if (depth == order_.size()) {
      if (!s_.all_within_time()) return true;
      if (canonical_) {
        if (s_.cost_sum() == **bound_) {
          found_ = true;
          on_leaf();
        }
      } else if (!*bound_ || s_.cost_sum() < **bound_) {
        *bound_ = s_.cost_sum();
        on_leaf();
      }
      return true;
    }
    const auto p = order_[depth];
    s_.settle(p);
    std::vector<std::size_t> values = s_.candidates(p);
    if (!by_cost_)
      std::sort(values.begin(), values.end(), [&](auto a, auto b) { return pb_id(a) < pb_id(b); });
    for (auto o : values) {
      if (!s_.has_room(p, o)) continue;
      const Cost3 lb = s_.cost_sum() + s_.cost(p, o) + suffix_[depth + 1];
      if (*bound_ && (canonical_ ? **bound_ < lb : !(lb < **bound_))) continue;
      s_.place(p, o);
      bool ok = s_.within_time_lb(o);
      bool complete = !ok || dfs(depth + 1, on_leaf);
      s_.unplace(p);
      if (!complete) {
        s_.unsettle(p);
        return false;
      }
      if (canonical_ && found_) break;
    }
    s_.unsettle(p);
    return true;
  }

  int pb_id(std::size_t o) const { return op_ids_ ? (*op_ids_)[o] : static_cast<int>(o); }

 public:
  void set_operator_ids(const std::vector<int>* ids) { op_ids_ = ids; }

 private:
  BoardSearch& s_;
  Budget& budget_;
  std::vector<std::size_t> order_;
  bool by_cost_;
  std::vector<Cost3> suffix_;
  std::optional<Cost3>* bound_ = nullptr;
  bool canonical_ = false;
  bool found_ = false;
  const std::vector<int>* op_ids_ = nullptr;
};

inline std::vector<std::size_t> constrainedness_order(const Problem& pb, const BoardSearch& s) {
  std::vector<std::size_t> order(s.num_patients());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    auto ca = s.candidates(a).size(), cb = s.candidates(b).size();
    return ca != cb ? ca < cb : pb.patient(a).id < pb.patient(b).id;
  });
  return order;
}

/// Greedy construction: each patient (most constrained first) to its cheapest operator that still fits.
inline bool greedy(const Problem& pb, BoardSearch& s) {
  s.reset();
  for (auto p : constrainedness_order(pb, s)) {
    bool placed = false;
    for (auto o : s.candidates(p)) {
      if (!s.has_room(p, o)) continue;
      s.place(p, o);
      if (s.within_time(o)) {
        placed = true;
        break;
      }
      s.unplace(p);
    }
    if (!placed) return false;
  }
  return true;
}

/// First-improvement descent over reassign and swap moves; returns when no strict improvement exists.
inline void descend(BoardSearch& s, Budget& budget, Rng& rng) {
  const auto np = s.num_patients();
  std::vector<std::size_t> order(np);
  std::iota(order.begin(), order.end(), std::size_t{0});
  bool improved = true;
  while (improved && !budget.exhausted()) {
    improved = false;
    rng.shuffle(order);
    for (auto p : order) {
      const auto cur = s.op_of(p);
      for (auto o : s.candidates(p)) {
        if (!budget.tick()) return;
        if (!(s.cost(p, o) < s.cost(p, cur))) break;  // candidates are sorted by cost
        if (!s.has_room(p, o)) continue;
        s.unplace(p);
        s.place(p, o);
        if (s.within_time(o) && s.within_time(cur)) {
          improved = true;
          break;
        }
        s.unplace(p);
        s.place(p, cur);
      }
    }
    for (std::size_t i = 0; i < np && !budget.exhausted(); ++i) {
      for (std::size_t j = i + 1; j < np; ++j) {
        const auto p = order[i], q = order[j];
        const auto a = s.op_of(p), b = s.op_of(q);
        if (a == b) continue;
        if (!budget.tick()) return;
        const auto& cand_p = s.candidates(p);
        const auto& cand_q = s.candidates(q);
        if (std::find(cand_p.begin(), cand_p.end(), b) == cand_p.end()) continue;
        if (std::find(cand_q.begin(), cand_q.end(), a) == cand_q.end()) continue;
        if (!(s.cost(p, b) + s.cost(q, a) < s.cost(p, a) + s.cost(q, b))) continue;
        s.unplace(p);
        s.unplace(q);
        if (s.has_room(p, b) && s.has_room(q, a)) {
          s.place(p, b);
          s.place(q, a);
          if (s.within_time(a) && s.within_time(b)) {
            improved = true;
            continue;
          }
          s.unplace(p);
          s.unplace(q);
        }
        s.place(p, a);
        s.place(q, b);
      }
    }
  }
}

/// Random feasible reassignments ignoring cost.
inline void perturb(BoardSearch& s, Rng& rng, int moves) {
  const auto np = s.num_patients();
  if (np == 0) return;
  for (int k = 0; k < moves; ++k) {
    auto p = rng.index(np);
    const auto& cand = s.candidates(p);
    auto o = cand[rng.index(cand.size())];
    auto cur = s.op_of(p);
    if (o == cur || !s.has_room(p, o)) continue;
    s.unplace(p);
    s.place(p, o);
    if (!(s.within_time(o) && s.within_time(cur))) {
      s.unplace(p);
      s.place(p, cur);
    }
  }
}

}  // namespace board_detail

/// Solves the board phase. Exact mode proves optimality by branch and bound; anytime mode runs
/// greedy construction and iterated local search first, then spends what is left of the budget
/// on the same proof.
inline SolveReport<BoardSolution> solve_board(const Instance& inst, const SolveConfig& cfg) {
  using namespace board_detail;
  cfg.validate();
  if (auto issues = validate_instance(inst); !issues.empty())
    throw std::invalid_argument("invalid instance: " + issues.front().entity + ": " + issues.front().issue);

  const Problem pb(inst);
  SolveReport<BoardSolution> report;
  Budget budget(cfg, kUnitsPerSecond);
  Incumbent<BoardSolution> inc(cfg, budget, report);
  BoardSearch s(pb);

  auto to_solution = [&](const std::vector<std::size_t>& a) { return from_dense(pb, DenseBoard{a}); };
  std::optional<Cost3> best;
  std::vector<std::size_t> best_assign;
  auto offer = [&](const Cost3& c) {
    if (best && !(c < *best)) return;
    best = c;
    best_assign = s.assignment();
    inc.offer(to_solution(best_assign), to_cost(c));
  };

  for (std::size_t p = 0; p < pb.num_patients(); ++p)
    if (s.candidates(p).empty()) {
      report.outcome = Outcome::Unsatisfiable;
      report.wall_time = budget.elapsed();
      return report;
    }

  if (greedy(pb, s)) offer(s.cost_sum());

  if (cfg.mode == Mode::anytime && best) {
    Rng rng(mix_seed(cfg.seed, 0xB0A4D));
    const std::uint64_t ls_share = budget.limit() / 3;
    descend(s, budget, rng);
    offer(s.cost_sum());
    int stale = 0;
    while (!budget.exhausted() && budget.used() < ls_share && stale < 200) {
      perturb(s, rng, 2 + static_cast<int>(rng.index(3)));
      descend(s, budget, rng);
      if (budget.exhausted()) break;
      if (s.cost_sum() < *best) {
        offer(s.cost_sum());
        stale = 0;
      } else {
        ++stale;
        s.reset();
        for (std::size_t p = 0; p < best_assign.size(); ++p) s.place(p, best_assign[p]);
      }
    }
  }

  BranchAndBound bnb(s, budget, constrainedness_order(pb, s), true);
  bool complete = bnb.run_improve(best, [&] {
    best_assign = s.assignment();
    inc.offer(to_solution(best_assign), to_cost(*best));
  });

  if (complete && best) {
    // Canonical representative: first optimum in patient-id order, operator ids ascending.
    std::vector<std::size_t> by_id(pb.num_patients());
    std::iota(by_id.begin(), by_id.end(), std::size_t{0});
    std::sort(by_id.begin(), by_id.end(), [&](auto a, auto b) { return pb.patient(a).id < pb.patient(b).id; });
    std::vector<int> op_ids(pb.num_operators());
    for (std::size_t o = 0; o < op_ids.size(); ++o) op_ids[o] = pb.op(o).id;
    BranchAndBound canon(s, budget, by_id, false);
    canon.set_operator_ids(&op_ids);
    canon.run_canonical(*best, [&] { inc.replace_equal(to_solution(s.assignment())); });
  }

  if (complete) report.outcome = best ? Outcome::OptimumFound : Outcome::Unsatisfiable;
  else report.outcome = best ? Outcome::Satisfiable : Outcome::Unknown;
  report.work = budget.used();
  report.wall_time = budget.elapsed();
  return report;
}

}  // namespace rsp
