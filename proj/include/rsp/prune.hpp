#pragma once

// Start-slot and extension pruning for the agenda phase.

#include <map>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

#include "rsp/feas.hpp"

namespace rsp {

enum class Variant : std::uint8_t { basic, optimized };

inline std::string_view to_string(Variant v) { return v == Variant::basic ? "basic" : "optimized"; }

inline std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "basic") return Variant::basic;
  if (s == "optimized") return Variant::optimized;
  return std::nullopt;
}

using StartSlot = std::pair<int, Slot>;  // (period, slot)

struct PruneTables {
  std::map<int, std::set<StartSlot>> allowed_starts;
  std::map<int, int> extension_bound;
  std::map<int, std::vector<Window>> forbidden_start_ranges;
};

namespace prune_detail {

/// Starts [STA - MIN + 1, END) for each forbidden window, clipped to the period.
inline std::vector<Window> forbidden_starts(const Problem& pb, std::size_t s) {
  const auto& ss = pb.session(s);
  std::vector<Window> out;
  for (const auto& f : pb.patient(pb.patient_of(s)).forbidden)
    out.push_back({f.period, std::max(0, f.start - ss.min_length + 1), f.end});
  return out;
}

inline bool in_any(const std::vector<Window>& ws, int period, Slot t) {
  for (const auto& w : ws)
    if (w.period == period && w.contains(t)) return true;
  return false;
}

}  // namespace prune_detail

/// Start slots of one session under a variant; empty for sessions of inactive patients.
inline std::vector<StartSlot> session_starts(const Problem& pb, const DenseBoard& b, std::size_t s, Variant v) {
  std::vector<StartSlot> out;
  if (!session_active(pb, b, s)) return out;
  const auto& ss = pb.session(s);
  const auto& op = pb.op(b.op_of_patient[pb.patient_of(s)]);
  const auto blocked = prune_detail::forbidden_starts(pb, s);
  for (const auto& sh : op.shifts) {
    const Slot last = v == Variant::basic ? sh.end - 1 : sh.end - ss.min_length;
    for (Slot t = sh.start; t <= last; ++t) {
      if (v == Variant::optimized) {
        if (prune_detail::in_any(blocked, sh.period, t)) continue;
        if (ss.forced_time && (ss.forced_time->period != sh.period || ss.forced_time->slot != t)) continue;
      }
      out.emplace_back(sh.period, t);
    }
  }
  return out;
}

/// True when the optimized variant may cap a session's extension at IDEAL.
///
/// The cap is only sound when the patient's daily minimum is reachable without going beyond
/// the minimum lengths of its mandatory sessions; otherwise the extension is needed to cover it.
inline bool extension_cap_applies(const Problem& pb, std::size_t s) {
  const auto p = pb.patient_of(s);
  int mins = 0;
  for (auto q : pb.sessions_of(p))
    if (!pb.session(q).is_optional()) mins += pb.session(q).min_length;
  return pb.patient(p).min_daily_length <= mins;
}

inline PruneTables compute_prune_tables(const Problem& pb, const DenseBoard& b) {
  PruneTables t;
  for (std::size_t s = 0; s < pb.num_sessions(); ++s) {
    const auto& ss = pb.session(s);
    auto starts = session_starts(pb, b, s, Variant::optimized);
    t.allowed_starts[ss.id] = std::set<StartSlot>(starts.begin(), starts.end());
    t.extension_bound[ss.id] = ss.ideal_length - ss.min_length;
    t.forbidden_start_ranges[ss.id] = prune_detail::forbidden_starts(pb, s);
  }
  return t;
}

inline PruneTables compute_prune_tables(const Instance& inst, const BoardSolution& board) {
  Problem pb(inst);
  return compute_prune_tables(pb, to_dense(pb, board));
}

/// Candidate space: sum over sessions of |starts| x extension choices.
/// Extension choices count (LB, LA) pairs with LB + LA <= IDEAL - MIN.
inline std::uint64_t candidate_space_size(const Problem& pb, const DenseBoard& b, Variant v) {
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < pb.num_sessions(); ++s) {
    const auto e = static_cast<std::uint64_t>(pb.session(s).ideal_length - pb.session(s).min_length);
    total += session_starts(pb, b, s, v).size() * ((e + 1) * (e + 2) / 2);
  }
  return total;
}

inline std::uint64_t candidate_space_size(const Instance& inst, const BoardSolution& board, Variant v) {
  Problem pb(inst);
  return candidate_space_size(pb, to_dense(pb, board), v);
}

/// Extension bounds for a session whose individual part is [t, t + len) in shift `sh`.
struct ExtBounds {
  int max_before = 0;
  int max_after = 0;
  int max_total = 0;  // LB + LA
};

inline ExtBounds extension_bounds(const Problem& pb, std::size_t s, const Window& sh, Slot t, int len, Variant v) {
  ExtBounds e{t - sh.start, sh.end - t - len, (t - sh.start) + (sh.end - t - len)};
  if (v == Variant::optimized && extension_cap_applies(pb, s)) {
    const int cap = pb.session(s).ideal_length - len;
    e.max_before = std::min(e.max_before, cap);
    e.max_after = std::min(e.max_after, cap);
    e.max_total = std::min(e.max_total, cap);
  }
  return e;
}

/// Number of (start, L, LB, LA) tuples a variant actually enumerates; informational.
inline std::uint64_t enumerated_space_size(const Problem& pb, const DenseBoard& b, Variant v) {
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < pb.num_sessions(); ++s) {
    if (!session_active(pb, b, s)) continue;
    const auto& ss = pb.session(s);
    const auto& op = pb.op(b.op_of_patient[pb.patient_of(s)]);
    for (auto [per, t] : session_starts(pb, b, s, v)) {
      const auto* sh = op.shift_in(per);
      for (int len = ss.min_length; len <= std::min(ss.ideal_length, sh->end - t); ++len) {
        auto e = extension_bounds(pb, s, *sh, t, len, v);
        for (int lb = 0; lb <= e.max_before; ++lb)
          total += static_cast<std::uint64_t>(std::max(0, std::min(e.max_after, e.max_total - lb) + 1));
      }
    }
  }
  return total;
}

}  // namespace rsp
