#pragma once

// Configuration, budgets and reports shared by the board and agenda solvers.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "rsp/model.hpp"
#include "rsp/rng.hpp"

namespace rsp {

enum class Mode : std::uint8_t { exact, anytime };

/// Ordered from best to worst; bench mode ties are broken toward the larger value.
enum class Outcome : std::uint8_t { OptimumFound, Satisfiable, Unknown, Unsatisfiable };

inline std::string_view to_string(Mode m) { return m == Mode::exact ? "exact" : "anytime"; }

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "exact") return Mode::exact;
  if (s == "anytime") return Mode::anytime;
  return std::nullopt;
}

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::OptimumFound: return "OptimumFound";
    case Outcome::Satisfiable: return "Satisfiable";
    case Outcome::Unknown: return "Unknown";
    case Outcome::Unsatisfiable: return "Unsatisfiable";
  }
  return "?";
}

inline std::optional<Outcome> parse_outcome(std::string_view s) {
  for (auto o : {Outcome::OptimumFound, Outcome::Satisfiable, Outcome::Unknown, Outcome::Unsatisfiable})
    if (to_string(o) == s) return o;
  return std::nullopt;
}

struct TraceEntry {
  double time = 0;         // seconds since solve start
  std::uint64_t work = 0;  // work units consumed when found; deterministic
  CostVector cost;
};

struct SolveConfig {
  Mode mode = Mode::exact;
  double cutoff = 30.0;  // seconds
  std::uint64_t seed = 0;
  bool emit_improvements = true;
  /// Overrides the work budget derived from the cutoff.
  std::optional<std::uint64_t> work_limit;
  std::stop_token stop;
  /// Called on every strict improvement with the new trace entry.
  std::function<void(const TraceEntry&)> on_improvement;

  void validate() const {
    if (!(cutoff > 0)) throw std::invalid_argument("cutoff must be positive");
  }
};

template <class Solution>
struct SolveReport {
  Outcome outcome = Outcome::Unknown;
  std::optional<Solution> best;
  std::optional<CostVector> cost;
  double wall_time = 0;
  std::uint64_t work = 0;
  std::vector<TraceEntry> trace;
};

/// Deterministic work budget with a wall-clock safety net and cooperative cancellation.
///
/// Solvers charge one unit per search node or move evaluated. The wall clock and the stop
/// token are polled every few units so that cancellation lands well within 10 ms, while
/// results stay reproducible as long as the work limit is what ends the search.
class Budget {
 public:
  Budget(const SolveConfig& cfg, double units_per_second)
      : stop_(cfg.stop),
        start_(Clock::now()),
        deadline_(start_ + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.cutoff))),
        limit_(cfg.work_limit ? *cfg.work_limit
                              : static_cast<std::uint64_t>(cfg.cutoff * units_per_second)) {}

  /// Charges `n` units; returns false once the budget is gone.
  bool tick(std::uint64_t n = 1) {
    if (out_) return false;
    used_ += n;
    if (used_ >= limit_) out_ = true;
    if (used_ >= next_poll_) {
      next_poll_ = used_ + kPollEvery;
      if (stop_.stop_requested()) out_ = cancelled_ = true;
      else if (Clock::now() >= deadline_) out_ = timed_out_ = true;
    }
    return !out_;
  }

  bool exhausted() const { return out_; }
  bool cancelled() const { return cancelled_; }
  bool hit_wall_clock() const { return timed_out_; }
  std::uint64_t used() const { return used_; }
  std::uint64_t limit() const { return limit_; }
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  using Clock = std::chrono::steady_clock;
  static constexpr std::uint64_t kPollEvery = 32;

  std::stop_token stop_;
  Clock::time_point start_, deadline_;
  std::uint64_t limit_;
  std::uint64_t used_ = 0;
  std::uint64_t next_poll_ = 0;
  bool out_ = false, cancelled_ = false, timed_out_ = false;
};

/// Collects strictly improving solutions into a report and forwards them to the callback.
template <class Solution>
class Incumbent {
 public:
  Incumbent(const SolveConfig& cfg, const Budget& budget, SolveReport<Solution>& report)
      : cfg_(cfg), budget_(budget), report_(report) {}

  bool has() const { return report_.cost.has_value(); }
  const CostVector& cost() const { return *report_.cost; }

  /// Stores `sol` if it is strictly better than the current incumbent; returns whether it was.
  bool offer(const Solution& sol, const CostVector& cost) {
    if (report_.cost && !(cost < *report_.cost)) return false;
    report_.best = sol;
    report_.cost = cost;
    TraceEntry e{budget_.elapsed(), budget_.used(), cost};
    if (cfg_.emit_improvements) report_.trace.push_back(e);
    if (cfg_.on_improvement) cfg_.on_improvement(e);
    return true;
  }

  /// Replaces an equal-cost incumbent (canonicalisation); does not touch the trace.
  void replace_equal(const Solution& sol) { report_.best = sol; }

 private:
  const SolveConfig& cfg_;
  const Budget& budget_;
  SolveReport<Solution>& report_;
};

}  // namespace rsp
