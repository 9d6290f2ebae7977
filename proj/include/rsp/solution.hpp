#pragma once

#include <map>
#include <string>
#include <vector>

#include "rsp/model.hpp"

namespace rsp {

/// Patient id -> operator id (operator -1 allowed).
struct BoardSolution {
  std::map<int, int> assignment;
  bool operator==(const BoardSolution&) const = default;
};

struct SessionPlacement {
  int session = 0;
  int period = 0;
  Slot start = 0;   // first slot of the individual part
  int length = 0;   // individual part
  int before = 0;   // supervised slots before
  int after = 0;    // supervised slots after
  int location = 0;

  bool operator==(const SessionPlacement&) const = default;
  Slot ext_start() const { return start - before; }
  int ext_length() const { return length + before + after; }
  Slot ext_end() const { return ext_start() + ext_length(); }
};

/// Scheduled sessions only; unscheduled optional sessions are absent.
struct AgendaSolution {
  std::map<int, SessionPlacement> placements;
  bool operator==(const AgendaSolution&) const = default;
};

/// Closed catalog of hard rules checked by feas.
enum class Rule : std::uint8_t { B1, B2, B3, B4, B5, A1, A2, A3, A4, A5, A6, A7, A8, A9, A10, A11, A12, A13 };

inline constexpr std::array<Rule, 18> kAllRules{Rule::B1, Rule::B2, Rule::B3,  Rule::B4,  Rule::B5,  Rule::A1,
                                                Rule::A2, Rule::A3, Rule::A4,  Rule::A5,  Rule::A6,  Rule::A7,
                                                Rule::A8, Rule::A9, Rule::A10, Rule::A11, Rule::A12, Rule::A13};

inline std::string_view to_string(Rule r) {
  static constexpr std::array<std::string_view, 18> names{"B1", "B2", "B3", "B4", "B5", "A1",  "A2",  "A3",  "A4",
                                                          "A5", "A6", "A7", "A8", "A9", "A10", "A11", "A12", "A13"};
  return names[static_cast<std::size_t>(r)];
}

inline std::optional<Rule> parse_rule(std::string_view s) {
  for (auto r : kAllRules)
    if (to_string(r) == s) return r;
  return std::nullopt;
}

struct Violation {
  Rule rule;
  std::vector<std::string> entities;
  std::string detail;
};

/// Set of rule tags, one bit per catalog entry.
using RuleMask = std::uint32_t;

inline constexpr RuleMask bit(Rule r) { return RuleMask{1} << static_cast<unsigned>(r); }

inline RuleMask mask_of(const std::vector<Violation>& v) {
  RuleMask m = 0;
  for (const auto& x : v) m |= bit(x.rule);
  return m;
}

inline std::string mask_str(RuleMask m) {
  std::string s;
  for (auto r : kAllRules)
    if (m & bit(r)) {
      if (!s.empty()) s += ",";
      s += to_string(r);
    }
  return s.empty() ? "-" : s;
}

}  // namespace rsp
