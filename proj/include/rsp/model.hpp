#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdio>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rsp {

// ---------------------------------------------------------------------------
// Patient types
// ---------------------------------------------------------------------------

enum class TypeValue : std::uint8_t { neurologic, orthopaedic, covid_positive, covid_negative, outpatient };
enum class Needs : std::uint8_t { lifter, nolifter };
enum class PayStatus : std::uint8_t { payer, free };

inline constexpr std::array<TypeValue, 5> kAllTypeValues{TypeValue::neurologic, TypeValue::orthopaedic,
                                                         TypeValue::covid_positive, TypeValue::covid_negative,
                                                         TypeValue::outpatient};

inline std::string_view to_string(TypeValue v) {
  switch (v) {
    case TypeValue::neurologic: return "neurologic";
    case TypeValue::orthopaedic: return "orthopaedic";
    case TypeValue::covid_positive: return "covid_positive";
    case TypeValue::covid_negative: return "covid_negative";
    case TypeValue::outpatient: return "outpatient";
  }
  return "?";
}
inline std::string_view to_string(Needs v) { return v == Needs::lifter ? "lifter" : "nolifter"; }
inline std::string_view to_string(PayStatus v) { return v == PayStatus::payer ? "payer" : "free"; }

inline std::optional<TypeValue> parse_type_value(std::string_view s) {
  for (auto v : kAllTypeValues)
    if (to_string(v) == s) return v;
  return std::nullopt;
}
inline std::optional<Needs> parse_needs(std::string_view s) {
  if (s == "lifter") return Needs::lifter;
  if (s == "nolifter") return Needs::nolifter;
  return std::nullopt;
}
inline std::optional<PayStatus> parse_pay_status(std::string_view s) {
  if (s == "payer") return PayStatus::payer;
  if (s == "free") return PayStatus::free;
  return std::nullopt;
}

/// value-needs-status triple; exactly one member of each dimension.
struct PatientType {
  TypeValue value = TypeValue::neurologic;
  Needs needs = Needs::nolifter;
  PayStatus status = PayStatus::free;

  auto operator<=>(const PatientType&) const = default;

  std::string key() const {
    return std::string(to_string(value)) + "-" + std::string(to_string(needs)) + "-" +
           std::string(to_string(status));
  }

  static std::optional<PatientType> parse_key(std::string_view s) {
    auto first = s.find('-');
    auto second = first == std::string_view::npos ? first : s.find('-', first + 1);
    if (second == std::string_view::npos) return std::nullopt;
    auto v = parse_type_value(s.substr(0, first));
    auto n = parse_needs(s.substr(first + 1, second - first - 1));
    auto p = parse_pay_status(s.substr(second + 1));
    if (!v || !n || !p) return std::nullopt;
    return PatientType{*v, *n, *p};
  }
};

// ---------------------------------------------------------------------------
// Time grid
// ---------------------------------------------------------------------------

using Slot = int;

struct PeriodSpec {
  int index = 0;
  int start_minute = 0;  // minutes since midnight
  int end_minute = 0;
};

inline std::string format_hhmm(int minutes) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

inline std::optional<int> parse_hhmm(std::string_view s) {
  auto colon = s.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 3 != s.size()) return std::nullopt;
  int h = 0, m = 0;
  for (char c : s.substr(0, colon)) {
    if (c < '0' || c > '9') return std::nullopt;
    h = h * 10 + (c - '0');
  }
  for (char c : s.substr(colon + 1)) {
    if (c < '0' || c > '9') return std::nullopt;
    m = m * 10 + (c - '0');
  }
  if (h > 23 || m > 59) return std::nullopt;
  return h * 60 + m;
}

struct TimeGrid {
  int slot_minutes = 10;
  std::vector<PeriodSpec> periods;

  /// Morning 08:00-12:00 and afternoon 13:30-16:00 on a 10-minute grid.
  static TimeGrid hospital_default() {
    return TimeGrid{10, {{0, 8 * 60, 12 * 60}, {1, 13 * 60 + 30, 16 * 60}}};
  }

  int num_periods() const { return static_cast<int>(periods.size()); }

  bool has_period(int period) const { return period >= 0 && period < num_periods(); }

  int slots_in(int period) const {
    const auto& p = periods.at(static_cast<std::size_t>(period));
    return (p.end_minute - p.start_minute) / slot_minutes;
  }

  int max_slots() const {
    int m = 0;
    for (int p = 0; p < num_periods(); ++p) m = std::max(m, slots_in(p));
    return m;
  }

  /// Wall-clock minute at which `slot` of `period` begins. slot == slots_in(period) maps to the period end.
  int minute_of(int period, Slot slot) const {
    return periods.at(static_cast<std::size_t>(period)).start_minute + slot * slot_minutes;
  }

  std::string wall_clock(int period, Slot slot) const { return format_hhmm(minute_of(period, slot)); }

  /// Inverse of minute_of; nullopt when the minute is outside every period or off-grid.
  std::optional<std::pair<int, Slot>> slot_at(int minute) const {
    for (const auto& p : periods) {
      if (minute < p.start_minute || minute >= p.end_minute) continue;
      if ((minute - p.start_minute) % slot_minutes != 0) return std::nullopt;
      return std::pair{p.index, (minute - p.start_minute) / slot_minutes};
    }
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Entities
// ---------------------------------------------------------------------------

/// Half-open slot window [start, end) inside one period.
struct Window {
  int period = 0;
  Slot start = 0;
  Slot end = 0;

  bool operator==(const Window&) const = default;
  int length() const { return end - start; }
  bool contains(Slot s) const { return s >= start && s < end; }
};

struct WeightedOperator {
  int op = 0;
  int weight = 0;
  bool operator==(const WeightedOperator&) const = default;
};

struct Patient {
  int id = 0;
  PatientType ptype;
  int min_daily_length = 0;
  std::vector<Window> forbidden;
  std::vector<WeightedOperator> preferred_operators;
  std::vector<WeightedOperator> history_preferences;
  std::vector<int> sessions;
};

inline constexpr int kFictitiousOperator = -1;

struct Operator {
  int id = 0;
  std::optional<int> total_time;    // nullopt = unbounded
  std::optional<int> max_patients;  // nullopt = unbounded
  std::map<PatientType, int> type_limits;
  std::vector<Window> shifts;
  std::set<TypeValue> qualifications;

  bool is_fictitious() const { return id == kFictitiousOperator; }

  const Window* shift_in(int period) const {
    for (const auto& s : shifts)
      if (s.period == period) return &s;
    return nullptr;
  }

  int shift_slots() const {
    int total = 0;
    for (const auto& s : shifts) total += s.length();
    return total;
  }

  static Operator fictitious() { return Operator{kFictitiousOperator, {}, {}, {}, {}, {}}; }
};

struct LocationSpec {
  int id = 0;
  int capacity = 0;  // <= 0 means unconstrained
  std::vector<Window> open;
  std::string macro_location;
};

enum class SessionKind : std::uint8_t { individual, supervised };
enum class Optionality : std::uint8_t { mandatory, optional };
enum class Priority : std::uint8_t { high, low };

struct ForcedTime {
  int period = 0;
  Slot slot = 0;
  bool operator==(const ForcedTime&) const = default;
};

struct SessionPreference {
  int period = 0;
  Slot start = 0;
  Priority priority = Priority::high;
  bool operator==(const SessionPreference&) const = default;
};

struct SessionSpec {
  int id = 0;
  int patient = 0;
  SessionKind kind = SessionKind::individual;
  int min_length = 1;
  int ideal_length = 1;
  Optionality optionality = Optionality::mandatory;
  std::string macro_location;
  std::optional<ForcedTime> forced_time;
  std::optional<SessionPreference> preference;

  bool is_individual() const { return kind == SessionKind::individual; }
  bool is_optional() const { return optionality == Optionality::optional; }
};

struct Instance {
  TimeGrid grid = TimeGrid::hospital_default();
  std::vector<Patient> patients;
  std::vector<Operator> operators;
  std::vector<LocationSpec> locations;
  std::vector<SessionSpec> sessions;
};

// ---------------------------------------------------------------------------
// Lexicographic cost
// ---------------------------------------------------------------------------

/// Objective levels, highest priority first. Comparison is lexicographic.
struct CostVector {
  std::vector<std::int64_t> levels;

  CostVector() = default;
  explicit CostVector(std::size_t n) : levels(n, 0) {}
  CostVector(std::initializer_list<std::int64_t> l) : levels(l) {}

  std::size_t size() const { return levels.size(); }
  std::int64_t operator[](std::size_t i) const { return levels[i]; }
  std::int64_t& operator[](std::size_t i) { return levels[i]; }

  CostVector& operator+=(const CostVector& o) {
    if (levels.size() < o.levels.size()) levels.resize(o.levels.size(), 0);
    for (std::size_t i = 0; i < o.levels.size(); ++i) levels[i] += o.levels[i];
    return *this;
  }
  CostVector& operator-=(const CostVector& o) {
    for (std::size_t i = 0; i < o.levels.size() && i < levels.size(); ++i) levels[i] -= o.levels[i];
    return *this;
  }
  friend CostVector operator+(CostVector a, const CostVector& b) { return a += b; }

  bool operator==(const CostVector&) const = default;
  std::strong_ordering operator<=>(const CostVector& o) const { return levels <=> o.levels; }

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(levels[i]);
    }
    return s + ")";
  }
};

inline constexpr std::size_t kBoardLevels = 3;
inline constexpr std::size_t kAgendaLevels = 6;

// ---------------------------------------------------------------------------
// Indexed view
// ---------------------------------------------------------------------------

/// Thrown for dangling references between entities or solution files.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable instance plus id -> position lookups. Every solver and checker works on this.
class Problem {
 public:
  explicit Problem(Instance inst) : inst_(std::move(inst)) { build(); }

  const Instance& instance() const { return inst_; }
  const TimeGrid& grid() const { return inst_.grid; }

  std::size_t num_patients() const { return inst_.patients.size(); }
  std::size_t num_operators() const { return inst_.operators.size(); }
  std::size_t num_sessions() const { return inst_.sessions.size(); }
  std::size_t num_locations() const { return inst_.locations.size(); }

  const Patient& patient(std::size_t i) const { return inst_.patients[i]; }
  const Operator& op(std::size_t i) const { return inst_.operators[i]; }
  const SessionSpec& session(std::size_t i) const { return inst_.sessions[i]; }
  const LocationSpec& location(std::size_t i) const { return inst_.locations[i]; }

  std::optional<std::size_t> patient_index(int id) const { return find(patient_idx_, id); }
  std::optional<std::size_t> operator_index(int id) const { return find(operator_idx_, id); }
  std::optional<std::size_t> session_index(int id) const { return find(session_idx_, id); }
  std::optional<std::size_t> location_index(int id) const { return find(location_idx_, id); }

  std::size_t require_patient(int id) const { return require(patient_idx_, id, "patient"); }
  std::size_t require_operator(int id) const { return require(operator_idx_, id, "operator"); }
  std::size_t require_session(int id) const { return require(session_idx_, id, "session"); }
  std::size_t require_location(int id) const { return require(location_idx_, id, "location"); }

  /// Index of operator -1, if present.
  std::optional<std::size_t> fictitious_index() const { return operator_index(kFictitiousOperator); }

  /// Session positions of a patient (by patient position).
  const std::vector<std::size_t>& sessions_of(std::size_t patient) const { return patient_sessions_[patient]; }

  /// Patient position owning a session position.
  std::size_t patient_of(std::size_t session) const { return session_patient_[session]; }

  /// Location positions inside a macro-location; empty when unknown.
  const std::vector<std::size_t>& locations_in(const std::string& macro) const {
    static const std::vector<std::size_t> empty;
    auto it = macro_locations_.find(macro);
    return it == macro_locations_.end() ? empty : it->second;
  }

  const std::map<std::string, std::vector<std::size_t>>& macro_locations() const { return macro_locations_; }

 private:
  using IdMap = std::unordered_map<int, std::size_t>;

  static std::optional<std::size_t> find(const IdMap& m, int id) {
    auto it = m.find(id);
    if (it == m.end()) return std::nullopt;
    return it->second;
  }
  static std::size_t require(const IdMap& m, int id, const char* what) {
    auto it = m.find(id);
    if (it == m.end()) throw StructuralError(std::string("unknown ") + what + " id " + std::to_string(id));
    return it->second;
  }

  void build() {
    for (std::size_t i = 0; i < inst_.patients.size(); ++i) patient_idx_.emplace(inst_.patients[i].id, i);
    for (std::size_t i = 0; i < inst_.operators.size(); ++i) operator_idx_.emplace(inst_.operators[i].id, i);
    for (std::size_t i = 0; i < inst_.sessions.size(); ++i) session_idx_.emplace(inst_.sessions[i].id, i);
    for (std::size_t i = 0; i < inst_.locations.size(); ++i) {
      location_idx_.emplace(inst_.locations[i].id, i);
      macro_locations_[inst_.locations[i].macro_location].push_back(i);
    }
    patient_sessions_.assign(inst_.patients.size(), {});
    session_patient_.assign(inst_.sessions.size(), 0);
    for (std::size_t s = 0; s < inst_.sessions.size(); ++s) {
      auto p = find(patient_idx_, inst_.sessions[s].patient);
      if (!p) continue;  // reported by validate_instance
      patient_sessions_[*p].push_back(s);
      session_patient_[s] = *p;
    }
  }

  Instance inst_;
  IdMap patient_idx_, operator_idx_, session_idx_, location_idx_;
  std::vector<std::vector<std::size_t>> patient_sessions_;
  std::vector<std::size_t> session_patient_;
  std::map<std::string, std::vector<std::size_t>> macro_locations_;
};

// ---------------------------------------------------------------------------
// Preference weights
// ---------------------------------------------------------------------------

/// Weight charged for treating `patient` with operator `op_id` under one preference list.
/// Listed operators cost their weight, unlisted ones (including -1) cost list length + 1,
/// and an empty list expresses no preference at all.
inline int preference_weight(const std::vector<WeightedOperator>& list, int op_id) {
  if (list.empty()) return 0;
  for (const auto& w : list)
    if (w.op == op_id) return w.weight;
  return static_cast<int>(list.size()) + 1;
}

// ---------------------------------------------------------------------------
// Validation and instance features
// ---------------------------------------------------------------------------

struct ValidationIssue {
  std::string entity;  // e.g. "patient:3"
  std::string issue;
  bool operator==(const ValidationIssue&) const = default;
};

namespace detail {

inline std::string ent(std::string_view kind, int id) { return std::string(kind) + ":" + std::to_string(id); }

inline void check_window(const TimeGrid& g, const Window& w, const std::string& entity, std::string_view what,
                         std::vector<ValidationIssue>& out) {
  if (!g.has_period(w.period)) {
    out.push_back({entity, std::string(what) + " references unknown period " + std::to_string(w.period)});
    return;
  }
  if (w.start >= w.end) out.push_back({entity, std::string(what) + " window has start >= end"});
  if (w.start < 0 || w.end > g.slots_in(w.period))
    out.push_back({entity, std::string(what) + " window outside period slot range"});
}

}  // namespace detail

inline std::vector<ValidationIssue> validate_instance(const Instance& inst) {
  using detail::ent;
  std::vector<ValidationIssue> out;
  const auto& g = inst.grid;

  if (g.slot_minutes <= 0) out.push_back({"grid", "slot_minutes must be positive"});
  for (std::size_t i = 0; i < g.periods.size(); ++i) {
    const auto& p = g.periods[i];
    const std::string e = ent("period", static_cast<int>(i));
    if (p.index != static_cast<int>(i)) out.push_back({e, "period indices must be 0-based and contiguous"});
    if (p.end_minute <= p.start_minute) out.push_back({e, "period ends before it starts"});
    else if (g.slot_minutes > 0 && (p.end_minute - p.start_minute) % g.slot_minutes != 0)
      out.push_back({e, "period span is not a multiple of slot_minutes"});
    if (i > 0 && p.start_minute < g.periods[i - 1].end_minute)
      out.push_back({e, "periods are not in chronological order"});
  }
  if (g.slot_minutes <= 0) return out;

  std::set<int> patient_ids, operator_ids, session_ids, location_ids;
  auto dup = [&](std::set<int>& ids, int id, std::string_view kind) {
    if (!ids.insert(id).second) out.push_back({ent(kind, id), "duplicate id"});
  };
  for (const auto& p : inst.patients) dup(patient_ids, p.id, "patient");
  for (const auto& o : inst.operators) dup(operator_ids, o.id, "operator");
  for (const auto& s : inst.sessions) dup(session_ids, s.id, "session");
  for (const auto& l : inst.locations) dup(location_ids, l.id, "location");

  std::set<std::string> macros;
  for (const auto& l : inst.locations) {
    const auto e = ent("location", l.id);
    if (l.macro_location.empty()) out.push_back({e, "location has no macro-location"});
    macros.insert(l.macro_location);
    for (const auto& w : l.open) detail::check_window(g, w, e, "open", out);
  }

  int fictitious = 0;
  for (const auto& o : inst.operators) {
    const auto e = ent("operator", o.id);
    if (o.is_fictitious()) {
      ++fictitious;
      if (o.total_time || o.max_patients || !o.type_limits.empty())
        out.push_back({e, "fictitious operator must be unbounded and have no type limits"});
    } else if (o.id < 0) {
      out.push_back({e, "negative operator ids are reserved"});
    }
    std::set<int> periods;
    for (const auto& w : o.shifts) {
      detail::check_window(g, w, e, "shift", out);
      if (!periods.insert(w.period).second) out.push_back({e, "more than one shift in a period"});
    }
    if (o.total_time && *o.total_time < 0) out.push_back({e, "negative total_time"});
    if (o.max_patients && *o.max_patients < 0) out.push_back({e, "negative max_patients"});
    for (const auto& [t, n] : o.type_limits)
      if (n < 0) out.push_back({e, "negative type limit for " + t.key()});
  }
  if (fictitious == 0) out.push_back({"operator:-1", "missing fictitious operator"});
  if (fictitious > 1) out.push_back({"operator:-1", "fictitious operator present more than once"});

  for (const auto& p : inst.patients) {
    const auto e = ent("patient", p.id);
    if (p.min_daily_length < 0) out.push_back({e, "negative min_daily_length"});
    for (const auto& w : p.forbidden) detail::check_window(g, w, e, "forbidden", out);
    for (const auto* list : {&p.preferred_operators, &p.history_preferences}) {
      for (std::size_t i = 0; i < list->size(); ++i) {
        const auto& w = (*list)[i];
        if (w.weight < 0) out.push_back({e, "negative preference weight"});
        if (!operator_ids.count(w.op))
          out.push_back({e, "preference references unknown operator " + std::to_string(w.op)});
        if (list == &p.preferred_operators && i > 0 && w.weight < (*list)[i - 1].weight)
          out.push_back({e, "preferred_operators not ordered by non-decreasing weight"});
      }
    }
    if (p.sessions.empty()) out.push_back({e, "patient has no sessions"});
    if (static_cast<int>(p.sessions.size()) > g.num_periods())
      out.push_back({e, "more sessions than periods"});
    for (int sid : p.sessions) {
      if (!session_ids.count(sid)) {
        out.push_back({e, "references unknown session " + std::to_string(sid)});
        continue;
      }
      auto it = std::find_if(inst.sessions.begin(), inst.sessions.end(), [&](const auto& s) { return s.id == sid; });
      if (it->patient != p.id) out.push_back({e, "session " + std::to_string(sid) + " belongs to another patient"});
    }
  }

  for (const auto& s : inst.sessions) {
    const auto e = ent("session", s.id);
    if (!patient_ids.count(s.patient)) out.push_back({e, "references unknown patient"});
    else {
      auto it = std::find_if(inst.patients.begin(), inst.patients.end(), [&](const auto& p) { return p.id == s.patient; });
      if (std::find(it->sessions.begin(), it->sessions.end(), s.id) == it->sessions.end())
        out.push_back({e, "not listed in its patient's sessions"});
    }
    if (s.min_length <= 0) out.push_back({e, "min_length must be positive"});
    if (s.min_length > s.ideal_length) out.push_back({e, "min exceeds ideal"});
    if (!macros.count(s.macro_location)) out.push_back({e, "macro_location has no locations"});
    if (s.forced_time) {
      if (!g.has_period(s.forced_time->period) || s.forced_time->slot < 0 ||
          s.forced_time->slot >= g.slots_in(s.forced_time->period))
        out.push_back({e, "forced_time outside the grid"});
    }
    if (s.preference) {
      if (!g.has_period(s.preference->period) || s.preference->start < 0 ||
          s.preference->start >= g.slots_in(s.preference->period))
        out.push_back({e, "preference outside the grid"});
    }
  }
  return out;
}

namespace detail {
inline std::size_t real_operator_count(const Instance& inst) {
  return static_cast<std::size_t>(
      std::count_if(inst.operators.begin(), inst.operators.end(), [](const auto& o) { return !o.is_fictitious(); }));
}
}  // namespace detail

/// Patients per real operator.
inline double density(const Instance& inst) {
  auto n = detail::real_operator_count(inst);
  if (n == 0) throw std::invalid_argument("no operators");
  return static_cast<double>(inst.patients.size()) / static_cast<double>(n);
}

/// Mean number of qualifications over real operators.
inline double avg_qualifications(const Instance& inst) {
  auto n = detail::real_operator_count(inst);
  if (n == 0) throw std::invalid_argument("no operators");
  std::size_t total = 0;
  for (const auto& o : inst.operators)
    if (!o.is_fictitious()) total += o.qualifications.size();
  return static_cast<double>(total) / static_cast<double>(n);
}

}  // namespace rsp
