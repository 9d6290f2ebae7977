#pragma once

// JSON encoding of instances, solutions, violations and costs.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rsp/model.hpp"
#include "rsp/solution.hpp"

namespace rsp {

using json = nlohmann::json;

/// Malformed document (bad syntax, missing field, unknown enum literal).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class T, class Parse>
T parse_enum(const json& j, const char* field, Parse parse) {
  auto s = j.at(field).get<std::string>();
  auto v = parse(s);
  if (!v) throw FormatError(std::string("unknown ") + field + " '" + s + "'");
  return *v;
}

inline std::optional<int> opt_int(const json& j, const char* field) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  return j.at(field).get<int>();
}

inline json opt_json(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

inline Window window_from(const json& j) {
  return Window{j.at("period").get<int>(), j.at("start").get<int>(), j.at("end").get<int>()};
}
inline json window_to(const Window& w) { return {{"period", w.period}, {"start", w.start}, {"end", w.end}}; }

inline std::vector<Window> windows_from(const json& j, const char* field) {
  std::vector<Window> out;
  if (j.contains(field))
    for (const auto& w : j.at(field)) out.push_back(window_from(w));
  return out;
}
inline json windows_to(const std::vector<Window>& ws) {
  json a = json::array();
  for (const auto& w : ws) a.push_back(window_to(w));
  return a;
}

inline std::vector<WeightedOperator> weights_from(const json& j, const char* field) {
  std::vector<WeightedOperator> out;
  if (j.contains(field))
    for (const auto& w : j.at(field)) out.push_back({w.at("operator").get<int>(), w.at("weight").get<int>()});
  return out;
}
inline json weights_to(const std::vector<WeightedOperator>& ws) {
  json a = json::array();
  for (const auto& w : ws) a.push_back({{"operator", w.op}, {"weight", w.weight}});
  return a;
}

inline int minute_from(const json& j) {
  auto s = j.get<std::string>();
  auto m = parse_hhmm(s);
  if (!m) throw FormatError("bad wall-clock time '" + s + "'");
  return *m;
}

template <class F>
auto wrap(const char* what, F&& f) {
  try {
    return f();
  } catch (const FormatError&) {
    throw;
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instance
// ---------------------------------------------------------------------------

inline json to_json(const TimeGrid& g) {
  json periods = json::array();
  for (const auto& p : g.periods)
    periods.push_back({{"index", p.index}, {"start", format_hhmm(p.start_minute)}, {"end", format_hhmm(p.end_minute)}});
  return {{"slot_minutes", g.slot_minutes}, {"periods", periods}};
}

inline json to_json(const Instance& inst) {
  using namespace detail;
  json patients = json::array();
  for (const auto& p : inst.patients) {
    patients.push_back({{"id", p.id},
                        {"ptype",
                         {{"value", to_string(p.ptype.value)},
                          {"needs", to_string(p.ptype.needs)},
                          {"status", to_string(p.ptype.status)}}},
                        {"min_daily_length", p.min_daily_length},
                        {"forbidden", windows_to(p.forbidden)},
                        {"preferred_operators", weights_to(p.preferred_operators)},
                        {"history_preferences", weights_to(p.history_preferences)},
                        {"sessions", p.sessions}});
  }
  json operators = json::array();
  for (const auto& o : inst.operators) {
    json limits = json::object();
    for (const auto& [t, n] : o.type_limits) limits[t.key()] = n;
    json quals = json::array();
    for (auto q : o.qualifications) quals.push_back(to_string(q));
    operators.push_back({{"id", o.id},
                         {"total_time", opt_json(o.total_time)},
                         {"max_patients", opt_json(o.max_patients)},
                         {"type_limits", limits},
                         {"shifts", windows_to(o.shifts)},
                         {"qualifications", quals}});
  }
  json locations = json::array();
  for (const auto& l : inst.locations)
    locations.push_back(
        {{"id", l.id}, {"capacity", l.capacity}, {"open", windows_to(l.open)}, {"macro_location", l.macro_location}});
  json sessions = json::array();
  for (const auto& s : inst.sessions) {
    json forced = nullptr, pref = nullptr;
    if (s.forced_time) forced = {{"period", s.forced_time->period}, {"slot", s.forced_time->slot}};
    if (s.preference)
      pref = {{"period", s.preference->period},
              {"start", s.preference->start},
              {"priority", s.preference->priority == Priority::high ? "high" : "low"}};
    sessions.push_back({{"id", s.id},
                        {"patient", s.patient},
                        {"kind", s.is_individual() ? "individual" : "supervised"},
                        {"min_length", s.min_length},
                        {"ideal_length", s.ideal_length},
                        {"optionality", s.is_optional() ? "optional" : "mandatory"},
                        {"macro_location", s.macro_location},
                        {"forced_time", forced},
                        {"preference", pref}});
  }
  return {{"grid", to_json(inst.grid)},
          {"patients", patients},
          {"operators", operators},
          {"locations", locations},
          {"sessions", sessions}};
}

inline TimeGrid grid_from_json(const json& j) {
  using namespace detail;
  return wrap("grid", [&] {
    TimeGrid g;
    g.slot_minutes = j.value("slot_minutes", 10);
    g.periods.clear();
    for (const auto& p : j.at("periods"))
      g.periods.push_back({p.at("index").get<int>(), minute_from(p.at("start")), minute_from(p.at("end"))});
    return g;
  });
}

inline Instance instance_from_json(const json& j) {
  using namespace detail;
  return wrap("instance", [&] {
    if (!j.is_object()) throw FormatError("instance must be a JSON object");
    Instance inst;
    inst.grid = j.contains("grid") ? grid_from_json(j.at("grid")) : TimeGrid::hospital_default();

    for (const auto& p : j.at("patients")) {
      Patient pat;
      pat.id = p.at("id").get<int>();
      const auto& t = p.at("ptype");
      pat.ptype = PatientType{parse_enum<TypeValue>(t, "value", parse_type_value),
                              parse_enum<Needs>(t, "needs", parse_needs),
                              parse_enum<PayStatus>(t, "status", parse_pay_status)};
      pat.min_daily_length = p.at("min_daily_length").get<int>();
      pat.forbidden = windows_from(p, "forbidden");
      pat.preferred_operators = weights_from(p, "preferred_operators");
      pat.history_preferences = weights_from(p, "history_preferences");
      pat.sessions = p.at("sessions").get<std::vector<int>>();
      inst.patients.push_back(std::move(pat));
    }

    for (const auto& o : j.at("operators")) {
      Operator op;
      op.id = o.at("id").get<int>();
      op.total_time = opt_int(o, "total_time");
      op.max_patients = opt_int(o, "max_patients");
      if (o.contains("type_limits"))
        for (const auto& [k, v] : o.at("type_limits").items()) {
          auto t = PatientType::parse_key(k);
          if (!t) throw FormatError("bad type_limits key '" + k + "'");
          op.type_limits[*t] = v.get<int>();
        }
      op.shifts = windows_from(o, "shifts");
      if (o.contains("qualifications"))
        for (const auto& q : o.at("qualifications")) {
          auto v = parse_type_value(q.get<std::string>());
          if (!v) throw FormatError("unknown qualification '" + q.get<std::string>() + "'");
          op.qualifications.insert(*v);
        }
      inst.operators.push_back(std::move(op));
    }

    for (const auto& l : j.at("locations"))
      inst.locations.push_back({l.at("id").get<int>(), l.value("capacity", 0), windows_from(l, "open"),
                                l.at("macro_location").get<std::string>()});

    for (const auto& s : j.at("sessions")) {
      SessionSpec ss;
      ss.id = s.at("id").get<int>();
      ss.patient = s.at("patient").get<int>();
      auto kind = s.at("kind").get<std::string>();
      if (kind != "individual" && kind != "supervised") throw FormatError("unknown kind '" + kind + "'");
      ss.kind = kind == "individual" ? SessionKind::individual : SessionKind::supervised;
      ss.min_length = s.at("min_length").get<int>();
      ss.ideal_length = s.at("ideal_length").get<int>();
      auto opt = s.value("optionality", std::string("mandatory"));
      if (opt != "mandatory" && opt != "optional") throw FormatError("unknown optionality '" + opt + "'");
      ss.optionality = opt == "optional" ? Optionality::optional : Optionality::mandatory;
      ss.macro_location = s.at("macro_location").get<std::string>();
      if (s.contains("forced_time") && !s.at("forced_time").is_null())
        ss.forced_time = ForcedTime{s.at("forced_time").at("period").get<int>(), s.at("forced_time").at("slot").get<int>()};
      if (s.contains("preference") && !s.at("preference").is_null()) {
        const auto& p = s.at("preference");
        auto pr = p.value("priority", std::string("high"));
        if (pr != "high" && pr != "low") throw FormatError("unknown priority '" + pr + "'");
        ss.preference = SessionPreference{p.at("period").get<int>(), p.at("start").get<int>(),
                                          pr == "high" ? Priority::high : Priority::low};
      }
      inst.sessions.push_back(std::move(ss));
    }
    return inst;
  });
}

// ---------------------------------------------------------------------------
// Solutions and reports
// ---------------------------------------------------------------------------

inline json to_json(const BoardSolution& b) {
  json j = json::object();
  for (const auto& [p, o] : b.assignment) j[std::to_string(p)] = o;
  return j;
}

inline BoardSolution board_from_json(const json& j) {
  return detail::wrap("board", [&] {
    if (!j.is_object()) throw FormatError("board must be an object mapping patient id to operator id");
    BoardSolution b;
    for (const auto& [k, v] : j.items()) {
      std::size_t used = 0;
      int pid = 0;
      try {
        pid = std::stoi(k, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != k.size() || k.empty()) throw FormatError("bad patient id key '" + k + "'");
      b.assignment[pid] = v.get<int>();
    }
    return b;
  });
}

inline json to_json(const SessionPlacement& p) {
  return {{"session", p.session}, {"period", p.period}, {"start", p.start}, {"length", p.length},
          {"before", p.before},   {"after", p.after},   {"location", p.location}};
}

inline json to_json(const AgendaSolution& a) {
  json arr = json::array();
  for (const auto& [sid, p] : a.placements) arr.push_back(to_json(p));
  return arr;
}

inline AgendaSolution agenda_from_json(const json& j) {
  return detail::wrap("agenda", [&] {
    if (!j.is_array()) throw FormatError("agenda must be an array of placements");
    AgendaSolution a;
    for (const auto& r : j) {
      SessionPlacement p{r.at("session").get<int>(), r.at("period").get<int>(), r.at("start").get<int>(),
                         r.at("length").get<int>(),  r.value("before", 0),      r.value("after", 0),
                         r.at("location").get<int>()};
      if (!a.placements.emplace(p.session, p).second)
        throw FormatError("session " + std::to_string(p.session) + " placed twice");
    }
    return a;
  });
}

inline json to_json(const Violation& v) {
  return {{"rule", to_string(v.rule)}, {"entities", v.entities}, {"detail", v.detail}};
}

inline json to_json(const std::vector<Violation>& vs) {
  json arr = json::array();
  for (const auto& v : vs) arr.push_back(to_json(v));
  return arr;
}

inline json to_json(const CostVector& c) { return c.levels; }

inline json to_json(const std::vector<ValidationIssue>& issues) {
  json arr = json::array();
  for (const auto& i : issues) arr.push_back({{"entity", i.entity}, {"issue", i.issue}});
  return arr;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline Instance load_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }
inline BoardSolution load_board(const std::string& path) { return board_from_json(read_json_file(path)); }
inline AgendaSolution load_agenda(const std::string& path) { return agenda_from_json(read_json_file(path)); }

}  // namespace rsp
