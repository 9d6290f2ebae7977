#pragma once

// Instance builders shared by the test executables.

#include <string>
#include <utility>
#include <vector>

#include "rsp/feas.hpp"
#include "rsp/rng.hpp"

namespace rsp::testing {

/// Grid with the given slot counts per period, 10-minute slots, periods starting 08:00 and 13:30.
inline TimeGrid grid_of(std::vector<int> slots) {
  TimeGrid g;
  g.slot_minutes = 10;
  const int starts[] = {8 * 60, 13 * 60 + 30, 17 * 60};
  for (std::size_t i = 0; i < slots.size(); ++i)
    g.periods.push_back({static_cast<int>(i), starts[i], starts[i] + 10 * slots[i]});
  return g;
}

/// Operator qualified for everything, unbounded contract, one shift per listed window.
inline Operator plain_operator(int id, std::vector<Window> shifts) {
  Operator op;
  op.id = id;
  op.shifts = std::move(shifts);
  op.qualifications.insert(kAllTypeValues.begin(), kAllTypeValues.end());
  return op;
}

inline LocationSpec location(int id, int capacity, const TimeGrid& g, std::string macro) {
  LocationSpec l{id, capacity, {}, std::move(macro)};
  for (int p = 0; p < g.num_periods(); ++p) l.open.push_back({p, 0, g.slots_in(p)});
  return l;
}

/// Adds a patient with one session per entry of `sessions` (ids assigned in sequence).
inline void add_patient(Instance& inst, int pid, std::vector<SessionSpec> sessions, int min_daily = -1) {
  Patient p;
  p.id = pid;
  int mins = 0;
  for (auto& s : sessions) {
    s.id = static_cast<int>(inst.sessions.size()) + 1;
    s.patient = pid;
    if (!s.is_optional()) mins += s.min_length;
    p.sessions.push_back(s.id);
    inst.sessions.push_back(s);
  }
  p.min_daily_length = min_daily < 0 ? mins : min_daily;
  inst.patients.push_back(std::move(p));
}

inline SessionSpec session(int min, int ideal, std::string macro = "floor",
                           SessionKind kind = SessionKind::individual,
                           Optionality opt = Optionality::mandatory) {
  SessionSpec s;
  s.min_length = min;
  s.ideal_length = ideal;
  s.macro_location = std::move(macro);
  s.kind = kind;
  s.optionality = opt;
  return s;
}

inline AgendaSolution agenda_of(std::vector<SessionPlacement> pls) {
  AgendaSolution a;
  for (const auto& p : pls) a.placements[p.session] = p;
  return a;
}

/// Random board instance inside the default oracle limits (5 patients, 3 real operators).
inline Instance tiny_board_instance(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xB0A2D));
  Instance inst;
  inst.grid = TimeGrid::hospital_default();
  const int n_ops = rng.uniform_int(1, 3);
  const int n_pat = rng.uniform_int(1, 5);
  const std::vector<std::string> macros{"north", "south"};

  inst.operators.push_back(Operator::fictitious());
  for (int i = 1; i <= n_ops; ++i) {
    Operator op;
    op.id = i;
    op.shifts.push_back({0, 0, 24});
    for (auto v : {TypeValue::neurologic, TypeValue::orthopaedic, TypeValue::outpatient})
      if (rng.bernoulli(0.7)) op.qualifications.insert(v);
    if (rng.bernoulli(0.6)) op.total_time = rng.uniform_int(3, 14);
    if (rng.bernoulli(0.4)) op.max_patients = rng.uniform_int(1, 3);
    if (rng.bernoulli(0.3))
      op.type_limits[PatientType{TypeValue::neurologic, Needs::nolifter, PayStatus::free}] = rng.uniform_int(0, 1);
    inst.operators.push_back(std::move(op));
  }
  for (const auto& m : macros) inst.locations.push_back(location(static_cast<int>(inst.locations.size()) + 1, 0, inst.grid, m));

  for (int pid = 1; pid <= n_pat; ++pid) {
    std::vector<SessionSpec> ss;
    const int n_sessions = rng.uniform_int(1, 2);
    for (int k = 0; k < n_sessions; ++k) {
      const int ideal = rng.uniform_int(2, 5);
      ss.push_back(session(rng.uniform_int(1, ideal), ideal, macros[rng.index(2)]));
    }
    add_patient(inst, pid, ss);
    auto& p = inst.patients.back();
    p.min_daily_length += rng.uniform_int(0, 2);
    const TypeValue values[] = {TypeValue::neurologic, TypeValue::orthopaedic, TypeValue::outpatient};
    p.ptype.value = values[rng.index(3)];
    p.ptype.needs = Needs::nolifter;
    p.ptype.status = PayStatus::free;
    if (rng.bernoulli(0.7)) {
      std::vector<int> ids;
      for (int i = 1; i <= n_ops; ++i) ids.push_back(i);
      rng.shuffle(ids);
      int w = 0;
      for (std::size_t r = 0; r < ids.size() && r < 2; ++r) {
        w += rng.uniform_int(0, 2);
        p.preferred_operators.push_back({ids[r], w});
      }
    }
    if (rng.bernoulli(0.4)) p.history_preferences.push_back({rng.uniform_int(1, n_ops), 0});
  }
  return inst;
}

struct AgendaCase {
  Instance instance;
  BoardSolution board;
};

/// Random agenda case inside the default oracle limits: at most 3 sessions and 12 slots per period.
/// Every session belongs to a patient on a real operator unless `allow_fictitious`.
inline AgendaCase tiny_agenda_case(std::uint64_t seed, bool allow_fictitious = true) {
  Rng rng(mix_seed(seed, 0xA6E4DA));
  AgendaCase c;
  auto& inst = c.instance;
  const int periods = rng.bernoulli(0.5) ? 1 : 2;
  std::vector<int> slots;
  for (int p = 0; p < periods; ++p) slots.push_back(rng.uniform_int(6, 12));
  inst.grid = grid_of(slots);

  const int n_ops = rng.uniform_int(1, 2);
  inst.operators.push_back(Operator::fictitious());
  for (int i = 1; i <= n_ops; ++i) {
    std::vector<Window> shifts;
    for (int p = 0; p < periods; ++p) {
      if (periods == 2 && rng.bernoulli(0.2)) continue;
      const int a = rng.bernoulli(0.6) ? 0 : rng.uniform_int(0, 2);
      const int b = slots[static_cast<std::size_t>(p)] - (rng.bernoulli(0.6) ? 0 : rng.uniform_int(0, 2));
      shifts.push_back({p, a, b});
    }
    if (shifts.empty()) shifts.push_back({0, 0, slots[0]});
    inst.operators.push_back(plain_operator(i, shifts));
  }

  const int n_locs = rng.uniform_int(1, 3);
  const bool two_macros = n_locs >= 2 && rng.bernoulli(0.3);
  for (int l = 1; l <= n_locs; ++l) {
    auto loc = location(l, rng.uniform_int(0, 2), inst.grid, two_macros && l == n_locs ? "annex" : "floor");
    if (rng.bernoulli(0.2)) loc.open = {{0, 0, slots[0] / 2}};
    inst.locations.push_back(std::move(loc));
  }

  const int n_sessions = rng.uniform_int(1, 3);
  int pid = 0;
  int made = 0;
  while (made < n_sessions) {
    ++pid;
    const int k = std::min(n_sessions - made, periods == 2 && rng.bernoulli(0.4) ? 2 : 1);
    std::vector<SessionSpec> ss;
    for (int j = 0; j < k; ++j) {
      const int ideal = rng.uniform_int(1, 5);
      auto s = session(rng.uniform_int(std::max(1, ideal - 2), ideal),
                       ideal, two_macros && rng.bernoulli(0.3) ? "annex" : "floor",
                       rng.bernoulli(0.7) ? SessionKind::individual : SessionKind::supervised,
                       j > 0 && rng.bernoulli(0.6) ? Optionality::optional : Optionality::mandatory);
      if (rng.bernoulli(0.1)) s.optionality = Optionality::optional;
      const int per = rng.uniform_int(0, periods - 1);
      const int ps = slots[static_cast<std::size_t>(per)];
      if (rng.bernoulli(0.4))
        s.preference = SessionPreference{per, rng.uniform_int(0, ps - 1), rng.bernoulli(0.5) ? Priority::high : Priority::low};
      if (rng.bernoulli(0.1)) s.forced_time = ForcedTime{per, rng.uniform_int(0, ps - 1)};
      ss.push_back(s);
    }
    made += k;
    add_patient(inst, pid, ss);
    auto& p = inst.patients.back();
    if (rng.bernoulli(0.3)) p.min_daily_length += rng.uniform_int(1, 3);
    if (rng.bernoulli(0.35)) {
      const int per = rng.uniform_int(0, periods - 1);
      const int ps = slots[static_cast<std::size_t>(per)];
      const int a = rng.uniform_int(0, ps - 2);
      p.forbidden.push_back({per, a, rng.uniform_int(a + 1, std::min(ps, a + 4))});
    }
    int op = rng.uniform_int(1, n_ops);
    if (allow_fictitious && rng.bernoulli(0.08)) op = kFictitiousOperator;
    c.board.assignment[pid] = op;
  }
  return c;
}

}  // namespace rsp::testing
