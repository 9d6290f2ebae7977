#pragma once

// One fixture per hard rule. Each draws random candidate solutions around a feasible base and
// states, from its own arithmetic, which rule tags the checker must raise. The expectations
// never call into feas.

#include <functional>
#include <optional>
#include <vector>

#include "rsp/feas.hpp"
#include "rsp/rng.hpp"
#include "support.hpp"

namespace rsp::testing {

struct Candidate {
  Instance instance;
  BoardSolution board;
  std::optional<AgendaSolution> agenda;  // absent for board-rule fixtures
  RuleMask expected = 0;
};

struct RuleFixture {
  Rule rule;
  std::function<Candidate(Rng&)> draw;
};

/// Tags raised by the checker for a candidate: board rules, plus agenda rules when an agenda is given.
inline RuleMask checked_mask(const Candidate& c) {
  const Problem pb(c.instance);
  RuleMask m = mask_of(check_board(pb, c.board));
  if (c.agenda) m |= mask_of(check_agenda(pb, c.board, *c.agenda));
  return m;
}

namespace fixture_detail {

inline bool overlap(int a0, int a1, int b0, int b1) { return a0 < b1 && b0 < a1; }

/// One 12-slot period (or two) and operator 1 on duty for all of it.
inline Instance agenda_base(int periods = 1, int slots = 12) {
  Instance inst;
  inst.grid = grid_of(std::vector<int>(static_cast<std::size_t>(periods), slots));
  inst.operators.push_back(Operator::fictitious());
  std::vector<Window> shifts;
  for (int p = 0; p < periods; ++p) shifts.push_back({p, 0, slots});
  inst.operators.push_back(plain_operator(1, shifts));
  inst.locations.push_back(location(1, 0, inst.grid, "floor"));
  return inst;
}

inline SessionSpec supervised(int min, int ideal, Optionality o = Optionality::mandatory) {
  return session(min, ideal, "floor", SessionKind::supervised, o);
}

inline Candidate b1(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  for (int p = 1; p <= 3; ++p) add_patient(c.instance, p, {supervised(1, 1)});
  for (int p = 1; p <= 3; ++p) {
    if (rng.bernoulli(0.3)) c.expected = bit(Rule::B1);
    else c.board.assignment[p] = rng.bernoulli(0.5) ? 1 : kFictitiousOperator;
  }
  return c;
}

inline Candidate b2(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  c.instance.locations.push_back(location(2, 0, c.instance.grid, "annex"));
  const int total = rng.uniform_int(0, 12);
  c.instance.operators[1].total_time = total;
  int daily[2], mins[2];
  std::string macro[2];
  for (int i = 0; i < 2; ++i) {
    mins[i] = rng.uniform_int(1, 4);
    daily[i] = mins[i] + rng.uniform_int(0, 3);
    macro[i] = rng.bernoulli(0.5) ? "floor" : "annex";
    add_patient(c.instance, i + 1, {session(mins[i], mins[i] + 1, macro[i])}, daily[i]);
  }
  bool on[2];
  for (int i = 0; i < 2; ++i) {
    on[i] = rng.bernoulli(0.7);
    c.board.assignment[i + 1] = on[i] ? 1 : kFictitiousOperator;
  }
  // Two patients of the operator sharing a floor charge their session minimum, a lone one its daily minimum.
  const bool shared = on[0] && on[1] && macro[0] == macro[1];
  int load = 0;
  for (int i = 0; i < 2; ++i)
    if (on[i]) load += shared ? mins[i] : daily[i];
  if (load > total) c.expected = bit(Rule::B2);
  return c;
}

inline Candidate b3(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  const int cap = rng.uniform_int(0, 4);
  c.instance.operators[1].max_patients = cap;
  int n = 0;
  for (int p = 1; p <= 4; ++p) {
    add_patient(c.instance, p, {supervised(1, 1)});
    const bool on = rng.bernoulli(0.6);
    n += on;
    c.board.assignment[p] = on ? 1 : kFictitiousOperator;
  }
  if (n > cap) c.expected = bit(Rule::B3);
  return c;
}

inline Candidate b4(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  const PatientType limited{TypeValue::neurologic, Needs::nolifter, PayStatus::free};
  const PatientType others[] = {limited, {TypeValue::neurologic, Needs::lifter, PayStatus::free},
                                {TypeValue::orthopaedic, Needs::nolifter, PayStatus::free}};
  const int limit = rng.uniform_int(0, 3);
  c.instance.operators[1].type_limits[limited] = limit;
  int n = 0;
  for (int p = 1; p <= 4; ++p) {
    add_patient(c.instance, p, {supervised(1, 1)});
    c.instance.patients.back().ptype = others[rng.index(3)];
    const bool on = rng.bernoulli(0.7);
    c.board.assignment[p] = on ? 1 : kFictitiousOperator;
    if (on && c.instance.patients.back().ptype == limited) ++n;
  }
  if (n > limit) c.expected = bit(Rule::B4);
  return c;
}

inline Candidate b5(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  auto& quals = c.instance.operators[1].qualifications;
  quals.clear();
  for (auto v : kAllTypeValues)
    if (rng.bernoulli(0.5)) quals.insert(v);
  for (int p = 1; p <= 3; ++p) {
    add_patient(c.instance, p, {supervised(1, 1)});
    const auto v = kAllTypeValues[rng.index(kAllTypeValues.size())];
    c.instance.patients.back().ptype.value = v;
    const bool on = rng.bernoulli(0.7);
    c.board.assignment[p] = on ? 1 : kFictitiousOperator;
    if (on && !quals.count(v)) c.expected = bit(Rule::B5);
  }
  return c;
}

inline Candidate a1(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  const Optionality kinds[] = {Optionality::mandatory, Optionality::mandatory, Optionality::optional};
  std::vector<SessionPlacement> pls;
  for (int p = 1; p <= 3; ++p) {
    add_patient(c.instance, p, {supervised(2, 2, kinds[p - 1])}, 0);
    const bool real = rng.bernoulli(0.8);
    c.board.assignment[p] = real ? 1 : kFictitiousOperator;
    const bool placed = real && rng.bernoulli(0.6);
    if (placed) pls.push_back({p, 0, 4 * (p - 1), 2, 0, 0, 1});
    else if (real && kinds[p - 1] == Optionality::mandatory) c.expected = bit(Rule::A1);
  }
  c.agenda = agenda_of(pls);
  return c;
}

inline Candidate a2(Rng& rng) {
  Candidate c;
  c.instance = agenda_base(2);
  c.instance.operators[1].shifts = {{0, 2, 10}};
  add_patient(c.instance, 1, {session(3, 6)}, 0);
  c.board.assignment[1] = 1;
  const int per = rng.bernoulli(0.8) ? 0 : 1;
  const int t = rng.uniform_int(0, 9);
  const int len = rng.uniform_int(1, 8);
  c.agenda = agenda_of({{1, per, t, len, 0, 0, 1}});
  const bool in_shift = per == 0 && t >= 2 && t + len <= 10;
  if (!in_shift || len < 3 || len > 6) c.expected |= bit(Rule::A2);
  // Zero extensions still exceed what is left of the shift when the individual part sticks out.
  if (per == 0 && (t < 2 || t + len > 10)) c.expected |= bit(Rule::A4);
  return c;
}

inline Candidate a3(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  c.instance.locations.push_back(location(2, 0, c.instance.grid, "floor"));
  c.instance.locations.push_back(location(3, 0, c.instance.grid, "annex"));
  add_patient(c.instance, 1, {supervised(2, 3)}, 0);
  c.board.assignment[1] = 1;
  const int loc = rng.uniform_int(1, 3);
  c.agenda = agenda_of({{1, 0, rng.uniform_int(0, 9), 2, 0, 0, loc}});
  if (loc == 3) c.expected = bit(Rule::A3);
  return c;
}

inline Candidate a4(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  c.instance.operators[1].shifts = {{0, 2, 10}};
  add_patient(c.instance, 1, {supervised(3, 3)}, 0);
  c.board.assignment[1] = 1;
  const int t = rng.uniform_int(2, 7);
  const int lb = rng.uniform_int(-1, 4), la = rng.uniform_int(-1, 4);
  c.agenda = agenda_of({{1, 0, t, 3, lb, la, 1}});
  if (lb < 0 || la < 0 || lb > t - 2 || la > 10 - t - 3) c.expected = bit(Rule::A4);
  return c;
}

inline Candidate a5(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  const bool both_individual = rng.bernoulli(0.75);
  add_patient(c.instance, 1, {session(3, 3)}, 0);
  add_patient(c.instance, 2, {both_individual ? session(3, 3) : supervised(3, 3)}, 0);
  c.board.assignment = {{1, 1}, {2, 1}};
  const int t1 = rng.uniform_int(0, 9), t2 = rng.uniform_int(0, 9);
  c.agenda = agenda_of({{1, 0, t1, 3, 0, 0, 1}, {2, 0, t2, 3, 0, 0, 1}});
  if (both_individual && overlap(t1, t1 + 3, t2, t2 + 3)) c.expected = bit(Rule::A5);
  return c;
}

inline Candidate a6(Rng& rng) {
  Candidate c;
  c.instance = agenda_base(2);
  add_patient(c.instance, 1, {supervised(2, 2), supervised(2, 2)}, 0);
  c.board.assignment[1] = 1;
  const int p1 = rng.uniform_int(0, 1), p2 = rng.uniform_int(0, 1);
  c.agenda = agenda_of({{1, p1, 0, 2, 0, 0, 1}, {2, p2, 5, 2, 0, 0, 1}});
  if (p1 == p2) c.expected = bit(Rule::A6);
  return c;
}

/// The three fairness patterns for an ordered pair, written out from the slack definitions.
inline bool unfair(int min1, int ideal1, int len1, int min2, int ideal2, int len2) {
  const int slack1 = ideal1 - len1, slack2 = ideal2 - len2;
  const int room1 = ideal1 - min1, room2 = ideal2 - min2;
  const bool mutual = slack1 <= room2 && slack2 <= room1;
  const bool uneven = mutual && (slack1 - slack2 > 1 || slack2 - slack1 > 1);
  const bool unabsorbed = slack1 > room2 && len2 > min2;
  const bool inverted = mutual && ideal2 < ideal1 && slack1 < slack2;
  return uneven || unabsorbed || inverted;
}

inline Candidate a7(Rng& rng) {
  Candidate c;
  c.instance = agenda_base(1, 16);
  c.instance.locations.push_back(location(2, 0, c.instance.grid, "floor"));
  int mins[2], ideals[2], lens[2];
  for (int i = 0; i < 2; ++i) {
    mins[i] = rng.uniform_int(1, 4);
    ideals[i] = mins[i] + rng.uniform_int(0, 3);
    lens[i] = rng.uniform_int(mins[i], ideals[i]);
    add_patient(c.instance, i + 1, {session(mins[i], ideals[i])}, 0);
  }
  c.board.assignment = {{1, 1}, {2, 1}};
  const bool same_room = rng.bernoulli(0.8);
  c.agenda = agenda_of({{1, 0, 0, lens[0], 0, 0, 1}, {2, 0, 8, lens[1], 0, 0, same_room ? 1 : 2}});
  if (same_room && (unfair(mins[0], ideals[0], lens[0], mins[1], ideals[1], lens[1]) ||
                    unfair(mins[1], ideals[1], lens[1], mins[0], ideals[0], lens[0])))
    c.expected = bit(Rule::A7);
  return c;
}

inline Candidate a8(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  c.instance.locations.push_back(location(2, 0, c.instance.grid, "floor"));
  add_patient(c.instance, 1, {supervised(2, 2)}, 0);
  add_patient(c.instance, 2, {supervised(2, 2)}, 0);
  c.board.assignment = {{1, 1}, {2, 1}};
  std::vector<SessionPlacement> pls;
  int lo[2], hi[2], loc[2];
  for (int i = 0; i < 2; ++i) {
    const int t = rng.uniform_int(0, 10);
    const int lb = rng.uniform_int(0, std::min(2, t)), la = rng.uniform_int(0, std::min(2, 10 - t));
    loc[i] = rng.uniform_int(1, 2);
    lo[i] = t - lb;
    hi[i] = t + 2 + la;
    pls.push_back({i + 1, 0, t, 2, lb, la, loc[i]});
  }
  c.agenda = agenda_of(pls);
  if (loc[0] != loc[1] && overlap(lo[0], hi[0], lo[1], hi[1])) c.expected = bit(Rule::A8);
  return c;
}

inline Candidate a9(Rng& rng) {
  Candidate c;
  c.instance = agenda_base(2);
  const int daily = rng.uniform_int(2, 12);
  add_patient(c.instance, 1, {supervised(2, 4), supervised(2, 4, Optionality::optional)}, daily);
  c.board.assignment[1] = 1;
  std::vector<SessionPlacement> pls;
  int reserved = 0;
  for (int per = 0; per < 2; ++per) {
    if (per == 1 && rng.bernoulli(0.3)) continue;
    const int t = rng.uniform_int(0, 8);
    const int len = rng.uniform_int(2, 4);
    const int lb = rng.uniform_int(0, std::min(2, t)), la = rng.uniform_int(0, std::min(2, 12 - t - len));
    pls.push_back({per + 1, per, t, len, lb, la, 1});
    reserved += lb + len + la;
  }
  c.agenda = agenda_of(pls);
  if (reserved < daily) c.expected = bit(Rule::A9);
  return c;
}

inline Candidate a10(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  const int cap = rng.uniform_int(1, 3);
  const int open_lo = rng.uniform_int(0, 6), open_hi = rng.uniform_int(open_lo + 1, 12);
  c.instance.locations[0].capacity = cap;
  c.instance.locations[0].open = {{0, open_lo, open_hi}};
  int count[12] = {};
  std::vector<SessionPlacement> pls;
  for (int p = 1; p <= 4; ++p) {
    add_patient(c.instance, p, {supervised(3, 3)}, 0);
    c.board.assignment[p] = 1;
    const int t = rng.uniform_int(0, 9);
    pls.push_back({p, 0, t, 3, 0, 0, 1});
    for (int s = t; s < t + 3; ++s) ++count[s];
  }
  c.agenda = agenda_of(pls);
  for (int s = open_lo; s < open_hi; ++s)
    if (count[s] > cap) c.expected = bit(Rule::A10);
  return c;
}

inline Candidate a11(Rng& rng) {
  Candidate c;
  c.instance = agenda_base(2);
  add_patient(c.instance, 1, {supervised(3, 3)}, 0);
  const int fper = rng.uniform_int(0, 1);
  const int f0 = rng.uniform_int(0, 10), f1 = rng.uniform_int(f0 + 1, 12);
  c.instance.patients[0].forbidden = {{fper, f0, f1}};
  c.board.assignment[1] = 1;
  const int t = rng.uniform_int(0, 9);
  const int lb = rng.uniform_int(0, std::min(2, t)), la = rng.uniform_int(0, std::min(2, 9 - t));
  c.agenda = agenda_of({{1, 0, t, 3, lb, la, 1}});
  if (fper == 0 && overlap(t - lb, t + 3 + la, f0, f1)) c.expected = bit(Rule::A11);
  return c;
}

inline Candidate a12(Rng& rng) {
  Candidate c;
  c.instance = agenda_base();
  c.instance.locations.push_back(location(2, 0, c.instance.grid, "floor"));
  const bool third = rng.bernoulli(0.3);
  if (third) c.instance.locations.push_back(location(3, 0, c.instance.grid, "floor"));
  int count[3][12] = {};
  std::vector<SessionPlacement> pls;
  for (int p = 1; p <= 5; ++p) {
    c.instance.operators.push_back(plain_operator(p + 1, {{0, 0, 12}}));
    add_patient(c.instance, p, {supervised(3, 3)}, 0);
    c.board.assignment[p] = p + 1;
    const int t = rng.uniform_int(0, 9);
    const int loc = rng.uniform_int(1, third ? 3 : 2);
    pls.push_back({p, 0, t, 3, 0, 0, loc});
    for (int s = t; s < t + 3; ++s) ++count[loc - 1][s];
  }
  c.agenda = agenda_of(pls);
  const int n_locs = third ? 3 : 2;
  for (int s = 0; s < 12; ++s)
    for (int i = 0; i < n_locs; ++i)
      for (int j = 0; j < n_locs; ++j)
        if (count[i][s] - count[j][s] > 2) c.expected = bit(Rule::A12);
  return c;
}

inline Candidate a13(Rng& rng) {
  Candidate c;
  c.instance = agenda_base(2);
  auto s = supervised(2, 2);
  const ForcedTime forced{rng.uniform_int(0, 1), rng.uniform_int(0, 10)};
  s.forced_time = forced;
  add_patient(c.instance, 1, {s}, 0);
  c.board.assignment[1] = 1;
  ForcedTime at = forced;
  if (rng.bernoulli(0.6)) at = {rng.uniform_int(0, 1), rng.uniform_int(0, 10)};
  c.agenda = agenda_of({{1, at.period, at.slot, 2, 0, 0, 1}});
  if (!(at == forced)) c.expected = bit(Rule::A13);
  return c;
}

}  // namespace fixture_detail

inline std::vector<RuleFixture> rule_fixtures() {
  using namespace fixture_detail;
  return {{Rule::B1, b1},   {Rule::B2, b2},   {Rule::B3, b3},   {Rule::B4, b4},   {Rule::B5, b5},   {Rule::A1, a1},
          {Rule::A2, a2},   {Rule::A3, a3},   {Rule::A4, a4},   {Rule::A5, a5},   {Rule::A6, a6},   {Rule::A7, a7},
          {Rule::A8, a8},   {Rule::A9, a9},   {Rule::A10, a10}, {Rule::A11, a11}, {Rule::A12, a12}, {Rule::A13, a13}};
}

}  // namespace rsp::testing
