#pragma once

// Seeded synthetic instances shaped after two rehabilitation institutes.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsp/json_io.hpp"
#include "rsp/model.hpp"
#include "rsp/rng.hpp"

namespace rsp {

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct GenParams {
  int n_patients = 37;
  int n_operators = 9;
  // When set, counts are drawn from these ranges (rejecting draws whose density falls outside
  // density_range) instead of using the fixed counts above.
  std::optional<IntRange> patients_range;
  std::optional<IntRange> operators_range;
  std::optional<std::pair<double, double>> density_range;

  int n_floors = 1;
  int n_gyms = 1;
  IntRange gym_capacity{12, 20};

  double pct_individual = 0.7;
  // Shift pattern weights: both periods, morning only, afternoon only.
  double shift_both = 0.6;
  double shift_morning = 0.2;
  double shift_afternoon = 0.2;
  int shift_trim_max = 3;  // slots trimmed off each end of a shift, uniform in [0, max]

  IntRange ideal_length{3, 9};
  int min_drop_max = 3;  // min = ideal - uniform[0, min_drop_max]
  int min_length_floor = 2;

  double optional_rate = 0.3;   // chance of an optional second session
  double forbidden_rate = 0.15; // chance of a forbidden window per patient
  IntRange forbidden_length{2, 6};
  double preference_rate = 0.5;
  double high_priority_rate = 0.6;
  double forced_rate = 0.0;   // forced times only when asked for; see README
  double tight_daily_rate = 0.8;  // daily minimum = sum of mandatory minimum lengths

  double qualification_rate = 0.7;
  double outpatient_rate = 0.15;
  double lifter_rate = 0.3;
  double payer_rate = 0.5;
  double type_limit_rate = 0.2;
  IntRange max_patients{6, 10};
  double preferred_rate = 0.6;
  int max_preferred = 3;
  double history_rate = 0.3;

  std::uint64_t seed = 0;

  void validate() const {
    auto prob = [](double p, const char* what) {
      if (!(p >= 0 && p <= 1)) throw std::invalid_argument(std::string(what) + " must be a probability");
    };
    for (auto [p, n] : {std::pair{pct_individual, "pct_individual"}, {optional_rate, "optional_rate"},
                        {forbidden_rate, "forbidden_rate"}, {preference_rate, "preference_rate"},
                        {high_priority_rate, "high_priority_rate"}, {forced_rate, "forced_rate"},
                        {tight_daily_rate, "tight_daily_rate"}, {qualification_rate, "qualification_rate"},
                        {outpatient_rate, "outpatient_rate"}, {lifter_rate, "lifter_rate"},
                        {payer_rate, "payer_rate"}, {type_limit_rate, "type_limit_rate"},
                        {preferred_rate, "preferred_rate"}, {history_rate, "history_rate"}})
      prob(p, n);
    if (shift_both < 0 || shift_morning < 0 || shift_afternoon < 0 || shift_both + shift_morning + shift_afternoon <= 0)
      throw std::invalid_argument("shift weights must be non-negative and not all zero");
    auto range = [](IntRange r, int floor, const char* what) {
      if (r.lo < floor || r.hi < r.lo) throw std::invalid_argument(std::string("bad range ") + what);
    };
    if (patients_range) range(*patients_range, 0, "patients_range");
    else if (n_patients < 0) throw std::invalid_argument("n_patients must be non-negative");
    if (operators_range) range(*operators_range, 1, "operators_range");
    else if (n_operators < 1) throw std::invalid_argument("n_operators must be positive");
    if (density_range && density_range->second < density_range->first)
      throw std::invalid_argument("bad density_range");
    if (n_floors < 1 || n_gyms < 1) throw std::invalid_argument("floors and gyms must be positive");
    range(gym_capacity, 0, "gym_capacity");
    range(ideal_length, 1, "ideal_length");
    range(forbidden_length, 1, "forbidden_length");
    range(max_patients, 1, "max_patients");
    if (min_drop_max < 0 || shift_trim_max < 0 || max_preferred < 0)
      throw std::invalid_argument("negative distribution parameter");
    if (min_length_floor < 1) throw std::invalid_argument("min_length_floor must be positive");
    if (min_length_floor > ideal_length.hi) throw std::invalid_argument("min exceeds ideal");
  }
};

/// Table 1 envelopes: Genova Nervi and Castel Goffredo.
inline GenParams preset(const std::string& name) {
  GenParams p;
  if (name == "nervi") {
    p.operators_range = IntRange{9, 18};
    p.patients_range = IntRange{37, 67};
    p.density_range = {2.4, 5.2};
    p.n_floors = 1;
    p.n_gyms = 1;
  } else if (name == "castel_goffredo") {
    p.operators_range = IntRange{11, 17};
    p.patients_range = IntRange{51, 78};
    p.density_range = {3.5, 6.4};
    p.n_floors = 2;
    p.n_gyms = 3;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return p;
}

inline Instance generate(const GenParams& params) {
  params.validate();
  Rng rng(mix_seed(params.seed, 0x6E4E7A70));
  Instance inst;
  const auto& g = inst.grid;

  int n_ops = params.n_operators, n_pat = params.n_patients;
  if (params.operators_range || params.patients_range) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw std::invalid_argument("density_range unreachable with the given count ranges");
      n_ops = params.operators_range ? rng.uniform_int(params.operators_range->lo, params.operators_range->hi)
                                     : params.n_operators;
      n_pat = params.patients_range ? rng.uniform_int(params.patients_range->lo, params.patients_range->hi)
                                    : params.n_patients;
      const double d = static_cast<double>(n_pat) / n_ops;
      if (!params.density_range || (d >= params.density_range->first && d <= params.density_range->second)) break;
    }
  }

  // Operators.
  inst.operators.push_back(Operator::fictitious());
  for (int i = 1; i <= n_ops; ++i) {
    Operator op;
    op.id = i;
    const auto pattern = rng.weighted({params.shift_both, params.shift_morning, params.shift_afternoon});
    for (int per = 0; per < g.num_periods(); ++per) {
      const bool works = pattern == 0 || (pattern == 1 && per == 0) || (pattern == 2 && per == 1);
      if (!works) continue;
      const int slots = g.slots_in(per);
      const int trim = std::min(params.shift_trim_max, slots / 4);
      const int start = rng.uniform_int(0, trim);
      const int end = slots - rng.uniform_int(0, trim);
      op.shifts.push_back({per, start, end});
    }
    op.total_time = op.shift_slots();
    op.max_patients = rng.uniform_int(params.max_patients.lo, params.max_patients.hi);
    for (auto v : kAllTypeValues)
      if (rng.bernoulli(params.qualification_rate)) op.qualifications.insert(v);
    if (op.qualifications.empty()) op.qualifications.insert(kAllTypeValues[rng.index(kAllTypeValues.size())]);
    if (rng.bernoulli(params.type_limit_rate)) {
      PatientType t{kAllTypeValues[rng.index(kAllTypeValues.size())], rng.bernoulli(0.5) ? Needs::lifter : Needs::nolifter,
                    rng.bernoulli(0.5) ? PayStatus::payer : PayStatus::free};
      op.type_limits[t] = rng.uniform_int(1, 3);
    }
    inst.operators.push_back(std::move(op));
  }

  // Floors with gyms dealt round-robin.
  int next_location = 1;
  auto full_open = [&] {
    std::vector<Window> open;
    for (int per = 0; per < g.num_periods(); ++per) open.push_back({per, 0, g.slots_in(per)});
    return open;
  };
  std::vector<std::string> floors_with_gyms;
  for (int gym = 0; gym < params.n_gyms; ++gym) {
    const std::string floor = "floor-" + std::to_string(gym % params.n_floors + 1);
    inst.locations.push_back({next_location++, rng.uniform_int(params.gym_capacity.lo, params.gym_capacity.hi),
                              full_open(), floor});
    if (std::find(floors_with_gyms.begin(), floors_with_gyms.end(), floor) == floors_with_gyms.end())
      floors_with_gyms.push_back(floor);
  }

  // Patients and their sessions.
  int next_session = 1;
  for (int pid = 1; pid <= n_pat; ++pid) {
    Patient p;
    p.id = pid;
    const bool outpatient = rng.bernoulli(params.outpatient_rate);
    p.ptype.value = outpatient ? TypeValue::outpatient : kAllTypeValues[rng.index(4)];
    p.ptype.needs = rng.bernoulli(params.lifter_rate) ? Needs::lifter : Needs::nolifter;
    p.ptype.status = rng.bernoulli(params.payer_rate) ? PayStatus::payer : PayStatus::free;

    std::string macro = floors_with_gyms[rng.index(floors_with_gyms.size())];
    if (!outpatient) {
      const std::string room = "room-" + std::to_string(pid);
      inst.locations.push_back({next_location++, 1, full_open(), room});
      if (p.ptype.needs == Needs::lifter) macro = room;
    }

    const int first_period = rng.uniform_int(0, g.num_periods() - 1);
    const bool second = g.num_periods() > 1 && rng.bernoulli(params.optional_rate);
    int sum_min = 0, sum_ideal = 0;
    for (int k = 0; k < (second ? 2 : 1); ++k) {
      const int period = k == 0 ? first_period : (first_period + 1) % g.num_periods();
      SessionSpec s;
      s.id = next_session++;
      s.patient = pid;
      s.kind = rng.bernoulli(params.pct_individual) ? SessionKind::individual : SessionKind::supervised;
      const int slots = g.slots_in(period);
      s.ideal_length = std::min(rng.uniform_int(params.ideal_length.lo, params.ideal_length.hi), slots);
      s.min_length = std::clamp(s.ideal_length - rng.uniform_int(0, params.min_drop_max),
                                std::min(params.min_length_floor, s.ideal_length), s.ideal_length);
      s.optionality = k == 0 ? Optionality::mandatory : Optionality::optional;
      s.macro_location = macro;
      if (rng.bernoulli(params.preference_rate))
        s.preference = SessionPreference{period, rng.uniform_int(0, slots - s.ideal_length),
                                         rng.bernoulli(params.high_priority_rate) ? Priority::high : Priority::low};
      if (rng.bernoulli(params.forced_rate)) {
        // Inside every shift of the period, whatever its trims.
        const int trim = std::min(params.shift_trim_max, slots / 4);
        const int hi = std::max(trim, slots - trim - s.ideal_length);
        s.forced_time = ForcedTime{period, rng.uniform_int(trim, hi)};
      }
      if (k == 0) {
        sum_min += s.min_length;
        sum_ideal += s.ideal_length;
      }
      p.sessions.push_back(s.id);
      inst.sessions.push_back(std::move(s));
    }
    p.min_daily_length = rng.bernoulli(params.tight_daily_rate) ? sum_min : rng.uniform_int(sum_min, sum_ideal);

    if (rng.bernoulli(params.forbidden_rate)) {
      const int per = rng.uniform_int(0, g.num_periods() - 1);
      const int slots = g.slots_in(per);
      const int len = std::min(rng.uniform_int(params.forbidden_length.lo, params.forbidden_length.hi), slots);
      const int start = rng.uniform_int(0, slots - len);
      p.forbidden.push_back({per, start, start + len});
      // A forced time inside the patient's own forbidden window would be self-contradictory.
      for (auto sid : p.sessions) {
        auto& s = inst.sessions[static_cast<std::size_t>(sid - 1)];
        if (s.forced_time && s.forced_time->period == per && s.forced_time->slot < start + len &&
            start < s.forced_time->slot + s.ideal_length)
          s.forced_time.reset();
      }
    }
    if (n_ops > 0 && rng.bernoulli(params.preferred_rate)) {
      const int k = rng.uniform_int(1, std::min(params.max_preferred, n_ops));
      std::vector<int> ids(static_cast<std::size_t>(n_ops));
      for (int i = 0; i < n_ops; ++i) ids[static_cast<std::size_t>(i)] = i + 1;
      rng.shuffle(ids);
      for (int r = 0; r < k; ++r) p.preferred_operators.push_back({ids[static_cast<std::size_t>(r)], r});
    }
    if (n_ops > 0 && rng.bernoulli(params.history_rate)) {
      const int k = rng.uniform_int(1, std::min(2, n_ops));
      std::vector<int> ids(static_cast<std::size_t>(n_ops));
      for (int i = 0; i < n_ops; ++i) ids[static_cast<std::size_t>(i)] = i + 1;
      rng.shuffle(ids);
      for (int r = 0; r < k; ++r) p.history_preferences.push_back({ids[static_cast<std::size_t>(r)], r});
    }
    inst.patients.push_back(std::move(p));
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Params file
// ---------------------------------------------------------------------------

namespace gen_detail {

inline json range_to(const IntRange& r) { return json::array({r.lo, r.hi}); }
inline IntRange range_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("range must be [lo, hi]");
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace gen_detail

inline json to_json(const GenParams& p) {
  using namespace gen_detail;
  json j = {{"n_patients", p.n_patients},
            {"n_operators", p.n_operators},
            {"n_floors", p.n_floors},
            {"n_gyms", p.n_gyms},
            {"gym_capacity", range_to(p.gym_capacity)},
            {"pct_individual", p.pct_individual},
            {"shift_weights", {p.shift_both, p.shift_morning, p.shift_afternoon}},
            {"shift_trim_max", p.shift_trim_max},
            {"ideal_length", range_to(p.ideal_length)},
            {"min_drop_max", p.min_drop_max},
            {"min_length_floor", p.min_length_floor},
            {"optional_rate", p.optional_rate},
            {"forbidden_rate", p.forbidden_rate},
            {"forbidden_length", range_to(p.forbidden_length)},
            {"preference_rate", p.preference_rate},
            {"high_priority_rate", p.high_priority_rate},
            {"forced_rate", p.forced_rate},
            {"tight_daily_rate", p.tight_daily_rate},
            {"qualification_rate", p.qualification_rate},
            {"outpatient_rate", p.outpatient_rate},
            {"lifter_rate", p.lifter_rate},
            {"payer_rate", p.payer_rate},
            {"type_limit_rate", p.type_limit_rate},
            {"max_patients", range_to(p.max_patients)},
            {"preferred_rate", p.preferred_rate},
            {"max_preferred", p.max_preferred},
            {"history_rate", p.history_rate},
            {"seed", p.seed}};
  if (p.patients_range) j["patients_range"] = range_to(*p.patients_range);
  if (p.operators_range) j["operators_range"] = range_to(*p.operators_range);
  if (p.density_range) j["density_range"] = {p.density_range->first, p.density_range->second};
  return j;
}

/// Missing fields keep their defaults; a "preset" field starts from that preset.
inline GenParams gen_params_from_json(const json& j) {
  using namespace gen_detail;
  return detail::wrap("params", [&] {
    GenParams p = j.contains("preset") ? preset(j.at("preset").get<std::string>()) : GenParams{};
    auto num = [&](const char* k, auto& field) {
      if (j.contains(k)) field = j.at(k).get<std::decay_t<decltype(field)>>();
    };
    auto rng_field = [&](const char* k, IntRange& field) {
      if (j.contains(k)) field = range_from(j.at(k));
    };
    num("n_patients", p.n_patients);
    num("n_operators", p.n_operators);
    num("n_floors", p.n_floors);
    num("n_gyms", p.n_gyms);
    rng_field("gym_capacity", p.gym_capacity);
    num("pct_individual", p.pct_individual);
    if (j.contains("shift_weights")) {
      const auto& w = j.at("shift_weights");
      if (!w.is_array() || w.size() != 3) throw FormatError("shift_weights must be [both, morning, afternoon]");
      p.shift_both = w[0].get<double>();
      p.shift_morning = w[1].get<double>();
      p.shift_afternoon = w[2].get<double>();
    }
    num("shift_trim_max", p.shift_trim_max);
    rng_field("ideal_length", p.ideal_length);
    num("min_drop_max", p.min_drop_max);
    num("min_length_floor", p.min_length_floor);
    num("optional_rate", p.optional_rate);
    num("forbidden_rate", p.forbidden_rate);
    rng_field("forbidden_length", p.forbidden_length);
    num("preference_rate", p.preference_rate);
    num("high_priority_rate", p.high_priority_rate);
    num("forced_rate", p.forced_rate);
    num("tight_daily_rate", p.tight_daily_rate);
    num("qualification_rate", p.qualification_rate);
    num("outpatient_rate", p.outpatient_rate);
    num("lifter_rate", p.lifter_rate);
    num("payer_rate", p.payer_rate);
    num("type_limit_rate", p.type_limit_rate);
    rng_field("max_patients", p.max_patients);
    num("preferred_rate", p.preferred_rate);
    num("max_preferred", p.max_preferred);
    num("history_rate", p.history_rate);
    num("seed", p.seed);
    if (j.contains("patients_range")) p.patients_range = range_from(j.at("patients_range"));
    if (j.contains("operators_range")) p.operators_range = range_from(j.at("operators_range"));
    if (j.contains("density_range")) {
      const auto& d = j.at("density_range");
      p.density_range = std::pair{d.at(0).get<double>(), d.at(1).get<double>()};
    }
    // Explicit counts override preset ranges.
    if (j.contains("n_patients") && !j.contains("patients_range")) p.patients_range.reset();
    if (j.contains("n_operators") && !j.contains("operators_range")) p.operators_range.reset();
    if (!p.patients_range && !p.operators_range && !j.contains("density_range")) p.density_range.reset();
    return p;
  });
}

}  // namespace rsp
