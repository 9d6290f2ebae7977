#pragma once

// Grid sweeps over (patients, operators): generate, solve the board, solve the agenda with each
// requested variant, then aggregate outcomes per cell.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "rsp/agenda_solver.hpp"
#include "rsp/board_solver.hpp"
#include "rsp/generator.hpp"
#include "rsp/json_io.hpp"
#include "rsp/prune.hpp"

namespace rsp {

/// Board difficulty is known to change around this many patients per operator.
inline constexpr double kTransitionDensity = 2.4;

struct StepRange {
  int lo = 0, hi = 0, step = 1;

  std::vector<int> values() const {
    std::vector<int> v;
    for (int x = lo; x <= hi; x += step) v.push_back(x);
    return v;
  }
};

struct GridSpec {
  StepRange patients{10, 60, 10};
  StepRange operators{4, 12, 4};
  int reps = 5;
  double cutoff = 30.0;
  Mode mode = Mode::anytime;
  std::vector<Variant> variants{Variant::optimized};
  std::uint64_t seed_base = 0;
  int workers = 1;
  /// Everything but the patient and operator counts comes from here.
  GenParams generator;

  void validate() const {
    auto range = [](const StepRange& r, int floor, const char* what) {
      if (r.step < 1 || r.lo < floor || r.hi < r.lo) throw std::invalid_argument(std::string("bad range ") + what);
    };
    range(patients, 0, "patients_range");
    range(operators, 1, "operators_range");
    if (reps < 1) throw std::invalid_argument("reps must be at least 1");
    if (!(cutoff > 0)) throw std::invalid_argument("cutoff must be positive");
    if (variants.empty()) throw std::invalid_argument("at least one variant is required");
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
  }
};

/// Seed of one instance: the base seed mixed with the cell coordinates and the repetition.
inline std::uint64_t instance_seed(std::uint64_t seed_base, int patients, int operators, int rep) {
  const auto cell = (static_cast<std::uint64_t>(patients) << 32) | static_cast<std::uint32_t>(operators);
  return mix_seed(mix_seed(seed_base, cell), static_cast<std::uint64_t>(rep));
}

struct AgendaRun {
  Variant variant = Variant::optimized;
  Outcome outcome = Outcome::Unknown;
  std::optional<CostVector> cost;
  std::uint64_t work = 0;
  std::uint64_t candidate_space = 0;
  double wall_time = 0;
  std::optional<double> last_improvement;
};

struct RunRecord {
  int n_patients = 0, n_operators = 0, rep = 0;
  std::uint64_t seed = 0;
  Outcome board_outcome = Outcome::Unknown;
  std::optional<CostVector> board_cost;
  std::uint64_t board_work = 0;
  double board_time = 0;
  std::optional<double> board_last_improvement;
  std::vector<AgendaRun> agenda;  // one per variant, in spec order
};

/// Most frequent outcome; ties go to the worse one.
inline Outcome mode_outcome(const std::vector<Outcome>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("no outcomes");
  std::map<Outcome, int> count;
  for (auto o : outcomes) ++count[o];
  Outcome best = outcomes.front();
  int n = 0;
  for (auto [o, c] : count)
    if (c >= n) best = o, n = c;  // map order is best-to-worst, so >= keeps the worse on ties
  return best;
}

struct RunSummary {
  Outcome outcome = Outcome::Unknown;
  double wall_time = 0;
  std::optional<double> last_improvement;
};

template <class Sol>
RunSummary summary_of(const SolveReport<Sol>& r) {
  RunSummary s{r.outcome, r.wall_time, std::nullopt};
  if (!r.trace.empty()) s.last_improvement = r.trace.back().time;
  return s;
}

struct OutcomeTable {
  std::size_t runs = 0;
  double pct_optimum = 0, pct_satisfiable = 0, pct_unknown = 0, pct_unsatisfiable = 0;
  std::optional<double> mean_time_to_optimum;   // over OptimumFound runs
  std::optional<double> mean_last_improvement;  // over runs that found anything
};

inline OutcomeTable summarize(const std::vector<RunSummary>& results) {
  if (results.empty()) throw std::invalid_argument("summarize needs at least one result");
  OutcomeTable t;
  t.runs = results.size();
  std::array<std::size_t, 4> count{};
  double opt_time = 0, last = 0;
  std::size_t n_last = 0;
  for (const auto& r : results) {
    ++count[static_cast<std::size_t>(r.outcome)];
    if (r.outcome == Outcome::OptimumFound) opt_time += r.wall_time;
    if (r.last_improvement) last += *r.last_improvement, ++n_last;
  }
  const double n = static_cast<double>(t.runs);
  t.pct_optimum = 100.0 * count[0] / n;
  t.pct_satisfiable = 100.0 * count[1] / n;
  t.pct_unknown = 100.0 * count[2] / n;
  t.pct_unsatisfiable = 100.0 * count[3] / n;
  if (count[0]) t.mean_time_to_optimum = opt_time / count[0];
  if (n_last) t.mean_last_improvement = last / n_last;
  return t;
}

struct GridCell {
  int n_patients = 0, n_operators = 0;
  double density = 0;
  std::vector<Outcome> board_outcomes;
  Outcome board_mode = Outcome::Unknown;
  std::vector<std::vector<Outcome>> agenda_outcomes;  // per variant
  std::vector<Outcome> agenda_mode;                   // per variant
  std::vector<OutcomeTable> agenda_table;             // per variant
  OutcomeTable board_table;
  /// Mean of candidate_space_size(optimized) / candidate_space_size(basic) over the reps.
  double candidate_ratio = 0;
};

/// Largest patient count whose cell mode is OptimumFound, per operator count and overall.
struct Frontier {
  Variant variant = Variant::optimized;
  std::optional<int> patients;
  std::map<int, std::optional<int>> per_operators;
};

struct GridReport {
  GridSpec spec;
  std::vector<RunRecord> runs;  // cell order (patients, then operators), then rep
  std::vector<GridCell> cells;
  std::vector<Frontier> frontiers;  // per variant
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace bench_detail {

inline StepRange step_range_from(const json& j) {
  if (j.is_array()) {
    if (j.size() != 2 && j.size() != 3) throw FormatError("range must be [lo, hi] or [lo, hi, step]");
    return {j[0].get<int>(), j[1].get<int>(), j.size() == 3 ? j[2].get<int>() : 1};
  }
  return {j.at("lo").get<int>(), j.at("hi").get<int>(), j.value("step", 1)};
}

inline json step_range_to(const StepRange& r) { return {{"lo", r.lo}, {"hi", r.hi}, {"step", r.step}}; }

inline json opt_cost(const std::optional<CostVector>& c) { return c ? to_json(*c) : json(nullptr); }
inline std::optional<CostVector> cost_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  CostVector c;
  c.levels = j.get<std::vector<std::int64_t>>();
  return c;
}
inline json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
inline std::optional<double> num_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline Outcome outcome_from(const json& j) {
  auto o = parse_outcome(j.get<std::string>());
  if (!o) throw FormatError("unknown outcome '" + j.get<std::string>() + "'");
  return *o;
}

inline Variant variant_from(const json& j) {
  auto v = parse_variant(j.get<std::string>());
  if (!v) throw FormatError("unknown variant '" + j.get<std::string>() + "'");
  return *v;
}

}  // namespace bench_detail

inline json to_json(const GridSpec& s) {
  using namespace bench_detail;
  json vs = json::array();
  for (auto v : s.variants) vs.push_back(to_string(v));
  return {{"patients_range", step_range_to(s.patients)},
          {"operators_range", step_range_to(s.operators)},
          {"reps", s.reps},
          {"cutoff", s.cutoff},
          {"mode", to_string(s.mode)},
          {"variants", vs},
          {"seed_base", s.seed_base},
          {"workers", s.workers},
          {"generator", to_json(s.generator)}};
}

/// Missing fields keep their defaults. "variant" (single) and "variants" (list) are both accepted.
inline GridSpec grid_spec_from_json(const json& j) {
  using namespace bench_detail;
  return detail::wrap("grid spec", [&] {
    GridSpec s;
    if (j.contains("patients_range")) s.patients = step_range_from(j.at("patients_range"));
    if (j.contains("operators_range")) s.operators = step_range_from(j.at("operators_range"));
    s.reps = j.value("reps", s.reps);
    s.cutoff = j.value("cutoff", s.cutoff);
    if (j.contains("mode")) {
      auto m = parse_mode(j.at("mode").get<std::string>());
      if (!m) throw FormatError("unknown mode");
      s.mode = *m;
    }
    if (j.contains("variant")) s.variants = {variant_from(j.at("variant"))};
    if (j.contains("variants")) {
      s.variants.clear();
      for (const auto& v : j.at("variants")) s.variants.push_back(variant_from(v));
    }
    s.seed_base = j.value("seed_base", s.seed_base);
    s.workers = j.value("workers", s.workers);
    if (j.contains("generator")) s.generator = gen_params_from_json(j.at("generator"));
    s.validate();
    return s;
  });
}

// Keys ending in "_s" hold wall-clock seconds; everything else is reproducible.
inline json to_json(const AgendaRun& r) {
  using namespace bench_detail;
  return {{"variant", to_string(r.variant)},
          {"outcome", to_string(r.outcome)},
          {"cost", opt_cost(r.cost)},
          {"work", r.work},
          {"candidate_space", r.candidate_space},
          {"wall_time_s", r.wall_time},
          {"last_improvement_s", opt_num(r.last_improvement)}};
}

inline json to_json(const RunRecord& r) {
  using namespace bench_detail;
  json agenda = json::array();
  for (const auto& a : r.agenda) agenda.push_back(to_json(a));
  return {{"n_patients", r.n_patients},
          {"n_operators", r.n_operators},
          {"rep", r.rep},
          {"seed", r.seed},
          {"board",
           {{"outcome", to_string(r.board_outcome)},
            {"cost", opt_cost(r.board_cost)},
            {"work", r.board_work},
            {"wall_time_s", r.board_time},
            {"last_improvement_s", opt_num(r.board_last_improvement)}}},
          {"agenda", agenda}};
}

inline RunRecord run_record_from_json(const json& j) {
  using namespace bench_detail;
  return detail::wrap("run record", [&] {
    RunRecord r;
    r.n_patients = j.at("n_patients").get<int>();
    r.n_operators = j.at("n_operators").get<int>();
    r.rep = j.at("rep").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& b = j.at("board");
    r.board_outcome = outcome_from(b.at("outcome"));
    r.board_cost = cost_from(b.at("cost"));
    r.board_work = b.at("work").get<std::uint64_t>();
    r.board_time = b.at("wall_time_s").get<double>();
    r.board_last_improvement = num_from(b.at("last_improvement_s"));
    for (const auto& a : j.at("agenda")) {
      AgendaRun x;
      x.variant = variant_from(a.at("variant"));
      x.outcome = outcome_from(a.at("outcome"));
      x.cost = cost_from(a.at("cost"));
      x.work = a.at("work").get<std::uint64_t>();
      x.candidate_space = a.at("candidate_space").get<std::uint64_t>();
      x.wall_time = a.at("wall_time_s").get<double>();
      x.last_improvement = num_from(a.at("last_improvement_s"));
      r.agenda.push_back(x);
    }
    return r;
  });
}

inline json to_json(const OutcomeTable& t) {
  using namespace bench_detail;
  return {{"runs", t.runs},
          {"pct_optimum", t.pct_optimum},
          {"pct_satisfiable", t.pct_satisfiable},
          {"pct_unknown", t.pct_unknown},
          {"pct_unsatisfiable", t.pct_unsatisfiable},
          {"mean_time_to_optimum_s", opt_num(t.mean_time_to_optimum)},
          {"mean_last_improvement_s", opt_num(t.mean_last_improvement)}};
}

inline json to_json(const GridReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json agenda = json::object();
    for (std::size_t v = 0; v < r.spec.variants.size(); ++v) {
      json outs = json::array();
      for (auto o : c.agenda_outcomes[v]) outs.push_back(to_string(o));
      agenda[std::string(to_string(r.spec.variants[v]))] = {
          {"outcomes", outs}, {"mode", to_string(c.agenda_mode[v])}, {"summary", to_json(c.agenda_table[v])}};
    }
    json board_outs = json::array();
    for (auto o : c.board_outcomes) board_outs.push_back(to_string(o));
    cells.push_back({{"n_patients", c.n_patients},
                     {"n_operators", c.n_operators},
                     {"density", c.density},
                     {"above_transition", c.density >= kTransitionDensity},
                     {"board", {{"outcomes", board_outs}, {"mode", to_string(c.board_mode)}, {"summary", to_json(c.board_table)}}},
                     {"agenda", agenda},
                     {"candidate_space_ratio", c.candidate_ratio}});
  }

  // Per operator count, the first patient count at or past the transition density.
  json crossings = json::array();
  for (int o : r.spec.operators.values())
    for (int p : r.spec.patients.values())
      if (static_cast<double>(p) / o >= kTransitionDensity) {
        crossings.push_back({{"n_operators", o}, {"n_patients", p}});
        break;
      }

  json frontiers = json::object();
  for (const auto& f : r.frontiers) {
    json rows = json::object();
    for (const auto& [o, p] : f.per_operators) rows[std::to_string(o)] = p ? json(*p) : json(nullptr);
    frontiers[std::string(to_string(f.variant))] = {{"patients", f.patients ? json(*f.patients) : json(nullptr)},
                                                     {"per_operators", rows}};
  }

  std::ostringstream note;
  for (const auto& f : r.frontiers)
    note << to_string(f.variant) << " agenda: OptimumFound frontier at "
         << (f.patients ? std::to_string(*f.patients) + " patients" : std::string("no cell")) << ". ";

  json runs = json::array();
  for (const auto& x : r.runs) runs.push_back(to_json(x));
  return {{"spec", to_json(r.spec)},
          {"transition_density", kTransitionDensity},
          {"transition_crossings", crossings},
          {"frontier", frontiers},
          {"commentary", note.str()},
          {"cells", cells},
          {"runs", runs}};
}

/// Drops every wall-clock field ("..._s" keys) so reports can be compared across runs.
inline json strip_timing(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items())
      if (!(k.size() > 2 && k.compare(k.size() - 2, 2, "_s") == 0)) out[k] = strip_timing(v);
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(strip_timing(v));
    return out;
  }
  return j;
}

/// One row per cell. Columns ending in "_s" are wall-clock seconds.
inline std::string grid_csv(const GridReport& r) {
  std::ostringstream out;
  out << "n_patients,n_operators,density,above_transition,board_mode,board_pct_optimum";
  for (auto v : r.spec.variants) out << ',' << to_string(v) << "_mode," << to_string(v) << "_pct_optimum";
  out << ",candidate_space_ratio,board_mean_time_s";
  for (auto v : r.spec.variants) out << ',' << to_string(v) << "_mean_time_s," << to_string(v) << "_mean_last_improvement_s";
  out << '\n';
  auto num = [](double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
  };
  auto mean_time = [](const std::vector<double>& xs) {
    double t = 0;
    for (double x : xs) t += x;
    return xs.empty() ? 0.0 : t / static_cast<double>(xs.size());
  };
  for (const auto& c : r.cells) {
    out << c.n_patients << ',' << c.n_operators << ',' << num(c.density) << ','
        << (c.density >= kTransitionDensity ? "true" : "false") << ',' << to_string(c.board_mode) << ','
        << num(c.board_table.pct_optimum);
    for (std::size_t v = 0; v < r.spec.variants.size(); ++v)
      out << ',' << to_string(c.agenda_mode[v]) << ',' << num(c.agenda_table[v].pct_optimum);
    out << ',' << num(c.candidate_ratio);
    std::vector<double> bt;
    std::vector<std::vector<double>> at(r.spec.variants.size());
    for (const auto& run : r.runs) {
      if (run.n_patients != c.n_patients || run.n_operators != c.n_operators) continue;
      bt.push_back(run.board_time);
      for (std::size_t v = 0; v < run.agenda.size(); ++v) at[v].push_back(run.agenda[v].wall_time);
    }
    out << ',' << num(mean_time(bt));
    for (std::size_t v = 0; v < r.spec.variants.size(); ++v)
      out << ',' << num(mean_time(at[v])) << ','
          << (c.agenda_table[v].mean_last_improvement ? num(*c.agenda_table[v].mean_last_improvement) : "");
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Generates and solves one (cell, rep): board first, then the agenda per variant on that board.
inline RunRecord run_one(const GridSpec& spec, int patients, int operators, int rep) {
  RunRecord r;
  r.n_patients = patients;
  r.n_operators = operators;
  r.rep = rep;
  r.seed = instance_seed(spec.seed_base, patients, operators, rep);

  GenParams gp = spec.generator;
  gp.n_patients = patients;
  gp.n_operators = operators;
  gp.patients_range.reset();
  gp.operators_range.reset();
  gp.density_range.reset();
  gp.seed = r.seed;
  const Instance inst = generate(gp);

  SolveConfig cfg;
  cfg.mode = spec.mode;
  cfg.cutoff = spec.cutoff;
  cfg.seed = r.seed;
  const auto board = solve_board(inst, cfg);
  r.board_outcome = board.outcome;
  r.board_cost = board.cost;
  r.board_work = board.work;
  r.board_time = board.wall_time;
  if (!board.trace.empty()) r.board_last_improvement = board.trace.back().time;

  for (auto v : spec.variants) {
    AgendaRun a;
    a.variant = v;
    if (board.best) {
      const auto rep_agenda = solve_agenda(inst, *board.best, cfg, v);
      a.outcome = rep_agenda.outcome;
      a.cost = rep_agenda.cost;
      a.work = rep_agenda.work;
      a.wall_time = rep_agenda.wall_time;
      if (!rep_agenda.trace.empty()) a.last_improvement = rep_agenda.trace.back().time;
      a.candidate_space = candidate_space_size(inst, *board.best, v);
    }
    r.agenda.push_back(a);
  }
  return r;
}

/// Builds cells and frontiers from finished runs.
inline void aggregate(GridReport& report) {
  const auto& spec = report.spec;
  const auto nv = spec.variants.size();
  report.cells.clear();
  for (int p : spec.patients.values()) {
    for (int o : spec.operators.values()) {
      GridCell c;
      c.n_patients = p;
      c.n_operators = o;
      c.density = static_cast<double>(p) / o;
      c.agenda_outcomes.resize(nv);
      std::vector<RunSummary> board_sum;
      std::vector<std::vector<RunSummary>> agenda_sum(nv);
      double ratio = 0;
      int ratio_n = 0;
      for (const auto& r : report.runs) {
        if (r.n_patients != p || r.n_operators != o) continue;
        c.board_outcomes.push_back(r.board_outcome);
        board_sum.push_back({r.board_outcome, r.board_time, r.board_last_improvement});
        std::optional<std::uint64_t> basic, optimized;
        for (std::size_t v = 0; v < nv; ++v) {
          const auto& a = r.agenda[v];
          c.agenda_outcomes[v].push_back(a.outcome);
          agenda_sum[v].push_back({a.outcome, a.wall_time, a.last_improvement});
          (a.variant == Variant::basic ? basic : optimized) = a.candidate_space;
        }
        if (basic && optimized && *basic > 0) {
          ratio += static_cast<double>(*optimized) / static_cast<double>(*basic);
          ++ratio_n;
        }
      }
      if (c.board_outcomes.empty()) continue;
      c.board_mode = mode_outcome(c.board_outcomes);
      c.board_table = summarize(board_sum);
      for (std::size_t v = 0; v < nv; ++v) {
        c.agenda_mode.push_back(mode_outcome(c.agenda_outcomes[v]));
        c.agenda_table.push_back(summarize(agenda_sum[v]));
      }
      c.candidate_ratio = ratio_n ? ratio / ratio_n : 0.0;
      report.cells.push_back(std::move(c));
    }
  }

  report.frontiers.clear();
  for (std::size_t v = 0; v < nv; ++v) {
    Frontier f;
    f.variant = spec.variants[v];
    for (int o : spec.operators.values()) f.per_operators[o] = std::nullopt;
    for (const auto& c : report.cells) {
      if (c.agenda_mode[v] != Outcome::OptimumFound) continue;
      auto& row = f.per_operators[c.n_operators];
      row = std::max(row.value_or(c.n_patients), c.n_patients);
      f.patients = std::max(f.patients.value_or(c.n_patients), c.n_patients);
    }
    report.frontiers.push_back(f);
  }
}

struct GridOptions {
  /// When set, grid.csv, grid.json and checkpoint.json are written here; an existing
  /// checkpoint for the same spec is resumed.
  std::optional<std::filesystem::path> out_dir;
  std::function<void(std::size_t done, std::size_t total)> on_progress;
};

namespace bench_detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace bench_detail

inline GridReport run_grid(const GridSpec& spec, const GridOptions& opts = {}) {
  spec.validate();
  struct Job {
    int patients, operators, rep;
  };
  std::vector<Job> jobs;
  for (int p : spec.patients.values())
    for (int o : spec.operators.values())
      for (int rep = 0; rep < spec.reps; ++rep) jobs.push_back({p, o, rep});

  std::vector<std::optional<RunRecord>> done(jobs.size());
  std::filesystem::path checkpoint;
  if (opts.out_dir) {
    std::filesystem::create_directories(*opts.out_dir);
    checkpoint = *opts.out_dir / "checkpoint.json";
    if (std::filesystem::exists(checkpoint)) {
      const auto cp = read_json_file(checkpoint.string());
      if (cp.at("spec") == to_json(spec)) {
        for (const auto& j : cp.at("runs")) {
          auto r = run_record_from_json(j);
          for (std::size_t i = 0; i < jobs.size(); ++i)
            if (jobs[i].patients == r.n_patients && jobs[i].operators == r.n_operators && jobs[i].rep == r.rep)
              done[i] = std::move(r);
        }
      }
    }
  }

  std::mutex mu;
  std::size_t finished = static_cast<std::size_t>(std::count_if(done.begin(), done.end(), [](auto& d) { return d.has_value(); }));
  auto save_checkpoint = [&] {  // caller holds mu
    if (checkpoint.empty()) return;
    json runs = json::array();
    for (const auto& d : done)
      if (d) runs.push_back(to_json(*d));
    bench_detail::write_text(checkpoint, json{{"spec", to_json(spec)}, {"runs", runs}}.dump(2) + "\n");
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      if (done[i]) continue;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      try {
        auto r = run_one(spec, jobs[i].patients, jobs[i].operators, jobs[i].rep);
        std::lock_guard lock(mu);
        done[i] = std::move(r);
        ++finished;
        save_checkpoint();
        if (opts.on_progress) opts.on_progress(finished, jobs.size());
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < spec.workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  GridReport report;
  report.spec = spec;
  for (auto& d : done) report.runs.push_back(std::move(*d));
  aggregate(report);
  if (opts.out_dir) {
    bench_detail::write_text(*opts.out_dir / "grid.csv", grid_csv(report));
    bench_detail::write_text(*opts.out_dir / "grid.json", to_json(report).dump(2) + "\n");
  }
  return report;
}

}  // namespace rsp
