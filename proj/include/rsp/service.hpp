#pragma once

// HTTP service for the coordinator workflow: upload an instance, solve and hand-edit the board,
// solve the agenda, read the results. Workspaces live in one JSON file each under a data
// directory; solves run as cancellable background jobs.

#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <stop_token>
#include <thread>

#include <httplib.h>

#include "rsp/agenda_solver.hpp"
#include "rsp/board_solver.hpp"
#include "rsp/json_io.hpp"

namespace rsp {

struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  double default_cutoff = 30.0;
  int workers = 1;
};

/// Status code plus JSON body; what every endpoint returns.
struct Reply {
  int status = 200;
  json body = json::object();
};

enum class JobState : std::uint8_t { queued, running, done, cancelled };

inline std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::cancelled: return "cancelled";
  }
  return "?";
}

/// Progress of one solve. Readers take the job's own lock, never the solver's.
struct Job {
  std::string phase;  // "board" or "agenda"
  std::string started_at;
  std::stop_source stop;

  mutable std::mutex mu;
  std::condition_variable finished;
  JobState state = JobState::queued;
  std::optional<CostVector> progress;
  std::optional<Outcome> outcome;
  std::string error;

  bool active() const {
    std::lock_guard lock(mu);
    return state == JobState::queued || state == JobState::running;
  }

  json status() const {
    std::lock_guard lock(mu);
    json j = {{"phase", phase},
              {"state", to_string(state)},
              {"progress", progress ? to_json(*progress) : json(nullptr)},
              {"started_at", started_at}};
    if (outcome) j["outcome"] = to_string(*outcome);
    if (!error.empty()) j["error"] = error;
    return j;
  }
};

struct Workspace {
  std::string id;
  Instance instance;
  std::optional<BoardSolution> board;
  bool dirty = false;  // board edited by hand since it was solved
  std::optional<AgendaSolution> agenda;
  std::shared_ptr<Job> job;
  std::mutex mu;  // single writer
};

namespace service_detail {

inline std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline Reply error(int status, std::string message, json extra = json::object()) {
  extra["error"] = std::move(message);
  return {status, std::move(extra)};
}

/// Fixed-width pool running queued closures.
class WorkerPool {
 public:
  explicit WorkerPool(int width) {
    for (int i = 0; i < std::max(1, width); ++i)
      threads_.emplace_back([this](std::stop_token st) { loop(st); });
  }
  ~WorkerPool() {
    for (auto& t : threads_) t.request_stop();
    cv_.notify_all();
  }

  void submit(std::function<void()> task) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(task));
    }
    cv_.notify_one();
  }

 private:
  void loop(std::stop_token st) {
    while (true) {
      std::function<void()> task;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, st, [&] { return !queue_.empty(); });
        if (st.stop_requested()) return;
        task = std::move(queue_.front());
        queue_.pop_front();
      }
      task();
    }
  }

  std::mutex mu_;
  std::condition_variable_any cv_;
  std::deque<std::function<void()>> queue_;
  std::vector<std::jthread> threads_;  // last member: joined before the queue goes away
};

}  // namespace service_detail

class Service {
 public:
  using Params = std::map<std::string, std::string>;

  explicit Service(ServiceConfig cfg) : cfg_(std::move(cfg)), pool_(cfg_.workers) {
    std::filesystem::create_directories(cfg_.data_dir);
    load_all();
  }

  ~Service() {
    std::shared_lock lock(map_mu_);
    for (auto& [id, ws] : workspaces_) {
      std::lock_guard wl(ws->mu);
      if (ws->job) ws->job->stop.request_stop();
    }
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // ---- workspaces ----------------------------------------------------------------------

  Reply create_workspace(const std::string& body) {
    using service_detail::error;
    Instance inst;
    try {
      inst = instance_from_json(json::parse(body));
    } catch (const json::exception& e) {
      return error(400, std::string("malformed JSON: ") + e.what());
    } catch (const FormatError& e) {
      return error(422, e.what());
    }
    if (auto issues = validate_instance(inst); !issues.empty())
      return error(422, "instance failed validation", {{"issues", to_json(issues)}});

    auto ws = std::make_shared<Workspace>();
    ws->instance = std::move(inst);
    {
      std::unique_lock lock(map_mu_);
      ws->id = "w" + std::to_string(next_id_++);
      workspaces_[ws->id] = ws;
    }
    std::lock_guard wl(ws->mu);
    persist(*ws);
    return {201, {{"id", ws->id}}};
  }

  Reply get_workspace(const std::string& id) {
    auto ws = find(id);
    if (!ws) return not_found(id);
    std::lock_guard wl(ws->mu);
    return {200,
            {{"id", ws->id},
             {"patients", ws->instance.patients.size()},
             {"operators", ws->instance.operators.size()},
             {"sessions", ws->instance.sessions.size()},
             {"has_board", ws->board.has_value()},
             {"dirty", ws->dirty},
             {"has_agenda", ws->agenda.has_value()},
             {"job", ws->job ? ws->job->status() : json(nullptr)}}};
  }

  // ---- board ---------------------------------------------------------------------------

  Reply solve_board(const std::string& id, const Params& params) {
    auto ws = find(id);
    if (!ws) return not_found(id);
    SolveConfig cfg;
    if (auto bad = parse_config(params, cfg)) return *bad;

    std::lock_guard wl(ws->mu);
    if (ws->job && ws->job->active()) return service_detail::error(409, "a job is already running");
    auto job = start_job(*ws, "board", cfg);
    pool_.submit([this, ws, job, cfg]() mutable {
      run_job(ws, job, cfg, [&](const Instance& inst) {
        auto r = rsp::solve_board(inst, cfg);
        return std::pair{r.outcome, std::function<void(Workspace&)>([best = r.best](Workspace& w) {
                           if (!best) return;
                           w.board = best;
                           w.dirty = false;
                           w.agenda.reset();
                         })};
      });
    });
    return {202, {{"job", job->status()}}};
  }

  Reply get_board(const std::string& id) {
    auto ws = find(id);
    if (!ws) return not_found(id);
    std::lock_guard wl(ws->mu);
    if (!ws->board) return service_detail::error(409, "no board yet");
    return {200, board_view(*ws)};
  }

  /// Body: [{"patient": id, "operator": id}, ...]. Edits may not add hard-rule violations,
  /// except moves to the fictitious operator, which are always accepted.
  Reply patch_board(const std::string& id, const std::string& body) {
    using service_detail::error;
    auto ws = find(id);
    if (!ws) return not_found(id);
    json edits;
    try {
      edits = json::parse(body);
    } catch (const json::exception& e) {
      return error(400, std::string("malformed JSON: ") + e.what());
    }
    if (!edits.is_array()) return error(400, "expected a list of {patient, operator}");

    std::lock_guard wl(ws->mu);
    if (ws->job && ws->job->active()) return error(409, "a job is running");
    if (!ws->board) return error(409, "no board to edit");

    const Problem pb(ws->instance);
    BoardSolution edited = *ws->board;
    bool only_fictitious = true;
    try {
      for (const auto& e : edits) {
        const int patient = e.at("patient").get<int>();
        const int op = e.at("operator").get<int>();
        pb.require_patient(patient);
        pb.require_operator(op);
        edited.assignment[patient] = op;
        if (op != kFictitiousOperator) only_fictitious = false;
      }
    } catch (const json::exception& e) {
      return error(400, std::string("bad edit: ") + e.what());
    } catch (const StructuralError& e) {
      return error(422, e.what());
    }

    const auto before = check_board(pb, *ws->board);
    const auto after = check_board(pb, edited);
    std::vector<Violation> added;
    for (const auto& v : after)
      if (std::find_if(before.begin(), before.end(), [&](const Violation& w) {
            return w.rule == v.rule && w.entities == v.entities;
          }) == before.end())
        added.push_back(v);
    if (!added.empty() && !only_fictitious)
      return error(422, "edit breaks hard constraints", {{"violations", to_json(added)}});

    ws->board = std::move(edited);
    ws->dirty = true;
    ws->agenda.reset();
    persist(*ws);
    return {200, board_view(*ws)};
  }

  // ---- agenda --------------------------------------------------------------------------

  Reply solve_agenda(const std::string& id, const Params& params) {
    using service_detail::error;
    auto ws = find(id);
    if (!ws) return not_found(id);
    SolveConfig cfg;
    if (auto bad = parse_config(params, cfg)) return *bad;
    Variant variant = Variant::optimized;
    if (auto it = params.find("variant"); it != params.end()) {
      auto v = parse_variant(it->second);
      if (!v) return error(400, "variant must be basic or optimized");
      variant = *v;
    }

    std::lock_guard wl(ws->mu);
    if (ws->job && ws->job->active()) return error(409, "a job is already running");
    if (!ws->board) return error(409, "solve the board first");
    if (auto v = check_board(Problem(ws->instance), *ws->board); !v.empty())
      return error(422, "board violates hard constraints", {{"violations", to_json(v)}});

    auto job = start_job(*ws, "agenda", cfg);
    pool_.submit([this, ws, job, cfg, variant, board = *ws->board]() mutable {
      run_job(ws, job, cfg, [&](const Instance& inst) {
        auto r = rsp::solve_agenda(inst, board, cfg, variant);
        return std::pair{r.outcome, std::function<void(Workspace&)>([best = r.best, board](Workspace& w) {
                           if (best && w.board == board) w.agenda = best;
                         })};
      });
    });
    return {202, {{"job", job->status()}}};
  }

  Reply get_agenda(const std::string& id) {
    using service_detail::error;
    auto ws = find(id);
    if (!ws) return not_found(id);
    std::lock_guard wl(ws->mu);
    if (!ws->agenda || !ws->board) return error(409, "no agenda for the current board");
    const Problem pb(ws->instance);
    auto violations = check_agenda(pb, *ws->board, *ws->agenda);
    if (!violations.empty())  // never serve an unchecked schedule
      return error(500, "stored agenda fails verification", {{"violations", to_json(violations)}});
    return {200,
            {{"agenda", to_json(*ws->agenda)},
             {"cost", to_json(agenda_cost(pb, *ws->board, *ws->agenda))},
             {"gantt", gantt(pb, *ws->board, *ws->agenda)}}};
  }

  // ---- jobs ----------------------------------------------------------------------------

  Reply get_job(const std::string& id) {
    auto ws = find(id);
    if (!ws) return not_found(id);
    std::lock_guard wl(ws->mu);
    if (!ws->job) return service_detail::error(404, "no job");
    return {200, ws->job->status()};
  }

  Reply cancel_job(const std::string& id) {
    auto ws = find(id);
    if (!ws) return not_found(id);
    std::shared_ptr<Job> job;
    {
      std::lock_guard wl(ws->mu);
      job = ws->job;
    }
    if (!job || !job->active()) return service_detail::error(404, "no running job");
    job->stop.request_stop();
    {
      std::lock_guard lock(job->mu);
      if (job->state == JobState::queued) job->state = JobState::cancelled;
    }
    return {200, job->status()};
  }

  /// Blocks until the workspace has no queued or running job.
  void wait_idle(const std::string& id) {
    auto ws = find(id);
    if (!ws) return;
    std::shared_ptr<Job> job;
    {
      std::lock_guard wl(ws->mu);
      job = ws->job;
    }
    if (!job) return;
    std::unique_lock lock(job->mu);
    job->finished.wait(lock, [&] { return job->state == JobState::done || job->state == JobState::cancelled; });
  }

  const ServiceConfig& config() const { return cfg_; }

  // ---- projections ---------------------------------------------------------------------

  /// Per operator and period, the sessions in time order; each block is split into supervised
  /// and individual segments that exactly cover [ext_start, ext_end).
  static json gantt(const Problem& pb, const BoardSolution& board, const AgendaSolution& agenda) {
    const auto& g = pb.grid();
    std::map<std::pair<int, int>, std::vector<const SessionPlacement*>> rows;
    for (const auto& [sid, p] : agenda.placements) {
      const auto& ss = pb.session(pb.require_session(sid));
      rows[{board.assignment.at(ss.patient), p.period}].push_back(&p);
    }
    json out = json::array();
    for (auto& [key, placements] : rows) {
      std::sort(placements.begin(), placements.end(), [](auto* a, auto* b) {
        return std::tuple(a->ext_start(), a->start, a->session) < std::tuple(b->ext_start(), b->start, b->session);
      });
      json blocks = json::array();
      for (const auto* p : placements) {
        const auto& ss = pb.session(pb.require_session(p->session));
        const char* core = ss.is_individual() ? "individual" : "supervised";
        json segments = json::array();
        auto seg = [&](const char* kind, Slot a, Slot b) {
          if (a < b) segments.push_back({{"kind", kind}, {"start", a}, {"end", b}});
        };
        seg("supervised", p->ext_start(), p->start);
        seg(core, p->start, p->start + p->length);
        seg("supervised", p->start + p->length, p->ext_end());
        blocks.push_back({{"session", p->session},
                          {"patient", ss.patient},
                          {"location", p->location},
                          {"kind", ss.is_individual() ? "individual" : "supervised"},
                          {"ext_start", p->ext_start()},
                          {"ext_end", p->ext_end()},
                          {"from", g.wall_clock(p->period, p->ext_start())},
                          {"to", g.wall_clock(p->period, p->ext_end())},
                          {"segments", segments}});
      }
      out.push_back({{"operator", key.first}, {"period", key.second}, {"blocks", blocks}});
    }
    return out;
  }

 private:
  Reply not_found(const std::string& id) const { return service_detail::error(404, "unknown workspace '" + id + "'"); }

  std::shared_ptr<Workspace> find(const std::string& id) {
    std::shared_lock lock(map_mu_);
    auto it = workspaces_.find(id);
    return it == workspaces_.end() ? nullptr : it->second;
  }

  std::optional<Reply> parse_config(const Params& params, SolveConfig& cfg) const {
    using service_detail::error;
    cfg.cutoff = cfg_.default_cutoff;
    cfg.mode = Mode::anytime;
    try {
      if (auto it = params.find("cutoff"); it != params.end()) cfg.cutoff = std::stod(it->second);
      if (auto it = params.find("seed"); it != params.end()) cfg.seed = std::stoull(it->second);
    } catch (const std::exception&) {
      return error(400, "cutoff and seed must be numbers");
    }
    if (!(cfg.cutoff > 0)) return error(400, "cutoff must be positive");
    if (auto it = params.find("mode"); it != params.end()) {
      auto m = parse_mode(it->second);
      if (!m) return error(400, "mode must be exact or anytime");
      cfg.mode = *m;
    }
    return std::nullopt;
  }

  // Caller holds ws.mu.
  std::shared_ptr<Job> start_job(Workspace& ws, const char* phase, SolveConfig& cfg) {
    auto job = std::make_shared<Job>();
    job->phase = phase;
    job->started_at = service_detail::now_iso();
    cfg.stop = job->stop.get_token();
    cfg.on_improvement = [job](const TraceEntry& e) {
      std::lock_guard lock(job->mu);
      job->progress = e.cost;
    };
    ws.job = job;
    return job;
  }

  template <class Solve>
  void run_job(const std::shared_ptr<Workspace>& ws, const std::shared_ptr<Job>& job, const SolveConfig&,
               Solve&& solve) {
    {
      std::lock_guard lock(job->mu);
      if (job->state == JobState::cancelled) {
        job->finished.notify_all();
        return;
      }
      job->state = JobState::running;
    }
    Outcome outcome = Outcome::Unknown;
    std::function<void(Workspace&)> commit;
    std::string failure;
    try {
      std::tie(outcome, commit) = solve(ws->instance);  // the instance never changes
    } catch (const std::exception& e) {
      failure = e.what();
    }
    const bool cancelled = job->stop.stop_requested();
    if (!cancelled && failure.empty()) {
      std::lock_guard wl(ws->mu);
      commit(*ws);
      persist(*ws);
    }
    std::lock_guard lock(job->mu);
    job->state = cancelled ? JobState::cancelled : JobState::done;
    if (!cancelled && failure.empty()) job->outcome = outcome;
    job->error = failure;
    job->finished.notify_all();
  }

  json board_view(const Workspace& ws) const {
    const Problem pb(ws.instance);
    const auto violations = check_board(pb, *ws.board);
    const auto dense = to_dense(pb, *ws.board);
    json workloads = json::array();
    for (std::size_t o = 0; o < pb.num_operators(); ++o) {
      const auto& op = pb.op(o);
      if (op.is_fictitious()) continue;
      json patients = json::array();
      for (std::size_t p = 0; p < pb.num_patients(); ++p)
        if (dense.op_of_patient[p] == o) patients.push_back(pb.patient(p).id);
      workloads.push_back({{"operator", op.id},
                           {"workload", operator_workload(pb, dense, o)},
                           {"total_time", op.total_time ? json(*op.total_time) : json(nullptr)},
                           {"patients", patients}});
    }
    return {{"board", to_json(*ws.board)},
            {"cost", violations.empty() ? to_json(board_cost_unchecked(pb, dense)) : json(nullptr)},
            {"violations", to_json(violations)},
            {"dirty", ws.dirty},
            {"workloads", workloads}};
  }

  // ---- persistence ---------------------------------------------------------------------

  std::filesystem::path file_of(const std::string& id) const { return cfg_.data_dir / (id + ".json"); }

  // Caller holds ws.mu.
  void persist(const Workspace& ws) const {
    json j = {{"id", ws.id},
              {"instance", to_json(ws.instance)},
              {"board", ws.board ? to_json(*ws.board) : json(nullptr)},
              {"dirty", ws.dirty},
              {"agenda", ws.agenda ? to_json(*ws.agenda) : json(nullptr)}};
    const auto path = file_of(ws.id);
    const auto tmp = path.string() + ".tmp";
    write_json_file(tmp, j);
    std::filesystem::rename(tmp, path);
  }

  void load_all() {
    for (const auto& entry : std::filesystem::directory_iterator(cfg_.data_dir)) {
      if (entry.path().extension() != ".json") continue;
      const auto j = read_json_file(entry.path().string());
      auto ws = std::make_shared<Workspace>();
      ws->id = j.at("id").get<std::string>();
      ws->instance = instance_from_json(j.at("instance"));
      if (!j.at("board").is_null()) ws->board = board_from_json(j.at("board"));
      ws->dirty = j.value("dirty", false);
      if (!j.at("agenda").is_null()) ws->agenda = agenda_from_json(j.at("agenda"));
      if (ws->id.size() > 1 && ws->id[0] == 'w')
        next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(ws->id.substr(1)) + 1);
      workspaces_[ws->id] = ws;
    }
  }

  ServiceConfig cfg_;
  std::shared_mutex map_mu_;
  std::map<std::string, std::shared_ptr<Workspace>> workspaces_;
  std::uint64_t next_id_ = 1;
  service_detail::WorkerPool pool_;  // last: workers stop before the workspaces go away
};

/// Binds the endpoints of `svc` on `server`.
inline void install_routes(httplib::Server& server, Service& svc) {
  auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto params = [](const httplib::Request& req) {
    Service::Params p;
    for (const auto& [k, v] : req.params) p[k] = v;
    return p;
  };

  server.Post("/workspaces", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.create_workspace(req.body));
  });
  server.Get(R"(/workspaces/([^/]+))", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_workspace(req.matches[1]));
  });
  server.Post(R"(/workspaces/([^/]+)/board/solve)",
              [&svc, send, params](const httplib::Request& req, httplib::Response& res) {
                send(res, svc.solve_board(req.matches[1], params(req)));
              });
  server.Get(R"(/workspaces/([^/]+)/board)", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_board(req.matches[1]));
  });
  server.Patch(R"(/workspaces/([^/]+)/board)", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.patch_board(req.matches[1], req.body));
  });
  server.Post(R"(/workspaces/([^/]+)/agenda/solve)",
              [&svc, send, params](const httplib::Request& req, httplib::Response& res) {
                send(res, svc.solve_agenda(req.matches[1], params(req)));
              });
  server.Get(R"(/workspaces/([^/]+)/agenda)", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_agenda(req.matches[1]));
  });
  server.Get(R"(/workspaces/([^/]+)/jobs/current)",
             [&svc, send](const httplib::Request& req, httplib::Response& res) {
               send(res, svc.get_job(req.matches[1]));
             });
  server.Delete(R"(/workspaces/([^/]+)/jobs/current)",
                [&svc, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, svc.cancel_job(req.matches[1]));
                });
  server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send(res, service_detail::error(500, e.what()));
    }
  });
}

}  // namespace rsp
