// Command-line front end: solve, check, generate, benchmark and serve.

#include <csignal>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "rsp/agenda_solver.hpp"
#include "rsp/bench.hpp"
#include "rsp/board_solver.hpp"
#include "rsp/generator.hpp"
#include "rsp/json_io.hpp"
#include "rsp/oracle.hpp"
#include "rsp/prune.hpp"
#include "rsp/service.hpp"

namespace {

using namespace rsp;

template <class Sol>
json report_json(const SolveReport<Sol>& r) {
  json trace = json::array();
  for (const auto& e : r.trace) trace.push_back({{"time_s", e.time}, {"work", e.work}, {"cost", to_json(e.cost)}});
  return {{"outcome", to_string(r.outcome)},
          {"cost", r.cost ? to_json(*r.cost) : json(nullptr)},
          {"wall_time_s", r.wall_time},
          {"work", r.work},
          {"trace", trace}};
}

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") std::cout << j.dump(2) << "\n";
  else write_json_file(out, j);
}

struct SolveOpts {
  std::string instance, board, out, report;
  double cutoff = 30;
  std::string mode = "exact";
  std::string variant = "optimized";
  std::uint64_t seed = 0;
};

SolveConfig make_config(const SolveOpts& o) {
  SolveConfig cfg;
  cfg.cutoff = o.cutoff;
  cfg.mode = *parse_mode(o.mode);
  cfg.seed = o.seed;
  return cfg;
}

void add_solve_flags(CLI::App* cmd, SolveOpts& o) {
  cmd->add_option("--instance", o.instance, "instance JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--cutoff", o.cutoff, "time budget in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--mode", o.mode)->check(CLI::IsMember({"exact", "anytime"}));
  cmd->add_option("--seed", o.seed);
  cmd->add_option("--out", o.out, "solution file (stdout when omitted)");
  cmd->add_option("--report", o.report, "outcome, cost and improvement trace as JSON");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rehabilitation scheduling: board (patient to operator) and agenda (time and place)"};
  app.require_subcommand(1);

  SolveOpts sb;
  auto* solve_board_cmd = app.add_subcommand("solve-board", "assign patients to operators");
  add_solve_flags(solve_board_cmd, sb);
  solve_board_cmd->callback([&] {
    const auto inst = load_instance(sb.instance);
    const auto r = solve_board(inst, make_config(sb));
    if (r.best) emit(to_json(*r.best), sb.out);
    if (!sb.report.empty()) write_json_file(sb.report, report_json(r));
    std::cerr << to_string(r.outcome) << (r.cost ? " " + r.cost->str() : "") << "\n";
  });

  SolveOpts sa;
  auto* solve_agenda_cmd = app.add_subcommand("solve-agenda", "place the sessions of a fixed board");
  add_solve_flags(solve_agenda_cmd, sa);
  solve_agenda_cmd->add_option("--board", sa.board, "board JSON")->required()->check(CLI::ExistingFile);
  solve_agenda_cmd->add_option("--variant", sa.variant)->check(CLI::IsMember({"basic", "optimized"}));
  solve_agenda_cmd->callback([&] {
    const auto inst = load_instance(sa.instance);
    const auto board = load_board(sa.board);
    const auto r = solve_agenda(inst, board, make_config(sa), *parse_variant(sa.variant));
    if (r.best) emit(to_json(*r.best), sa.out);
    if (!sa.report.empty()) write_json_file(sa.report, report_json(r));
    std::cerr << to_string(r.outcome) << (r.cost ? " " + r.cost->str() : "") << "\n";
  });

  std::string chk_instance, chk_board, chk_agenda, chk_out;
  auto* check_cmd = app.add_subcommand("check", "list hard-rule violations and the cost of a solution");
  check_cmd->add_option("--instance", chk_instance)->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--board", chk_board)->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--agenda", chk_agenda)->check(CLI::ExistingFile);
  check_cmd->add_option("--out", chk_out);
  int check_status = 0;
  check_cmd->callback([&] {
    const auto inst = load_instance(chk_instance);
    const Problem pb(inst);
    const auto board = load_board(chk_board);
    auto violations = check_board(pb, board);
    json out;
    if (chk_agenda.empty()) {
      out = {{"violations", to_json(violations)},
             {"cost", violations.empty() ? to_json(board_cost(pb, board)) : json(nullptr)}};
    } else {
      const auto agenda = load_agenda(chk_agenda);
      auto av = check_agenda(pb, board, agenda);
      violations.insert(violations.end(), av.begin(), av.end());
      out = {{"violations", to_json(violations)},
             {"cost", violations.empty() ? to_json(agenda_cost(pb, board, agenda)) : json(nullptr)}};
    }
    emit(out, chk_out);
    check_status = violations.empty() ? 0 : 3;
  });

  std::string val_instance;
  auto* validate_cmd = app.add_subcommand("validate", "structural checks on an instance");
  validate_cmd->add_option("--instance", val_instance)->required()->check(CLI::ExistingFile);
  int validate_status = 0;
  validate_cmd->callback([&] {
    const auto issues = validate_instance(load_instance(val_instance));
    std::cout << to_json(issues).dump(2) << "\n";
    validate_status = issues.empty() ? 0 : 3;
  });

  std::string or_instance, or_board, or_out;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force optimum for tiny instances");
  oracle_cmd->add_option("--instance", or_instance)->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--board", or_board, "solve the agenda for this board instead of the board")
      ->check(CLI::ExistingFile);
  oracle_cmd->add_option("--out", or_out);
  oracle_cmd->callback([&] {
    const auto inst = load_instance(or_instance);
    json out = {{"cost", nullptr}, {"solution", nullptr}};
    if (or_board.empty()) {
      if (auto r = oracle_board(inst)) out = {{"cost", to_json(r->cost)}, {"solution", to_json(r->solution)}};
    } else {
      if (auto r = oracle_agenda(inst, load_board(or_board)))
        out = {{"cost", to_json(r->cost)}, {"solution", to_json(r->solution)}};
    }
    emit(out, or_out);
  });

  std::string gen_preset, gen_params, gen_out;
  std::optional<std::uint64_t> gen_seed;
  auto* gen_cmd = app.add_subcommand("gen", "generate a random instance");
  auto* preset_opt = gen_cmd->add_option("--preset", gen_preset)->check(CLI::IsMember({"nervi", "castel_goffredo"}));
  gen_cmd->add_option("--params", gen_params, "GenParams JSON")->check(CLI::ExistingFile)->excludes(preset_opt);
  gen_cmd->add_option("--seed", gen_seed);
  gen_cmd->add_option("--out", gen_out);
  gen_cmd->callback([&] {
    GenParams p = gen_params.empty() ? (gen_preset.empty() ? GenParams{} : preset(gen_preset))
                                     : gen_params_from_json(read_json_file(gen_params));
    if (gen_seed) p.seed = *gen_seed;
    emit(to_json(generate(p)), gen_out);
  });

  std::string space_instance, space_board;
  auto* space_cmd = app.add_subcommand("space", "candidate space of both agenda variants for a board");
  space_cmd->add_option("--instance", space_instance)->required()->check(CLI::ExistingFile);
  space_cmd->add_option("--board", space_board)->required()->check(CLI::ExistingFile);
  space_cmd->callback([&] {
    const auto inst = load_instance(space_instance);
    const auto board = load_board(space_board);
    const auto basic = candidate_space_size(inst, board, Variant::basic);
    const auto optimized = candidate_space_size(inst, board, Variant::optimized);
    std::cout << json{{"basic", basic},
                      {"optimized", optimized},
                      {"ratio", basic ? static_cast<double>(optimized) / static_cast<double>(basic) : 0.0}}
                     .dump(2)
              << "\n";
  });

  auto* bench_cmd = app.add_subcommand("bench", "benchmark harness");
  bench_cmd->require_subcommand(1);
  std::string grid_spec, grid_out;
  auto* grid_cmd = bench_cmd->add_subcommand("grid", "sweep patients x operators");
  grid_cmd->add_option("--spec", grid_spec, "GridSpec JSON")->required()->check(CLI::ExistingFile);
  grid_cmd->add_option("--out-dir", grid_out)->required();
  grid_cmd->callback([&] {
    const auto spec = grid_spec_from_json(read_json_file(grid_spec));
    GridOptions opts;
    opts.out_dir = grid_out;
    opts.on_progress = [](std::size_t done, std::size_t total) { std::cerr << "\r" << done << "/" << total << std::flush; };
    const auto report = run_grid(spec, opts);
    std::cerr << "\n" << to_json(report).at("commentary").get<std::string>() << "\n";
  });

  ServiceConfig svc_cfg;
  std::string listen = "127.0.0.1:8080";
  std::string data_dir = svc_cfg.data_dir.string();
  auto* serve_cmd = app.add_subcommand("serve", "HTTP service");
  serve_cmd->add_option("--listen", listen, "host:port")->envname("RSP_LISTEN");
  serve_cmd->add_option("--data-dir", data_dir)->envname("RSP_DATA_DIR");
  serve_cmd->add_option("--cutoff", svc_cfg.default_cutoff, "default solve cutoff in seconds")
      ->envname("RSP_CUTOFF")
      ->check(CLI::PositiveNumber);
  serve_cmd->add_option("--workers", svc_cfg.workers, "solve worker threads")->envname("RSP_WORKERS")->check(CLI::PositiveNumber);
  serve_cmd->callback([&] {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--listen", "expected host:port");
    svc_cfg.data_dir = data_dir;
    Service svc(svc_cfg);
    httplib::Server server;
    install_routes(server, svc);
    static httplib::Server* running = &server;
    std::signal(SIGINT, [](int) { running->stop(); });
    std::signal(SIGTERM, [](int) { running->stop(); });
    std::cerr << "listening on " << listen << ", data in " << data_dir << "\n";
    if (!server.listen(listen.substr(0, colon), std::stoi(listen.substr(colon + 1))))
      throw std::runtime_error("cannot listen on " + listen);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return check_status ? check_status : validate_status;
}
