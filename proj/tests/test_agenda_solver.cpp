#include <gtest/gtest.h>

#include <thread>

#include "rsp/agenda_solver.hpp"
#include "rsp/board_solver.hpp"
#include "rsp/generator.hpp"
#include "rsp/oracle.hpp"
#include "support.hpp"

using namespace rsp;
using namespace rsp::testing;

namespace {

SolveConfig exact(double cutoff = 30) {
  SolveConfig cfg;
  cfg.mode = Mode::exact;
  cfg.cutoff = cutoff;
  return cfg;
}

SolveConfig anytime(double cutoff, std::uint64_t seed) {
  SolveConfig cfg;
  cfg.mode = Mode::anytime;
  cfg.cutoff = cutoff;
  cfg.seed = seed;
  return cfg;
}

/// One operator on an all-day shift in a single period, one room of the given capacity.
AgendaCase one_room(int slots, int capacity) {
  AgendaCase c;
  c.instance.grid = grid_of({slots});
  c.instance.operators = {Operator::fictitious(), plain_operator(1, {{0, 0, slots}})};
  c.instance.locations.push_back(location(1, capacity, c.instance.grid, "floor"));
  return c;
}

AgendaCase two_sessions_sharing_a_shift(int slots) {
  auto c = one_room(slots, 1);
  add_patient(c.instance, 1, {session(4, 6)});
  add_patient(c.instance, 2, {session(4, 6)});
  c.board.assignment = {{1, 1}, {2, 1}};
  return c;
}

struct NerviCase {
  Instance instance;
  BoardSolution board;
};

NerviCase nervi(std::uint64_t seed) {
  auto p = preset("nervi");
  p.seed = seed;
  NerviCase n{generate(p), {}};
  n.board = *solve_board(n.instance, anytime(0.3, seed)).best;
  return n;
}

}  // namespace

TEST(SolveAgenda, SingleFixedLengthSessionIsOptimalAtZeroCost) {
  auto c = one_room(24, 0);
  add_patient(c.instance, 1, {session(4, 4)});
  c.board.assignment[1] = 1;
  for (auto v : {Variant::basic, Variant::optimized}) {
    const auto r = solve_agenda(c.instance, c.board, exact(), v);
    ASSERT_EQ(r.outcome, Outcome::OptimumFound);
    EXPECT_EQ(*r.cost, CostVector(6));
    EXPECT_EQ(r.best->placements.at(1).length, 4);
  }
}

TEST(SolveAgenda, EightSlotShiftForcesMinimumLengthsBackToBack) {
  const auto c = two_sessions_sharing_a_shift(8);
  const auto oracle = oracle_agenda(c.instance, c.board);
  ASSERT_TRUE(oracle);
  EXPECT_EQ(oracle->cost, (CostVector{4, 0, 0, 0, 0, 0}));
  for (auto v : {Variant::basic, Variant::optimized}) {
    const auto r = solve_agenda(c.instance, c.board, exact(), v);
    ASSERT_EQ(r.outcome, Outcome::OptimumFound);
    EXPECT_EQ(*r.cost, oracle->cost);
    const auto& p1 = r.best->placements.at(1);
    const auto& p2 = r.best->placements.at(2);
    EXPECT_EQ(p1.length, 4);
    EXPECT_EQ(p2.length, 4);
    EXPECT_EQ(std::abs(p1.start - p2.start), 4);
  }
}

TEST(SolveAgenda, TenSlotShiftSplitsSlackFairly) {
  // With room for 10 slots, (5,5) and (6,4) both cost 2 on the length level; fairness rules out (6,4).
  const auto c = two_sessions_sharing_a_shift(10);
  const auto oracle = oracle_agenda(c.instance, c.board);
  ASSERT_TRUE(oracle);
  EXPECT_EQ(oracle->cost[0], 2);
  EXPECT_EQ(oracle->solution.placements.at(1).length, 5);
  EXPECT_EQ(oracle->solution.placements.at(2).length, 5);
  const auto r = solve_agenda(c.instance, c.board, exact(), Variant::optimized);
  ASSERT_EQ(r.outcome, Outcome::OptimumFound);
  EXPECT_EQ(r.best->placements.at(1).length, 5);
  EXPECT_EQ(r.best->placements.at(2).length, 5);
}

TEST(SolveAgenda, HighPreferenceStartIsMet) {
  auto c = one_room(12, 1);
  auto s = session(3, 3);
  s.preference = SessionPreference{0, 3, Priority::high};
  add_patient(c.instance, 1, {s});
  c.board.assignment[1] = 1;
  const auto oracle = oracle_agenda(c.instance, c.board);
  ASSERT_TRUE(oracle);
  EXPECT_EQ(oracle->solution.placements.at(1).start, 3);
  const auto r = solve_agenda(c.instance, c.board, exact(), Variant::optimized);
  EXPECT_EQ(r.best->placements.at(1).start, 3);
  EXPECT_EQ(*r.cost, CostVector(6));
}

TEST(SolveAgenda, BothVariantsMatchOracleOnTinyInstances) {
  for (std::uint64_t seed = 5000; seed < 5250; ++seed) {
    const auto c = tiny_agenda_case(seed);
    const auto oracle = oracle_agenda(c.instance, c.board);
    for (auto v : {Variant::basic, Variant::optimized}) {
      const auto r = solve_agenda(c.instance, c.board, exact(), v);
      if (!oracle) {
        EXPECT_EQ(r.outcome, Outcome::Unsatisfiable) << "seed " << seed << " " << to_string(v);
        continue;
      }
      ASSERT_EQ(r.outcome, Outcome::OptimumFound) << "seed " << seed << " " << to_string(v);
      EXPECT_EQ(*r.cost, oracle->cost) << "seed " << seed << " " << to_string(v);
      EXPECT_TRUE(check_agenda(Problem(c.instance), c.board, *r.best).empty());
    }
  }
}

TEST(SolveAgenda, EmptyStartSetIsAStructuralUnsatWitness) {
  auto c = one_room(12, 1);
  add_patient(c.instance, 1, {session(4, 4)});
  c.instance.patients[0].forbidden = {{0, 2, 10}};  // leaves [0,2) and [10,12), both too short
  c.board.assignment[1] = 1;
  const auto r = solve_agenda(c.instance, c.board, anytime(5, 0), Variant::optimized);
  EXPECT_EQ(r.outcome, Outcome::Unsatisfiable);
  EXPECT_FALSE(r.best.has_value());
  EXPECT_FALSE(oracle_agenda(c.instance, c.board).has_value());
}

TEST(SolveAgenda, InfeasibleBoardIsRejected) {
  auto c = one_room(12, 1);
  add_patient(c.instance, 1, {session(4, 4)});
  c.instance.operators[1].max_patients = 0;
  c.board.assignment[1] = 1;
  EXPECT_THROW(solve_agenda(c.instance, c.board, exact(), Variant::basic), std::invalid_argument);
  c.board.assignment[1] = 7;
  EXPECT_THROW(solve_agenda(c.instance, c.board, exact(), Variant::basic), StructuralError);
}

TEST(SolveAgenda, AnytimeOnGeneratedInstancesIsCheckedAndImproving) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto n = nervi(seed);
    for (auto v : {Variant::basic, Variant::optimized}) {
      const auto r = solve_agenda(n.instance, n.board, anytime(1, seed), v);
      EXPECT_LE(r.wall_time, 1.5);
      if (r.outcome == Outcome::Unsatisfiable || r.outcome == Outcome::Unknown) continue;
      EXPECT_TRUE(check_agenda(Problem(n.instance), n.board, *r.best).empty());
      EXPECT_EQ(*r.cost, agenda_cost(Problem(n.instance), n.board, *r.best));
      for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LT(r.trace[i].cost, r.trace[i - 1].cost);
    }
  }
}

TEST(SolveAgenda, SameSeedSameReport) {
  const auto n = nervi(9);
  auto cfg = anytime(5, 3);
  cfg.work_limit = 150000;
  for (auto v : {Variant::basic, Variant::optimized}) {
    const auto a = solve_agenda(n.instance, n.board, cfg, v);
    const auto b = solve_agenda(n.instance, n.board, cfg, v);
    EXPECT_EQ(a.outcome, b.outcome);
    EXPECT_EQ(a.best, b.best);
    EXPECT_EQ(a.work, b.work);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].cost, b.trace[i].cost);
  }
}

TEST(SolveAgenda, CancellationStopsPromptly) {
  const auto n = nervi(12);
  std::stop_source stop;
  auto cfg = anytime(30, 0);
  cfg.stop = stop.get_token();
  std::jthread canceller([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    stop.request_stop();
  });
  const auto r = solve_agenda(n.instance, n.board, cfg, Variant::optimized);
  EXPECT_LT(r.wall_time, 1.0);
}
