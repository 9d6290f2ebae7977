#include <gtest/gtest.h>

#include "rsp/oracle.hpp"
#include "support.hpp"

using namespace rsp;
using namespace rsp::testing;

TEST(OracleBoard, SinglePatientSingleOperator) {
  Instance inst;
  inst.operators = {Operator::fictitious(), plain_operator(1, {{0, 0, 24}})};
  inst.locations.push_back(location(1, 1, inst.grid, "floor"));
  add_patient(inst, 1, {session(2, 3)});
  const auto r = oracle_board(inst);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->cost, (CostVector{0, 0, 0}));
  EXPECT_EQ(r->solution.assignment.at(1), 1);
}

TEST(OracleBoard, IncompatiblePatientsAllGoToFictitious) {
  Instance inst;
  inst.operators = {Operator::fictitious(), plain_operator(1, {{0, 0, 24}}), plain_operator(2, {{0, 0, 24}})};
  for (auto& o : inst.operators)
    if (!o.is_fictitious()) o.qualifications = {TypeValue::outpatient};
  inst.locations.push_back(location(1, 1, inst.grid, "floor"));
  for (int p = 1; p <= 4; ++p) add_patient(inst, p, {session(1, 2)});
  const auto r = oracle_board(inst);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->cost[1], 4);
  for (const auto& [p, o] : r->solution.assignment) EXPECT_EQ(o, kFictitiousOperator);
}

TEST(OracleBoard, RefusesInstancesBeyondLimits) {
  Instance inst;
  inst.operators.push_back(Operator::fictitious());
  for (int i = 1; i <= 4; ++i) inst.operators.push_back(plain_operator(i, {{0, 0, 24}}));
  inst.locations.push_back(location(1, 1, inst.grid, "floor"));
  add_patient(inst, 1, {session(1, 2)});
  EXPECT_THROW(oracle_board(inst), OracleLimitError);
  OracleLimits wide;
  wide.max_operators = 4;
  EXPECT_NO_THROW(oracle_board(inst, wide));
}

TEST(OracleAgenda, RefusesLongPeriodsAndManySessions) {
  Instance inst;
  inst.operators = {Operator::fictitious(), plain_operator(1, {{0, 0, 24}})};
  inst.locations.push_back(location(1, 1, inst.grid, "floor"));
  add_patient(inst, 1, {session(1, 2)});
  const BoardSolution b{{{1, 1}}};
  EXPECT_THROW(oracle_agenda(inst, b), OracleLimitError);  // 24 morning slots
  inst.grid = grid_of({12});
  inst.operators[1].shifts = {{0, 0, 12}};
  inst.locations[0] = location(1, 1, inst.grid, "floor");
  for (int p = 2; p <= 4; ++p) {
    add_patient(inst, p, {session(1, 2)});
  }
  EXPECT_THROW(oracle_agenda(inst, {{{1, 1}, {2, 1}, {3, 1}, {4, 1}}}), OracleLimitError);
}

TEST(OracleAgenda, FixedLengthSessionHasUniqueCheapestStart) {
  Instance inst;
  inst.grid = grid_of({6});
  inst.operators = {Operator::fictitious(), plain_operator(1, {{0, 2, 6}})};
  inst.locations.push_back(location(1, 1, inst.grid, "floor"));
  add_patient(inst, 1, {session(4, 4)});
  const auto r = oracle_agenda(inst, {{{1, 1}}});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->cost, CostVector(6));
  EXPECT_EQ(r->solution.placements.at(1), (SessionPlacement{1, 0, 2, 4, 0, 0, 1}));
}

TEST(OracleAgenda, UsesExtensionsToReachTheDailyMinimum) {
  Instance inst;
  inst.grid = grid_of({8});
  inst.operators = {Operator::fictitious(), plain_operator(1, {{0, 0, 8}})};
  inst.locations.push_back(location(1, 0, inst.grid, "floor"));
  add_patient(inst, 1, {session(2, 3)}, 6);
  const auto r = oracle_agenda(inst, {{{1, 1}}});
  ASSERT_TRUE(r);
  const auto& p = r->solution.placements.at(1);
  EXPECT_EQ(p.length, 3);
  EXPECT_GE(p.ext_length(), 6);
  EXPECT_TRUE(check_agenda(Problem(inst), {{{1, 1}}}, r->solution).empty());
}

TEST(Oracle, SolutionsPassTheCheckerAndAreDeterministic) {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const auto c = tiny_agenda_case(seed);
    const auto a = oracle_agenda(c.instance, c.board), b = oracle_agenda(c.instance, c.board);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (!a) continue;
    EXPECT_EQ(a->solution, b->solution);
    const Problem pb(c.instance);
    EXPECT_TRUE(check_agenda(pb, c.board, a->solution).empty()) << "seed " << seed;
    EXPECT_EQ(agenda_cost(pb, c.board, a->solution), a->cost);
  }
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const auto inst = tiny_board_instance(seed);
    const auto r = oracle_board(inst);
    ASSERT_TRUE(r);
    EXPECT_TRUE(check_board(Problem(inst), r->solution).empty());
  }
}

TEST(Oracle, FeasibleStartQueryAgreesWithTheOptimum) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto c = tiny_agenda_case(seed, false);
    const auto r = oracle_agenda(c.instance, c.board);
    if (!r) continue;
    for (const auto& [sid, p] : r->solution.placements)
      EXPECT_TRUE(oracle_exists_feasible_with(c.instance, c.board, sid, p.period, p.start)) << "seed " << seed;
  }
}
