#include <gtest/gtest.h>

#include "rsp/feas.hpp"
#include "rule_fixtures.hpp"
#include "support.hpp"

using namespace rsp;
using namespace rsp::testing;

namespace {

RuleMask board_mask(const Instance& inst, const BoardSolution& b) { return mask_of(check_board(Problem(inst), b)); }

RuleMask agenda_mask(const Instance& inst, const BoardSolution& b, const AgendaSolution& a) {
  return mask_of(check_agenda(Problem(inst), b, a));
}

Instance one_operator(int slots = 24) {
  Instance inst;
  inst.grid = grid_of({slots});
  inst.operators.push_back(Operator::fictitious());
  inst.operators.push_back(plain_operator(1, {{0, 0, slots}}));
  inst.locations.push_back(location(1, 1, inst.grid, "floor"));
  return inst;
}

}  // namespace

// ---------------------------------------------------------------------------
// Board
// ---------------------------------------------------------------------------

TEST(CheckBoard, QualifiedOperatorWithAmpleTimeIsClean) {
  auto inst = one_operator();
  inst.operators[1].total_time = 100;
  add_patient(inst, 1, {session(4, 6)});
  EXPECT_TRUE(check_board(Problem(inst), {{{1, 1}}}).empty());
}

TEST(CheckBoard, TwoSoloPatientsOverloadAFiveSlotContract) {
  auto inst = one_operator();
  inst.locations.push_back(location(2, 1, inst.grid, "annex"));
  inst.operators[1].total_time = 5;
  add_patient(inst, 1, {session(2, 3, "floor")}, 3);
  add_patient(inst, 2, {session(2, 3, "annex")}, 3);
  const auto v = check_board(Problem(inst), {{{1, 1}, {2, 1}}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, Rule::B2);
  EXPECT_EQ(v[0].entities, std::vector<std::string>{"operator:1"});
  EXPECT_NE(v[0].detail.find("6"), std::string::npos);
}

TEST(CheckBoard, SharedLocationChargesSessionMinimumsInstead) {
  auto inst = one_operator();
  inst.operators[1].total_time = 5;
  add_patient(inst, 1, {session(2, 3)}, 3);
  add_patient(inst, 2, {session(2, 3)}, 3);
  const Problem pb(inst);
  EXPECT_EQ(operator_workload(pb, to_dense(pb, BoardSolution{{{1, 1}, {2, 1}}}), 1), 4);
  EXPECT_TRUE(check_board(pb, {{{1, 1}, {2, 1}}}).empty());
}

TEST(CheckBoard, TypeLimitOfTwoNeurologicPatients) {
  auto inst = one_operator();
  const PatientType neuro{TypeValue::neurologic, Needs::nolifter, PayStatus::free};
  inst.operators[1].type_limits[neuro] = 2;
  for (int p = 1; p <= 3; ++p) add_patient(inst, p, {session(1, 1)});
  EXPECT_EQ(board_mask(inst, {{{1, 1}, {2, 1}, {3, 1}}}), bit(Rule::B4));
  EXPECT_EQ(board_mask(inst, {{{1, 1}, {2, 1}, {3, -1}}}), 0u);
}

TEST(CheckBoard, UnknownIdsAreStructuralErrors) {
  auto inst = one_operator();
  add_patient(inst, 1, {session(1, 1)});
  EXPECT_THROW(check_board(Problem(inst), {{{1, 9}}}), StructuralError);
  EXPECT_THROW(check_board(Problem(inst), {{{5, 1}}}), StructuralError);
}

TEST(BoardCost, LevelsArePreferenceFictitiousHistory) {
  auto inst = one_operator();
  inst.operators.push_back(plain_operator(2, {{0, 0, 24}}));
  add_patient(inst, 1, {session(1, 1)});
  add_patient(inst, 2, {session(1, 1)});
  inst.patients[0].preferred_operators = {{1, 0}, {2, 1}};
  inst.patients[1].preferred_operators = {{2, 0}};
  inst.patients[1].history_preferences = {{1, 0}};
  const Problem pb(inst);
  EXPECT_EQ(board_cost(pb, {{{1, 1}, {2, 2}}}), (CostVector{0, 0, 2}));
  EXPECT_EQ(board_cost(pb, {{{1, 1}, {2, 1}}}), (CostVector{2, 0, 0}));
  // Operator -1 is unlisted everywhere: list length + 1 on both preference levels.
  EXPECT_EQ(board_cost(pb, {{{1, -1}, {2, 2}}}), (CostVector{3, 1, 2}));
}

TEST(BoardCost, InfeasibleBoardHasNoCost) {
  auto inst = one_operator();
  inst.operators[1].max_patients = 0;
  add_patient(inst, 1, {session(1, 1)});
  EXPECT_THROW(board_cost(Problem(inst), {{{1, 1}}}), CostUndefined);
}

// ---------------------------------------------------------------------------
// Agenda
// ---------------------------------------------------------------------------

TEST(CheckAgenda, SingleSessionAtShiftStartIsClean) {
  auto inst = one_operator();
  add_patient(inst, 1, {session(4, 6)});
  const auto a = agenda_of({{1, 0, 0, 6, 0, 0, 1}});
  EXPECT_TRUE(check_agenda(Problem(inst), {{{1, 1}}}, a).empty());
  EXPECT_EQ(agenda_cost(Problem(inst), {{{1, 1}}}, a), CostVector(6));
}

TEST(CheckAgenda, OverlappingIndividualPartsOfOneOperator) {
  auto inst = one_operator();
  inst.locations[0].capacity = 0;
  add_patient(inst, 1, {session(4, 4)});
  add_patient(inst, 2, {session(4, 4)});
  const auto v = check_agenda(Problem(inst), {{{1, 1}, {2, 1}}},
                              agenda_of({{1, 0, 0, 4, 0, 0, 1}, {2, 0, 3, 4, 0, 0, 1}}));
  ASSERT_EQ(mask_of(v), bit(Rule::A5));
  EXPECT_EQ(v[0].entities, (std::vector<std::string>{"session:1", "session:2", "operator:1"}));
}

TEST(CheckAgenda, CrowdedGymBreaksCapacityAndBalance) {
  Instance inst;
  inst.grid = grid_of({12});
  inst.operators.push_back(Operator::fictitious());
  inst.locations.push_back(location(1, 2, inst.grid, "floor"));
  inst.locations.push_back(location(2, 0, inst.grid, "floor"));
  std::vector<SessionPlacement> pls;
  for (int p = 1; p <= 5; ++p) {
    inst.operators.push_back(plain_operator(p, {{0, 0, 12}}));
    add_patient(inst, p, {session(2, 2, "floor", SessionKind::supervised)});
    pls.push_back({p, 0, p == 5 ? 0 : 2, 2, 0, 0, p == 5 ? 2 : 1});
  }
  BoardSolution b;
  for (int p = 1; p <= 5; ++p) b.assignment[p] = p;
  // Slots 2-3: four sessions in the gym and one in the other room, so 4 > 2 and 4 - 0 > 2.
  EXPECT_EQ(agenda_mask(inst, b, agenda_of(pls)), bit(Rule::A10) | bit(Rule::A12));
}

TEST(CheckAgenda, SessionsOfFictitiousPatientsNeedNoPlacement) {
  auto inst = one_operator();
  add_patient(inst, 1, {session(4, 6)});
  EXPECT_EQ(agenda_mask(inst, {{{1, -1}}}, AgendaSolution{}), 0u);
  EXPECT_EQ(agenda_mask(inst, {{{1, 1}}}, AgendaSolution{}), bit(Rule::A1) | bit(Rule::A9));
}

TEST(CheckAgenda, SupervisedExtensionsMayOverlapInOneLocation) {
  auto inst = one_operator();
  inst.locations[0].capacity = 0;
  add_patient(inst, 1, {session(2, 4)});
  add_patient(inst, 2, {session(2, 4)});
  // Individual parts [2,4) and [4,6); the first session's supervised tail covers [4,6).
  const auto a = agenda_of({{1, 0, 2, 2, 0, 2, 1}, {2, 0, 4, 2, 2, 0, 1}});
  EXPECT_EQ(agenda_mask(inst, {{{1, 1}, {2, 1}}}, a), 0u);
  inst.locations.push_back(location(2, 0, inst.grid, "floor"));
  auto moved = a;
  moved.placements[2].location = 2;
  EXPECT_EQ(agenda_mask(inst, {{{1, 1}, {2, 1}}}, moved), bit(Rule::A8));
}

TEST(CheckAgenda, PlacementKeyMismatchIsStructural) {
  auto inst = one_operator();
  add_patient(inst, 1, {session(2, 4)});
  AgendaSolution a;
  a.placements[1] = {2, 0, 0, 2, 0, 0, 1};
  EXPECT_THROW(check_agenda(Problem(inst), {{{1, 1}}}, a), StructuralError);
}

TEST(FairSlack, MatchesHandEvaluationOfThePatterns) {
  for (int min1 = 1; min1 <= 3; ++min1)
    for (int ideal1 = min1; ideal1 <= min1 + 3; ++ideal1)
      for (int len1 = min1; len1 <= ideal1; ++len1)
        for (int min2 = 1; min2 <= 3; ++min2)
          for (int ideal2 = min2; ideal2 <= min2 + 3; ++ideal2)
            for (int len2 = min2; len2 <= ideal2; ++len2)
              EXPECT_EQ(fair_slack_violated(min1, ideal1, len1, min2, ideal2, len2),
                        fixture_detail::unfair(min1, ideal1, len1, min2, ideal2, len2));
}

TEST(FairSlack, EqualSessionsSplitSlackEvenly) {
  // Ideals 6/6, mins 4/4: lengths (5,5) and (4,4) are fair, (6,4) is not.
  EXPECT_FALSE(fair_slack_violated(4, 6, 5, 4, 6, 5));
  EXPECT_FALSE(fair_slack_violated(4, 6, 4, 4, 6, 4));
  EXPECT_TRUE(fair_slack_violated(4, 6, 6, 4, 6, 4) || fair_slack_violated(4, 6, 4, 4, 6, 6));
}

TEST(AgendaCost, LevelsFollowTheObjectiveOrder) {
  auto inst = one_operator();
  inst.grid = grid_of({24, 15});
  inst.operators[1].shifts = {{0, 0, 24}, {1, 0, 15}};
  inst.locations[0] = location(1, 0, inst.grid, "floor");
  auto high = session(2, 6);
  high.preference = SessionPreference{0, 3, Priority::high};
  auto low = session(2, 4, "floor", SessionKind::individual, Optionality::optional);
  low.preference = SessionPreference{0, 10, Priority::low};
  add_patient(inst, 1, {high, low});
  auto spare = session(1, 1, "floor", SessionKind::individual, Optionality::optional);
  add_patient(inst, 2, {session(3, 3), spare});
  const BoardSolution b{{{1, 1}, {2, 1}}};
  const Problem pb(inst);

  // Perfect: high at 3 with ideal length, low in period 0 at 10 is impossible next to high (A6),
  // so place low in period 1 at slot 0: one period away, start deviation not charged.
  auto a = agenda_of({{1, 0, 3, 6, 0, 0, 1}, {2, 1, 0, 4, 0, 0, 1}, {3, 0, 12, 3, 0, 0, 1}});
  EXPECT_EQ(agenda_cost(pb, b, a), (CostVector{0, 0, 0, 1, 1, 0}));
  a.placements[1].length = 4;  // two short of ideal
  a.placements[1].start = 5;   // two slots late
  EXPECT_EQ(agenda_cost(pb, b, a), (CostVector{2, 0, 2, 1, 1, 0}));
  a.placements[1].period = 1;
  a.placements[2].period = 0;
  a.placements[2].start = 8;
  EXPECT_EQ(agenda_cost(pb, b, a), (CostVector{2, 1, 0, 1, 0, 2}));
  a.placements.erase(2);
  EXPECT_EQ(agenda_cost(pb, b, a), (CostVector{2, 1, 0, 2, 0, 0}));
}

TEST(AgendaCost, DroppingAnOptionalSessionAddsExactlyOneUnscheduled) {
  auto inst = one_operator();
  inst.grid = grid_of({12, 12});
  inst.operators[1].shifts = {{0, 0, 12}, {1, 0, 12}};
  inst.locations[0] = location(1, 0, inst.grid, "floor");
  add_patient(inst, 1, {session(2, 3), session(2, 4, "floor", SessionKind::supervised, Optionality::optional)});
  const BoardSolution b{{{1, 1}}};
  const Problem pb(inst);
  auto a = agenda_of({{1, 0, 0, 3, 0, 0, 1}, {2, 1, 0, 3, 0, 0, 1}});
  const auto with = agenda_cost(pb, b, a);
  a.placements.erase(2);
  const auto without = agenda_cost(pb, b, a);
  EXPECT_EQ(without[3], with[3] + 1);
  EXPECT_EQ(without[0], with[0] - 1);
}

TEST(AgendaCost, InfeasibleAgendaHasNoCost) {
  auto inst = one_operator();
  add_patient(inst, 1, {session(2, 3)});
  EXPECT_THROW(agenda_cost(Problem(inst), {{{1, 1}}}, AgendaSolution{}), CostUndefined);
}

// ---------------------------------------------------------------------------
// Per-rule fixtures
// ---------------------------------------------------------------------------

class RuleFixtureTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(RuleFixtureTest, CheckerFlagsExactlyTheExpectedTags) {
  const auto fx = rule_fixtures()[GetParam()];
  Rng rng(mix_seed(99, GetParam()));
  int positives = 0, negatives = 0;
  for (int i = 0; i < 300; ++i) {
    const auto c = fx.draw(rng);
    ASSERT_TRUE(validate_instance(c.instance).empty());
    ASSERT_EQ(checked_mask(c), c.expected) << "draw " << i << ": expected " << mask_str(c.expected);
    (c.expected & bit(fx.rule)) ? ++positives : ++negatives;
  }
  EXPECT_GT(positives, 0) << "fixture never breaks " << to_string(fx.rule);
  EXPECT_GT(negatives, 0) << "fixture never satisfies " << to_string(fx.rule);
}

INSTANTIATE_TEST_SUITE_P(AllRules, RuleFixtureTest, ::testing::Range<std::size_t>(0, kAllRules.size()),
                         [](const auto& info) { return std::string(to_string(kAllRules[info.param])); });

TEST(RuleFixtures, OnePerCatalogTag) {
  const auto fx = rule_fixtures();
  ASSERT_EQ(fx.size(), kAllRules.size());
  for (std::size_t i = 0; i < fx.size(); ++i) EXPECT_EQ(fx[i].rule, kAllRules[i]);
}
