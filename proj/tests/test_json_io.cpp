#include <gtest/gtest.h>

#include <filesystem>

#include "rsp/generator.hpp"
#include "rsp/json_io.hpp"
#include "support.hpp"

using namespace rsp;

TEST(JsonIo, GeneratedInstanceRoundTripsExactly) {
  for (const char* name : {"nervi", "castel_goffredo"}) {
    auto p = preset(name);
    p.seed = 5;
    p.forced_rate = 0.2;
    const auto inst = generate(p);
    const auto j = to_json(inst);
    EXPECT_EQ(to_json(instance_from_json(j)), j) << name;
  }
}

TEST(JsonIo, TopLevelKeysAndClockStrings) {
  const auto j = to_json(generate(GenParams{}));
  for (const char* k : {"grid", "patients", "operators", "locations", "sessions"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["grid"]["periods"][0]["start"], "08:00");
  EXPECT_EQ(j["grid"]["periods"][1]["end"], "16:00");
  EXPECT_EQ(j["operators"][0]["id"], -1);
  EXPECT_TRUE(j["operators"][0]["total_time"].is_null());
}

TEST(JsonIo, BoardAndAgendaRoundTrip) {
  BoardSolution b{{{1, 3}, {2, -1}, {10, 1}}};
  EXPECT_EQ(board_from_json(to_json(b)), b);
  const auto a = rsp::testing::agenda_of({{1, 0, 4, 5, 1, 2, 7}, {3, 1, 0, 3, 0, 0, 2}});
  EXPECT_EQ(agenda_from_json(to_json(a)), a);
  EXPECT_EQ(to_json(a)[0]["before"], 1);
}

TEST(JsonIo, MalformedDocumentsRaiseFormatError) {
  EXPECT_THROW(instance_from_json(json::array()), FormatError);
  EXPECT_THROW(instance_from_json(json{{"patients", json::array()}}), FormatError);
  auto j = to_json(generate(GenParams{}));
  j["patients"][0]["ptype"]["value"] = "martian";
  EXPECT_THROW(instance_from_json(j), FormatError);
  j = to_json(generate(GenParams{}));
  j["grid"]["periods"][0]["start"] = "8h";
  EXPECT_THROW(instance_from_json(j), FormatError);
  j = to_json(generate(GenParams{}));
  j["sessions"][0]["kind"] = "group";
  EXPECT_THROW(instance_from_json(j), FormatError);

  EXPECT_THROW(board_from_json(json{{"x1", 2}}), FormatError);
  EXPECT_THROW(board_from_json(json::array()), FormatError);
  EXPECT_THROW(agenda_from_json(json::object()), FormatError);
  json twice = json::array({{{"session", 1}, {"period", 0}, {"start", 0}, {"length", 2}, {"location", 1}},
                            {{"session", 1}, {"period", 0}, {"start", 4}, {"length", 2}, {"location", 1}}});
  EXPECT_THROW(agenda_from_json(twice), FormatError);
}

TEST(JsonIo, OptionalFieldsTakeDefaults) {
  json placement = json::array({{{"session", 4}, {"period", 1}, {"start", 2}, {"length", 3}, {"location", 1}}});
  const auto a = agenda_from_json(placement);
  EXPECT_EQ(a.placements.at(4).before, 0);
  EXPECT_EQ(a.placements.at(4).after, 0);

  auto j = to_json(generate(GenParams{}));
  j.erase("grid");
  j["sessions"][0].erase("optionality");
  j["sessions"][0].erase("forced_time");
  const auto inst = instance_from_json(j);
  EXPECT_EQ(inst.grid.slots_in(0), 24);
  EXPECT_FALSE(inst.sessions[0].is_optional());
}

TEST(JsonIo, FilesRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "rsp_json_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "inst.json").string();
  const auto inst = generate(GenParams{});
  write_json_file(path, to_json(inst));
  EXPECT_EQ(to_json(load_instance(path)), to_json(inst));
  EXPECT_THROW(read_json_file((dir / "missing.json").string()), FormatError);
  std::filesystem::remove_all(dir);
}
