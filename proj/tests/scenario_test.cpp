#include <gtest/gtest.h>

#include "finslerlab/scenario.hpp"

using namespace finslerlab;

namespace {

const char* kMinimal = R"(
name: minimal
dimension: 2
seed: 5
metric:
  family: randers
  a: sample
  d: sample
hvector:
  mode: explicit_family
  rho: 0.2
  c: ["1", "0.4"]
sample:
  points: 4
select: ["3.4", "3.7"]
)";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kMinimal;
  const auto at = s.find(from);
  if (at == std::string::npos) throw std::runtime_error("fixture text not found");
  return s.replace(at, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Scenario, ParsesMinimalScenario) {
  const auto sc = parse_scenario_text(kMinimal);
  EXPECT_EQ(sc.name, "minimal");
  EXPECT_EQ(sc.dimension, 2);
  EXPECT_EQ(sc.selection, (std::vector<std::string>{"3.4", "3.7"}));
  const auto rr = run_scenario(sc);
  EXPECT_EQ(rr.records.size(), 8u);
  EXPECT_TRUE(rr.passed());
}

TEST(Scenario, UnknownEquationIdIsNamed) {
  const auto msg = error_of(with("select: [\"3.4\", \"3.7\"]", "select: [\"3.4\", \"9.9\"]"));
  EXPECT_NE(msg.find("9.9"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 15"), std::string::npos) << msg;
}

TEST(Scenario, FieldDiagnosticsCarryLines) {
  EXPECT_NE(error_of(with("family: randers", "family: finsler")).find("line 6: metric.family"), std::string::npos);
  EXPECT_NE(error_of(with("c: [\"1\", \"0.4\"]", "c: [\"1\", \"0.4*x3\"]")).find("hvector.c[1]"),
            std::string::npos);
  EXPECT_NE(error_of(with("points: 4", "points: four")).find("sample.points"), std::string::npos);
  EXPECT_NE(error_of(with("seed: 5", "seed: 5\ncolour: blue")).find("colour: unknown field"), std::string::npos);
  EXPECT_NE(error_of("name: [unclosed").find("YAML syntax"), std::string::npos);
}

TEST(Scenario, TagSelectionExpandsThroughRegistry) {
  const auto sc = parse_scenario_text(with("select: [\"3.4\", \"3.7\"]", "select: [HFULL]"));
  EXPECT_EQ(sc.selection, (std::vector<std::string>{"3.8", "3.9", "3.10", "3.11"}));
}

TEST(Scenario, SelectionNeedsMatchingBlocks) {
  EXPECT_NE(error_of(with("select: [\"3.4\", \"3.7\"]", "select: [\"4.13\"]")).find("needs a hypersurface"),
            std::string::npos);
  const auto all = parse_scenario_text(with("select: [\"3.4\", \"3.7\"]\n", ""));
  for (const auto& id : all.selection) EXPECT_FALSE(requirements(id).surface) << id;
}

TEST(Scenario, RegimeConsistency) {
  const std::string constrained = R"(
name: c
dimension: 2
metric: {family: euclidean}
hvector: {mode: constrained, b: [1, 0], E: [[0.1, 0], [0, 0]]}
regime: [PARALLEL]
)";
  EXPECT_NE(error_of(constrained).find("PARALLEL requires E = F = 0"), std::string::npos);
  EXPECT_NE(error_of(with("sample:", "regime: [FIRSTKIND]\nsample:")).find("need a hypersurface"),
            std::string::npos);
  const std::string skew = R"(
name: c
dimension: 2
metric: {family: euclidean}
hvector: {mode: constrained, b: [1, 0], F: [[0.1, 0], [0, 0]]}
)";
  EXPECT_NE(error_of(skew).find("antisymmetric"), std::string::npos);
}

TEST(Scenario, DeclaredRegimeIsCheckedAtEachSample) {
  // c depends on x, so the h-vector is not parallel.
  const std::string text = R"(
name: r
dimension: 2
metric: {family: euclidean}
hvector: {mode: function_of_x, c: ["1 + 0.5*x2", "0.3"]}
regime: [PARALLEL]
sample: {points: 2}
select: ["L3.5"]
)";
  EXPECT_THROW(run_scenario(parse_scenario_text(text)), ScenarioRuntimeError);
}

TEST(Scenario, MachineReportIsDeterministic) {
  const auto sc = parse_scenario_text(kMinimal);
  const auto a = machine_report(run_scenario(sc, 1));
  const auto b = machine_report(run_scenario(sc, 4));
  EXPECT_EQ(a, b);
  auto other = sc;
  other.seed = 6;
  EXPECT_NE(a, machine_report(run_scenario(other)));
  EXPECT_EQ(a.find("time"), std::string::npos);
}

TEST(Scenario, ReportCarriesVerdictsAndEnvironment) {
  const auto rr = run_scenario(parse_scenario_text(kMinimal));
  const auto j = to_json(rr);
  EXPECT_EQ(j["summary"]["pass"], 8);
  EXPECT_EQ(j["environment"]["seed"], 5);
  EXPECT_EQ(j["reports"][0]["id"], "3.4");
  EXPECT_NE(human_report(rr).find("8 checks: 8 pass, 0 fail"), std::string::npos);
}

TEST(Scenario, FailingCheckFailsRun) {
  const auto sc = parse_scenario_text(with("select: [\"3.4\", \"3.7\"]", "select: [\"3.4\"]\ntolerances: {pure: 1e-30, zero: 1e-30}"));
  EXPECT_FALSE(run_scenario(sc).passed());
}

TEST(Scenario, RegistryListing) {
  EXPECT_EQ(tags_of("3.4"), std::vector<Tag>{Tag::H12});
  EXPECT_EQ(tags_of("4.13"), std::vector<Tag>{Tag::TANGENT});
  EXPECT_EQ(tags_of("L3.5"), std::vector<Tag>{Tag::PARALLEL});
}

TEST(Scenario, RegistryTableIsOrdered) {
  const auto table = list_registry();
  EXPECT_LT(table.find("\n2.5 "), table.find("\n2.11 "));
  EXPECT_LT(table.find("\n3.4 "), table.find("\n3.10 "));
  EXPECT_NE(table.find("L3.5"), std::string::npos);
}
