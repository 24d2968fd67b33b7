#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "spgs/cli.hpp"

using namespace spgs;
using namespace spgs::cli;

namespace {

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

}  // namespace

TEST(Config, DefaultsFromEmptyObject) {
  const auto c = parse_config("{}");
  EXPECT_EQ(c.experiment, Experiment::Solve);
  EXPECT_EQ(c.grid.R, 20.0);
  EXPECT_EQ(c.grid.N, 2000u);
  EXPECT_EQ(c.family, "subcritical");
  EXPECT_EQ(c.exponent, 3.0);
  EXPECT_EQ(c.probes, 100u);
}

TEST(Config, RoundTrip) {
  const std::string text = R"({"experiment": "continuation", "grid": {"R": 15, "N": 1500},
    "problem": {"family": "subcritical", "p": 3.5,
                "potential": {"kind": "gaussian_well", "v_infinity": 2, "depth": 0.7, "width": 1.5}},
    "solver": {"seed": 9, "tol_gradient": 1e-8}, "continuation": {"deltas": [0.2, 0.05]}})";
  const auto c = parse_config(text);
  const auto j = to_json(c);
  EXPECT_EQ(to_json(parse_config(j.dump())), j);
  EXPECT_EQ(j["problem"]["potential"]["depth"], 0.7);
  EXPECT_EQ(j["solver"]["seed"], 9);
  EXPECT_EQ(j["experiment"], "continuation");
}

TEST(Config, MalformedJsonReportsPosition) {
  try {
    parse_config("{\"grid\": {\"R\": 20,, }}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GE(e.position(), 18u);
    EXPECT_LE(e.position(), 20u);
  }
}

TEST(Config, ZeroTableValueCitesV2) {
  std::string vals = "[0";
  for (int i = 0; i < 16; ++i) vals += ", 0.5";
  vals += "]";
  const auto v = violations_of(R"({"grid": {"R": 4, "N": 16}, "problem": {"p": 3.5,
      "potential": {"kind": "table", "v_infinity": 1, "values": )" + vals + "}}}");
  ASSERT_FALSE(v.empty());
  EXPECT_TRUE(any_contains(v, "problem.potential.values[0]"));
  EXPECT_TRUE(any_contains(v, "(V2)"));
}

TEST(Config, UnknownKeyIsListed) {
  const auto v = violations_of(R"({"problem": {"p": 3, "ptential": {"kind": "constant"}}})");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("problem.ptential"), std::string::npos);
  EXPECT_NE(v[0].find("unknown key"), std::string::npos);
}

TEST(Config, CollectsEveryViolation) {
  const auto v = violations_of(R"({"grid": {"R": -1}, "problem": {"p": 7, "potential": {"value": 0}},
                                    "solver": {"backtrack_factor": 2}, "bogus": 1})");
  EXPECT_GE(v.size(), 5u);
  EXPECT_TRUE(any_contains(v, "bogus"));
  EXPECT_TRUE(any_contains(v, "problem.p"));
  EXPECT_TRUE(any_contains(v, "(V2)"));
  EXPECT_TRUE(any_contains(v, "backtrack_factor"));
}

TEST(Config, TypeErrors) {
  EXPECT_TRUE(any_contains(violations_of(R"({"grid": {"N": "many"}})"), "grid.N"));
  EXPECT_TRUE(any_contains(violations_of(R"({"experiment": "nope"})"), "experiment"));
  EXPECT_TRUE(any_contains(violations_of(R"({"problem": {"family": "other"}})"), "problem.family"));
}

TEST(Config, NonConstantPotentialNeedsPAboveThree) {
  const auto v = violations_of(R"({"problem": {"p": 3, "potential": {"kind": "gaussian_well"}}})");
  EXPECT_TRUE(any_contains(v, "problem.p"));
}

TEST(Config, ContinuationShiftMustStayAdmissible) {
  const auto v = violations_of(R"({"problem": {"p": 3.5}, "continuation": {"deltas": [-1.5]}})");
  EXPECT_TRUE(any_contains(v, "continuation.deltas"));
}

TEST(Config, FamilyExponentKeys) {
  EXPECT_EQ(parse_config(R"({"problem": {"family": "critical_perturbed"}})").exponent, 4.0);
  EXPECT_TRUE(any_contains(violations_of(R"({"problem": {"family": "critical_perturbed", "p": 4}})"), "problem.p"));
  EXPECT_TRUE(any_contains(violations_of(R"({"problem": {"family": "critical_pure", "q": 4}})"), "critical_pure"));
}

TEST(Run, SolveReportIsDeterministic) {
  auto c = parse_config(R"({"grid": {"R": 20, "N": 1000}, "problem": {"p": 4}, "solver": {"probes": 10}})");
  const auto [code1, r1] = run(c, 1, nullptr);
  const auto [code2, r2] = run(c, 2, nullptr);
  EXPECT_EQ(code1, kSuccess);
  EXPECT_EQ(code2, kSuccess);
  EXPECT_EQ(deterministic_part(r1).dump(), deterministic_part(r2).dump());
  EXPECT_TRUE(r1.contains("metadata"));
  EXPECT_EQ(r1["result"]["label"], kLevelLabel);
}

TEST(Run, PureFamilyWithoutOptInIsReported) {
  auto c = parse_config(R"({"grid": {"R": 20, "N": 1000}, "problem": {"family": "critical_pure"}})");
  const auto [code, r] = run(c, 1, nullptr);
  EXPECT_EQ(code, kFailure);
  EXPECT_EQ(r["exit_code"], kFailure);
  EXPECT_TRUE(r.contains("error"));
}

TEST(Run, CheckExperimentPasses) {
  auto c = parse_config(R"({"experiment": "check"})");
  const auto [code, r] = run(c, 1, nullptr);
  EXPECT_EQ(code, kSuccess);
  for (const auto& row : r["result"]["checks"]) EXPECT_TRUE(row["passed"].get<bool>()) << row.dump();
}

TEST(Run, WritesReportAndCsv) {
  auto c = parse_config(R"({"experiment": "bubbles", "bubbles": {"grid": {"R": 3.2, "N": 1600},
                                                                 "S_grid": {"R": 20, "N": 2000}}})");
  std::vector<std::pair<std::string, std::string>> csv;
  const auto [code, r] = run(c, 1, &csv);
  EXPECT_EQ(code, kSuccess);
  const auto dir = std::filesystem::temp_directory_path() / "spgs_cli_test";
  std::filesystem::remove_all(dir);
  write_outputs(dir, r, csv);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  std::ifstream in(dir / "bubbles.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "epsilon,s,norm,fitted_slope");
  std::filesystem::remove_all(dir);
}
