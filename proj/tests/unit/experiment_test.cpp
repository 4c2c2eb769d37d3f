#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "feddaf/config.hpp"
#include "feddaf/error.hpp"
#include "feddaf/experiment.hpp"
#include "test_data.hpp"

namespace feddaf {
namespace {

ExperimentPlan small_plan() {
  ExperimentPlan plan;
  plan.base = testing::small_config();
  plan.base.rounds = 2;
  plan.scarcity_levels = {0.2, 0.5};
  plan.noise_levels = {0.0, 0.6};
  plan.mu_values = {5.0};
  plan.seeds = {1, 2};
  plan.fill_defaults();
  return plan;
}

TEST(Plan, ParsesListsAndBaseKeys) {
  const auto plan = parse_plan(
      "methods = feddaf, target_only\n"
      "scarcity_levels = 0.05, 0.1\n"
      "noise_levels = 0.3\n"
      "seeds = 1,2,3\n"
      "rounds = 9\n");
  EXPECT_EQ(plan.methods, (std::vector<Method>{Method::kFedDaf, Method::kTargetOnly}));
  EXPECT_EQ(plan.scarcity_levels, (std::vector<double>{0.05, 0.1}));
  EXPECT_EQ(plan.mu_values, std::vector<double>{plan.base.mu});
  EXPECT_EQ(plan.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(plan.base.rounds, 9u);
}

TEST(Plan, DefaultsComeFromBaseValues) {
  const auto plan = parse_plan("sigma = 0.6\nseed = 4\n");
  EXPECT_EQ(plan.methods.size(), 4u);
  EXPECT_EQ(plan.noise_levels, std::vector<double>{0.6});
  EXPECT_EQ(plan.seeds, std::vector<std::uint64_t>{4});
}

TEST(Plan, RejectsBadInput) {
  EXPECT_THROW(parse_plan("methods = fedsgd\n"), ConfigError);
  EXPECT_THROW(parse_plan("scarcity_levels = 0\n"), ConfigError);
  EXPECT_THROW(parse_plan("noise_levels = -0.1\n"), ConfigError);
  EXPECT_THROW(parse_plan("seedz = 1\n"), ConfigError);
  EXPECT_THROW(parse_plan("methods =\n"), ConfigError);
  EXPECT_THROW(load_plan("/nonexistent/plan.txt"), IoError);
}

TEST(Plan, MuSweepCoversGrid) {
  const auto plan = mu_sweep_plan(std::nullopt);
  EXPECT_EQ(plan.methods, std::vector<Method>{Method::kFedDaf});
  EXPECT_EQ(plan.mu_values, (std::vector<double>{-10, -5, -1, 0, 1, 5, 10}));
  EXPECT_EQ(plan.noise_levels, (std::vector<double>{0.3, 0.6, 0.9}));
  EXPECT_EQ(plan.scarcity_levels, std::vector<double>{0.05});
  auto base = small_plan();
  const auto from_base = mu_sweep_plan(base);
  EXPECT_EQ(from_base.noise_levels, base.noise_levels);
  EXPECT_EQ(from_base.mu_values.size(), 7u);
}

TEST(RunPlan, OneRowPerCombinationSorted) {
  const auto plan = small_plan();
  const auto out = run_plan(plan);
  ASSERT_EQ(out.rows.size(), 4u * 2 * 2 * 1 * 2);
  ASSERT_EQ(out.runs.size(), out.rows.size());
  std::set<std::tuple<std::string, double, double, double, std::uint64_t>> keys;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const auto& r = out.rows[i];
    EXPECT_EQ(out.runs[i].row, r);
    EXPECT_FALSE(out.runs[i].error.has_value());
    EXPECT_GE(r.best_accuracy, 0.0);
    EXPECT_LE(r.best_accuracy, 1.0);
    keys.emplace(r.method, r.scarcity, r.sigma, r.mu, r.seed);
  }
  EXPECT_EQ(keys.size(), out.rows.size());
  EXPECT_EQ(out.rows.front().method, "feddaf");
  EXPECT_EQ(out.rows.back().method, "target_only");
}

TEST(RunPlan, MethodsInACellShareTheTask) {
  const auto out = run_plan(small_plan());
  std::map<std::tuple<double, double, std::uint64_t>, std::set<std::uint64_t>> prints;
  for (const auto& run : out.runs) {
    prints[{run.row.scarcity, run.row.sigma, run.row.seed}].insert(run.task_fingerprint);
  }
  for (const auto& [cell, fp] : prints) EXPECT_EQ(fp.size(), 1u);
  EXPECT_EQ(prints.size(), 8u);
}

TEST(RunPlan, ThreadsDoNotChangeResults) {
  const auto plan = small_plan();
  PlanOptions threaded;
  threaded.threads = 3;
  const auto a = run_plan(plan);
  const auto b = run_plan(plan, threaded);
  EXPECT_EQ(format_history_json(a.runs, false), format_history_json(b.runs, false));
}

TEST(RunPlan, FailedRunBecomesErrorRow) {
  auto plan = small_plan();
  plan.methods = {Method::kFedAvg};
  plan.base.eta_source = 1e200;
  plan.noise_levels = {0.3};
  plan.scarcity_levels = {0.2};
  const auto out = run_plan(plan);
  ASSERT_EQ(out.rows.size(), 2u);
  for (const auto& run : out.runs) {
    EXPECT_TRUE(run.error.has_value());
    EXPECT_TRUE(std::isnan(run.row.best_accuracy));
  }
  EXPECT_NE(format_results_csv(out.rows).find("nan"), std::string::npos);
}

TEST(ResultsCsv, EmptyIsHeaderOnly) {
  EXPECT_EQ(format_results_csv({}), std::string(kResultsHeader) + "\n");
  EXPECT_TRUE(parse_results_csv(format_results_csv({})).empty());
  EXPECT_THROW(parse_results_csv("a,b\n"), IoError);
}

TEST(ResultsCsv, RoundTripIsIdempotent) {
  std::vector<ResultRow> rows{
      {"feddaf", 0.05, 0.3, 5.0, 1, 0.912345678, 17, 1.23456789},
      {"target_only", 0.1, 0.9, -10.0, 18446744073709551615ULL, std::nan(""), 0, 0.001},
  };
  const auto text = format_results_csv(rows);
  const auto parsed = parse_results_csv(text);
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0].method, "feddaf");
  EXPECT_NEAR(parsed[0].best_accuracy, 0.912346, 1e-12);
  EXPECT_EQ(parsed[1].seed, 18446744073709551615ULL);
  EXPECT_TRUE(std::isnan(parsed[1].best_accuracy));
  EXPECT_EQ(format_results_csv(parsed), text);
}

TEST(Summary, MeanAndSampleStd) {
  std::vector<ResultRow> rows{
      {"feddaf", 0.05, 0.3, 5.0, 1, 0.5, 3, 0.0},
      {"feddaf", 0.05, 0.3, 5.0, 2, 0.7, 4, 0.0},
      {"feddaf", 0.05, 0.3, 5.0, 3, std::nan(""), 0, 0.0},
      {"fedavg", 0.05, 0.3, 5.0, 1, 0.4, 3, 0.0},
  };
  const auto cells = summarize(rows);
  ASSERT_EQ(cells.size(), 2u);
  const auto& daf = cells[0].method == "feddaf" ? cells[0] : cells[1];
  EXPECT_EQ(daf.count, 2u);
  EXPECT_DOUBLE_EQ(daf.mean, 0.6);
  EXPECT_NEAR(daf.stddev, std::sqrt(0.02), 1e-15);
  const auto& avg = cells[0].method == "fedavg" ? cells[0] : cells[1];
  EXPECT_EQ(avg.stddev, 0.0);
  const auto md = format_summary(cells);
  EXPECT_NE(md.find("feddaf"), std::string::npos);
  EXPECT_NE(md.find("60.00 ± 14.14"), std::string::npos) << md;
}

TEST(HistoryJson, CarriesRoundsAndSimilarity) {
  auto plan = small_plan();
  plan.methods = {Method::kFedDaf};
  plan.seeds = {1};
  const auto out = run_plan(plan);
  const auto j = nlohmann::json::parse(format_history_json(out.runs));
  ASSERT_EQ(j.size(), out.runs.size());
  const auto& rounds = j[0]["rounds"];
  ASSERT_EQ(rounds.size(), plan.base.rounds);
  EXPECT_TRUE(rounds[0]["alpha"].is_null());
  EXPECT_TRUE(rounds[1]["alpha"].is_number());
  EXPECT_TRUE(j[0].contains("wall_time_seconds"));
  EXPECT_FALSE(nlohmann::json::parse(format_history_json(out.runs, false))[0].contains("wall_time_seconds"));
}

TEST(EmitResults, WritesThreeFilesIdempotently) {
  const auto dir = std::filesystem::temp_directory_path() / "feddaf_emit_test";
  std::filesystem::remove_all(dir);
  auto plan = small_plan();
  plan.seeds = {1};
  const auto out = run_plan(plan);
  emit_results(out, dir);
  for (const char* f : {"results.csv", "history.json", "summary.md"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const auto csv = read_text_file(dir / "results.csv");
  EXPECT_EQ(format_results_csv(parse_results_csv(csv)), csv);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace feddaf
