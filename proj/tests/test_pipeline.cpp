#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "go123/pipeline.hpp"
#include "report_fixture.hpp"
#include "support.hpp"

using namespace go123;
using namespace go123::testing;
namespace fs = std::filesystem;

namespace {

nlohmann::json base_config() {
  return nlohmann::json::parse(R"({
    "model": ")" + models_dir() + R"(/running_example.gcm",
    "base_instances": ["k=1"],
    "eval_instances": ["k=5", "k=10"],
    "eval_mode": "exact",
    "baselines": ["optimal", "uniform"],
    "seed": 1,
    "timing": false
  })");
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("go123_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(GO123_CLI) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesRunningExample) {
  RunConfig c = parse_config(base_config());
  ASSERT_EQ(c.base_instances.size(), 1u);
  EXPECT_EQ(to_string(c.base_instances[0]), "k=1");
  EXPECT_EQ(c.eval_modes.size(), 2u);
  EXPECT_FALSE(c.eval_modes[0].smc);
  EXPECT_EQ(c.baselines, (std::vector<std::string>{"optimal", "uniform"}));
  EXPECT_FALSE(c.timing);
  EXPECT_TRUE(c.auto_smc);
}

TEST(Config, ObjectInstancesAndModeList) {
  auto j = base_config();
  j["eval_instances"] = nlohmann::json::parse(R"([{"k": 5}, "k=10"])");
  j["eval_mode"] = nlohmann::json::parse(R"(["exact", {"smc": {"confidence": 0.95, "error": 0.05, "seed": 4}}])");
  RunConfig c = parse_config(j);
  EXPECT_EQ(to_string(c.eval_instances[0]), "k=5");
  EXPECT_TRUE(c.eval_modes[1].smc);
  EXPECT_EQ(c.eval_modes[1].cfg.seed, 4u);
  EXPECT_EQ(sample_count(c.eval_modes[1].cfg), 738u);
}

TEST(Config, Errors) {
  auto expect_config_error = [](nlohmann::json j) { EXPECT_THROW(parse_config(j), ConfigError) << j.dump(); };
  auto j = base_config();
  j["colour"] = "blue";
  expect_config_error(j);
  j = base_config();
  j["generator"] = "builtin:philosophers";
  expect_config_error(j);
  j = base_config();
  j.erase("base_instances");
  expect_config_error(j);
  j = base_config();
  j["budget"] = {{"candidates", {"k=1"}}, {"time_budget_s", 1}};
  expect_config_error(j);
  j = base_config();
  j["eval_mode"] = {"exact"};
  expect_config_error(j);
  j = base_config();
  j["eval_mode"] = {{"smc", {{"confidence", 1.5}}}};
  expect_config_error(j);
  j = base_config();
  j["baselines"] = {"best"};
  expect_config_error(j);
  j = base_config();
  j["tolerances"] = {{"vi", 0}};
  expect_config_error(j);
  j = base_config();
  j["seed"] = "one";
  expect_config_error(j);
  j = base_config();
  j["eval_instances"] = {"k"};
  expect_config_error(j);
  EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}

TEST(Config, RelativePathsFollowConfigFile) {
  fs::path dir = scratch("relpaths");
  auto j = base_config();
  j["model"] = "../m.gcm";
  j["output_dir"] = "out";
  std::ofstream(dir / "c.json") << j.dump();
  RunConfig c = load_config((dir / "c.json").string());
  EXPECT_EQ(c.model, (dir.parent_path() / "m.gcm").string());
  EXPECT_EQ(c.output_dir, (dir / "out").string());
}

TEST(Selection, SolvesCandidatesWithinBudget) {
  ModelSource src = ModelSource::from_file(models_dir() + "/running_example.gcm");
  std::vector<ParamValuation> cands{parse_valuation("k=1"), parse_valuation("k=2"), parse_valuation("k=3")};
  Selection s = select_base_instances(src, cands, 60.0);
  ASSERT_EQ(s.solved.size(), 3u);
  EXPECT_NEAR(s.solved[2].values[s.solved[2].mdp.initial], 0.25, 1e-9);
  EXPECT_THROW(select_base_instances(src, cands, 0.0), BudgetTooSmall);
  Tolerances tight;
  tight.state_limit = 6;
  Selection t = select_base_instances(src, cands, 60.0, tight);
  EXPECT_EQ(t.solved.size(), 1u);
  EXPECT_EQ(t.notes.size(), 2u);
}

TEST(Selection, ModelErrorsCarryPhase) {
  ModelSource src = ModelSource::from_file(models_dir() + "/running_example.gcm");
  try {
    select_base_instances(src, {parse_valuation("n=1")}, 60.0);
    FAIL();
  } catch (const PhaseError& e) {
    EXPECT_EQ(e.phase(), "solve");
    EXPECT_EQ(e.instance(), "n=1");
    EXPECT_EQ(e.category(), ErrorCategory::Model);
  }
}

TEST(Synthesize, RunningExampleTree) {
  Synthesis s = synthesize(parse_config(base_config()));
  EXPECT_EQ(tree_size(s.tree), 3u);
  EXPECT_EQ(s.dataset.rows.size(), 3u);
  ASSERT_EQ(s.base.size(), 1u);
  EXPECT_EQ(s.base[0].states, 5u);
  EXPECT_EQ(predict(s.tree, {{"m", 3}, {"x", 1}}), "b");
}

TEST(Synthesize, RepeatedBaseInstanceGivesSameTree) {
  auto j = base_config();
  Synthesis once = synthesize(parse_config(j));
  j["base_instances"] = {"k=1", "k=1"};
  Synthesis twice = synthesize(parse_config(j));
  EXPECT_EQ(twice.dataset.rows.size(), 6u);
  EXPECT_EQ(once.tree.nodes.size(), twice.tree.nodes.size());
  for (std::size_t i = 0; i < once.tree.nodes.size(); ++i) {
    EXPECT_EQ(once.tree.nodes[i].var, twice.tree.nodes[i].var);
    EXPECT_EQ(once.tree.nodes[i].threshold, twice.tree.nodes[i].threshold);
    EXPECT_EQ(once.tree.nodes[i].label, twice.tree.nodes[i].label);
  }
}

TEST(Synthesize, EmptyDatasetFailsInLearnPhase) {
  fs::path dir = scratch("empty");
  std::ofstream(dir / "goal.gcm") << R"(mdp
module m
  x : [0..1] init 0;
  [a] x=0 -> (x'=1);
endmodule
label "goal" = x=0;
property Pmax reach "goal";
)";
  auto j = base_config();
  j["model"] = (dir / "goal.gcm").string();
  j["base_instances"] = {""};
  j["eval_instances"] = {""};
  try {
    synthesize(parse_config(j));
    FAIL();
  } catch (const PhaseError& e) {
    EXPECT_EQ(e.phase(), "learn");
    EXPECT_EQ(e.code(), "EmptyDataset");
  }
}

TEST(Synthesize, WritesArtifacts) {
  fs::path dir = scratch("artifacts");
  auto j = base_config();
  j["output_dir"] = dir.string();
  RunReport r = run(parse_config(j));
  for (const char* f : {"tree.json", "tree.dot", "dataset.csv", "report.json", "report.txt"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(load_tree((dir / "tree.json").string()).nodes.size(), r.tree_size);
  EXPECT_EQ(read_text((dir / "report.txt").string()), format_table(r));
}

TEST(Evaluate, RunningExampleValues) {
  RunConfig c = parse_config(base_config());
  Synthesis s = synthesize(c);
  RunReport r = evaluate_all(c, s.tree);
  ASSERT_EQ(r.entries.size(), 6u);
  EXPECT_TRUE(r.errors.empty());
  for (const auto& e : r.entries) {
    double k = e.instance == "k=5" ? 5 : 10;
    if (e.method == "uniform")
      EXPECT_NEAR(e.value, std::pow(0.5, k), 1e-12);
    else
      EXPECT_NEAR(e.value, std::pow(0.5, k - 1), 1e-9) << e.method;
    EXPECT_EQ(e.mode, "exact");
    EXPECT_EQ(e.fallbacks, 0u);
  }
  EXPECT_EQ(r.entries[0].method, "dt");
  EXPECT_EQ(r.tree_size, tree_size(s.tree));
}

TEST(Evaluate, OutOfResourcesIsRecorded) {
  auto j = base_config();
  j["eval_instances"] = {"k=40"};
  j["tolerances"] = {{"state_limit", 20}};
  j["auto_smc"] = false;
  j["baselines"] = {"optimal"};
  RunConfig c = parse_config(j);
  c.tolerances.state_limit = 1000;  // base instance still solvable
  Synthesis s = synthesize(c);
  c.tolerances.state_limit = 20;
  RunReport r = evaluate_all(c, s.tree);
  EXPECT_TRUE(r.entries.empty());
  ASSERT_EQ(r.errors.size(), 2u);
  for (const auto& e : r.errors) {
    EXPECT_EQ(e.error, "OOR");
    EXPECT_EQ(e.instance, "k=40");
    EXPECT_FALSE(e.phase.empty());
  }
}

TEST(Evaluate, AutoSmcReplacesExactWhenOutOfResources) {
  auto j = base_config();
  j["eval_instances"] = {"k=3"};
  j["baselines"] = nlohmann::json::array();
  RunConfig c = parse_config(j);
  Synthesis s = synthesize(c);
  c.tolerances.state_limit = 5;
  c.eval_modes[0].cfg.confidence = 0.95;
  c.eval_modes[0].cfg.error = 0.05;
  RunReport r = evaluate_all(c, s.tree);
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_EQ(r.entries[0].mode, "smc");
  EXPECT_EQ(r.entries[0].runs, 738u);
  EXPECT_NEAR(r.entries[0].value, 0.25, 0.05);
  EXPECT_NE(r.entries[0].note.find("OOR"), std::string::npos);
}

TEST(Evaluate, RandomEnsembleRle) {
  auto j = base_config();
  j["eval_instances"] = {"k=2"};
  j["baselines"] = {"random_ensemble"};
  j["ensemble"] = {{"schedulers", 5}, {"runs", 10}, {"max_run_len", 50}};
  RunConfig c = parse_config(j);
  RunReport r = evaluate_all(c, synthesize(c).tree);
  bool rle = std::any_of(r.errors.begin(), r.errors.end(), [](const ReportError& e) { return e.error == "RLE"; });
  bool ok = std::any_of(r.entries.begin(), r.entries.end(),
                        [](const ReportEntry& e) { return e.method == "random_ensemble"; });
  EXPECT_TRUE(rle || ok);
  j["ensemble"]["rle_mode"] = "truncate_as_failure";
  c = parse_config(j);
  r = evaluate_all(c, synthesize(c).tree);
  auto it = std::find_if(r.entries.begin(), r.entries.end(),
                         [](const ReportEntry& e) { return e.method == "random_ensemble"; });
  ASSERT_NE(it, r.entries.end());
  ASSERT_TRUE(it->ensemble.has_value());
  EXPECT_EQ(it->ensemble->n_schedulers, 5u);
}

TEST(Report, DeterministicWithoutTiming) {
  auto j = base_config();
  j["baselines"] = {"optimal", "uniform", "random_ensemble"};
  j["ensemble"] = {{"schedulers", 20}, {"runs", 20}, {"max_run_len", 100}, {"rle_mode", "truncate_as_failure"}};
  RunConfig c = parse_config(j);
  std::string a = to_json(run(c)).dump(2);
  std::string b = to_json(run(c)).dump(2);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.find("wall_time_s"), std::string::npos);
}

TEST(Report, PhilosophersFromGenerator) {
  auto j = nlohmann::json::parse(R"({
    "generator": "builtin:philosophers",
    "base_instances": ["N=3"],
    "eval_instances": ["N=4"],
    "timing": false
  })");
  RunReport r = run(parse_config(j));
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_NEAR(r.entries[0].value, 1.0, 1e-6);
  EXPECT_EQ(r.model, "builtin:philosophers");
}

TEST(Report, CommandGenerator) {
  fs::path dir = scratch("cmdgen");
  fs::copy_file(models_dir() + "/running_example.gcm", dir / "re.gcm");
  auto j = nlohmann::json::parse(R"({"base_instances": ["k=1"], "eval_instances": ["k=4"], "timing": false})");
  j["generator"] = "sed 's/const int k;/const int k = {k};/' " + (dir / "re.gcm").string();
  RunReport r = run(parse_config(j));
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_NEAR(r.entries[0].value, 0.125, 1e-9);
}

TEST(Report, TableGolden) {
  EXPECT_EQ(format_table(fixture_report(true)), read_text(std::string(GO123_DATA_DIR) + "/report_table.golden"));
  EXPECT_EQ(to_json(fixture_report(false)).dump(2) + "\n",
            read_text(std::string(GO123_DATA_DIR) + "/report_notiming.golden.json"));
}

TEST(Report, PhaseErrorMessage) {
  PhaseError e(StateLimitExceeded(10, 3), "explore", "k=9");
  EXPECT_EQ(e.code(), "StateLimitExceeded");
  EXPECT_EQ(e.category(), ErrorCategory::Resource);
  EXPECT_EQ(std::string(e.what()).rfind("[explore k=9] ", 0), 0u);
}

TEST(Cli, ExitCodes) {
  const std::string re = models_dir() + "/running_example.gcm";
  EXPECT_EQ(run_cli("solve --model " + re + " --params k=3"), 0);
  EXPECT_EQ(run_cli("solve --model " + re), 3);
  EXPECT_EQ(run_cli("solve --model /nonexistent.gcm --params k=1"), 2);
  EXPECT_EQ(run_cli("solve --model " + re + " --params k=30 --state-limit 10"), 4);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("check --model " + re), 0);
  EXPECT_EQ(run_cli("gen philosophers --N 3"), 0);
  EXPECT_EQ(run_cli("gen philosophers --N 1"), 2);
}
