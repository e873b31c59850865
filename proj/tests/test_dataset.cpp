#include <gtest/gtest.h>

#include <deque>
#include <filesystem>
#include <set>

#include "go123/dataset.hpp"
#include "go123/generators.hpp"
#include "support.hpp"

using namespace go123;
using namespace go123::testing;

namespace {

Dataset solved_rows(const ConcreteModel& cm) {
  Mdp mdp = explore(cm);
  ValueVector v = value_iteration(mdp, cm.direction);
  PermissivePolicy p = filter_end_component_optimal(mdp, v, extract_permissive_policy(mdp, v, cm.direction),
                                                    cm.direction);
  return collect(mdp, p);
}

std::multiset<std::pair<std::vector<std::int64_t>, std::string>> as_set(const Dataset& d) {
  std::multiset<std::pair<std::vector<std::int64_t>, std::string>> out;
  for (const auto& r : d.rows) out.insert({r.values, r.label});
  return out;
}

Dataset small(std::vector<std::string> names, std::vector<Row> rows) {
  Dataset d;
  for (auto& n : names) d.columns.push_back({n, false, 0});
  d.rows = std::move(rows);
  return d;
}

}  // namespace

TEST(Collect, RunningExampleBaseInstance) {
  Dataset d = solved_rows(running_example(1));
  EXPECT_EQ(d.column_names(), (std::vector<std::string>{"m", "x"}));
  using Rows = std::multiset<std::pair<std::vector<std::int64_t>, std::string>>;
  EXPECT_EQ(as_set(d), (Rows{{{0, 0}, "a"}, {{1, 0}, "a"}, {{1, 1}, "b"}}));
}

TEST(Collect, SecondInstanceAddsStage) {
  Dataset d = solved_rows(running_example(2));
  using Rows = std::multiset<std::pair<std::vector<std::int64_t>, std::string>>;
  EXPECT_EQ(as_set(d), (Rows{{{0, 0}, "a"}, {{1, 0}, "a"}, {{1, 1}, "b"}, {{2, 0}, "a"}, {{2, 1}, "b"}}));
}

TEST(Collect, InitialGoalGivesEmptyDataset) {
  ConcreteModel cm = instantiate(parse_model(R"(
mdp
module m
  x : [0..1] init 0;
  [a] x=0 -> (x'=1);
endmodule
label "goal" = x=0;
property Pmax reach "goal";
)"),
                                 {});
  Dataset d = solved_rows(cm);
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(d.columns.size(), 1u);
}

TEST(Collect, TiedActionsGiveOneRowEach) {
  Dataset d = solved_rows(instantiate(parse_model(R"(
mdp
module m
  x : [0..1] init 0;
  [a] x=0 -> (x'=1);
  [b] x=0 -> (x'=1);
endmodule
label "goal" = x=1;
property Pmax reach "goal";
)"),
                                      {}));
  ASSERT_EQ(d.rows.size(), 2u);
  EXPECT_EQ(d.rows[0].label, "a");
  EXPECT_EQ(d.rows[1].label, "b");
  EXPECT_EQ(d.rows[0].values, d.rows[1].values);
}

TEST(Collect, MatchesIndependentReachabilityOracle) {
  // Rows are exactly the reachable non-goal non-deadlock states crossed with
  // the permitted labels, recomputed here from the policy by hand.
  for (const auto& cm : {running_example(4), instantiate(parse_model(philosophers_model(3)), {})}) {
    Mdp mdp = explore(cm);
    ValueVector v = value_iteration(mdp, cm.direction);
    PermissivePolicy p = filter_end_component_optimal(mdp, v, extract_permissive_policy(mdp, v, cm.direction),
                                                      cm.direction);
    std::vector<char> seen(mdp.num_states(), 0);
    std::deque<std::size_t> q{mdp.initial};
    seen[mdp.initial] = 1;
    std::multiset<std::pair<std::vector<std::int64_t>, std::string>> expected;
    while (!q.empty()) {
      auto s = q.front();
      q.pop_front();
      auto labels = p.labels(mdp, s);
      if (!mdp.is_goal(s) && labels != std::vector<std::string>{kSelfLoop}) {
        auto st = mdp.state(s);
        for (const auto& l : labels) expected.insert({{st.begin(), st.end()}, l});
      }
      for (auto c : p.choices[s])
        for (std::size_t b = mdp.branch_begin[c]; b < mdp.branch_begin[c + 1]; ++b)
          if (!seen[mdp.targets[b]]) {
            seen[mdp.targets[b]] = 1;
            q.push_back(mdp.targets[b]);
          }
    }
    EXPECT_EQ(as_set(collect(mdp, p)), expected);
  }
}

TEST(Merge, WithItselfDoublesRows) {
  Dataset d = solved_rows(running_example(2));
  Dataset m = merge({d, d});
  EXPECT_EQ(m.rows.size(), 2 * d.rows.size());
  EXPECT_EQ(m.column_names(), d.column_names());
  EXPECT_EQ(m.provenance.size(), 2u);
}

TEST(Merge, BaseInstancesConcatenate) {
  Dataset m = merge({solved_rows(running_example(1)), solved_rows(running_example(2))});
  EXPECT_EQ(m.rows.size(), 8u);
  EXPECT_EQ(merge({}).rows.size(), 0u);
}

TEST(Merge, MissingColumnsAreImputed) {
  Dataset a = small({"x", "y"}, {{{1, 2}, "a"}});
  Dataset b = small({"x", "z"}, {{{3, 4}, "b"}});
  b.columns[1].init = 9;
  a.columns[1].init = 7;
  Dataset m = merge({a, b});
  EXPECT_EQ(m.column_names(), (std::vector<std::string>{"x", "y", "z"}));
  ASSERT_EQ(m.rows.size(), 2u);
  EXPECT_EQ(m.rows[0].values, (std::vector<std::int64_t>{1, 2, 9}));
  EXPECT_EQ(m.rows[1].values, (std::vector<std::int64_t>{3, 7, 4}));
}

TEST(Merge, PhilosopherInstancesShareSchemaPrefix) {
  Dataset d3 = solved_rows(instantiate(parse_model(philosophers_model(3)), {}));
  Dataset d4 = solved_rows(instantiate(parse_model(philosophers_model(4)), {}));
  Dataset m = merge({d3, d4});
  EXPECT_EQ(m.column_names(), d4.column_names());
  EXPECT_EQ(m.rows.size(), d3.rows.size() + d4.rows.size());
}

TEST(Merge, SchemaConflicts) {
  Dataset a = small({"x"}, {});
  Dataset b = small({"x"}, {});
  b.columns[0].is_bool = true;
  EXPECT_THROW(merge({a, b}), SchemaConflict);
  Dataset c = small({"x", "y"}, {});
  Dataset d = small({"y", "x"}, {});
  EXPECT_THROW(merge({c, d}), SchemaConflict);
}

TEST(Csv, Format) {
  Dataset d = solved_rows(running_example(1));
  std::string text = to_csv(d);
  std::istringstream is(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "m,x,action");
  EXPECT_EQ(to_csv(small({"m", "x"}, {})), "m,x,action\n");
}

TEST(Csv, RoundTrip) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    Dataset d = random_functional_dataset(rng);
    Dataset back = from_csv(to_csv(d));
    EXPECT_EQ(back, d);
  }
  auto path = std::filesystem::temp_directory_path() / "go123_dataset_roundtrip.csv";
  Dataset d = solved_rows(running_example(3));
  export_csv(d, path.string());
  EXPECT_EQ(import_csv(path.string()), d);
  std::filesystem::remove(path);
}

TEST(Csv, Malformed) {
  EXPECT_THROW(from_csv(""), MalformedCsv);
  EXPECT_THROW(from_csv("m,x\n1,2\n"), MalformedCsv);
  EXPECT_THROW(from_csv("m,x,action\n1,a\n"), MalformedCsv);
  EXPECT_THROW(from_csv("m,x,action\n1,z,a\n"), MalformedCsv);
  EXPECT_THROW(from_csv("m,x,action\n1,2.5,a\n"), MalformedCsv);
  EXPECT_THROW(import_csv("/nonexistent/dir/file.csv"), IoError);
  EXPECT_NO_THROW(from_csv("m,x,action\r\n1,2,a\r\n"));
}
