#include <gtest/gtest.h>

#include "go123/generators.hpp"
#include "go123/mdp.hpp"
#include "support.hpp"

using namespace go123;
using go123::testing::model_text;

namespace {

const char* kTwoCommands = R"(
mdp
module m
  x : [0..1] init 0;
  [a] x=0 -> (x'=1);
  [b] x=0 -> 0.5:(x'=0) + 0.5:(x'=1);
endmodule
label "goal" = x=1;
property Pmax reach "goal";
)";

std::string with_module_body(const std::string& body) {
  return "mdp\nmodule m\n  x : [0..3] init 0;\n" + body + "endmodule\nlabel \"goal\" = x=3;\nproperty Pmax reach \"goal\";\n";
}

Value eval_const(const std::string& expr) {
  ModelAst ast = parse_model("mdp\nconst int c = " + expr + ";\n" +
                             "module m\n  x : [0..1] init 0;\n  [a] x=0 -> (x'=1);\nendmodule\n"
                             "label \"goal\" = x=1;\nproperty Pmax reach \"goal\";\n");
  ConcreteModel cm = instantiate(ast, {});
  return cm.constants.at("c");
}

}  // namespace

TEST(Parse, OneModuleTwoCommands) {
  ModelAst ast = parse_model(kTwoCommands);
  ASSERT_EQ(ast.modules.size(), 1u);
  EXPECT_EQ(ast.modules[0].commands.size(), 2u);
  EXPECT_EQ(ast.modules[0].commands[0].label, "a");
  EXPECT_EQ(ast.modules[0].commands[1].label, "b");
  EXPECT_EQ(ast.property.direction, Direction::Max);
  EXPECT_EQ(ast.goal_label().name, "goal");
}

TEST(Parse, PositionsAttached) {
  ModelAst ast = parse_model(kTwoCommands);
  EXPECT_EQ(ast.modules[0].pos.line, 3);
  EXPECT_EQ(ast.modules[0].variables[0].pos.line, 4);
  EXPECT_EQ(ast.modules[0].commands[1].pos.line, 6);
  EXPECT_EQ(ast.labels[0].pos.line, 8);
}

TEST(Parse, EmptyLabelIsRejectedWithSuggestion) {
  try {
    parse_model(with_module_body("  [] x=0 -> 1:(x'=1);\n"));
    FAIL() << "expected UnlabeledCommand";
  } catch (const UnlabeledCommand& e) {
    EXPECT_EQ(e.pos().line, 4);
    EXPECT_NE(std::string(e.what()).find("m_line_4"), std::string::npos);
  }
}

TEST(Parse, DuplicateVariableAcrossModules) {
  const char* text = R"(
mdp
module m1
  x : [0..1] init 0;
  [a] x=0 -> (x'=1);
endmodule
module m2
  x : [0..1] init 0;
  [b] x=0 -> (x'=1);
endmodule
label "goal" = x=1;
property Pmax reach "goal";
)";
  EXPECT_THROW(parse_model(text), DuplicateName);
}

TEST(Parse, DuplicateConstantsAndModules) {
  EXPECT_THROW(parse_model("mdp\nconst int k;\nconst int k;\n" + with_module_body("  [a] x=0 -> (x'=1);\n").substr(4)),
               DuplicateName);
  const char* twice = R"(
mdp
module m
  x : [0..1] init 0;
  [a] x=0 -> (x'=1);
endmodule
module m
  y : [0..1] init 0;
  [b] y=0 -> (y'=1);
endmodule
label "goal" = x=1;
property Pmax reach "goal";
)";
  EXPECT_THROW(parse_model(twice), DuplicateName);
}

TEST(Parse, SyntaxErrorCarriesPositionAndExpectation) {
  try {
    parse_model(with_module_body("  [a] x=0 -> (x'=1)\n"));
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.pos().line, 5);
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(Parse, ParametersAreUndefinedConstants) {
  ModelAst ast = parse_model(model_text("running_example.gcm"));
  ASSERT_EQ(ast.parameters.size(), 1u);
  EXPECT_EQ(ast.parameters[0], "k");
}

TEST(Parse, ReservedSelfLoopLabel) {
  EXPECT_THROW(parse_model(with_module_body("  [self_loop] x=0 -> (x'=1);\n")), DuplicateName);
}

TEST(Parse, PropertyMustNameDeclaredLabel) {
  std::string text = kTwoCommands;
  text.replace(text.find("reach \"goal\""), 12, "reach \"nope\"");
  EXPECT_THROW(parse_model(text), ModelError);
}

TEST(Parse, CommentsAndMinProperty) {
  ModelAst ast = parse_model(R"(// leading comment
mdp
module m // trailing
  b : bool init false;
  [flip] !b -> (b'=true); // set
endmodule
label "goal" = b;
property Pmin reach "goal";
)");
  EXPECT_EQ(ast.property.direction, Direction::Min);
  EXPECT_TRUE(ast.modules[0].variables[0].is_bool);
}

TEST(PrintParse, RoundTripOnBundledModels) {
  for (const std::string text : {model_text("running_example.gcm"), model_text("coin.gcm"),
                                 model_text("one_step.gcm"), philosophers_model(3), philosophers_model(5)}) {
    ModelAst a = parse_model(text);
    ModelAst b = parse_model(print_model(a));
    EXPECT_TRUE(structurally_equal(a, b));
    EXPECT_EQ(print_model(a), print_model(b));
  }
}

TEST(CheckLabels, LocalLabelsProduceNothing) {
  EXPECT_TRUE(check_labels(parse_model(philosophers_model(3))).empty());
  EXPECT_TRUE(check_labels(ModelAst{}).empty());
}

TEST(CheckLabels, SharedLabelIsSynchronizing) {
  const char* text = R"(
mdp
module m1
  x : [0..1] init 0;
  [tick] x=0 -> (x'=1);
endmodule
module m2
  y : [0..1] init 0;
  [tick] y=0 -> (y'=1);
endmodule
label "goal" = x=1 & y=1;
property Pmax reach "goal";
)";
  auto d = check_labels(parse_model(text));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].label, "tick");
  EXPECT_EQ(d[0].kind, LabelKind::Synchronizing);
  EXPECT_EQ(d[0].modules, (std::vector<std::string>{"m1", "m2"}));
  auto j = nlohmann::json::parse(d[0].to_json_line());
  EXPECT_EQ(j["label"], "tick");
  EXPECT_EQ(j["severity"], "info");
  EXPECT_TRUE(j.contains("line"));
  EXPECT_TRUE(j.contains("column"));
}

TEST(Instantiate, RunningExampleDomain) {
  ConcreteModel cm = go123::testing::running_example(1);
  ASSERT_EQ(cm.vars.size(), 2u);
  EXPECT_EQ(cm.vars[0].name, "m");
  EXPECT_EQ(cm.vars[0].lo, 0);
  EXPECT_EQ(cm.vars[0].hi, 1);
  EXPECT_EQ(cm.vars[1].hi, 2);
  EXPECT_EQ(to_string(cm.params), "k=1");
}

TEST(Instantiate, ParameterCoverage) {
  ModelAst ast = parse_model(model_text("running_example.gcm"));
  EXPECT_THROW(instantiate(ast, {}), UnboundParameter);
  EXPECT_THROW(instantiate(ast, parse_valuation("k=2,j=1")), UnknownParameter);
}

TEST(Instantiate, EmptyDomain) {
  const char* text = R"(
mdp
const int k;
module m
  x : [1..k] init 1;
  [a] x=1 -> (x'=1);
endmodule
label "goal" = x=1;
property Pmax reach "goal";
)";
  ModelAst ast = parse_model(text);
  EXPECT_THROW(instantiate(ast, parse_valuation("k=0")), EmptyDomain);
  EXPECT_NO_THROW(instantiate(ast, parse_valuation("k=1")));
}

TEST(Instantiate, ProbabilitiesMustFormADistribution) {
  EXPECT_THROW(instantiate(parse_model(with_module_body("  [a] x=0 -> 0.5:(x'=1) + 0.6:(x'=2);\n")), {}),
               ProbabilityOutOfRange);
  EXPECT_THROW(instantiate(parse_model(with_module_body("  [a] x=0 -> 1.5:(x'=1) + -0.5:(x'=2);\n")), {}),
               ProbabilityOutOfRange);
  // Integer division truncates, so thirds need a real operand.
  EXPECT_THROW(instantiate(parse_model(with_module_body("  [a] x=0 -> 1/3:(x'=1) + 2/3:(x'=2);\n")), {}),
               ProbabilityOutOfRange);
  EXPECT_NO_THROW(instantiate(parse_model(with_module_body("  [a] x=0 -> 1.0/3:(x'=1) + 2.0/3:(x'=2);\n")), {}));
}

TEST(Instantiate, ParameterInProbability) {
  const char* text = R"(
mdp
const double p;
module m
  x : [0..2] init 0;
  [a] x=0 -> p:(x'=1) + 1-p:(x'=2);
endmodule
label "goal" = x=1;
property Pmax reach "goal";
)";
  ConcreteModel cm = instantiate(parse_model(text), parse_valuation("p=0.25"));
  Mdp mdp = explore(cm);
  ASSERT_EQ(mdp.num_states(), 3u);
  EXPECT_DOUBLE_EQ(mdp.probs[0], 0.25);
  EXPECT_EQ(mdp.exact_probs[0].str(), "1/4");
}

TEST(Instantiate, AssignmentsMustBeDistinctAndOwned) {
  EXPECT_THROW(instantiate(parse_model(with_module_body("  [a] x=0 -> (x'=1) & (x'=2);\n")), {}), ModelError);
  const char* foreign = R"(
mdp
module m1
  x : [0..1] init 0;
  [a] x=0 -> (y'=1);
endmodule
module m2
  y : [0..1] init 0;
  [b] y=0 -> (y'=1);
endmodule
label "goal" = y=1;
property Pmax reach "goal";
)";
  EXPECT_THROW(instantiate(parse_model(foreign), {}), ModelError);
}

TEST(Instantiate, Deterministic) {
  ModelAst ast = parse_model(model_text("running_example.gcm"));
  ConcreteModel a = instantiate(ast, parse_valuation("k=4"));
  ConcreteModel b = instantiate(ast, parse_valuation("k=4"));
  ASSERT_EQ(a.modules[0].commands.size(), b.modules[0].commands.size());
  for (std::size_t i = 0; i < a.modules[0].commands.size(); ++i)
    EXPECT_TRUE(structurally_equal(*a.modules[0].commands[i].guard, *b.modules[0].commands[i].guard));
  Mdp ma = explore(a), mb = explore(b);
  EXPECT_EQ(ma.valuations, mb.valuations);
  EXPECT_EQ(ma.targets, mb.targets);
}

TEST(Expressions, IntegerDivisionAndModTruncateTowardZero) {
  EXPECT_EQ(eval_const("7/2").i, 3);
  EXPECT_EQ(eval_const("-7/2").i, -3);
  EXPECT_EQ(eval_const("mod(-7, 2)").i, -1);
  EXPECT_EQ(eval_const("mod(7, 3)").i, 1);
}

TEST(Expressions, FunctionsAndOperators) {
  EXPECT_EQ(eval_const("min(3, 1, 2)").i, 1);
  EXPECT_EQ(eval_const("max(3, 1, 2)").i, 3);
  EXPECT_EQ(eval_const("pow(2, 10)").i, 1024);
  EXPECT_EQ(eval_const("floor(2.5)").i, 2);
  EXPECT_EQ(eval_const("ceil(2.5)").i, 3);
  EXPECT_EQ(eval_const("true ? 4 : 5").i, 4);
  EXPECT_EQ(eval_const("(1 < 2) & (2 <= 2) ? 1 : 0").i, 1);
  EXPECT_EQ(eval_const("((1 = 2) => false) ? 1 : 0").i, 1);
  EXPECT_EQ(eval_const("((1 = 1) <=> (2 != 2)) ? 1 : 0").i, 0);
  EXPECT_EQ(eval_const("2 + 3 * 4 - 1").i, 13);
}

TEST(Expressions, DivisionByZeroIsAnError) {
  EXPECT_THROW(eval_const("1/0"), EvaluationError);
  EXPECT_THROW(eval_const("mod(1, 0)"), EvaluationError);
  ConcreteModel cm = instantiate(parse_model(with_module_body("  [a] x/(x-0) = 1 -> (x'=1);\n")), {});
  EXPECT_THROW(explore(cm), EvaluationError);
}

TEST(Valuation, ParsingAndPrinting) {
  ParamValuation v = parse_valuation("k=3, p=0.25, q=1/3");
  EXPECT_EQ(std::get<std::int64_t>(v.at("k")), 3);
  EXPECT_EQ(std::get<Rational>(v.at("p")).str(), "1/4");
  EXPECT_EQ(to_string(v), "k=3,p=1/4,q=1/3");
  EXPECT_THROW(parse_valuation("k"), ConfigError);
  EXPECT_THROW(parse_valuation("k=1,k=2"), ConfigError);
}

TEST(Invariants, UpdateProbabilitiesSumToOneOnEveryGuardedState) {
  // Exhaustive over the domain product of small instances.
  for (const std::string& text : {model_text("running_example.gcm"), philosophers_model(4)}) {
    ModelAst ast = parse_model(text);
    ParamValuation v = ast.parameters.empty() ? ParamValuation{} : parse_valuation("k=5");
    ConcreteModel cm = instantiate(ast, v);
    std::vector<std::int64_t> s;
    for (const auto& var : cm.vars) s.push_back(var.lo);
    std::size_t checked = 0;
    for (;;) {
      for (const auto& mod : cm.modules)
        for (const auto& c : mod.commands) {
          if (!evaluate_bool(*c.guard, s)) continue;
          double sum = 0.0;
          for (const auto& u : c.updates) sum += evaluate(*u.prob, s).as_double();
          EXPECT_NEAR(sum, 1.0, 1e-9);
        }
      ++checked;
      std::size_t i = 0;
      for (; i < s.size() && ++s[i] > cm.vars[i].hi; ++i) s[i] = cm.vars[i].lo;
      if (i == s.size()) break;
    }
    EXPECT_LE(checked, 100000u);
  }
}
