// Command-line front end: synth, eval, study, solve, learn, gen, check.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "go123/generators.hpp"
#include "go123/pipeline.hpp"

using namespace go123;

namespace {

int exit_code(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Config:
      return 2;
    case ErrorCategory::Model:
      return 3;
    case ErrorCategory::Resource:
      return 4;
    case ErrorCategory::Internal:
      return 1;
  }
  return 1;
}

struct SourceOpts {
  std::string model;
  std::string generator;
  std::string params;

  void add(CLI::App* app) {
    app->add_option("--model", model, "model file (.gcm)");
    app->add_option("--generator", generator, "builtin:philosophers or a command with {param} placeholders");
    app->add_option("--params", params, "parameter valuation, e.g. k=3");
  }
  ModelSource source() const {
    if (model.empty() == generator.empty()) throw ConfigError("give exactly one of --model and --generator");
    return model.empty() ? ModelSource::from_generator(generator) : ModelSource::from_file(model);
  }
  ConcreteModel instance() const { return source().instantiate(parse_valuation(params)); }
};

struct SmcOpts {
  double confidence = 0.99;
  double error = 0.01;
  std::uint64_t seed = 0;
  std::size_t max_run_len = 0;
  std::string rle_mode = "abort";

  void add(CLI::App* app) {
    app->add_option("--confidence", confidence, "SMC confidence");
    app->add_option("--error", error, "SMC error bound");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--max-run-len", max_run_len, "simulation step limit (0: default)");
    app->add_option("--rle-mode", rle_mode, "abort or truncate_as_failure");
  }
  SmcConfig config() const {
    SmcConfig c;
    c.confidence = confidence;
    c.error = error;
    c.seed = seed;
    c.max_run_len = max_run_len;
    c.rle_mode = parse_rle_mode(rle_mode);
    return c;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy synthesis for parameterized MDPs via decision trees learned on small instances"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "solve base instances, learn a tree, evaluate it");
  std::string config_path;
  bool no_timing = false;
  bool print_json = false;
  synth->add_option("--config", config_path, "run configuration (JSON)")->required();
  synth->add_flag("--no-timing", no_timing, "omit wall-clock times for reproducible reports");
  synth->add_flag("--json", print_json, "print the JSON report instead of the table");

  auto* eval = app.add_subcommand("eval", "evaluate a decision tree on one instance");
  SourceOpts eval_src;
  SmcOpts eval_smc;
  std::string tree_path;
  std::string mode = "exact";
  std::size_t eval_limit = kDefaultStateLimit;
  eval_src.add(eval);
  eval_smc.add(eval);
  eval->add_option("--tree", tree_path, "tree JSON")->required();
  eval->add_option("--mode", mode, "exact or smc")->check(CLI::IsMember({"exact", "smc"}));
  eval->add_option("--state-limit", eval_limit, "state limit for exact evaluation");

  auto* study = app.add_subcommand("study", "random deterministic scheduler ensemble");
  SourceOpts study_src;
  SmcOpts study_smc;
  std::size_t schedulers = 1000;
  std::size_t runs = 1000;
  study_src.add(study);
  study_smc.add(study);
  study->add_option("--schedulers", schedulers, "number of schedulers");
  study->add_option("--runs", runs, "simulations per scheduler");

  auto* solve = app.add_subcommand("solve", "exact optimal value of one instance");
  SourceOpts solve_src;
  Tolerances tol;
  std::string policy_out;
  std::string explicit_out;
  solve_src.add(solve);
  solve->add_option("--tol", tol.vi, "value iteration tolerance");
  solve->add_option("--max-iter", tol.max_iter, "value iteration iteration cap");
  solve->add_option("--tol-opt", tol.opt, "optimality tolerance for permissive policies");
  solve->add_option("--state-limit", tol.state_limit, "exploration state limit");
  solve->add_option("--policy", policy_out, "write the repaired permissive policy (JSON)");
  solve->add_option("--explicit", explicit_out, "write the explicit MDP");

  auto* learn_cmd = app.add_subcommand("learn", "learn a decision tree from a dataset CSV");
  std::string csv_path;
  std::string out_path;
  std::string impurity = "gini";
  std::string dot_path;
  learn_cmd->add_option("--csv", csv_path, "dataset CSV")->required();
  learn_cmd->add_option("--out", out_path, "tree JSON output")->required();
  learn_cmd->add_option("--dot", dot_path, "Graphviz output");
  learn_cmd->add_option("--impurity", impurity, "gini or entropy")->check(CLI::IsMember({"gini", "entropy"}));

  auto* gen = app.add_subcommand("gen", "print generated model text");
  std::string family;
  std::int64_t n = 4;
  gen->add_option("family", family, "model family (philosophers)")->required();
  gen->add_option("--N", n, "number of modules");

  auto* check = app.add_subcommand("check", "label diagnostics as JSON lines");
  std::string check_model;
  check->add_option("--model", check_model, "model file (.gcm)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      RunConfig cfg = load_config(config_path);
      if (no_timing) cfg.timing = false;
      RunReport r = run(cfg);
      if (print_json)
        std::cout << to_json(r).dump(2) << '\n';
      else
        std::cout << format_table(r);
      return 0;
    }
    if (*eval) {
      DecisionTree t = load_tree(tree_path);
      ConcreteModel cm = eval_src.instance();
      nlohmann::ordered_json j;
      j["instance"] = to_string(cm.params);
      j["method"] = "dt";
      j["mode"] = mode;
      auto t0 = std::chrono::steady_clock::now();
      if (mode == "exact") {
        InducedMc ind = induce_mc_with_dt(cm, t, eval_limit);
        McSolution sol = solve_mc(ind.mc);
        j["value"] = sol.value;
        if (sol.exact_value) j["exact_value"] = *sol.exact_value;
        j["runs"] = 0;
        j["fallbacks"] = ind.fallbacks;
        j["states"] = ind.mc.num_states();
        j["wall_time_s"] = seconds_since(t0);
        j["rle"] = 0;
      } else {
        SmcResult r = smc_estimate(cm, t, eval_smc.config());
        j["value"] = r.estimate;
        j["runs"] = r.runs;
        j["fallbacks"] = r.fallbacks;
        j["wall_time_s"] = seconds_since(t0);
        j["rle"] = r.rle;
      }
      std::cout << j.dump() << '\n';
      return 0;
    }
    if (*study) {
      ConcreteModel cm = study_src.instance();
      SmcConfig c = study_smc.config();
      auto t0 = std::chrono::steady_clock::now();
      EnsembleStats st = random_scheduler_study(cm, schedulers, runs, c.seed, c.max_run_len, c.rle_mode);
      nlohmann::ordered_json j{{"instance", to_string(cm.params)},
                               {"mean", st.mean},
                               {"variance", st.variance},
                               {"min", st.min},
                               {"max", st.max},
                               {"coeff_var", st.coeff_var},
                               {"n_schedulers", st.n_schedulers},
                               {"runs_each", st.runs_each},
                               {"rle", st.rle},
                               {"wall_time_s", seconds_since(t0)}};
      std::cout << j.dump() << '\n';
      return 0;
    }
    if (*solve) {
      ModelSource src = solve_src.source();
      ParamValuation v = parse_valuation(solve_src.params);
      SolvedInstance s = solve_instance(src, v, tol);
      nlohmann::ordered_json j{{"instance", to_string(v)},
                               {"states", s.mdp.num_states()},
                               {"choices", s.mdp.num_choices()},
                               {"value", s.values[s.mdp.initial]},
                               {"iterations", s.values.iterations},
                               {"converged", s.values.converged},
                               {"wall_time_s", s.wall_time_s}};
      std::cout << j.dump() << '\n';
      if (!policy_out.empty()) {
        std::ofstream os(policy_out);
        if (!os) throw IoError("cannot write '" + policy_out + "'");
        os << to_json(s.mdp, s.policy).dump(2) << '\n';
      }
      if (!explicit_out.empty()) {
        std::ofstream os(explicit_out);
        if (!os) throw IoError("cannot write '" + explicit_out + "'");
        write_explicit(s.mdp, os);
      }
      return 0;
    }
    if (*learn_cmd) {
      DecisionTree t = learn(import_csv(csv_path), impurity == "gini" ? Impurity::Gini : Impurity::Entropy);
      save_tree(t, out_path);
      if (!dot_path.empty()) {
        std::ofstream os(dot_path);
        if (!os) throw IoError("cannot write '" + dot_path + "'");
        os << to_dot(t);
      }
      std::cout << "tree: " << tree_size(t) << " nodes, depth " << tree_depth(t) << '\n';
      return 0;
    }
    if (*gen) {
      std::cout << builtin_model(family, {{"N", n}});
      return 0;
    }
    if (*check) {
      std::ifstream is(check_model);
      if (!is) throw IoError("cannot read '" + check_model + "'");
      std::stringstream ss;
      ss << is.rdbuf();
      for (const auto& d : check_labels(parse_model(ss.str()))) std::cout << d.to_json_line() << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
