#include "go123/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "go123/generators.hpp"

namespace go123 {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path + "'");
  os << text;
  if (!os) throw IoError("write to '" + path + "' failed");
}

std::string param_text(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  Rational q = std::get<Rational>(v);
  std::ostringstream os;
  os << std::setprecision(17) << q.to_double();
  return os.str();
}

std::string run_command(const std::string& cmd) {
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw IoError("cannot run generator '" + cmd + "'");
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  if (status != 0) throw IoError("generator '" + cmd + "' failed with status " + std::to_string(status));
  return out;
}

// Generated text declares at most some of the valuation's names as constants.
ConcreteModel instantiate_generated(const std::string& text, const ParamValuation& v) {
  ModelAst ast = parse_model(text);
  ParamValuation own;
  for (const auto& p : ast.parameters) {
    auto it = v.find(p);
    if (it != v.end()) own.emplace(p, it->second);
  }
  ConcreteModel cm = go123::instantiate(ast, own);
  cm.params = v;
  return cm;
}

}  // namespace

ModelSource ModelSource::from_file(const std::string& path) {
  ModelSource s = from_text(read_file(path), fs::path(path).filename().string());
  return s;
}

ModelSource ModelSource::from_text(std::string text, std::string name) {
  ModelSource s;
  s.kind_ = Kind::Text;
  s.name_ = std::move(name);
  s.ast_ = std::make_shared<const ModelAst>(parse_model(text));
  return s;
}

ModelSource ModelSource::from_generator(const std::string& spec) {
  ModelSource s;
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) {
    s.kind_ = Kind::Builtin;
    s.spec_ = spec.substr(prefix.size());
    builtin_model(s.spec_, {{"N", std::int64_t{2}}});  // rejects unknown names early
  } else {
    if (spec.empty()) throw ConfigError("empty generator command");
    s.kind_ = Kind::Command;
    s.spec_ = spec;
  }
  s.name_ = spec;
  return s;
}

ConcreteModel ModelSource::instantiate(const ParamValuation& v) const {
  switch (kind_) {
    case Kind::Text:
      return go123::instantiate(*ast_, v);
    case Kind::Builtin:
      return instantiate_generated(builtin_model(spec_, v), v);
    case Kind::Command: {
      std::string cmd = spec_;
      for (const auto& [name, value] : v) {
        const std::string key = "{" + name + "}";
        for (auto pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos))
          cmd.replace(pos, key.size(), param_text(value));
      }
      return instantiate_generated(run_command(cmd), v);
    }
  }
  throw ConfigError("invalid model source");
}

// ------------------------------------------------------------------ config

ParamValuation parse_instance(const nlohmann::json& j) {
  if (j.is_string()) return parse_valuation(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("an instance must be a string like \"k=3\" or an object like {\"k\":3}");
  std::string text;
  for (const auto& [name, value] : j.items()) {
    if (!text.empty()) text += ',';
    if (value.is_number())
      text += name + '=' + value.dump();
    else if (value.is_string())
      text += name + '=' + value.get<std::string>();
    else
      throw ConfigError("parameter '" + name + "' must be a number");
  }
  return parse_valuation(text);
}

namespace {

void check_keys(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
  return j.get<double>();
}

std::size_t count(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
    throw ConfigError("'" + key + "' must be a non-negative integer");
  return j.get<std::size_t>();
}

std::vector<ParamValuation> instances(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("'" + key + "' must be a list of instances");
  std::vector<ParamValuation> out;
  for (const auto& x : j) out.push_back(parse_instance(x));
  return out;
}

EvalMode parse_mode(const nlohmann::json& j, std::uint64_t seed) {
  EvalMode m;
  m.cfg.seed = seed;
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "exact") return m;
    if (s == "smc") {
      m.smc = true;
      return m;
    }
    throw ConfigError("eval_mode must be \"exact\", \"smc\" or {\"smc\":{...}}, not '" + s + "'");
  }
  check_keys(j, "eval_mode", {"smc"});
  if (!j.contains("smc")) throw ConfigError("eval_mode object needs an 'smc' entry");
  const auto& s = j["smc"];
  check_keys(s, "eval_mode.smc", {"confidence", "error", "seed", "max_run_len", "rle_mode"});
  m.smc = true;
  if (s.contains("confidence")) m.cfg.confidence = number(s["confidence"], "confidence");
  if (s.contains("error")) m.cfg.error = number(s["error"], "error");
  if (s.contains("seed")) m.cfg.seed = count(s["seed"], "seed");
  if (s.contains("max_run_len")) m.cfg.max_run_len = count(s["max_run_len"], "max_run_len");
  if (s.contains("rle_mode")) {
    if (!s["rle_mode"].is_string()) throw ConfigError("'rle_mode' must be a string");
    m.cfg.rle_mode = parse_rle_mode(s["rle_mode"].get<std::string>());
  }
  sample_count(m.cfg);  // validates confidence and error
  return m;
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j, const std::string& base_dir) {
  check_keys(j, "config",
             {"model", "generator", "base_instances", "budget", "eval_instances", "eval_mode", "baselines",
              "tolerances", "ensemble", "seed", "output_dir", "impurity", "auto_smc", "timing"});
  RunConfig c;
  try {
    if (j.contains("model")) c.model = resolve(j["model"].get<std::string>(), base_dir);
    if (j.contains("generator")) c.generator = j["generator"].get<std::string>();
    if (c.model.empty() == c.generator.empty()) throw ConfigError("give exactly one of 'model' and 'generator'");
    if (j.contains("seed")) c.seed = count(j["seed"], "seed");
    if (j.contains("base_instances")) c.base_instances = instances(j["base_instances"], "base_instances");
    if (j.contains("budget")) {
      const auto& b = j["budget"];
      check_keys(b, "budget", {"candidates", "time_budget_s"});
      if (!b.contains("candidates") || !b.contains("time_budget_s"))
        throw ConfigError("'budget' needs 'candidates' and 'time_budget_s'");
      c.budget_candidates = instances(b["candidates"], "budget.candidates");
      c.time_budget_s = number(b["time_budget_s"], "time_budget_s");
      if (*c.time_budget_s < 0) throw ConfigError("'time_budget_s' must be non-negative");
    }
    if (c.base_instances.empty() == !c.time_budget_s)
      throw ConfigError("give either a non-empty 'base_instances' list or a 'budget'");
    if (!j.contains("eval_instances")) throw ConfigError("missing 'eval_instances'");
    c.eval_instances = instances(j["eval_instances"], "eval_instances");
    if (c.eval_instances.empty()) throw ConfigError("'eval_instances' must not be empty");
    if (j.contains("eval_mode") && j["eval_mode"].is_array()) {
      if (j["eval_mode"].size() != c.eval_instances.size())
        throw ConfigError("'eval_mode' list must have one entry per eval instance");
      for (const auto& m : j["eval_mode"]) c.eval_modes.push_back(parse_mode(m, c.seed));
    } else {
      EvalMode m = j.contains("eval_mode") ? parse_mode(j["eval_mode"], c.seed) : EvalMode{};
      c.eval_modes.assign(c.eval_instances.size(), m);
    }
    if (j.contains("baselines")) {
      if (!j["baselines"].is_array()) throw ConfigError("'baselines' must be a list");
      for (const auto& b : j["baselines"]) {
        std::string name = b.get<std::string>();
        if (name != "optimal" && name != "uniform" && name != "random_ensemble")
          throw ConfigError("unknown baseline '" + name + "' (expected optimal, uniform or random_ensemble)");
        if (std::find(c.baselines.begin(), c.baselines.end(), name) != c.baselines.end())
          throw ConfigError("baseline '" + name + "' listed twice");
        c.baselines.push_back(name);
      }
    }
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      check_keys(t, "tolerances", {"vi", "max_iter", "opt", "state_limit"});
      if (t.contains("vi")) c.tolerances.vi = number(t["vi"], "vi");
      if (t.contains("max_iter")) c.tolerances.max_iter = count(t["max_iter"], "max_iter");
      if (t.contains("opt")) c.tolerances.opt = number(t["opt"], "opt");
      if (t.contains("state_limit")) c.tolerances.state_limit = count(t["state_limit"], "state_limit");
      if (!(c.tolerances.vi > 0)) throw ConfigError("'tolerances.vi' must be positive");
      if (c.tolerances.opt < 0) throw ConfigError("'tolerances.opt' must be non-negative");
      if (c.tolerances.state_limit == 0) throw ConfigError("'tolerances.state_limit' must be positive");
    }
    if (j.contains("ensemble")) {
      const auto& e = j["ensemble"];
      check_keys(e, "ensemble", {"schedulers", "runs", "max_run_len", "rle_mode"});
      if (e.contains("schedulers")) c.ensemble_schedulers = count(e["schedulers"], "schedulers");
      if (e.contains("runs")) c.ensemble_runs = count(e["runs"], "runs");
      if (e.contains("max_run_len")) c.ensemble_max_run_len = count(e["max_run_len"], "max_run_len");
      if (e.contains("rle_mode")) c.ensemble_rle_mode = parse_rle_mode(e["rle_mode"].get<std::string>());
      if (!c.ensemble_schedulers || !c.ensemble_runs) throw ConfigError("ensemble sizes must be positive");
    }
    if (j.contains("output_dir")) c.output_dir = resolve(j["output_dir"].get<std::string>(), base_dir);
    if (j.contains("impurity")) {
      std::string s = j["impurity"].get<std::string>();
      if (s == "gini")
        c.impurity = Impurity::Gini;
      else if (s == "entropy")
        c.impurity = Impurity::Entropy;
      else
        throw ConfigError("impurity must be gini or entropy");
    }
    if (j.contains("auto_smc")) c.auto_smc = j["auto_smc"].get<bool>();
    if (j.contains("timing")) c.timing = j["timing"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config value of the wrong type: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, fs::path(path).parent_path().string());
}

ModelSource model_source(const RunConfig& cfg) {
  return cfg.model.empty() ? ModelSource::from_generator(cfg.generator) : ModelSource::from_file(cfg.model);
}

PhaseError::PhaseError(const Error& cause, std::string phase, std::string instance)
    : Error(cause.category(), cause.code(),
            "[" + phase + (instance.empty() ? "" : " " + instance) + "] " + cause.what()),
      phase_(std::move(phase)),
      instance_(std::move(instance)) {}

// ------------------------------------------------------------- synthesis

SolvedInstance solve_instance(const ModelSource& src, const ParamValuation& v, const Tolerances& tol) {
  auto t0 = Clock::now();
  SolvedInstance out;
  out.params = v;
  ConcreteModel cm = src.instantiate(v);
  out.mdp = explore(cm, tol.state_limit);
  out.values = value_iteration(out.mdp, cm.direction, tol.vi, tol.max_iter);
  PermissivePolicy p = extract_permissive_policy(out.mdp, out.values, cm.direction, tol.opt);
  out.policy = filter_end_component_optimal(out.mdp, out.values, p, cm.direction);
  out.wall_time_s = seconds_since(t0);
  return out;
}

Selection select_base_instances(const ModelSource& src, const std::vector<ParamValuation>& candidates,
                                double time_budget_s, const Tolerances& tol) {
  auto t0 = Clock::now();
  Selection sel;
  for (const auto& v : candidates) {
    if (seconds_since(t0) >= time_budget_s) {
      sel.notes.push_back("budget exhausted before " + to_string(v));
      break;
    }
    try {
      sel.solved.push_back(solve_instance(src, v, tol));
    } catch (const StateLimitExceeded& e) {
      sel.notes.push_back("skipped " + to_string(v) + ": " + e.what());
    } catch (const Error& e) {
      throw PhaseError(e, "solve", to_string(v));
    }
  }
  if (sel.solved.empty())
    throw BudgetTooSmall("no base instance could be solved within " + std::to_string(time_budget_s) + " s");
  return sel;
}

Synthesis synthesize(const RunConfig& cfg) {
  auto t0 = Clock::now();
  ModelSource src = model_source(cfg);
  Synthesis out;
  std::vector<SolvedInstance> solved;
  if (cfg.time_budget_s) {
    Selection sel = select_base_instances(src, cfg.budget_candidates, *cfg.time_budget_s, cfg.tolerances);
    solved = std::move(sel.solved);
    out.notes = std::move(sel.notes);
  } else {
    for (const auto& v : cfg.base_instances) {
      try {
        solved.push_back(solve_instance(src, v, cfg.tolerances));
      } catch (const Error& e) {
        throw PhaseError(e, "solve", to_string(v));
      }
    }
  }

  std::vector<Dataset> parts;
  std::string names;
  for (const auto& s : solved) {
    parts.push_back(collect(s.mdp, s.policy));
    out.base.push_back({to_string(s.params), s.mdp.num_states(), s.values[s.mdp.initial], s.values.iterations,
                        parts.back().rows.size(), s.wall_time_s});
    names += (names.empty() ? "" : ";") + to_string(s.params);
  }
  try {
    out.dataset = merge(parts);
  } catch (const Error& e) {
    throw PhaseError(e, "merge", names);
  }
  try {
    out.tree = learn(out.dataset, cfg.impurity);
  } catch (const Error& e) {
    throw PhaseError(e, "learn", names);
  }
  out.synthesis_time_s = seconds_since(t0);

  if (!cfg.output_dir.empty()) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create '" + cfg.output_dir + "': " + ec.message());
    out.tree_path = (fs::path(cfg.output_dir) / "tree.json").string();
    out.dataset_path = (fs::path(cfg.output_dir) / "dataset.csv").string();
    save_tree(out.tree, out.tree_path);
    write_file((fs::path(cfg.output_dir) / "tree.dot").string(), to_dot(out.tree));
    export_csv(out.dataset, out.dataset_path);
  }
  return out;
}

// ------------------------------------------------------------ evaluation

namespace {

ReportEntry make_entry(const std::string& inst, const std::string& method, const std::string& mode) {
  ReportEntry e;
  e.instance = inst;
  e.method = method;
  e.mode = mode;
  return e;
}

struct Evaluator {
  const RunConfig& cfg;
  const DecisionTree& tree;
  RunReport& report;

  void error(const std::string& inst, const std::string& method, const std::string& phase, const Error& e) {
    std::string code = e.code();
    if (code == "StateLimitExceeded") code = "OOR";
    if (code == "RunLengthExceeded") code = "RLE";
    report.errors.push_back({inst, method, phase, code, e.what()});
  }

  ReportEntry smc_entry(const std::string& inst, const std::string& method, const ConcreteModel& cm,
                        const PolicySpec& p, const SmcConfig& sc) {
    ReportEntry e = make_entry(inst, method, "smc");
    auto t0 = Clock::now();
    SmcResult r = smc_estimate(cm, p, sc);
    e.value = r.estimate;
    e.runs = r.runs;
    e.fallbacks = r.fallbacks;
    e.rle = r.rle;
    e.wall_time_s = seconds_since(t0);
    return e;
  }

  ReportEntry exact_entry(const std::string& inst, const std::string& method, const ConcreteModel& cm,
                          const PolicySpec& p) {
    ReportEntry e = make_entry(inst, method, "exact");
    auto t0 = Clock::now();
    InducedMc ind = induce_mc(cm, p, cfg.tolerances.state_limit);
    McSolution sol = solve_mc(ind.mc, cfg.tolerances.vi, cfg.tolerances.max_iter);
    e.value = sol.value;
    e.fallbacks = ind.fallbacks;
    if (!sol.converged) e.note = "not converged";
    e.wall_time_s = seconds_since(t0);
    return e;
  }

  // Exact evaluation of a policy, or SMC when configured or when the exact
  // chain exceeds the state limit and auto_smc is on.
  void policy_entry(const std::string& inst, const std::string& method, const ConcreteModel& cm, const PolicySpec& p,
                    const EvalMode& mode) {
    try {
      if (mode.smc) {
        report.entries.push_back(smc_entry(inst, method, cm, p, mode.cfg));
        return;
      }
      try {
        report.entries.push_back(exact_entry(inst, method, cm, p));
      } catch (const StateLimitExceeded& oor) {
        if (!cfg.auto_smc) throw;
        ReportEntry e = smc_entry(inst, method, cm, p, mode.cfg);
        e.note = std::string("exact: OOR (") + oor.what() + "); evaluated by smc";
        report.entries.push_back(std::move(e));
      }
    } catch (const Error& e) {
      error(inst, method, "evaluate", e);
    }
  }

  void optimal_entry(const std::string& inst, const ConcreteModel& cm) {
    try {
      auto t0 = Clock::now();
      Mdp mdp = explore(cm, cfg.tolerances.state_limit);
      ValueVector v = value_iteration(mdp, cm.direction, cfg.tolerances.vi, cfg.tolerances.max_iter);
      ReportEntry e = make_entry(inst, "optimal", "exact");
      e.value = v[mdp.initial];
      if (!v.converged) e.note = "not converged";
      e.wall_time_s = seconds_since(t0);
      report.entries.push_back(std::move(e));
    } catch (const Error& e) {
      error(inst, "optimal", "evaluate", e);
    }
  }

  void ensemble_entry(const std::string& inst, const ConcreteModel& cm) {
    try {
      auto t0 = Clock::now();
      EnsembleStats st = random_scheduler_study(cm, cfg.ensemble_schedulers, cfg.ensemble_runs, cfg.seed,
                                                cfg.ensemble_max_run_len, cfg.ensemble_rle_mode);
      ReportEntry e = make_entry(inst, "random_ensemble", "smc");
      e.value = st.mean;
      e.runs = st.n_schedulers * st.runs_each;
      e.rle = st.rle;
      e.wall_time_s = seconds_since(t0);
      st.values.clear();
      e.ensemble = std::move(st);
      report.entries.push_back(std::move(e));
    } catch (const Error& e) {
      error(inst, "random_ensemble", "evaluate", e);
    }
  }

  void instance(const ModelSource& src, const ParamValuation& v, const EvalMode& mode) {
    const std::string inst = to_string(v);
    std::vector<std::string> methods{"dt"};
    methods.insert(methods.end(), cfg.baselines.begin(), cfg.baselines.end());
    ConcreteModel cm;
    try {
      cm = src.instantiate(v);
    } catch (const Error& e) {
      for (const auto& m : methods) error(inst, m, "instantiate", e);
      return;
    }
    for (const auto& m : methods) {
      if (m == "dt")
        policy_entry(inst, m, cm, PolicySpec::of_tree(tree), mode);
      else if (m == "uniform")
        policy_entry(inst, m, cm, PolicySpec::uniform(), mode);
      else if (m == "optimal")
        optimal_entry(inst, cm);
      else
        ensemble_entry(inst, cm);
    }
  }
};

}  // namespace

RunReport evaluate_all(const RunConfig& cfg, const DecisionTree& tree) {
  RunReport report;
  report.timing = cfg.timing;
  report.tree_size = tree_size(tree);
  report.tree_depth = tree_depth(tree);
  ModelSource src = model_source(cfg);
  report.model = src.name();
  Evaluator ev{cfg, tree, report};
  for (std::size_t i = 0; i < cfg.eval_instances.size(); ++i) ev.instance(src, cfg.eval_instances[i], cfg.eval_modes[i]);
  return report;
}

RunReport run(const RunConfig& cfg) {
  Synthesis syn = synthesize(cfg);
  RunReport report = evaluate_all(cfg, syn.tree);
  report.tree_path = syn.tree_path;
  report.dataset_path = syn.dataset_path;
  report.dataset_rows = syn.dataset.rows.size();
  report.base = syn.base;
  report.synthesis_time_s = syn.synthesis_time_s;
  report.notes = syn.notes;
  if (!cfg.output_dir.empty()) {
    write_file((fs::path(cfg.output_dir) / "report.json").string(), to_json(report).dump(2) + "\n");
    write_file((fs::path(cfg.output_dir) / "report.txt").string(), format_table(report));
  }
  return report;
}

// --------------------------------------------------------------- output

nlohmann::ordered_json to_json(const RunReport& r) {
  using oj = nlohmann::ordered_json;
  oj j;
  j["model"] = r.model;
  j["tree"] = oj{{"size", r.tree_size}, {"depth", r.tree_depth}, {"path", r.tree_path}};
  j["dataset"] = oj{{"rows", r.dataset_rows}, {"path", r.dataset_path}};
  oj base = oj::array();
  for (const auto& b : r.base) {
    oj x{{"instance", b.instance}, {"states", b.states}, {"value", b.value}, {"iterations", b.iterations},
         {"rows", b.rows}};
    if (r.timing) x["wall_time_s"] = b.wall_time_s;
    base.push_back(std::move(x));
  }
  j["base_instances"] = std::move(base);
  if (r.timing) j["synthesis_time_s"] = r.synthesis_time_s;
  oj entries = oj::array();
  for (const auto& e : r.entries) {
    oj x{{"instance", e.instance}, {"method", e.method}, {"mode", e.mode}, {"value", e.value},
         {"runs", e.runs},         {"fallbacks", e.fallbacks}};
    if (r.timing) x["wall_time_s"] = e.wall_time_s;
    x["rle"] = e.rle;
    if (!e.note.empty()) x["note"] = e.note;
    if (e.ensemble) {
      const auto& s = *e.ensemble;
      x["ensemble"] = oj{{"mean", s.mean},           {"variance", s.variance},         {"min", s.min},
                         {"max", s.max},             {"coeff_var", s.coeff_var},       {"n_schedulers", s.n_schedulers},
                         {"runs_each", s.runs_each}};
    }
    entries.push_back(std::move(x));
  }
  j["entries"] = std::move(entries);
  oj errors = oj::array();
  for (const auto& e : r.errors)
    errors.push_back(oj{{"instance", e.instance},
                        {"method", e.method},
                        {"phase", e.phase},
                        {"error", e.error},
                        {"message", e.message}});
  j["errors"] = std::move(errors);
  j["notes"] = r.notes;
  return j;
}

namespace {

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

std::string format_table(const RunReport& r) {
  // Columns follow the results tables: optimum, learned tree, baselines.
  const std::vector<std::pair<std::string, std::string>> methods{
      {"optimal", "optimal"}, {"dt", "1-2-3-go"}, {"uniform", "uniform"}, {"random_ensemble", "random"}};
  std::vector<std::string> used;
  for (const auto& [m, _] : methods) {
    bool any = std::any_of(r.entries.begin(), r.entries.end(), [&](const ReportEntry& e) { return e.method == m; }) ||
               std::any_of(r.errors.begin(), r.errors.end(), [&](const ReportError& e) { return e.method == m; });
    if (any || m == "dt") used.push_back(m);
  }
  std::vector<std::string> instances;
  auto note_instance = [&](const std::string& i) {
    if (std::find(instances.begin(), instances.end(), i) == instances.end()) instances.push_back(i);
  };
  for (const auto& e : r.entries) note_instance(e.instance);
  for (const auto& e : r.errors) note_instance(e.instance);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"instance"};
  for (const auto& m : used)
    for (const auto& [id, title] : methods)
      if (id == m) header.push_back(title);
  header.push_back("fallbacks");
  if (r.timing) header.push_back("dt_time_s");
  rows.push_back(header);
  bool any_smc = false;
  for (const auto& inst : instances) {
    std::vector<std::string> row{inst};
    std::string fallbacks = "-";
    std::string time = "-";
    for (const auto& m : used) {
      std::string cell = "-";
      for (const auto& e : r.entries)
        if (e.instance == inst && e.method == m) {
          cell = format_value(e.value);
          if (e.mode == "smc") {
            cell += "*";
            any_smc = true;
          }
          if (m == "dt") {
            fallbacks = std::to_string(e.fallbacks);
            time = format_value(e.wall_time_s);
          }
        }
      for (const auto& e : r.errors)
        if (e.instance == inst && e.method == m) cell = e.error;
      row.push_back(cell);
    }
    row.push_back(fallbacks);
    if (r.timing) row.push_back(time);
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::ostringstream os;
  os << "model: " << r.model << '\n';
  os << "tree: " << r.tree_size << " nodes, depth " << r.tree_depth << '\n';
  os << "base instances:";
  for (const auto& b : r.base) os << ' ' << b.instance;
  os << '\n';
  if (r.timing) os << "synthesis time (s): " << format_value(r.synthesis_time_s) << '\n';
  os << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      const std::string& cell = rows[i][c];
      std::string pad(width[c] - cell.size(), ' ');
      if (c == 0)
        line += cell + pad;
      else
        line += "  " + pad + cell;
    }
    os << line << '\n';
    if (i == 0) os << std::string(line.size(), '-') << '\n';
  }
  if (any_smc) os << "\n* estimated by statistical model checking\n";
  for (const auto& e : r.errors) os << "error: " << e.instance << ' ' << e.method << " [" << e.phase << "] " << e.error << '\n';
  return os.str();
}

}  // namespace go123
