#pragma once

// The end-to-end workflow: solve base instances, collect and merge optimal
// decisions, learn a tree, evaluate it on (large) instances, report.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "go123/dataset.hpp"
#include "go123/dtree.hpp"
#include "go123/evaluate.hpp"

namespace go123 {

// Where instance text comes from: a model file with parameters, a builtin
// generator ("builtin:philosophers") or a shell command with {param}
// placeholders whose stdout is model text.
class ModelSource {
 public:
  static ModelSource from_file(const std::string& path);
  static ModelSource from_text(std::string text, std::string name = "model");
  static ModelSource from_generator(const std::string& spec);

  ConcreteModel instantiate(const ParamValuation& v) const;
  const std::string& name() const { return name_; }

 private:
  enum class Kind { Text, Builtin, Command } kind_ = Kind::Text;
  std::string name_;
  std::string spec_;
  std::shared_ptr<const ModelAst> ast_;
};

struct EvalMode {
  bool smc = false;
  SmcConfig cfg;
};

struct Tolerances {
  double vi = kDefaultTolerance;
  std::size_t max_iter = kDefaultMaxIterations;
  double opt = kDefaultOptimalityTolerance;
  std::size_t state_limit = kDefaultStateLimit;
};

struct RunConfig {
  std::string model;      // path to a .gcm file
  std::string generator;  // alternative to `model`
  std::vector<ParamValuation> base_instances;
  std::vector<ParamValuation> budget_candidates;
  std::optional<double> time_budget_s;
  std::vector<ParamValuation> eval_instances;
  std::vector<EvalMode> eval_modes;  // one per eval instance
  std::vector<std::string> baselines;  // subset of optimal, uniform, random_ensemble
  Tolerances tolerances;
  std::size_t ensemble_schedulers = 1000;
  std::size_t ensemble_runs = 1000;
  std::size_t ensemble_max_run_len = 0;
  RleMode ensemble_rle_mode = RleMode::Abort;
  std::uint64_t seed = 0;
  std::string output_dir;  // empty: no artifacts
  Impurity impurity = Impurity::Gini;
  bool auto_smc = true;  // switch exact evaluation to SMC when out of resources
  bool timing = true;
};

// Relative paths are resolved against `base_dir`. Unknown keys are errors.
RunConfig parse_config(const nlohmann::json& j, const std::string& base_dir = "");
RunConfig load_config(const std::string& path);

ModelSource model_source(const RunConfig& cfg);

// Accepts "k=3" or {"k":3}.
ParamValuation parse_instance(const nlohmann::json& j);

// Failure inside a pipeline phase; keeps the category and code of the cause.
class PhaseError : public Error {
 public:
  PhaseError(const Error& cause, std::string phase, std::string instance);
  const std::string& phase() const noexcept { return phase_; }
  const std::string& instance() const noexcept { return instance_; }

 private:
  std::string phase_;
  std::string instance_;
};

struct SolvedInstance {
  ParamValuation params;
  Mdp mdp;
  ValueVector values;
  PermissivePolicy policy;
  double wall_time_s = 0.0;
};

struct Selection {
  std::vector<SolvedInstance> solved;
  std::vector<std::string> notes;  // skipped candidates
};

SolvedInstance solve_instance(const ModelSource& src, const ParamValuation& v, const Tolerances& tol);

// Solves candidates in order while the elapsed wall time is below the budget.
// Candidates over the state limit are skipped and noted.
Selection select_base_instances(const ModelSource& src, const std::vector<ParamValuation>& candidates,
                                double time_budget_s, const Tolerances& tol = {});

struct BaseSummary {
  std::string instance;
  std::size_t states = 0;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t rows = 0;
  double wall_time_s = 0.0;
};

struct Synthesis {
  DecisionTree tree;
  Dataset dataset;
  std::vector<BaseSummary> base;
  std::vector<std::string> notes;
  double synthesis_time_s = 0.0;
  std::string tree_path;
  std::string dataset_path;
};

Synthesis synthesize(const RunConfig& cfg);

struct ReportEntry {
  std::string instance;
  std::string method;  // dt, optimal, uniform, random_ensemble
  std::string mode;    // exact or smc
  double value = 0.0;
  std::size_t runs = 0;
  std::size_t fallbacks = 0;
  double wall_time_s = 0.0;
  std::size_t rle = 0;
  std::string note;
  std::optional<EnsembleStats> ensemble;
};

struct ReportError {
  std::string instance;
  std::string method;
  std::string phase;
  std::string error;  // OOR, RLE, or the error code
  std::string message;
};

struct RunReport {
  std::string model;
  std::size_t tree_size = 0;
  std::size_t tree_depth = 0;
  std::string tree_path;
  std::string dataset_path;
  std::size_t dataset_rows = 0;
  std::vector<BaseSummary> base;
  double synthesis_time_s = 0.0;
  std::vector<ReportEntry> entries;
  std::vector<ReportError> errors;
  std::vector<std::string> notes;
  bool timing = true;
};

RunReport evaluate_all(const RunConfig& cfg, const DecisionTree& tree);

// Synthesis plus evaluation; writes report.json and report.txt when an
// output directory is configured.
RunReport run(const RunConfig& cfg);

nlohmann::ordered_json to_json(const RunReport& r);
std::string format_table(const RunReport& r);

}  // namespace go123
