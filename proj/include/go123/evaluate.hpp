#pragma once

// Applying policies to model instances: induced chains for exact analysis,
// and statistical model checking by seeded simulation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "go123/dtree.hpp"
#include "go123/mdp.hpp"
#include "go123/solve.hpp"

namespace go123 {

enum class RleMode { Abort, TruncateAsFailure };

std::string to_string(RleMode m);
RleMode parse_rle_mode(const std::string& s);

inline constexpr std::size_t kDefaultMaxRunLength = 1'000'000;

struct SmcConfig {
  double confidence = 0.99;
  double error = 0.01;
  std::size_t max_run_len = 0;  // 0 selects kDefaultMaxRunLength
  std::uint64_t seed = 0;
  RleMode rle_mode = RleMode::Abort;
};

// Okamoto bound: ceil(ln(2 / (1 - c)) / (2 eps^2)).
std::size_t sample_count(double confidence, double error);
std::size_t sample_count(const SmcConfig& cfg);

// Counter-based generator (SplitMix64 finalizer over a keyed counter).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t key) : key_(key) {}
  std::uint64_t next() { return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Key of substream (seed, a, b).
std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

enum class PolicyKind { Tree, Uniform, RandomDeterministic };

// How choices are resolved. RandomDeterministic picks, per state, the
// enabled choice hash(seed, scheduler, state) mod |A(s)|: a uniform draw
// that is fixed the first time the state is seen.
struct PolicySpec {
  PolicyKind kind = PolicyKind::Uniform;
  const DecisionTree* tree = nullptr;
  std::uint64_t seed = 0;
  std::uint64_t scheduler = 0;

  static PolicySpec of_tree(const DecisionTree& t) { return {PolicyKind::Tree, &t, 0, 0}; }
  static PolicySpec uniform() { return {}; }
  static PolicySpec random_deterministic(std::uint64_t seed, std::uint64_t scheduler) {
    return {PolicyKind::RandomDeterministic, nullptr, seed, scheduler};
  }
};

struct InducedMc {
  Mc mc;
  std::size_t fallbacks = 0;  // states whose predicted action was not enabled
};

// On-the-fly construction of the chain induced by `policy`; only states
// reachable under it are built.
InducedMc induce_mc(const ConcreteModel& model, const PolicySpec& policy, std::size_t limit = kDefaultStateLimit);
InducedMc induce_mc_with_dt(const ConcreteModel& model, const DecisionTree& t, std::size_t limit = kDefaultStateLimit);

struct SmcResult {
  double estimate = 0.0;
  std::size_t runs = 0;
  std::size_t successes = 0;
  std::size_t fallbacks = 0;  // simulation steps that needed the uniform fallback
  std::size_t rle = 0;        // runs truncated at max_run_len
};

// Runs exactly `runs` simulations. Run i uses substream (cfg.seed, stream, i).
SmcResult simulate(const ConcreteModel& model, const PolicySpec& policy, std::size_t runs, const SmcConfig& cfg,
                   std::uint64_t stream = 0);

SmcResult smc_estimate(const ConcreteModel& model, const PolicySpec& policy, const SmcConfig& cfg);
SmcResult smc_estimate(const ConcreteModel& model, const DecisionTree& t, const SmcConfig& cfg);
SmcResult uniform_baseline(const ConcreteModel& model, const SmcConfig& cfg);

struct EnsembleStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance over schedulers
  double max = 0.0;
  double min = 0.0;
  double coeff_var = 0.0;  // sigma / mu, 0 when mu = 0
  std::size_t n_schedulers = 0;
  std::size_t runs_each = 0;
  std::size_t rle = 0;
  std::vector<double> values;
};

EnsembleStats ensemble_stats(const std::vector<double>& values, std::size_t runs_each);

EnsembleStats random_scheduler_study(const ConcreteModel& model, std::size_t n_schedulers = 1000,
                                     std::size_t runs_each = 1000, std::uint64_t seed = 0,
                                     std::size_t max_run_len = 0, RleMode rle_mode = RleMode::Abort);

}  // namespace go123
