#pragma once

// Reachability values on explicit MDPs and Markov chains, and extraction of
// permissive optimal policies.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "go123/mdp.hpp"

namespace go123 {

inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr std::size_t kDefaultMaxIterations = 10'000'000;
inline constexpr double kDefaultOptimalityTolerance = 1e-9;
inline constexpr std::size_t kExactSolveLimit = 2000;

struct ValueVector {
  std::vector<double> values;
  Direction direction = Direction::Max;
  double tolerance = kDefaultTolerance;
  std::size_t iterations = 0;
  bool converged = true;

  double operator[](std::size_t s) const { return values[s]; }
};

ValueVector value_iteration(const Mdp& mdp, Direction dir, double tol = kDefaultTolerance,
                            std::size_t max_iter = kDefaultMaxIterations);

// States from which the goal is reachable under some policy (max) or under
// every policy (min); all others have value 0 in that direction.
std::vector<char> can_reach_goal(const Mdp& mdp, Direction dir);

struct QValue {
  std::string label;
  std::size_t choice = 0;
  double q = 0.0;
};

std::vector<QValue> q_values(const Mdp& mdp, const ValueVector& v, std::size_t s);

// Per state, the choice indices (into the Mdp's global choice array) of all
// actions considered optimal.
struct PermissivePolicy {
  std::vector<std::vector<std::size_t>> choices;
  double tolerance = kDefaultOptimalityTolerance;

  std::vector<std::string> labels(const Mdp& mdp, std::size_t s) const;
};

PermissivePolicy extract_permissive_policy(const Mdp& mdp, const ValueVector& v, Direction dir,
                                           double tol_opt = kDefaultOptimalityTolerance);

// Max direction: keeps only optimal actions that make progress towards the
// goal, so every determinization attains the optimal value. Identity for min.
PermissivePolicy filter_end_component_optimal(const Mdp& mdp, const ValueVector& v, const PermissivePolicy& policy,
                                              Direction dir, double check_tol = 1e-6);

// Chain that plays the listed actions of each state uniformly.
Mc induce_uniform(const Mdp& mdp, const PermissivePolicy& policy);
// Chain that plays choice `pick[s]` (a global choice index) in state s.
Mc induce_choices(const Mdp& mdp, const std::vector<std::size_t>& pick);

struct McSolution {
  std::vector<double> values;
  double value = 0.0;  // at the initial state
  std::optional<std::string> exact_value;
  bool converged = true;
  std::size_t iterations = 0;
};

McSolution solve_mc(const Mc& mc, double tol = kDefaultTolerance, std::size_t max_iter = kDefaultMaxIterations,
                    std::size_t exact_limit = kExactSolveLimit);

double mc_value(const Mc& mc, double tol = kDefaultTolerance);

nlohmann::ordered_json to_json(const ValueVector& v);
nlohmann::ordered_json to_json(const Mdp& mdp, const PermissivePolicy& p);

}  // namespace go123
