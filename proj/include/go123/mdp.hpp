#pragma once

// Explicit MDPs built by forward exploration of an instantiated model.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "go123/model.hpp"

namespace go123 {

inline constexpr const char* kSelfLoop = "self_loop";
inline constexpr std::size_t kDefaultStateLimit = 5'000'000;

struct SchemaVar {
  std::string name;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  bool is_bool = false;
  std::int64_t init = 0;
  bool operator==(const SchemaVar&) const = default;
};

using StateSchema = std::vector<SchemaVar>;
using State = std::vector<std::int64_t>;

struct StateHash {
  std::size_t operator()(const State& s) const noexcept {
    std::uint64_t h = 0x9E3779B97F4A7C15ull;
    for (auto v : s) {
      h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

StateSchema schema_of(const ConcreteModel& model);

struct Branch {
  State target;
  double prob = 0.0;
  Rational exact_prob;
  bool exact = true;
};

struct GeneratedChoice {
  std::uint32_t label = 0;  // index into TransitionSystem::labels()
  std::vector<Branch> branches;
};

enum class StateKind { Normal, Goal, Deadlock };

// On-the-fly successor generator shared by exploration, policy induction
// and simulation.
class TransitionSystem {
 public:
  explicit TransitionSystem(const ConcreteModel& model);

  const ConcreteModel& model() const { return *model_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::uint32_t self_loop_label() const { return self_loop_; }

  State initial_state() const;
  bool is_goal(std::span<const std::int64_t> s) const;

  // Fills `out` with the enabled choices in declaration order. Goal and
  // deadlock states get a single self-loop.
  StateKind expand(std::span<const std::int64_t> s, std::vector<GeneratedChoice>& out) const;

 private:
  struct SyncGroup {
    std::uint32_t label;
    std::vector<std::size_t> modules;
    std::vector<std::vector<const ConcreteCommand*>> per_module;
  };
  // Local command or synchronizing group, in first-declaration order.
  struct Slot {
    const ConcreteCommand* local = nullptr;
    int sync = -1;
  };

  void apply(const ConcreteCommand& cmd, std::span<const std::int64_t> s, std::vector<Branch>& out) const;

  const ConcreteModel* model_;
  std::vector<std::string> labels_;
  std::uint32_t self_loop_ = 0;
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> local_label_;
  std::vector<SyncGroup> groups_;
};

// Sparse explicit MDP. Choices of state s are [choice_begin[s], choice_begin[s+1]);
// branches of choice c are [branch_begin[c], branch_begin[c+1]).
struct Mdp {
  StateSchema schema;
  std::size_t width = 0;
  std::vector<std::int64_t> valuations;  // num_states * width
  std::uint32_t initial = 0;
  std::vector<char> goal;
  std::vector<std::string> labels;
  std::vector<std::size_t> choice_begin{0};
  std::vector<std::uint32_t> choice_label;
  std::vector<std::size_t> branch_begin{0};
  std::vector<std::uint32_t> targets;
  std::vector<double> probs;
  std::vector<Rational> exact_probs;  // meaningful only when `exact`
  bool exact = true;
  ParamValuation provenance;

  std::size_t num_states() const { return choice_begin.size() - 1; }
  std::size_t num_choices() const { return choice_label.size(); }
  std::size_t num_transitions() const { return targets.size(); }
  std::span<const std::int64_t> state(std::size_t s) const {
    return {valuations.data() + s * width, width};
  }
  bool is_goal(std::size_t s) const { return goal[s] != 0; }
  const std::string& label_name(std::size_t choice) const { return labels[choice_label[choice]]; }

  // Builder helpers; states must be added in index order.
  void add_choice(std::uint32_t label);
  void add_branch(std::uint32_t target, double p, Rational q, bool q_exact);
  void seal();  // closes the last state
  std::uint32_t label_id(const std::string& name);
};

// Exactly one choice per state.
struct Mc {
  Mdp chain;
  explicit Mc(Mdp m);
  Mc() = default;
  std::size_t num_states() const { return chain.num_states(); }
};

Mdp explore(const ConcreteModel& model, std::size_t limit = kDefaultStateLimit);

std::vector<std::string> enabled_labels(const Mdp& mdp, std::size_t s);

void write_explicit(const Mdp& mdp, std::ostream& os);
Mdp read_explicit(std::istream& is);

}  // namespace go123
