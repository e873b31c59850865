#include "go123/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace go123 {

std::string to_string(RleMode m) { return m == RleMode::Abort ? "abort" : "truncate_as_failure"; }

RleMode parse_rle_mode(const std::string& s) {
  if (s == "abort") return RleMode::Abort;
  if (s == "truncate_as_failure") return RleMode::TruncateAsFailure;
  throw ConfigError("unknown rle_mode '" + s + "' (expected abort or truncate_as_failure)");
}

std::size_t sample_count(double confidence, double error) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("confidence must lie in (0,1)");
  if (!(error > 0.0 && error < 1.0)) throw ConfigError("error must lie in (0,1)");
  return static_cast<std::size_t>(std::ceil(std::log(2.0 / (1.0 - confidence)) / (2.0 * error * error)));
}

std::size_t sample_count(const SmcConfig& cfg) { return sample_count(cfg.confidence, cfg.error); }

std::uint64_t SplitMix64::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = SplitMix64::mix(seed + 0x9E3779B97F4A7C15ull);
  h = SplitMix64::mix(h ^ (a + 0x632BE59BD9B4E019ull));
  return SplitMix64::mix(h ^ (b + 0x85157AF5ull));
}

namespace {

constexpr std::uint64_t kSchedulerDomain = 0xD1B54A32D192ED03ull;

std::uint64_t state_key(std::span<const std::int64_t> s) {
  std::uint64_t h = 0x243F6A8885A308D3ull;
  for (auto v : s) h = SplitMix64::mix(h ^ static_cast<std::uint64_t>(v));
  return h;
}

bool is_self_loop(const GeneratedChoice& c, std::span<const std::int64_t> s) {
  return c.branches.size() == 1 && std::equal(s.begin(), s.end(), c.branches[0].target.begin());
}

// Resolves the enabled choices of a normal state according to a policy.
class Resolver {
 public:
  Resolver(const TransitionSystem& ts, const PolicySpec& p) : policy_(p) {
    if (p.kind == PolicyKind::Tree) {
      if (!p.tree) throw ConfigError("tree policy without a tree");
      std::vector<std::string> names;
      for (const auto& v : ts.model().vars) names.push_back(v.name);
      binding_ = bind_columns(*p.tree, names);
      for (std::size_t i = 0; i < ts.labels().size(); ++i) label_ids_.emplace(ts.labels()[i], i);
    }
  }

  // Index of the single choice to play, or -1 for the uniform mixture over
  // all enabled choices. `fallback` reports a tree prediction that is not enabled.
  long pick(std::span<const std::int64_t> s, const std::vector<GeneratedChoice>& choices, bool& fallback) const {
    fallback = false;
    switch (policy_.kind) {
      case PolicyKind::Uniform:
        return choices.size() == 1 ? 0 : -1;
      case PolicyKind::RandomDeterministic: {
        std::uint64_t h = substream(policy_.seed ^ kSchedulerDomain, policy_.scheduler, state_key(s));
        return static_cast<long>(h % choices.size());
      }
      case PolicyKind::Tree: {
        const std::string& want = predict(*policy_.tree, s, binding_);
        auto it = label_ids_.find(want);
        if (it != label_ids_.end())
          for (std::size_t i = 0; i < choices.size(); ++i)
            if (choices[i].label == it->second) return static_cast<long>(i);
        fallback = true;
        return choices.size() == 1 ? 0 : -1;
      }
    }
    return -1;
  }

 private:
  PolicySpec policy_;
  std::vector<int> binding_;
  std::unordered_map<std::string, std::uint32_t> label_ids_;
};

}  // namespace

InducedMc induce_mc(const ConcreteModel& model, const PolicySpec& policy, std::size_t limit) {
  TransitionSystem ts(model);
  Resolver resolver(ts, policy);
  Mdp mdp;
  mdp.schema = schema_of(model);
  mdp.width = mdp.schema.size();
  mdp.labels = ts.labels();
  mdp.provenance = model.params;
  InducedMc out;

  std::unordered_map<State, std::uint32_t, StateHash> index;
  std::deque<std::uint32_t> frontier;
  auto intern = [&](const State& s) -> std::uint32_t {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    if (index.size() >= limit) throw StateLimitExceeded(limit, frontier.size());
    auto id = static_cast<std::uint32_t>(index.size());
    index.emplace(s, id);
    mdp.valuations.insert(mdp.valuations.end(), s.begin(), s.end());
    frontier.push_back(id);
    return id;
  };
  intern(ts.initial_state());
  PermissivePolicy keep;
  std::vector<GeneratedChoice> choices;
  State cur(mdp.width);
  while (!frontier.empty()) {
    std::uint32_t s = frontier.front();
    frontier.pop_front();
    std::copy_n(mdp.valuations.begin() + static_cast<std::ptrdiff_t>(s * mdp.width), mdp.width, cur.begin());
    StateKind kind = ts.expand(cur, choices);
    mdp.goal.push_back(kind == StateKind::Goal ? 1 : 0);
    long chosen = 0;
    if (kind == StateKind::Normal) {
      bool fallback = false;
      chosen = resolver.pick(cur, choices, fallback);
      if (fallback) ++out.fallbacks;
    }
    keep.choices.emplace_back();
    for (std::size_t i = 0; i < choices.size(); ++i) {
      if (chosen >= 0 && static_cast<long>(i) != chosen) continue;
      keep.choices.back().push_back(mdp.num_choices());
      mdp.add_choice(choices[i].label);
      for (const auto& b : choices[i].branches) mdp.add_branch(intern(b.target), b.prob, b.exact_prob, b.exact);
    }
    mdp.seal();
  }
  out.mc = induce_uniform(mdp, keep);
  return out;
}

InducedMc induce_mc_with_dt(const ConcreteModel& model, const DecisionTree& t, std::size_t limit) {
  return induce_mc(model, PolicySpec::of_tree(t), limit);
}

SmcResult simulate(const ConcreteModel& model, const PolicySpec& policy, std::size_t runs, const SmcConfig& cfg,
                   std::uint64_t stream) {
  TransitionSystem ts(model);
  Resolver resolver(ts, policy);
  const std::size_t max_len = cfg.max_run_len ? cfg.max_run_len : kDefaultMaxRunLength;
  SmcResult r;
  r.runs = runs;
  std::vector<GeneratedChoice> choices;
  const State init = ts.initial_state();
  State cur;
  for (std::size_t run = 0; run < runs; ++run) {
    SplitMix64 rng(substream(cfg.seed, stream, run));
    cur = init;
    bool resolved = false;
    for (std::size_t step = 0; step <= max_len; ++step) {
      StateKind kind = ts.expand(cur, choices);
      if (kind == StateKind::Goal) {
        ++r.successes;
        resolved = true;
        break;
      }
      if (kind == StateKind::Deadlock) {
        resolved = true;
        break;
      }
      if (step == max_len) break;
      bool fallback = false;
      long chosen = resolver.pick(cur, choices, fallback);
      if (fallback) ++r.fallbacks;
      // A state the policy can never leave is a certain failure.
      bool absorbing = chosen >= 0 ? is_self_loop(choices[static_cast<std::size_t>(chosen)], cur)
                                   : std::all_of(choices.begin(), choices.end(),
                                                 [&](const GeneratedChoice& c) { return is_self_loop(c, cur); });
      if (absorbing) {
        resolved = true;
        break;
      }
      const GeneratedChoice& c =
          chosen >= 0 ? choices[static_cast<std::size_t>(chosen)]
                      : choices[std::min(choices.size() - 1,
                                         static_cast<std::size_t>(rng.uniform() * static_cast<double>(choices.size())))];
      double u = rng.uniform();
      std::size_t b = 0;
      for (; b + 1 < c.branches.size(); ++b) {
        u -= c.branches[b].prob;
        if (u < 0.0) break;
      }
      cur = c.branches[b].target;
    }
    if (!resolved) {
      if (cfg.rle_mode == RleMode::Abort) throw RunLengthExceeded(max_len);
      ++r.rle;
    }
  }
  r.estimate = runs ? static_cast<double>(r.successes) / static_cast<double>(runs) : 0.0;
  return r;
}

SmcResult smc_estimate(const ConcreteModel& model, const PolicySpec& policy, const SmcConfig& cfg) {
  return simulate(model, policy, sample_count(cfg), cfg);
}

SmcResult smc_estimate(const ConcreteModel& model, const DecisionTree& t, const SmcConfig& cfg) {
  return smc_estimate(model, PolicySpec::of_tree(t), cfg);
}

SmcResult uniform_baseline(const ConcreteModel& model, const SmcConfig& cfg) {
  return smc_estimate(model, PolicySpec::uniform(), cfg);
}

EnsembleStats ensemble_stats(const std::vector<double>& values, std::size_t runs_each) {
  EnsembleStats st;
  st.values = values;
  st.n_schedulers = values.size();
  st.runs_each = runs_each;
  if (values.empty()) return st;
  st.min = *std::min_element(values.begin(), values.end());
  st.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  st.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - st.mean) * (v - st.mean);
  st.variance = sq / static_cast<double>(values.size());
  // Rounding can push the mean a hair outside [min, max].
  st.mean = std::clamp(st.mean, st.min, st.max);
  st.coeff_var = st.mean == 0.0 ? 0.0 : std::sqrt(st.variance) / st.mean;
  return st;
}

EnsembleStats random_scheduler_study(const ConcreteModel& model, std::size_t n_schedulers, std::size_t runs_each,
                                     std::uint64_t seed, std::size_t max_run_len, RleMode rle_mode) {
  if (n_schedulers == 0 || runs_each == 0) throw ConfigError("scheduler study needs at least one scheduler and run");
  SmcConfig cfg;
  cfg.seed = seed;
  cfg.max_run_len = max_run_len;
  cfg.rle_mode = rle_mode;
  std::vector<double> values;
  values.reserve(n_schedulers);
  std::size_t rle = 0;
  for (std::size_t i = 0; i < n_schedulers; ++i) {
    SmcResult r = simulate(model, PolicySpec::random_deterministic(seed, i), runs_each, cfg, i);
    values.push_back(r.estimate);
    rle += r.rle;
  }
  EnsembleStats st = ensemble_stats(values, runs_each);
  st.rle = rle;
  return st;
}

}  // namespace go123
