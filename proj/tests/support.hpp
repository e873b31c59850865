#pragma once

// Test helpers: bundled-model loading, random instances and brute-force
// oracles that share no code with the solvers under test.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "go123/dataset.hpp"
#include "go123/mdp.hpp"
#include "go123/model.hpp"

namespace go123::testing {

inline std::string models_dir() { return GO123_MODELS_DIR; }

inline std::string read_text(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline std::string model_text(const std::string& name) { return read_text(models_dir() + "/" + name); }

inline ConcreteModel load_instance(const std::string& name, const std::string& params) {
  return instantiate(parse_model(model_text(name)), parse_valuation(params));
}

inline ConcreteModel running_example(std::int64_t k) {
  return load_instance("running_example.gcm", "k=" + std::to_string(k));
}

// Index of the state with the given valuation, or -1.
inline long find_state(const Mdp& mdp, const State& s) {
  for (std::size_t i = 0; i < mdp.num_states(); ++i) {
    auto v = mdp.state(i);
    if (std::equal(v.begin(), v.end(), s.begin(), s.end())) return static_cast<long>(i);
  }
  return -1;
}

// Random MDP: <= max_states states, 1..2 actions per state, 1..2 successors
// per action with probabilities in eighths; goal states are absorbing.
inline Mdp random_mdp(std::mt19937_64& rng, std::size_t max_states = 8) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const auto n = static_cast<std::size_t>(uni(1, static_cast<int>(max_states)));
  Mdp m;
  m.schema = {{"s", 0, static_cast<std::int64_t>(n) - 1, false, 0}};
  m.width = 1;
  m.labels = {"a", "b", kSelfLoop};
  for (std::size_t s = 0; s < n; ++s) m.valuations.push_back(static_cast<std::int64_t>(s));
  m.goal.assign(n, 0);
  for (std::size_t s = 1; s < n; ++s) m.goal[s] = uni(0, 3) == 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (m.goal[s]) {
      m.add_choice(2);
      m.add_branch(static_cast<std::uint32_t>(s), 1.0, Rational(1), true);
      m.seal();
      continue;
    }
    int actions = uni(1, 2);
    for (int a = 0; a < actions; ++a) {
      m.add_choice(static_cast<std::uint32_t>(a));
      int succ = uni(1, 2);
      auto t1 = static_cast<std::uint32_t>(uni(0, static_cast<int>(n) - 1));
      if (succ == 1) {
        m.add_branch(t1, 1.0, Rational(1), true);
        continue;
      }
      auto t2 = static_cast<std::uint32_t>(uni(0, static_cast<int>(n) - 1));
      if (t2 == t1) t2 = static_cast<std::uint32_t>((t1 + 1) % n);
      if (t2 == t1) {
        m.add_branch(t1, 1.0, Rational(1), true);
        continue;
      }
      int eighths = uni(1, 7);
      m.add_branch(t1, eighths / 8.0, *Rational::make(eighths, 8), true);
      m.add_branch(t2, (8 - eighths) / 8.0, *Rational::make(8 - eighths, 8), true);
    }
    m.seal();
  }
  return m;
}

// Reachability value of the chain that plays choice pick[s] in s, by
// qualitative pre-analysis and dense Gaussian elimination with pivoting.
inline std::vector<double> oracle_chain_values(const Mdp& m, const std::vector<std::size_t>& pick) {
  const std::size_t n = m.num_states();
  std::vector<std::vector<std::pair<std::size_t, double>>> succ(n);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t b = m.branch_begin[pick[s]]; b < m.branch_begin[pick[s] + 1]; ++b)
      if (m.probs[b] > 0) succ[s].push_back({m.targets[b], m.probs[b]});
  std::vector<char> reach(n, 0);
  for (std::size_t s = 0; s < n; ++s) reach[s] = m.is_goal(s);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t s = 0; s < n; ++s)
      if (!reach[s])
        for (auto [t, p] : succ[s])
          if (reach[t]) {
            reach[s] = 1;
            changed = true;
            break;
          }
  }
  std::vector<std::size_t> idx(n, n), vars;
  for (std::size_t s = 0; s < n; ++s)
    if (reach[s] && !m.is_goal(s)) {
      idx[s] = vars.size();
      vars.push_back(s);
    }
  const std::size_t k = vars.size();
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    a[i][i] = 1.0;
    for (auto [t, p] : succ[vars[i]]) {
      if (m.is_goal(t))
        a[i][k] += p;
      else if (idx[t] < n)
        a[i][idx[t]] -= p;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c || a[r][c] == 0.0) continue;
      double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> v(n, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    if (m.is_goal(s)) v[s] = 1.0;
  for (std::size_t i = 0; i < k; ++i) v[vars[i]] = a[i][k] / a[i][i];
  return v;
}

// Calls f(pick) for every deterministic memoryless policy.
inline void for_each_policy(const Mdp& m, const std::function<void(const std::vector<std::size_t>&)>& f,
                            const std::vector<std::vector<std::size_t>>* allowed = nullptr) {
  const std::size_t n = m.num_states();
  std::vector<std::vector<std::size_t>> options(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (allowed) {
      options[s] = (*allowed)[s];
    } else {
      for (std::size_t c = m.choice_begin[s]; c < m.choice_begin[s + 1]; ++c) options[s].push_back(c);
    }
  }
  std::vector<std::size_t> digit(n, 0), pick(n);
  for (;;) {
    for (std::size_t s = 0; s < n; ++s) pick[s] = options[s][digit[s]];
    f(pick);
    std::size_t s = 0;
    while (s < n && ++digit[s] == options[s].size()) digit[s++] = 0;
    if (s == n) return;
  }
}

// Optimal value per state over all deterministic memoryless policies.
inline std::vector<double> brute_force_values(const Mdp& m, Direction dir) {
  std::vector<double> best(m.num_states(), dir == Direction::Max ? -1.0 : 2.0);
  for_each_policy(m, [&](const std::vector<std::size_t>& pick) {
    auto v = oracle_chain_values(m, pick);
    for (std::size_t s = 0; s < v.size(); ++s)
      best[s] = dir == Direction::Max ? std::max(best[s], v[s]) : std::min(best[s], v[s]);
  });
  return best;
}

// Random dataset whose label is a fixed function of the row vector.
inline Dataset random_functional_dataset(std::mt19937_64& rng) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Dataset d;
  const int cols = uni(1, 6);
  for (int c = 0; c < cols; ++c) d.columns.push_back({"v" + std::to_string(c), false, 0});
  const int rows = uni(1, 500);
  const int range = uni(1, 12);
  const int labels = uni(1, 5);
  const std::uint64_t salt = rng();
  for (int r = 0; r < rows; ++r) {
    Row row;
    std::uint64_t h = salt;
    for (int c = 0; c < cols; ++c) {
      row.values.push_back(uni(-range, range));
      h = (h ^ static_cast<std::uint64_t>(row.values.back() + 1000)) * 0x100000001B3ull;
    }
    row.label = "act" + std::to_string((h >> 17) % static_cast<std::uint64_t>(labels));
    d.rows.push_back(std::move(row));
  }
  return d;
}

}  // namespace go123::testing
