#include "go123/solve.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

namespace go123 {

namespace {

std::vector<std::vector<std::uint32_t>> predecessors(const Mdp& mdp) {
  std::vector<std::vector<std::uint32_t>> pred(mdp.num_states());
  for (std::size_t s = 0; s < mdp.num_states(); ++s)
    for (std::size_t c = mdp.choice_begin[s]; c < mdp.choice_begin[s + 1]; ++c)
      for (std::size_t b = mdp.branch_begin[c]; b < mdp.branch_begin[c + 1]; ++b) {
        auto& p = pred[mdp.targets[b]];
        if (p.empty() || p.back() != s) p.push_back(static_cast<std::uint32_t>(s));
      }
  return pred;
}

}  // namespace

std::vector<char> can_reach_goal(const Mdp& mdp, Direction dir) {
  const std::size_t n = mdp.num_states();
  std::vector<char> in(n, 0);
  auto pred = predecessors(mdp);
  std::deque<std::uint32_t> queue;
  for (std::size_t s = 0; s < n; ++s)
    if (mdp.is_goal(s)) {
      in[s] = 1;
      queue.push_back(static_cast<std::uint32_t>(s));
    }
  if (dir == Direction::Max) {
    while (!queue.empty()) {
      auto t = queue.front();
      queue.pop_front();
      for (auto s : pred[t])
        if (!in[s]) {
          in[s] = 1;
          queue.push_back(s);
        }
    }
    return in;
  }
  // Min: every choice must have a successor already known to reach the goal.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (in[s]) continue;
      bool all = true;
      for (std::size_t c = mdp.choice_begin[s]; c < mdp.choice_begin[s + 1] && all; ++c) {
        bool any = false;
        for (std::size_t b = mdp.branch_begin[c]; b < mdp.branch_begin[c + 1]; ++b)
          if (in[mdp.targets[b]]) {
            any = true;
            break;
          }
        all = any;
      }
      if (all) {
        in[s] = 1;
        changed = true;
      }
    }
  }
  return in;
}

ValueVector value_iteration(const Mdp& mdp, Direction dir, double tol, std::size_t max_iter) {
  const std::size_t n = mdp.num_states();
  ValueVector out;
  out.direction = dir;
  out.tolerance = tol;
  out.values.assign(n, 0.0);
  auto reach = can_reach_goal(mdp, dir);
  std::vector<std::uint32_t> maybe;
  for (std::size_t s = 0; s < n; ++s) {
    if (mdp.is_goal(s))
      out.values[s] = 1.0;
    else if (reach[s])
      maybe.push_back(static_cast<std::uint32_t>(s));
  }
  if (maybe.empty()) return out;
  std::vector<double> next = out.values;
  out.converged = false;
  while (out.iterations < max_iter) {
    double diff = 0.0;
    for (auto s : maybe) {
      double best = dir == Direction::Max ? 0.0 : 1.0;
      for (std::size_t c = mdp.choice_begin[s]; c < mdp.choice_begin[s + 1]; ++c) {
        double q = 0.0;
        for (std::size_t b = mdp.branch_begin[c]; b < mdp.branch_begin[c + 1]; ++b)
          q += mdp.probs[b] * out.values[mdp.targets[b]];
        best = dir == Direction::Max ? std::max(best, q) : std::min(best, q);
      }
      best = std::clamp(best, 0.0, 1.0);
      diff = std::max(diff, std::abs(best - out.values[s]));
      next[s] = best;
    }
    std::swap(out.values, next);
    ++out.iterations;
    if (diff < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

std::vector<QValue> q_values(const Mdp& mdp, const ValueVector& v, std::size_t s) {
  std::vector<QValue> out;
  for (std::size_t c = mdp.choice_begin[s]; c < mdp.choice_begin[s + 1]; ++c) {
    double q = 0.0;
    for (std::size_t b = mdp.branch_begin[c]; b < mdp.branch_begin[c + 1]; ++b)
      q += mdp.probs[b] * v.values[mdp.targets[b]];
    out.push_back({mdp.label_name(c), c, q});
  }
  return out;
}

std::vector<std::string> PermissivePolicy::labels(const Mdp& mdp, std::size_t s) const {
  std::vector<std::string> out;
  for (auto c : choices[s]) out.push_back(mdp.label_name(c));
  return out;
}

PermissivePolicy extract_permissive_policy(const Mdp& mdp, const ValueVector& v, Direction dir, double tol_opt) {
  (void)dir;  // V already encodes the direction
  if (tol_opt < 0.0) throw EmptyActionSet("negative optimality tolerance");
  PermissivePolicy p;
  p.tolerance = tol_opt;
  p.choices.resize(mdp.num_states());
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    if (mdp.is_goal(s)) {
      p.choices[s].push_back(mdp.choice_begin[s]);
      continue;
    }
    for (const auto& qv : q_values(mdp, v, s))
      if (std::abs(qv.q - v.values[s]) <= tol_opt) p.choices[s].push_back(qv.choice);
    if (p.choices[s].empty())
      throw EmptyActionSet("no action of state " + std::to_string(s) + " is within tolerance of its value");
  }
  return p;
}

PermissivePolicy filter_end_component_optimal(const Mdp& mdp, const ValueVector& v, const PermissivePolicy& policy,
                                              Direction dir, double check_tol) {
  if (dir == Direction::Min) return policy;
  const std::size_t n = mdp.num_states();
  constexpr std::size_t kInf = static_cast<std::size_t>(-1);

  // Distance to the goal in the graph of permitted actions.
  std::vector<std::vector<std::uint32_t>> pred(n);
  for (std::size_t s = 0; s < n; ++s)
    for (auto c : policy.choices[s])
      for (std::size_t b = mdp.branch_begin[c]; b < mdp.branch_begin[c + 1]; ++b)
        pred[mdp.targets[b]].push_back(static_cast<std::uint32_t>(s));
  std::vector<std::size_t> dist(n, kInf);
  std::deque<std::uint32_t> queue;
  for (std::size_t s = 0; s < n; ++s)
    if (mdp.is_goal(s)) {
      dist[s] = 0;
      queue.push_back(static_cast<std::uint32_t>(s));
    }
  while (!queue.empty()) {
    auto t = queue.front();
    queue.pop_front();
    for (auto s : pred[t])
      if (dist[s] == kInf) {
        dist[s] = dist[t] + 1;
        queue.push_back(s);
      }
  }

  PermissivePolicy out;
  out.tolerance = policy.tolerance;
  out.choices.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (mdp.is_goal(s) || dist[s] == kInf) {
      out.choices[s] = policy.choices[s];
      continue;
    }
    for (auto c : policy.choices[s]) {
      bool progress = false;
      for (std::size_t b = mdp.branch_begin[c]; b < mdp.branch_begin[c + 1] && !progress; ++b)
        progress = dist[mdp.targets[b]] < dist[s];
      if (progress) out.choices[s].push_back(c);
    }
  }

  McSolution check = solve_mc(induce_uniform(mdp, out), std::min(v.tolerance, 1e-12), kDefaultMaxIterations, 0);
  for (std::size_t s = 0; s < n; ++s)
    if (std::abs(check.values[s] - v.values[s]) > check_tol)
      throw CannotRepair("repaired policy reaches the goal from state " + std::to_string(s) + " with probability " +
                         std::to_string(check.values[s]) + " instead of " + std::to_string(v.values[s]));
  return out;
}

Mc induce_uniform(const Mdp& mdp, const PermissivePolicy& policy) {
  Mdp m;
  m.schema = mdp.schema;
  m.width = mdp.width;
  m.valuations = mdp.valuations;
  m.initial = mdp.initial;
  m.goal = mdp.goal;
  m.labels = mdp.labels;
  m.provenance = mdp.provenance;
  m.exact = mdp.exact;
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    const auto& set = policy.choices[s];
    m.add_choice(set.size() == 1 ? mdp.choice_label[set[0]] : m.label_id("mixed"));
    // Accumulate per target, first-occurrence order.
    std::vector<std::uint32_t> order;
    std::map<std::uint32_t, std::pair<double, std::optional<Rational>>> acc;
    Rational share = *Rational::make(1, static_cast<__int128>(set.size()));
    for (auto c : set) {
      for (std::size_t b = mdp.branch_begin[c]; b < mdp.branch_begin[c + 1]; ++b) {
        auto t = mdp.targets[b];
        auto [it, inserted] = acc.emplace(t, std::make_pair(0.0, std::optional<Rational>(Rational(0))));
        if (inserted) order.push_back(t);
        it->second.first += mdp.probs[b] / static_cast<double>(set.size());
        if (it->second.second && mdp.exact) {
          auto part = mul(mdp.exact_probs[b], share);
          it->second.second = part ? add(*it->second.second, *part) : std::nullopt;
        } else {
          it->second.second.reset();
        }
      }
    }
    for (auto t : order) {
      const auto& [p, q] = acc[t];
      m.add_branch(t, p, q.value_or(Rational(0)), q.has_value());
    }
    m.seal();
  }
  return Mc(std::move(m));
}

Mc induce_choices(const Mdp& mdp, const std::vector<std::size_t>& pick) {
  PermissivePolicy p;
  p.choices.resize(mdp.num_states());
  for (std::size_t s = 0; s < mdp.num_states(); ++s) p.choices[s] = {pick[s]};
  return induce_uniform(mdp, p);
}

namespace {

// Exact solve of x = A x + b over `maybe` states by sparse elimination.
// Returns nullopt when fill-in grows past `max_entries`.
std::optional<std::vector<mpq_class>> exact_solve(const Mdp& g, const std::vector<char>& reach,
                                                  std::size_t max_entries) {
  const std::size_t n = g.num_states();
  std::vector<int> var(n, -1);
  std::vector<std::uint32_t> states;
  for (std::size_t s = 0; s < n; ++s)
    if (reach[s] && !g.is_goal(s)) {
      var[s] = static_cast<int>(states.size());
      states.push_back(static_cast<std::uint32_t>(s));
    }
  const std::size_t m = states.size();
  // Eliminate in reverse discovery order: deep states first.
  std::vector<std::map<int, mpq_class>> rows(m);
  std::vector<mpq_class> rhs(m);
  std::vector<std::set<int>> users(m);
  std::size_t entries = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t s = states[i];
    std::size_t c = g.choice_begin[s];
    for (std::size_t b = g.branch_begin[c]; b < g.branch_begin[c + 1]; ++b) {
      auto t = g.targets[b];
      mpq_class p(g.exact_probs[b].num, g.exact_probs[b].den);
      p.canonicalize();
      if (g.is_goal(t))
        rhs[i] += p;
      else if (var[t] >= 0) {
        rows[i][var[t]] += p;
        users[static_cast<std::size_t>(var[t])].insert(static_cast<int>(i));
        ++entries;
      }
    }
  }
  std::vector<char> done(m, 0);
  for (std::size_t k = m; k-- > 0;) {
    auto& row = rows[k];
    // x_k = a_kk x_k + rest  =>  x_k = rest / (1 - a_kk)
    auto self = row.find(static_cast<int>(k));
    if (self != row.end()) {
      mpq_class scale = 1 - self->second;
      row.erase(self);
      users[k].erase(static_cast<int>(k));
      if (scale == 0) return std::nullopt;  // cannot happen on reachable-goal states
      for (auto& [j, a] : row) a /= scale;
      rhs[k] /= scale;
    }
    done[k] = 1;
    for (int r : std::vector<int>(users[k].begin(), users[k].end())) {
      if (done[static_cast<std::size_t>(r)]) continue;
      auto& target = rows[static_cast<std::size_t>(r)];
      auto it = target.find(static_cast<int>(k));
      mpq_class f = it->second;
      target.erase(it);
      for (const auto& [j, a] : row) {
        auto [slot, inserted] = target.emplace(j, 0);
        slot->second += f * a;
        if (inserted) {
          users[static_cast<std::size_t>(j)].insert(r);
          if (++entries > max_entries) return std::nullopt;
        }
      }
      rhs[static_cast<std::size_t>(r)] += f * rhs[k];
    }
  }
  // Row k now references only variables eliminated after it (index < k).
  std::vector<mpq_class> x(m);
  for (std::size_t k = 0; k < m; ++k) {
    mpq_class val = rhs[k];
    for (const auto& [j, a] : rows[k]) val += a * x[static_cast<std::size_t>(j)];
    x[k] = val;
  }
  std::vector<mpq_class> out(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (g.is_goal(s))
      out[s] = 1;
    else if (var[s] >= 0)
      out[s] = x[static_cast<std::size_t>(var[s])];
  }
  return out;
}

}  // namespace

McSolution solve_mc(const Mc& mc, double tol, std::size_t max_iter, std::size_t exact_limit) {
  const Mdp& g = mc.chain;
  const std::size_t n = g.num_states();
  McSolution out;
  auto reach = can_reach_goal(g, Direction::Max);
  if (g.exact && n <= exact_limit) {
    if (auto x = exact_solve(g, reach, 4'000'000)) {
      out.values.resize(n);
      for (std::size_t s = 0; s < n; ++s) out.values[s] = (*x)[s].get_d();
      out.value = out.values[g.initial];
      mpq_class v = (*x)[g.initial];
      out.exact_value = v.get_str();
      return out;
    }
  }
  out.values.assign(n, 0.0);
  std::vector<std::uint32_t> maybe;
  for (std::size_t s = 0; s < n; ++s) {
    if (g.is_goal(s))
      out.values[s] = 1.0;
    else if (reach[s])
      maybe.push_back(static_cast<std::uint32_t>(s));
  }
  out.converged = maybe.empty();
  // Gauss-Seidel sweeps, monotone from below.
  while (!out.converged && out.iterations < max_iter) {
    double diff = 0.0;
    for (auto s : maybe) {
      std::size_t c = g.choice_begin[s];
      double x = 0.0;
      for (std::size_t b = g.branch_begin[c]; b < g.branch_begin[c + 1]; ++b)
        x += g.probs[b] * out.values[g.targets[b]];
      x = std::clamp(x, 0.0, 1.0);
      diff = std::max(diff, std::abs(x - out.values[s]));
      out.values[s] = x;
    }
    ++out.iterations;
    if (diff < tol) out.converged = true;
  }
  out.value = out.values[g.initial];
  return out;
}

double mc_value(const Mc& mc, double tol) { return solve_mc(mc, tol).value; }

nlohmann::ordered_json to_json(const ValueVector& v) {
  nlohmann::ordered_json j;
  j["direction"] = to_string(v.direction);
  j["tolerance"] = v.tolerance;
  j["iterations"] = v.iterations;
  j["converged"] = v.converged;
  j["values"] = v.values;
  return j;
}

nlohmann::ordered_json to_json(const Mdp& mdp, const PermissivePolicy& p) {
  nlohmann::ordered_json j;
  j["tolerance"] = p.tolerance;
  auto actions = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < p.choices.size(); ++s) actions.push_back(p.labels(mdp, s));
  j["actions"] = actions;
  return j;
}

}  // namespace go123
