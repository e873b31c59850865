#include "go123/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace go123 {

StateSchema schema_of(const ConcreteModel& model) {
  StateSchema out;
  out.reserve(model.vars.size());
  for (const auto& v : model.vars) out.push_back({v.name, v.lo, v.hi, v.is_bool, v.init});
  return out;
}

TransitionSystem::TransitionSystem(const ConcreteModel& model) : model_(&model) {
  std::map<std::string, std::uint32_t> ids;
  auto intern = [&](const std::string& l) {
    auto [it, inserted] = ids.emplace(l, static_cast<std::uint32_t>(labels_.size()));
    if (inserted) labels_.push_back(l);
    return it->second;
  };
  std::map<std::string, int> group_of;
  for (std::size_t mi = 0; mi < model.modules.size(); ++mi) {
    for (const auto& cmd : model.modules[mi].commands) {
      std::uint32_t id = intern(cmd.label);
      if (!cmd.synchronizing) {
        Slot s;
        s.local = &cmd;
        slots_.push_back(s);
        local_label_.push_back(id);
        continue;
      }
      auto it = group_of.find(cmd.label);
      if (it == group_of.end()) {
        SyncGroup g;
        g.label = id;
        it = group_of.emplace(cmd.label, static_cast<int>(groups_.size())).first;
        groups_.push_back(std::move(g));
        Slot s;
        s.sync = it->second;
        slots_.push_back(s);
        local_label_.push_back(id);
      }
      auto& g = groups_[static_cast<std::size_t>(it->second)];
      if (g.modules.empty() || g.modules.back() != mi) {
        g.modules.push_back(mi);
        g.per_module.emplace_back();
      }
      g.per_module.back().push_back(&cmd);
    }
  }
  self_loop_ = intern(kSelfLoop);
}

State TransitionSystem::initial_state() const {
  State s;
  s.reserve(model_->vars.size());
  for (const auto& v : model_->vars) s.push_back(v.init);
  return s;
}

bool TransitionSystem::is_goal(std::span<const std::int64_t> s) const { return evaluate_bool(*model_->goal, s); }

void TransitionSystem::apply(const ConcreteCommand& cmd, std::span<const std::int64_t> s,
                             std::vector<Branch>& out) const {
  double total = 0.0;
  for (const auto& u : cmd.updates) {
    Value p = evaluate(*u.prob, s);
    if (!p.is_numeric())
      throw EvaluationError("probability of command [" + cmd.label + "] is not a number", cmd.pos);
    double pd = p.as_double();
    if (pd < 0.0 || pd > 1.0 || std::isnan(pd))
      throw ProbabilityOutOfRange("probability " + p.str() + " of command [" + cmd.label + "] is not in [0,1]",
                                  cmd.pos);
    total += pd;
    if (pd == 0.0) continue;
    Branch b;
    b.target.assign(s.begin(), s.end());
    for (const auto& [idx, expr] : u.assignments) {
      Value v = evaluate(*expr, s);
      const ConcreteVar& var = model_->vars[static_cast<std::size_t>(idx)];
      std::int64_t x;
      if (var.is_bool) {
        if (v.type != ValueType::Bool)
          throw EvaluationError("boolean variable '" + var.name + "' assigned a number", cmd.pos);
        x = v.b ? 1 : 0;
      } else {
        if (v.type != ValueType::Int)
          throw EvaluationError("integer variable '" + var.name + "' assigned " + v.str(), cmd.pos);
        x = v.i;
      }
      if (x < var.lo || x > var.hi)
        throw EvaluationError("command [" + cmd.label + "] sets '" + var.name + "' to " + std::to_string(x) +
                                  ", outside [" + std::to_string(var.lo) + ".." + std::to_string(var.hi) + "]",
                              cmd.pos);
      b.target[static_cast<std::size_t>(idx)] = x;
    }
    b.prob = pd;
    auto q = p.as_rational();
    b.exact = q.has_value();
    if (q) b.exact_prob = *q;
    out.push_back(std::move(b));
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ProbabilityOutOfRange("probabilities of command [" + cmd.label + "] sum to " + std::to_string(total),
                                cmd.pos);
}

namespace {

// Sums branches with equal targets, keeping first-occurrence order.
void merge_duplicates(std::vector<Branch>& bs) {
  if (bs.size() < 2) return;
  std::vector<Branch> out;
  out.reserve(bs.size());
  for (auto& b : bs) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Branch& o) { return o.target == b.target; });
    if (it == out.end()) {
      out.push_back(std::move(b));
      continue;
    }
    it->prob += b.prob;
    if (it->exact && b.exact) {
      auto s = add(it->exact_prob, b.exact_prob);
      if (s)
        it->exact_prob = *s;
      else
        it->exact = false;
    } else {
      it->exact = false;
    }
  }
  bs = std::move(out);
}

}  // namespace

StateKind TransitionSystem::expand(std::span<const std::int64_t> s, std::vector<GeneratedChoice>& out) const {
  out.clear();
  auto self_loop = [&] {
    GeneratedChoice c;
    c.label = self_loop_;
    Branch b;
    b.target.assign(s.begin(), s.end());
    b.prob = 1.0;
    b.exact_prob = Rational(1);
    c.branches.push_back(std::move(b));
    out.push_back(std::move(c));
  };
  if (is_goal(s)) {
    self_loop();
    return StateKind::Goal;
  }
  for (std::size_t si = 0; si < slots_.size(); ++si) {
    const Slot& slot = slots_[si];
    if (slot.local) {
      if (!evaluate_bool(*slot.local->guard, s)) continue;
      GeneratedChoice c;
      c.label = local_label_[si];
      apply(*slot.local, s, c.branches);
      merge_duplicates(c.branches);
      out.push_back(std::move(c));
      continue;
    }
    const SyncGroup& g = groups_[static_cast<std::size_t>(slot.sync)];
    // One enabled command per participating module; a module without one blocks the label.
    std::vector<std::vector<const ConcreteCommand*>> enabled;
    bool blocked = false;
    for (const auto& cmds : g.per_module) {
      std::vector<const ConcreteCommand*> on;
      for (const ConcreteCommand* c : cmds)
        if (evaluate_bool(*c->guard, s)) on.push_back(c);
      if (on.empty()) {
        blocked = true;
        break;
      }
      enabled.push_back(std::move(on));
    }
    if (blocked) continue;
    std::vector<std::size_t> pick(enabled.size(), 0);
    for (;;) {
      // Product of the picked commands: apply each module's updates in turn.
      std::vector<Branch> acc;
      Branch start;
      start.target.assign(s.begin(), s.end());
      start.prob = 1.0;
      start.exact_prob = Rational(1);
      acc.push_back(start);
      for (std::size_t m = 0; m < enabled.size(); ++m) {
        std::vector<Branch> local;
        apply(*enabled[m][pick[m]], s, local);
        std::vector<Branch> next;
        for (const auto& a : acc) {
          for (const auto& b : local) {
            Branch c = a;
            // Modules only assign their own variables, so the diff is this module's part.
            for (std::size_t v = 0; v < c.target.size(); ++v)
              if (b.target[v] != s[v]) c.target[v] = b.target[v];
            c.prob *= b.prob;
            if (c.exact && b.exact) {
              auto q = mul(c.exact_prob, b.exact_prob);
              if (q)
                c.exact_prob = *q;
              else
                c.exact = false;
            } else {
              c.exact = false;
            }
            next.push_back(std::move(c));
          }
        }
        acc = std::move(next);
      }
      GeneratedChoice c;
      c.label = g.label;
      c.branches = std::move(acc);
      merge_duplicates(c.branches);
      out.push_back(std::move(c));
      std::size_t m = 0;
      while (m < pick.size() && ++pick[m] == enabled[m].size()) pick[m++] = 0;
      if (m == pick.size()) break;
    }
  }
  if (out.empty()) {
    self_loop();
    return StateKind::Deadlock;
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      if (out[i].label == out[j].label)
        throw EvaluationError("two enabled choices share the label '" + labels_[out[i].label] +
                              "'; labels must tell choices of a state apart");
  return StateKind::Normal;
}

void Mdp::add_choice(std::uint32_t label) {
  choice_label.push_back(label);
  branch_begin.push_back(targets.size());
}

void Mdp::add_branch(std::uint32_t target, double p, Rational q, bool q_exact) {
  targets.push_back(target);
  probs.push_back(p);
  exact_probs.push_back(q);
  if (!q_exact) exact = false;
  branch_begin.back() = targets.size();
}

void Mdp::seal() { choice_begin.push_back(choice_label.size()); }

std::uint32_t Mdp::label_id(const std::string& name) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == name) return static_cast<std::uint32_t>(i);
  labels.push_back(name);
  return static_cast<std::uint32_t>(labels.size() - 1);
}

Mc::Mc(Mdp m) : chain(std::move(m)) {
  for (std::size_t s = 0; s < chain.num_states(); ++s)
    if (chain.choice_begin[s + 1] - chain.choice_begin[s] != 1)
      throw MalformedMdp("state " + std::to_string(s) + " of a Markov chain must have exactly one choice");
}


Mdp explore(const ConcreteModel& model, std::size_t limit) {
  TransitionSystem ts(model);
  Mdp mdp;
  mdp.schema = schema_of(model);
  mdp.width = mdp.schema.size();
  mdp.labels = ts.labels();
  mdp.provenance = model.params;

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
  std::vector<GeneratedChoice> choices;
  std::vector<std::int64_t> cur(mdp.width);
  while (!frontier.empty()) {
    // Expansion order equals index order, so rows are appended in sequence.
    std::uint32_t s = frontier.front();
    frontier.pop_front();
    std::copy_n(mdp.valuations.begin() + static_cast<std::ptrdiff_t>(s * mdp.width), mdp.width, cur.begin());
    StateKind kind = ts.expand(cur, choices);
    mdp.goal.push_back(kind == StateKind::Goal ? 1 : 0);
    for (const auto& c : choices) {
      mdp.add_choice(c.label);
      for (const auto& b : c.branches) {
        std::uint32_t t = intern(b.target);
        mdp.add_branch(t, b.prob, b.exact_prob, b.exact);
      }
    }
    mdp.seal();
  }
  return mdp;
}

std::vector<std::string> enabled_labels(const Mdp& mdp, std::size_t s) {
  std::vector<std::string> out;
  for (std::size_t c = mdp.choice_begin[s]; c < mdp.choice_begin[s + 1]; ++c) out.push_back(mdp.label_name(c));
  return out;
}

void write_explicit(const Mdp& mdp, std::ostream& os) {
  os << "STATES " << mdp.num_states() << '\n';
  os << "INITIAL " << mdp.initial << '\n';
  os << "GOALS";
  for (std::size_t s = 0; s < mdp.num_states(); ++s)
    if (mdp.is_goal(s)) os << ' ' << s;
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    for (std::size_t c = mdp.choice_begin[s]; c < mdp.choice_begin[s + 1]; ++c) {
      os << s << ' ' << mdp.label_name(c) << " ->";
      for (std::size_t b = mdp.branch_begin[c]; b < mdp.branch_begin[c + 1]; ++b)
        os << ' ' << mdp.targets[b] << ':' << mdp.probs[b];
      os << '\n';
    }
  }
}

Mdp read_explicit(std::istream& is) {
  Mdp mdp;
  std::string line;
  auto header = [&](const char* key) {
    if (!std::getline(is, line)) throw MalformedMdp(std::string("missing ") + key + " line");
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word != key) throw MalformedMdp(std::string("expected ") + key + ", got '" + line + "'");
    return std::string(line.begin() + static_cast<std::ptrdiff_t>(word.size()), line.end());
  };
  std::size_t n = 0;
  {
    std::istringstream ls(header("STATES"));
    if (!(ls >> n) || n == 0) throw MalformedMdp("bad state count");
  }
  {
    std::istringstream ls(header("INITIAL"));
    if (!(ls >> mdp.initial) || mdp.initial >= n) throw MalformedMdp("bad initial state");
  }
  mdp.goal.assign(n, 0);
  {
    std::istringstream ls(header("GOALS"));
    std::size_t g;
    while (ls >> g) {
      if (g >= n) throw MalformedMdp("goal index out of range");
      mdp.goal[g] = 1;
    }
  }
  std::vector<std::vector<std::pair<std::uint32_t, std::vector<std::pair<std::uint32_t, double>>>>> rows(n);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t s;
    std::string label, arrow;
    if (!(ls >> s >> label >> arrow) || arrow != "->" || s >= n) throw MalformedMdp("bad transition line '" + line + "'");
    std::vector<std::pair<std::uint32_t, double>> dist;
    double sum = 0.0;
    std::string item;
    while (ls >> item) {
      auto colon = item.find(':');
      if (colon == std::string::npos) throw MalformedMdp("bad branch '" + item + "'");
      std::size_t t = std::stoull(item.substr(0, colon));
      double p = std::stod(item.substr(colon + 1));
      if (t >= n) throw MalformedMdp("target out of range in '" + line + "'");
      if (!(p > 0.0 && p <= 1.0)) throw MalformedMdp("probability out of range in '" + line + "'");
      sum += p;
      dist.emplace_back(static_cast<std::uint32_t>(t), p);
    }
    if (std::abs(sum - 1.0) > 1e-6) throw MalformedMdp("probabilities do not sum to 1 in '" + line + "'");
    rows[s].emplace_back(mdp.label_id(label), std::move(dist));
  }
  mdp.exact = false;
  for (std::size_t s = 0; s < n; ++s) {
    if (rows[s].empty()) throw MalformedMdp("state " + std::to_string(s) + " has no choice");
    for (const auto& [label, dist] : rows[s]) {
      mdp.add_choice(label);
      for (const auto& [t, p] : dist) mdp.add_branch(t, p, Rational(0), false);
    }
    mdp.seal();
  }
  return mdp;
}

}  // namespace go123
