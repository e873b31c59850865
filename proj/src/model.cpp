#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "go123/model.hpp"

namespace go123 {

std::string LabelDiagnostic::to_json_line() const {
  nlohmann::ordered_json j;
  j["severity"] = severity;
  j["code"] = code;
  j["line"] = pos.line;
  j["column"] = pos.column;
  j["message"] = message;
  j["label"] = label;
  j["kind"] = kind == LabelKind::Synchronizing ? "synchronizing" : "collision";
  j["modules"] = modules;
  return j.dump();
}

std::vector<LabelDiagnostic> check_labels(const ModelAst& ast) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> owners;
  std::map<std::string, SourcePos> first_pos;
  for (const auto& m : ast.modules) {
    for (const auto& c : m.commands) {
      auto& mods = owners[c.label];
      if (mods.empty()) {
        order.push_back(c.label);
        first_pos[c.label] = c.pos;
      }
      if (std::find(mods.begin(), mods.end(), m.name) == mods.end()) mods.push_back(m.name);
    }
  }
  std::vector<LabelDiagnostic> out;
  for (const auto& label : order) {
    const auto& mods = owners[label];
    if (mods.size() < 2) continue;
    LabelDiagnostic d;
    d.code = "SynchronizingLabel";
    d.kind = LabelKind::Synchronizing;
    d.label = label;
    d.modules = mods;
    d.pos = first_pos[label];
    std::string list;
    for (std::size_t i = 0; i < mods.size(); ++i) list += (i ? ", " : "") + mods[i];
    d.message = "label '" + label + "' is used by modules " + list + " and synchronizes them";
    out.push_back(std::move(d));
  }
  return out;
}

ParamValuation parse_valuation(const std::string& text) {
  ParamValuation v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    item = trim(item);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("parameter assignment '" + item + "' lacks '='");
    std::string name = trim(item.substr(0, eq));
    std::string val = trim(item.substr(eq + 1));
    if (name.empty() || val.empty()) throw ConfigError("malformed parameter assignment '" + item + "'");
    if (v.count(name)) throw ConfigError("parameter '" + name + "' assigned twice");
    bool negative = !val.empty() && val[0] == '-';
    std::string body = negative ? val.substr(1) : val;
    bool integral = !body.empty() && std::all_of(body.begin(), body.end(), [](char c) { return std::isdigit(c); });
    if (integral) {
      v[name] = static_cast<std::int64_t>(std::stoll(val));
      continue;
    }
    auto slash = body.find('/');
    std::optional<Rational> q;
    if (slash != std::string::npos) {
      auto n = parse_decimal(body.substr(0, slash));
      auto d = parse_decimal(body.substr(slash + 1));
      if (n && d) q = div(*n, *d);
    } else {
      q = parse_decimal(body);
    }
    if (!q) throw ConfigError("cannot read value '" + val + "' of parameter '" + name + "'");
    if (negative) q = Rational::make(-static_cast<__int128>(q->num), q->den);
    if (q->den == 1)
      v[name] = q->num;
    else
      v[name] = *q;
  }
  return v;
}

std::string to_string(const ParamValuation& v) {
  std::string out;
  for (const auto& [name, value] : v) {
    if (!out.empty()) out += ',';
    out += name + '=';
    if (const auto* i = std::get_if<std::int64_t>(&value))
      out += std::to_string(*i);
    else
      out += std::get<Rational>(value).str();
  }
  return out;
}

int ConcreteModel::var_index(const std::string& name) const {
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {

struct Scope {
  const std::map<std::string, Value>* constants = nullptr;
  const ConcreteModel* model = nullptr;  // null while folding constants
};

// Replaces constants by literals and variables by state indices, folding
// every variable-free subtree.
ExprPtr resolve(const ExprPtr& e, const Scope& scope, bool* has_var = nullptr) {
  bool any_var = false;
  ExprPtr out;
  switch (e->kind) {
    case ExprKind::Literal:
      out = e;
      break;
    case ExprKind::Ident: {
      auto c = scope.constants->find(e->text);
      if (c != scope.constants->end()) {
        out = make_literal(c->second, {}, e->pos);
        break;
      }
      int idx = scope.model ? scope.model->var_index(e->text) : -1;
      if (idx < 0)
        throw EvaluationError("unknown identifier '" + e->text + "'" +
                                  (scope.model ? "" : " in a constant expression"),
                              e->pos);
      auto v = std::make_shared<Expr>();
      v->kind = ExprKind::Var;
      v->var = idx;
      v->var_is_bool = scope.model->vars[static_cast<std::size_t>(idx)].is_bool;
      v->text = e->text;
      v->pos = e->pos;
      out = v;
      any_var = true;
      break;
    }
    case ExprKind::Var:
      out = e;
      any_var = true;
      break;
    default: {
      auto copy = std::make_shared<Expr>(*e);
      for (auto& a : copy->args) {
        bool sub = false;
        a = resolve(a, scope, &sub);
        any_var |= sub;
      }
      out = copy;
      break;
    }
  }
  if (!any_var && out->kind != ExprKind::Literal) {
    Value v = evaluate(*out, {});
    out = make_literal(v, {}, e->pos);
  }
  if (has_var) *has_var = any_var;
  return out;
}

Value constant_value(const Expr& e, const std::map<std::string, Value>& constants) {
  Scope scope{&constants, nullptr};
  ExprPtr r = resolve(std::make_shared<Expr>(e), scope);
  return r->literal;
}

std::int64_t as_int(const Value& v, const std::string& what, SourcePos pos) {
  if (v.type != ValueType::Int) throw EvaluationError(what + " must be an integer, got " + v.str(), pos);
  return v.i;
}

}  // namespace

ConcreteModel instantiate(const ModelAst& ast, const ParamValuation& valuation) {
  for (const auto& p : ast.parameters)
    if (!valuation.count(p)) throw UnboundParameter("parameter '" + p + "' has no value");
  for (const auto& [name, _] : valuation)
    if (std::find(ast.parameters.begin(), ast.parameters.end(), name) == ast.parameters.end())
      throw UnknownParameter("'" + name + "' is not a parameter of the model");

  ConcreteModel cm;
  cm.params = valuation;
  cm.direction = ast.property.direction;

  // Constants may reference each other in any order.
  std::map<std::string, const ConstDecl*> decls;
  for (const auto& c : ast.constants) decls[c.name] = &c;
  std::set<std::string> visiting;
  std::function<void(const ConstDecl&)> define = [&](const ConstDecl& c) {
    if (cm.constants.count(c.name)) return;
    Value v;
    if (!c.value) {
      const ParamValue& pv = valuation.at(c.name);
      if (const auto* i = std::get_if<std::int64_t>(&pv))
        v = Value::integer(*i);
      else
        v = Value::rational(std::get<Rational>(pv));
    } else {
      if (!visiting.insert(c.name).second)
        throw EvaluationError("constant '" + c.name + "' is defined in terms of itself", c.pos);
      std::function<void(const Expr&)> deps = [&](const Expr& e) {
        if (e.kind == ExprKind::Ident) {
          auto it = decls.find(e.text);
          if (it != decls.end()) define(*it->second);
        }
        for (const auto& a : e.args) deps(*a);
      };
      deps(*c.value);
      v = constant_value(*c.value, cm.constants);
      visiting.erase(c.name);
    }
    switch (c.type) {
      case ConstType::Int:
        if (v.type != ValueType::Int) {
          auto q = v.as_rational();
          if (!(q && q->den == 1))
            throw EvaluationError("constant '" + c.name + "' is declared int but has value " + v.str(), c.pos);
          v = Value::integer(q->num);
        }
        break;
      case ConstType::Double:
        if (v.type == ValueType::Int) v = Value::rational(Rational(v.i));
        if (v.type == ValueType::Bool)
          throw EvaluationError("constant '" + c.name + "' is declared double but has value " + v.str(), c.pos);
        break;
      case ConstType::Bool:
        if (v.type == ValueType::Int && (v.i == 0 || v.i == 1)) v = Value::boolean(v.i == 1);
        if (v.type != ValueType::Bool)
          throw EvaluationError("constant '" + c.name + "' is declared bool but has value " + v.str(), c.pos);
        break;
    }
    cm.constants[c.name] = v;
  };
  for (const auto& c : ast.constants) define(c);

  for (const auto& m : ast.modules) {
    for (const auto& vd : m.variables) {
      ConcreteVar v;
      v.name = vd.name;
      v.module = m.name;
      v.is_bool = vd.is_bool;
      if (vd.is_bool) {
        v.lo = 0;
        v.hi = 1;
      } else {
        v.lo = as_int(constant_value(*vd.lo, cm.constants), "lower bound of '" + vd.name + "'", vd.pos);
        v.hi = as_int(constant_value(*vd.hi, cm.constants), "upper bound of '" + vd.name + "'", vd.pos);
        if (v.lo > v.hi)
          throw EmptyDomain("variable '" + vd.name + "' has empty domain [" + std::to_string(v.lo) + ".." +
                                std::to_string(v.hi) + "]",
                            vd.pos);
      }
      v.init = v.lo;
      if (vd.init) {
        Value iv = constant_value(*vd.init, cm.constants);
        if (vd.is_bool) {
          if (iv.type != ValueType::Bool)
            throw EvaluationError("initial value of '" + vd.name + "' must be boolean", vd.pos);
          v.init = iv.b ? 1 : 0;
        } else {
          v.init = as_int(iv, "initial value of '" + vd.name + "'", vd.pos);
        }
      }
      if (v.init < v.lo || v.init > v.hi)
        throw EmptyDomain("initial value of '" + vd.name + "' lies outside its domain", vd.pos);
      cm.vars.push_back(v);
    }
  }

  std::map<std::string, std::set<std::string>> owners;
  std::vector<std::string> label_order;
  for (const auto& m : ast.modules)
    for (const auto& c : m.commands) {
      if (owners[c.label].empty()) label_order.push_back(c.label);
      owners[c.label].insert(m.name);
    }
  for (const auto& l : label_order)
    if (owners[l].size() > 1) cm.sync_labels.push_back(l);

  Scope scope{&cm.constants, &cm};
  for (const auto& m : ast.modules) {
    ConcreteModule mod;
    mod.name = m.name;
    for (const auto& c : m.commands) {
      ConcreteCommand cc;
      cc.label = c.label;
      cc.pos = c.pos;
      cc.synchronizing = owners[c.label].size() > 1;
      cc.guard = resolve(c.guard, scope);
      bool guard_false = cc.guard->kind == ExprKind::Literal && cc.guard->literal.type == ValueType::Bool &&
                         !cc.guard->literal.b;
      bool all_constant = true;
      double total = 0.0;
      for (const auto& u : c.updates) {
        ConcreteUpdate cu;
        cu.prob = u.prob ? resolve(u.prob, scope) : make_literal(Value::integer(1), "1", c.pos);
        if (cu.prob->kind == ExprKind::Literal) {
          const Value& p = cu.prob->literal;
          if (!p.is_numeric() || p.as_double() < 0.0 || p.as_double() > 1.0)
            throw ProbabilityOutOfRange("probability " + p.str() + " of command [" + c.label + "] is not in [0,1]",
                                        c.pos);
          total += p.as_double();
        } else {
          all_constant = false;
        }
        std::set<int> targets;
        for (const auto& a : u.assignments) {
          int idx = cm.var_index(a.var);
          if (idx < 0) throw EvaluationError("assignment to unknown variable '" + a.var + "'", c.pos);
          if (cm.vars[static_cast<std::size_t>(idx)].module != m.name)
            throw EvaluationError("command [" + c.label + "] in module '" + m.name +
                                      "' assigns variable '" + a.var + "' of another module",
                                  c.pos);
          if (!targets.insert(idx).second)
            throw EvaluationError("variable '" + a.var + "' assigned twice in one update", c.pos);
          cu.assignments.emplace_back(idx, resolve(a.value, scope));
        }
        cc.updates.push_back(std::move(cu));
      }
      if (all_constant && !guard_false && std::abs(total - 1.0) > 1e-9)
        throw ProbabilityOutOfRange("probabilities of command [" + c.label + "] sum to " + std::to_string(total),
                                    c.pos);
      mod.commands.push_back(std::move(cc));
    }
    cm.modules.push_back(std::move(mod));
  }
  cm.goal = resolve(ast.goal_label().expr, scope);
  return cm;
}

}  // namespace go123
