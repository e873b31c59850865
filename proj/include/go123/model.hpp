#pragma once

// Guarded-command modeling language: AST, parser, pretty printer, label
// analysis and instantiation of parameterized models.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "go123/errors.hpp"
#include "go123/rational.hpp"

namespace go123 {

// ---------------------------------------------------------------- values

enum class ValueType { Bool, Int, Real };

// Result of evaluating an expression. Reals carry an exact rational shadow
// while every input was rational and no overflow happened.
struct Value {
  ValueType type = ValueType::Int;
  bool b = false;
  std::int64_t i = 0;
  double d = 0.0;
  bool exact = true;
  Rational q;

  static Value boolean(bool v) {
    Value r;
    r.type = ValueType::Bool;
    r.b = v;
    return r;
  }
  static Value integer(std::int64_t v) {
    Value r;
    r.type = ValueType::Int;
    r.i = v;
    return r;
  }
  static Value real(double v) {
    Value r;
    r.type = ValueType::Real;
    r.d = v;
    r.exact = false;
    return r;
  }
  static Value rational(Rational v) {
    Value r;
    r.type = ValueType::Real;
    r.d = v.to_double();
    r.q = v;
    return r;
  }

  bool is_numeric() const { return type != ValueType::Bool; }
  double as_double() const { return type == ValueType::Int ? static_cast<double>(i) : d; }
  // Exact rational view of a numeric value, if one is known.
  std::optional<Rational> as_rational() const {
    if (type == ValueType::Int) return Rational(i);
    if (type == ValueType::Real && exact) return q;
    return std::nullopt;
  }
  std::string str() const;
};

// ----------------------------------------------------------- expressions

enum class ExprKind { Literal, Ident, Var, Unary, Binary, Ite, Call };

enum class Op {
  Not, Neg,
  Or, And, Implies, Iff,
  Eq, Neq, Lt, Le, Gt, Ge,
  Add, Sub, Mul, Div,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Literal;
  Value literal;           // Literal
  std::string text;        // Literal source text, Ident name, Var name, Call name
  int var = -1;            // Var: index into the state vector
  bool var_is_bool = false;
  Op op = Op::Add;         // Unary / Binary
  std::vector<ExprPtr> args;
  SourcePos pos;
};

ExprPtr make_literal(Value v, std::string text = {}, SourcePos pos = {});

// Evaluates a resolved expression (no remaining identifiers) over a state.
Value evaluate(const Expr& e, std::span<const std::int64_t> state);
bool evaluate_bool(const Expr& e, std::span<const std::int64_t> state);

std::string to_string(const Expr& e);
bool structurally_equal(const Expr& a, const Expr& b);

// -------------------------------------------------------------------- AST

enum class ConstType { Int, Double, Bool };
enum class Direction { Max, Min };

std::string to_string(Direction d);

struct ConstDecl {
  std::string name;
  ConstType type = ConstType::Int;
  ExprPtr value;  // null for parameters
  SourcePos pos;
};

struct VarDecl {
  std::string name;
  bool is_bool = false;
  ExprPtr lo, hi;  // null for bools
  ExprPtr init;    // null: lower bound (or false)
  SourcePos pos;
};

struct Assignment {
  std::string var;
  ExprPtr value;
};

struct Update {
  ExprPtr prob;  // null when written without a probability (implicit 1)
  std::vector<Assignment> assignments;
};

struct Command {
  std::string label;
  ExprPtr guard;
  std::vector<Update> updates;
  SourcePos pos;
};

struct ModuleDecl {
  std::string name;
  std::vector<VarDecl> variables;
  std::vector<Command> commands;
  SourcePos pos;
};

struct LabelDecl {
  std::string name;
  ExprPtr expr;
  SourcePos pos;
};

struct PropertySpec {
  Direction direction = Direction::Max;
  std::string target;
  SourcePos pos;
};

struct ModelAst {
  std::vector<ConstDecl> constants;
  std::vector<std::string> parameters;  // constants without a definition, in order
  std::vector<ModuleDecl> modules;
  std::vector<LabelDecl> labels;
  PropertySpec property;

  const LabelDecl& goal_label() const;
};

ModelAst parse_model(const std::string& text);
std::string print_model(const ModelAst& ast);
bool structurally_equal(const ModelAst& a, const ModelAst& b);

// ------------------------------------------------------------ diagnostics

enum class LabelKind { Synchronizing, Collision };

struct LabelDiagnostic {
  std::string severity = "info";
  std::string code;
  LabelKind kind = LabelKind::Synchronizing;
  std::string label;
  std::vector<std::string> modules;
  SourcePos pos;
  std::string message;

  std::string to_json_line() const;
};

// Every label used by commands of two or more modules; such labels synchronize.
std::vector<LabelDiagnostic> check_labels(const ModelAst& ast);

// ---------------------------------------------------------- instantiation

// Parameter name -> int or rational value.
using ParamValue = std::variant<std::int64_t, Rational>;
using ParamValuation = std::map<std::string, ParamValue>;

ParamValuation parse_valuation(const std::string& text);  // "k=3,x=0.01"
std::string to_string(const ParamValuation& v);           // "k=3,x=1/100"

struct ConcreteVar {
  std::string name;
  std::string module;
  bool is_bool = false;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t init = 0;
};

struct ConcreteUpdate {
  ExprPtr prob;
  std::vector<std::pair<int, ExprPtr>> assignments;  // (variable index, value)
};

struct ConcreteCommand {
  std::string label;
  bool synchronizing = false;
  ExprPtr guard;
  std::vector<ConcreteUpdate> updates;
  SourcePos pos;
};

struct ConcreteModule {
  std::string name;
  std::vector<ConcreteCommand> commands;
};

struct ConcreteModel {
  ParamValuation params;
  std::map<std::string, Value> constants;
  std::vector<ConcreteVar> vars;
  std::vector<ConcreteModule> modules;
  std::vector<std::string> sync_labels;  // first-appearance order
  ExprPtr goal;
  Direction direction = Direction::Max;

  int var_index(const std::string& name) const;
};

ConcreteModel instantiate(const ModelAst& ast, const ParamValuation& v);

}  // namespace go123
