#include <cmath>
#include <cstdlib>
#include <sstream>

#include "go123/model.hpp"

namespace go123 {

std::optional<Rational> parse_decimal(const std::string& text) {
  // digits [. digits] [e|E [+-] digits]
  std::size_t i = 0;
  __int128 mant = 0;
  int scale = 0;
  bool any = false;
  auto push_digit = [&](char c) {
    if (mant > static_cast<__int128>(INT64_MAX)) return false;
    mant = mant * 10 + (c - '0');
    return true;
  };
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    if (!push_digit(text[i])) return std::nullopt;
    ++i;
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      if (!push_digit(text[i])) return std::nullopt;
      --scale;
      ++i;
      any = true;
    }
  }
  if (!any) return std::nullopt;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    int sign = 1;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      sign = text[i] == '-' ? -1 : 1;
      ++i;
    }
    int exp = 0;
    bool digits = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      exp = exp * 10 + (text[i] - '0');
      if (exp > 40) return std::nullopt;
      ++i;
      digits = true;
    }
    if (!digits) return std::nullopt;
    scale += sign * exp;
  }
  if (i != text.size()) return std::nullopt;
  __int128 den = 1;
  while (scale > 0) {
    mant *= 10;
    --scale;
    if (mant > static_cast<__int128>(INT64_MAX)) return std::nullopt;
  }
  while (scale < 0) {
    den *= 10;
    ++scale;
    if (den > static_cast<__int128>(INT64_MAX)) return std::nullopt;
  }
  return Rational::make(mant, den);
}

std::string Value::str() const {
  switch (type) {
    case ValueType::Bool:
      return b ? "true" : "false";
    case ValueType::Int:
      return std::to_string(i);
    case ValueType::Real: {
      if (exact) return q.str();
      std::ostringstream os;
      os.precision(17);
      os << d;
      return os.str();
    }
  }
  return {};
}

ExprPtr make_literal(Value v, std::string text, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Literal;
  if (text.empty()) {
    if (v.type == ValueType::Real && v.exact && v.q.den != 1) {
      // Keep reparsable text: a/b prints as a division of two real literals.
      text = std::to_string(v.q.num) + ".0/" + std::to_string(v.q.den) + ".0";
    } else if (v.type == ValueType::Real && v.exact) {
      text = std::to_string(v.q.num) + ".0";
    } else if (v.type == ValueType::Real) {
      std::ostringstream os;
      os.precision(17);
      os << v.d;
      text = os.str();
      if (text.find_first_of(".eE") == std::string::npos) text += ".0";
    } else {
      text = v.str();
    }
  }
  e->literal = v;
  e->text = std::move(text);
  e->pos = pos;
  return e;
}

namespace {

[[noreturn]] void fail(const Expr& e, const std::string& msg) {
  throw EvaluationError(msg + " in '" + to_string(e) + "'", e.pos);
}

Value real_from(double d, std::optional<Rational> q) {
  if (q) return Value::rational(*q);
  return Value::real(d);
}

Value arith(const Expr& e, Op op, const Value& a, const Value& b) {
  if (!a.is_numeric() || !b.is_numeric()) fail(e, "arithmetic on boolean");
  if (a.type == ValueType::Int && b.type == ValueType::Int) {
    std::int64_t r = 0;
    switch (op) {
      case Op::Add:
        if (__builtin_add_overflow(a.i, b.i, &r)) fail(e, "integer overflow");
        return Value::integer(r);
      case Op::Sub:
        if (__builtin_sub_overflow(a.i, b.i, &r)) fail(e, "integer overflow");
        return Value::integer(r);
      case Op::Mul:
        if (__builtin_mul_overflow(a.i, b.i, &r)) fail(e, "integer overflow");
        return Value::integer(r);
      case Op::Div:
        if (b.i == 0) fail(e, "division by zero");
        return Value::integer(a.i / b.i);
      default:
        break;
    }
  }
  double x = a.as_double();
  double y = b.as_double();
  auto qa = a.as_rational();
  auto qb = b.as_rational();
  std::optional<Rational> q;
  switch (op) {
    case Op::Add:
      if (qa && qb) q = add(*qa, *qb);
      return real_from(x + y, q);
    case Op::Sub:
      if (qa && qb) q = sub(*qa, *qb);
      return real_from(x - y, q);
    case Op::Mul:
      if (qa && qb) q = mul(*qa, *qb);
      return real_from(x * y, q);
    case Op::Div:
      if (y == 0.0) fail(e, "division by zero");
      if (qa && qb) q = div(*qa, *qb);
      return real_from(x / y, q);
    default:
      break;
  }
  fail(e, "bad arithmetic operator");
}

int compare_numeric(const Value& a, const Value& b) {
  if (a.type == ValueType::Int && b.type == ValueType::Int) return a.i < b.i ? -1 : (a.i > b.i ? 1 : 0);
  auto qa = a.as_rational();
  auto qb = b.as_rational();
  if (qa && qb) return compare(*qa, *qb);
  double x = a.as_double();
  double y = b.as_double();
  return x < y ? -1 : (x > y ? 1 : 0);
}

Value call(const Expr& e, std::span<const std::int64_t> state) {
  const std::string& f = e.text;
  std::vector<Value> args;
  args.reserve(e.args.size());
  for (const auto& a : e.args) {
    args.push_back(evaluate(*a, state));
    if (!args.back().is_numeric()) fail(e, "boolean argument to " + f);
  }
  if (f == "min" || f == "max") {
    if (args.empty()) fail(e, f + " needs arguments");
    Value best = args[0];
    for (std::size_t i = 1; i < args.size(); ++i) {
      int c = compare_numeric(args[i], best);
      if ((f == "min" && c < 0) || (f == "max" && c > 0)) best = args[i];
    }
    bool any_real = false;
    for (const auto& a : args) any_real |= a.type == ValueType::Real;
    if (any_real && best.type == ValueType::Int) return Value::rational(Rational(best.i));
    return best;
  }
  if (f == "floor" || f == "ceil") {
    if (args.size() != 1) fail(e, f + " takes one argument");
    const Value& a = args[0];
    if (a.type == ValueType::Int) return a;
    if (auto q = a.as_rational()) {
      std::int64_t t = q->num / q->den;  // toward zero
      if (f == "floor" && q->num % q->den != 0 && q->num < 0) --t;
      if (f == "ceil" && q->num % q->den != 0 && q->num > 0) ++t;
      return Value::integer(t);
    }
    double r = f == "floor" ? std::floor(a.d) : std::ceil(a.d);
    return Value::integer(static_cast<std::int64_t>(r));
  }
  if (f == "mod") {
    if (args.size() != 2 || args[0].type != ValueType::Int || args[1].type != ValueType::Int)
      fail(e, "mod takes two integers");
    if (args[1].i == 0) fail(e, "modulo by zero");
    return Value::integer(args[0].i % args[1].i);
  }
  if (f == "pow") {
    if (args.size() != 2) fail(e, "pow takes two arguments");
    const Value& base = args[0];
    const Value& ex = args[1];
    if (ex.type == ValueType::Int && ex.i >= 0) {
      if (base.type == ValueType::Int) {
        std::int64_t r = 1;
        for (std::int64_t k = 0; k < ex.i; ++k)
          if (__builtin_mul_overflow(r, base.i, &r)) fail(e, "integer overflow");
        return Value::integer(r);
      }
      std::optional<Rational> q = base.as_rational() ? std::optional<Rational>(Rational(1)) : std::nullopt;
      for (std::int64_t k = 0; k < ex.i && q; ++k) q = mul(*q, *base.as_rational());
      return real_from(std::pow(base.d, static_cast<double>(ex.i)), q);
    }
    return Value::real(std::pow(base.as_double(), ex.as_double()));
  }
  fail(e, "unknown function " + f);
}

}  // namespace

Value evaluate(const Expr& e, std::span<const std::int64_t> state) {
  switch (e.kind) {
    case ExprKind::Literal:
      return e.literal;
    case ExprKind::Var: {
      std::int64_t v = state[static_cast<std::size_t>(e.var)];
      return e.var_is_bool ? Value::boolean(v != 0) : Value::integer(v);
    }
    case ExprKind::Ident:
      fail(e, "unresolved identifier '" + e.text + "'");
    case ExprKind::Unary: {
      Value a = evaluate(*e.args[0], state);
      if (e.op == Op::Not) {
        if (a.type != ValueType::Bool) fail(e, "'!' applied to a number");
        return Value::boolean(!a.b);
      }
      if (a.type == ValueType::Bool) fail(e, "'-' applied to a boolean");
      if (a.type == ValueType::Int) {
        if (a.i == INT64_MIN) fail(e, "integer overflow");
        return Value::integer(-a.i);
      }
      auto q = a.as_rational();
      return real_from(-a.d, q ? std::optional<Rational>(Rational::make(-static_cast<__int128>(q->num), q->den))
                               : std::nullopt);
    }
    case ExprKind::Binary: {
      switch (e.op) {
        case Op::And:
        case Op::Or:
        case Op::Implies: {
          Value a = evaluate(*e.args[0], state);
          if (a.type != ValueType::Bool) fail(e, "logical operator on a number");
          if (e.op == Op::And && !a.b) return a;
          if (e.op == Op::Or && a.b) return a;
          if (e.op == Op::Implies && !a.b) return Value::boolean(true);
          Value b = evaluate(*e.args[1], state);
          if (b.type != ValueType::Bool) fail(e, "logical operator on a number");
          return b;
        }
        default:
          break;
      }
      Value a = evaluate(*e.args[0], state);
      Value b = evaluate(*e.args[1], state);
      switch (e.op) {
        case Op::Iff:
          if (a.type != ValueType::Bool || b.type != ValueType::Bool) fail(e, "'<=>' on numbers");
          return Value::boolean(a.b == b.b);
        case Op::Eq:
        case Op::Neq: {
          bool eq;
          if (a.type == ValueType::Bool || b.type == ValueType::Bool) {
            if (a.type != b.type) fail(e, "comparing boolean with number");
            eq = a.b == b.b;
          } else {
            eq = compare_numeric(a, b) == 0;
          }
          return Value::boolean(e.op == Op::Eq ? eq : !eq);
        }
        case Op::Lt:
        case Op::Le:
        case Op::Gt:
        case Op::Ge: {
          if (!a.is_numeric() || !b.is_numeric()) fail(e, "ordering booleans");
          int c = compare_numeric(a, b);
          bool r = e.op == Op::Lt ? c < 0 : e.op == Op::Le ? c <= 0 : e.op == Op::Gt ? c > 0 : c >= 0;
          return Value::boolean(r);
        }
        default:
          return arith(e, e.op, a, b);
      }
    }
    case ExprKind::Ite: {
      Value c = evaluate(*e.args[0], state);
      if (c.type != ValueType::Bool) fail(e, "condition is not boolean");
      return evaluate(*e.args[c.b ? 1 : 2], state);
    }
    case ExprKind::Call:
      return call(e, state);
  }
  fail(e, "bad expression");
}

bool evaluate_bool(const Expr& e, std::span<const std::int64_t> state) {
  Value v = evaluate(e, state);
  if (v.type != ValueType::Bool) throw EvaluationError("expected a boolean: '" + to_string(e) + "'", e.pos);
  return v.b;
}

namespace {

const char* op_text(Op op) {
  switch (op) {
    case Op::Not: return "!";
    case Op::Neg: return "-";
    case Op::Or: return "|";
    case Op::And: return "&";
    case Op::Implies: return "=>";
    case Op::Iff: return "<=>";
    case Op::Eq: return "=";
    case Op::Neq: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
  }
  return "?";
}

void print(std::ostream& os, const Expr& e, bool top) {
  switch (e.kind) {
    case ExprKind::Literal:
      if (!top && e.text.find('/') != std::string::npos)
        os << '(' << e.text << ')';
      else
        os << e.text;
      return;
    case ExprKind::Ident:
    case ExprKind::Var:
      os << e.text;
      return;
    case ExprKind::Unary:
      os << op_text(e.op);
      print(os, *e.args[0], false);
      return;
    case ExprKind::Binary:
      if (!top) os << '(';
      print(os, *e.args[0], false);
      os << ' ' << op_text(e.op) << ' ';
      print(os, *e.args[1], false);
      if (!top) os << ')';
      return;
    case ExprKind::Ite:
      if (!top) os << '(';
      print(os, *e.args[0], false);
      os << " ? ";
      print(os, *e.args[1], false);
      os << " : ";
      print(os, *e.args[2], false);
      if (!top) os << ')';
      return;
    case ExprKind::Call:
      os << e.text << '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) os << ", ";
        print(os, *e.args[i], true);
      }
      os << ')';
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e, true);
  return os.str();
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case ExprKind::Literal:
      if (a.literal.type != b.literal.type) return false;
      if (a.literal.type == ValueType::Bool) return a.literal.b == b.literal.b;
      if (a.literal.type == ValueType::Int) return a.literal.i == b.literal.i;
      if (a.literal.exact && b.literal.exact) return a.literal.q == b.literal.q;
      return a.literal.d == b.literal.d;
    case ExprKind::Ident:
    case ExprKind::Call:
      if (a.text != b.text) return false;
      break;
    case ExprKind::Var:
      return a.var == b.var && a.text == b.text;
    case ExprKind::Unary:
    case ExprKind::Binary:
      if (a.op != b.op) return false;
      break;
    case ExprKind::Ite:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

std::string to_string(Direction d) { return d == Direction::Max ? "max" : "min"; }

}  // namespace go123
