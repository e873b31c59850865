#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <set>
#include <sstream>

#include "go123/model.hpp"

namespace go123 {

namespace {

enum class Tok {
  End, Ident, Int, Real, String,
  LBracket, RBracket, LParen, RParen, Semi, Colon, Comma, DotDot, Arrow, Prime,
  Eq, Neq, Lt, Le, Gt, Ge, And, Or, Not, Implies, Iff, Plus, Minus, Star, Slash, Question,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Real: return "number";
    case Tok::String: return "string";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::DotDot: return "'..'";
    case Tok::Arrow: return "'->'";
    case Tok::Prime: return "'''";
    case Tok::Eq: return "'='";
    case Tok::Neq: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::And: return "'&'";
    case Tok::Or: return "'|'";
    case Tok::Not: return "'!'";
    case Tok::Implies: return "'=>'";
    case Tok::Iff: return "'<=>'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Question: return "'?'";
  }
  return "?";
}

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto peek = [&](std::size_t k) -> char { return i + k < src.size() ? src[i + k] : '\0'; };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && peek(1) == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.pos = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      bool real = false;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        real = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          real = true;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      t.kind = real ? Tok::Real : Tok::Int;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"') throw SyntaxError("unterminated string", t.pos, "'\"'");
      t.kind = Tok::String;
      t.text = src.substr(i + 1, j - i - 1);
      advance(j - i + 1);
      out.push_back(std::move(t));
      continue;
    }
    struct Punct {
      const char* text;
      Tok kind;
    };
    static const Punct puncts[] = {
        {"<=>", Tok::Iff}, {"..", Tok::DotDot}, {"->", Tok::Arrow}, {"!=", Tok::Neq}, {"<=", Tok::Le},
        {">=", Tok::Ge},   {"=>", Tok::Implies}, {"[", Tok::LBracket}, {"]", Tok::RBracket},
        {"(", Tok::LParen}, {")", Tok::RParen}, {";", Tok::Semi},     {":", Tok::Colon},
        {",", Tok::Comma},  {"'", Tok::Prime},  {"=", Tok::Eq},       {"<", Tok::Lt},
        {">", Tok::Gt},     {"&", Tok::And},    {"|", Tok::Or},       {"!", Tok::Not},
        {"+", Tok::Plus},   {"-", Tok::Minus},  {"*", Tok::Star},     {"/", Tok::Slash},
        {"?", Tok::Question},
    };
    bool matched = false;
    for (const auto& p : puncts) {
      std::size_t n = std::char_traits<char>::length(p.text);
      if (src.compare(i, n, p.text) == 0) {
        t.kind = p.kind;
        t.text = p.text;
        advance(n);
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (!matched) throw SyntaxError(std::string("unexpected character '") + c + "'", t.pos, "a token");
  }
  Token end;
  end.kind = Tok::End;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

ExprPtr node(ExprKind kind, SourcePos pos, std::vector<ExprPtr> args = {}, Op op = Op::Add,
             std::string text = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->pos = pos;
  e->args = std::move(args);
  e->op = op;
  e->text = std::move(text);
  return e;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  ModelAst parse() {
    ModelAst ast;
    expect_keyword("mdp");
    bool have_property = false;
    while (cur().kind != Tok::End) {
      if (is_keyword("const")) {
        ast.constants.push_back(parse_const());
      } else if (is_keyword("module")) {
        ast.modules.push_back(parse_module());
      } else if (is_keyword("label")) {
        ast.labels.push_back(parse_label());
      } else if (is_keyword("property")) {
        if (have_property) throw SyntaxError("only one property per model", cur().pos, "end of input");
        ast.property = parse_property();
        have_property = true;
      } else {
        error("'const', 'module', 'label' or 'property'");
      }
    }
    if (!have_property) throw SyntaxError("missing property declaration", cur().pos, "'property'");
    for (const auto& c : ast.constants)
      if (!c.value) ast.parameters.push_back(c.name);
    validate(ast);
    return ast;
  }

 private:
  std::vector<Token> toks_;
  std::size_t at_ = 0;

  const Token& cur() const { return toks_[at_]; }
  const Token& ahead(std::size_t k) const { return toks_[std::min(at_ + k, toks_.size() - 1)]; }
  bool is(Tok k) const { return cur().kind == k; }
  bool is_keyword(const char* kw) const { return cur().kind == Tok::Ident && cur().text == kw; }

  [[noreturn]] void error(const std::string& expected) const {
    std::string found = cur().kind == Tok::End ? "end of input" : "'" + cur().text + "'";
    throw SyntaxError(std::to_string(cur().pos.line) + ":" + std::to_string(cur().pos.column) +
                          ": expected " + expected + ", found " + found,
                      cur().pos, expected);
  }

  Token expect(Tok k) {
    if (!is(k)) error(describe(k));
    return toks_[at_++];
  }
  void expect_keyword(const char* kw) {
    if (!is_keyword(kw)) error(std::string("'") + kw + "'");
    ++at_;
  }
  bool accept(Tok k) {
    if (!is(k)) return false;
    ++at_;
    return true;
  }
  std::string ident() { return expect(Tok::Ident).text; }

  ConstDecl parse_const() {
    ConstDecl c;
    c.pos = cur().pos;
    expect_keyword("const");
    if (is_keyword("int")) {
      c.type = ConstType::Int;
    } else if (is_keyword("double")) {
      c.type = ConstType::Double;
    } else if (is_keyword("bool")) {
      c.type = ConstType::Bool;
    } else {
      error("'int', 'double' or 'bool'");
    }
    ++at_;
    c.name = ident();
    if (accept(Tok::Eq)) c.value = parse_expr();
    expect(Tok::Semi);
    return c;
  }

  ModuleDecl parse_module() {
    ModuleDecl m;
    m.pos = cur().pos;
    expect_keyword("module");
    m.name = ident();
    while (is(Tok::Ident) && !is_keyword("endmodule")) m.variables.push_back(parse_var());
    while (is(Tok::LBracket)) m.commands.push_back(parse_command(m.name));
    expect_keyword("endmodule");
    return m;
  }

  VarDecl parse_var() {
    VarDecl v;
    v.pos = cur().pos;
    v.name = ident();
    expect(Tok::Colon);
    if (is_keyword("bool")) {
      ++at_;
      v.is_bool = true;
    } else {
      expect(Tok::LBracket);
      v.lo = parse_expr();
      expect(Tok::DotDot);
      v.hi = parse_expr();
      expect(Tok::RBracket);
    }
    if (is_keyword("init")) {
      ++at_;
      v.init = parse_expr();
    }
    expect(Tok::Semi);
    return v;
  }

  Command parse_command(const std::string& module) {
    Command c;
    c.pos = cur().pos;
    expect(Tok::LBracket);
    if (is(Tok::Ident)) c.label = ident();
    expect(Tok::RBracket);
    if (c.label.empty()) {
      throw UnlabeledCommand("command at " + std::to_string(c.pos.line) + ":" + std::to_string(c.pos.column) +
                                 " in module '" + module + "' has no label; give every command a unique label, e.g. [" +
                                 module + "_line_" + std::to_string(c.pos.line) + "]",
                             c.pos);
    }
    if (c.label == "self_loop")
      throw DuplicateName("label 'self_loop' is reserved for closing deadlocks", c.pos);
    c.guard = parse_expr();
    expect(Tok::Arrow);
    c.updates.push_back(parse_update());
    while (accept(Tok::Plus)) c.updates.push_back(parse_update());
    expect(Tok::Semi);
    return c;
  }

  bool at_assignments() const {
    if (is(Tok::LParen) && ahead(1).kind == Tok::Ident && ahead(2).kind == Tok::Prime) return true;
    if (is_keyword("true") && (ahead(1).kind == Tok::Semi || ahead(1).kind == Tok::Plus)) return true;
    return false;
  }

  Update parse_update() {
    Update u;
    if (!at_assignments()) {
      u.prob = parse_expr();
      expect(Tok::Colon);
    }
    if (is_keyword("true")) {
      ++at_;
      return u;
    }
    do {
      expect(Tok::LParen);
      Assignment a;
      a.var = ident();
      expect(Tok::Prime);
      expect(Tok::Eq);
      a.value = parse_expr();
      expect(Tok::RParen);
      u.assignments.push_back(std::move(a));
    } while (accept(Tok::And));
    return u;
  }

  LabelDecl parse_label() {
    LabelDecl l;
    l.pos = cur().pos;
    expect_keyword("label");
    l.name = expect(Tok::String).text;
    expect(Tok::Eq);
    l.expr = parse_expr();
    expect(Tok::Semi);
    return l;
  }

  PropertySpec parse_property() {
    PropertySpec p;
    p.pos = cur().pos;
    expect_keyword("property");
    if (is_keyword("Pmax")) {
      p.direction = Direction::Max;
    } else if (is_keyword("Pmin")) {
      p.direction = Direction::Min;
    } else {
      error("'Pmax' or 'Pmin'");
    }
    ++at_;
    expect_keyword("reach");
    p.target = expect(Tok::String).text;
    expect(Tok::Semi);
    return p;
  }

  // Precedence, loosest first: ?: , <=>, =>, |, &, comparisons, + -, * /, unary.
  ExprPtr parse_expr() { return parse_ite(); }

  ExprPtr parse_ite() {
    ExprPtr c = parse_iff();
    if (is(Tok::Question)) {
      SourcePos pos = cur().pos;
      ++at_;
      ExprPtr a = parse_ite();
      expect(Tok::Colon);
      ExprPtr b = parse_ite();
      return node(ExprKind::Ite, pos, {c, a, b});
    }
    return c;
  }

  ExprPtr parse_iff() {
    ExprPtr l = parse_implies();
    while (is(Tok::Iff)) {
      SourcePos pos = cur().pos;
      ++at_;
      l = node(ExprKind::Binary, pos, {l, parse_implies()}, Op::Iff);
    }
    return l;
  }

  ExprPtr parse_implies() {
    ExprPtr l = parse_or();
    if (is(Tok::Implies)) {
      SourcePos pos = cur().pos;
      ++at_;
      return node(ExprKind::Binary, pos, {l, parse_implies()}, Op::Implies);
    }
    return l;
  }

  ExprPtr parse_or() {
    ExprPtr l = parse_and();
    while (is(Tok::Or)) {
      SourcePos pos = cur().pos;
      ++at_;
      l = node(ExprKind::Binary, pos, {l, parse_and()}, Op::Or);
    }
    return l;
  }

  ExprPtr parse_and() {
    ExprPtr l = parse_cmp();
    while (is(Tok::And)) {
      SourcePos pos = cur().pos;
      ++at_;
      l = node(ExprKind::Binary, pos, {l, parse_cmp()}, Op::And);
    }
    return l;
  }

  ExprPtr parse_cmp() {
    ExprPtr l = parse_additive();
    for (;;) {
      Op op;
      switch (cur().kind) {
        case Tok::Eq: op = Op::Eq; break;
        case Tok::Neq: op = Op::Neq; break;
        case Tok::Lt: op = Op::Lt; break;
        case Tok::Le: op = Op::Le; break;
        case Tok::Gt: op = Op::Gt; break;
        case Tok::Ge: op = Op::Ge; break;
        default: return l;
      }
      SourcePos pos = cur().pos;
      ++at_;
      l = node(ExprKind::Binary, pos, {l, parse_additive()}, op);
    }
  }

  ExprPtr parse_additive() {
    ExprPtr l = parse_multiplicative();
    while (is(Tok::Plus) || is(Tok::Minus)) {
      // In an update list '+' separates updates: "p:(x'=1) + q:(x'=0)".
      // Those never follow an expression directly, so this is unambiguous.
      Op op = is(Tok::Plus) ? Op::Add : Op::Sub;
      SourcePos pos = cur().pos;
      ++at_;
      l = node(ExprKind::Binary, pos, {l, parse_multiplicative()}, op);
    }
    return l;
  }

  ExprPtr parse_multiplicative() {
    ExprPtr l = parse_unary();
    while (is(Tok::Star) || is(Tok::Slash)) {
      Op op = is(Tok::Star) ? Op::Mul : Op::Div;
      SourcePos pos = cur().pos;
      ++at_;
      l = node(ExprKind::Binary, pos, {l, parse_unary()}, op);
    }
    return l;
  }

  ExprPtr parse_unary() {
    SourcePos pos = cur().pos;
    if (accept(Tok::Not)) return node(ExprKind::Unary, pos, {parse_unary()}, Op::Not);
    if (accept(Tok::Minus)) return node(ExprKind::Unary, pos, {parse_unary()}, Op::Neg);
    return parse_primary();
  }

  ExprPtr parse_primary() {
    const Token& t = cur();
    SourcePos pos = t.pos;
    switch (t.kind) {
      case Tok::Int: {
        ++at_;
        errno = 0;
        char* end = nullptr;
        long long v = std::strtoll(t.text.c_str(), &end, 10);
        if (errno == ERANGE) throw SyntaxError("integer literal out of range", pos, "a 64-bit integer");
        return make_literal(Value::integer(v), t.text, pos);
      }
      case Tok::Real: {
        ++at_;
        if (auto q = parse_decimal(t.text)) return make_literal(Value::rational(*q), t.text, pos);
        return make_literal(Value::real(std::strtod(t.text.c_str(), nullptr)), t.text, pos);
      }
      case Tok::LParen: {
        ++at_;
        ExprPtr e = parse_expr();
        expect(Tok::RParen);
        return e;
      }
      case Tok::Ident: {
        if (t.text == "true" || t.text == "false") {
          ++at_;
          return make_literal(Value::boolean(t.text == "true"), t.text, pos);
        }
        std::string name = t.text;
        ++at_;
        if (accept(Tok::LParen)) {
          static const std::set<std::string> functions = {"min", "max", "floor", "ceil", "pow", "mod"};
          if (!functions.count(name)) throw SyntaxError("unknown function '" + name + "'", pos, "a known function");
          std::vector<ExprPtr> args;
          if (!is(Tok::RParen)) {
            args.push_back(parse_expr());
            while (accept(Tok::Comma)) args.push_back(parse_expr());
          }
          expect(Tok::RParen);
          return node(ExprKind::Call, pos, std::move(args), Op::Add, name);
        }
        return node(ExprKind::Ident, pos, {}, Op::Add, name);
      }
      default:
        error("an expression");
    }
  }

  static void validate(const ModelAst& ast) {
    std::set<std::string> names;
    for (const auto& c : ast.constants)
      if (!names.insert(c.name).second) throw DuplicateName("duplicate constant '" + c.name + "'", c.pos);
    std::set<std::string> modules;
    for (const auto& m : ast.modules) {
      if (!modules.insert(m.name).second) throw DuplicateName("duplicate module '" + m.name + "'", m.pos);
      for (const auto& v : m.variables)
        if (!names.insert(v.name).second)
          throw DuplicateName("duplicate variable '" + v.name + "' in module '" + m.name + "'", v.pos);
    }
    std::set<std::string> labels;
    for (const auto& l : ast.labels)
      if (!labels.insert(l.name).second) throw DuplicateName("duplicate label \"" + l.name + "\"", l.pos);
    if (!labels.count(ast.property.target))
      throw SyntaxError("property refers to undeclared label \"" + ast.property.target + "\"", ast.property.pos,
                        "a declared label");
  }
};

const char* type_name(ConstType t) {
  switch (t) {
    case ConstType::Int: return "int";
    case ConstType::Double: return "double";
    case ConstType::Bool: return "bool";
  }
  return "int";
}

}  // namespace

ModelAst parse_model(const std::string& text) { return Parser(text).parse(); }

const LabelDecl& ModelAst::goal_label() const {
  for (const auto& l : labels)
    if (l.name == property.target) return l;
  throw ModelError("UnknownLabel", "no label named \"" + property.target + "\"");
}

std::string print_model(const ModelAst& ast) {
  std::ostringstream os;
  os << "mdp\n\n";
  for (const auto& c : ast.constants) {
    os << "const " << type_name(c.type) << ' ' << c.name;
    if (c.value) os << " = " << to_string(*c.value);
    os << ";\n";
  }
  for (const auto& m : ast.modules) {
    os << "\nmodule " << m.name << '\n';
    for (const auto& v : m.variables) {
      os << "  " << v.name << " : ";
      if (v.is_bool)
        os << "bool";
      else
        os << '[' << to_string(*v.lo) << ".." << to_string(*v.hi) << ']';
      if (v.init) os << " init " << to_string(*v.init);
      os << ";\n";
    }
    if (!m.variables.empty() && !m.commands.empty()) os << '\n';
    for (const auto& c : m.commands) {
      os << "  [" << c.label << "] " << to_string(*c.guard) << " ->";
      for (std::size_t i = 0; i < c.updates.size(); ++i) {
        const Update& u = c.updates[i];
        os << (i ? " + " : " ");
        if (u.prob) os << to_string(*u.prob) << " : ";
        if (u.assignments.empty()) os << "true";
        for (std::size_t j = 0; j < u.assignments.size(); ++j) {
          if (j) os << " & ";
          os << '(' << u.assignments[j].var << "'=" << to_string(*u.assignments[j].value) << ')';
        }
      }
      os << ";\n";
    }
    os << "endmodule\n";
  }
  os << '\n';
  for (const auto& l : ast.labels) os << "label \"" << l.name << "\" = " << to_string(*l.expr) << ";\n";
  os << "property " << (ast.property.direction == Direction::Max ? "Pmax" : "Pmin") << " reach \""
     << ast.property.target << "\";\n";
  return os.str();
}

namespace {

bool eq_ptr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return structurally_equal(*a, *b);
}

}  // namespace

bool structurally_equal(const ModelAst& a, const ModelAst& b) {
  if (a.constants.size() != b.constants.size() || a.modules.size() != b.modules.size() ||
      a.labels.size() != b.labels.size() || a.parameters != b.parameters)
    return false;
  for (std::size_t i = 0; i < a.constants.size(); ++i) {
    const auto& x = a.constants[i];
    const auto& y = b.constants[i];
    if (x.name != y.name || x.type != y.type || !eq_ptr(x.value, y.value)) return false;
  }
  for (std::size_t i = 0; i < a.modules.size(); ++i) {
    const auto& x = a.modules[i];
    const auto& y = b.modules[i];
    if (x.name != y.name || x.variables.size() != y.variables.size() || x.commands.size() != y.commands.size())
      return false;
    for (std::size_t j = 0; j < x.variables.size(); ++j) {
      const auto& u = x.variables[j];
      const auto& v = y.variables[j];
      if (u.name != v.name || u.is_bool != v.is_bool || !eq_ptr(u.lo, v.lo) || !eq_ptr(u.hi, v.hi) ||
          !eq_ptr(u.init, v.init))
        return false;
    }
    for (std::size_t j = 0; j < x.commands.size(); ++j) {
      const auto& u = x.commands[j];
      const auto& v = y.commands[j];
      if (u.label != v.label || !eq_ptr(u.guard, v.guard) || u.updates.size() != v.updates.size()) return false;
      for (std::size_t k = 0; k < u.updates.size(); ++k) {
        const auto& p = u.updates[k];
        const auto& q = v.updates[k];
        if (!eq_ptr(p.prob, q.prob) || p.assignments.size() != q.assignments.size()) return false;
        for (std::size_t r = 0; r < p.assignments.size(); ++r)
          if (p.assignments[r].var != q.assignments[r].var || !eq_ptr(p.assignments[r].value, q.assignments[r].value))
            return false;
      }
    }
  }
  for (std::size_t i = 0; i < a.labels.size(); ++i)
    if (a.labels[i].name != b.labels[i].name || !eq_ptr(a.labels[i].expr, b.labels[i].expr)) return false;
  return a.property.direction == b.property.direction && a.property.target == b.property.target;
}

}  // namespace go123
