#include "conlab/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <sstream>

namespace conlab {

namespace {

Expr make(ExprKind kind, Expr a = nullptr, Expr b = nullptr) {
  ExprNode n;
  n.kind = kind;
  n.a = std::move(a);
  n.b = std::move(b);
  return std::make_shared<const ExprNode>(std::move(n));
}

constexpr std::array<std::pair<std::string_view, Func>, 9> kFuncs{{
    {"sin", Func::Sin}, {"cos", Func::Cos}, {"tan", Func::Tan},
    {"sinh", Func::Sinh}, {"cosh", Func::Cosh}, {"tanh", Func::Tanh},
    {"exp", Func::Exp}, {"log", Func::Log}, {"sqrt", Func::Sqrt},
}};

} // namespace

Expr num(double v) {
  ExprNode n;
  n.kind = ExprKind::Number;
  n.number = v;
  return std::make_shared<const ExprNode>(std::move(n));
}
Expr var(std::string name) {
  ExprNode n;
  n.kind = ExprKind::Var;
  n.name = std::move(name);
  return std::make_shared<const ExprNode>(std::move(n));
}
Expr pi_expr() { return make(ExprKind::Pi); }
Expr neg(Expr e) { return make(ExprKind::Neg, std::move(e)); }
Expr add(Expr l, Expr r) { return make(ExprKind::Add, std::move(l), std::move(r)); }
Expr sub(Expr l, Expr r) { return make(ExprKind::Sub, std::move(l), std::move(r)); }
Expr mul(Expr l, Expr r) { return make(ExprKind::Mul, std::move(l), std::move(r)); }
Expr div(Expr l, Expr r) { return make(ExprKind::Div, std::move(l), std::move(r)); }
Expr pow(Expr base, Expr exponent) {
  return make(ExprKind::Pow, std::move(base), std::move(exponent));
}
Expr call(Func f, Expr arg) {
  ExprNode n;
  n.kind = ExprKind::Call;
  n.func = f;
  n.a = std::move(arg);
  return std::make_shared<const ExprNode>(std::move(n));
}

std::string_view func_name(Func f) {
  for (auto [n, v] : kFuncs)
    if (v == f) return n;
  return "?";
}

std::optional<Func> func_from_name(std::string_view name) {
  for (auto [n, v] : kFuncs)
    if (n == name) return v;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parser: hand-rolled recursive descent over a lazy lexer.

namespace {

struct Token {
  enum Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End } kind;
  std::size_t offset = 0;
  double value = 0.0;
  std::string text;
};

class Parser {
public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  Expr run() {
    Expr e = parse_expr();
    if (tok_.kind != Token::End)
      fail("unexpected " + describe(tok_), {"operator", "end of input"});
    return e;
  }

private:
  static constexpr int kMaxDepth = 256;

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
  int depth_ = 0;

  [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) {
    std::string msg = "syntax error at byte " + std::to_string(tok_.offset) + ": " + what;
    if (!expected.empty()) {
      msg += "; expected ";
      for (std::size_t i = 0; i < expected.size(); ++i)
        msg += (i ? ", " : "") + expected[i];
    }
    throw ParseError(msg, tok_.offset, std::move(expected));
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Token::Number: return "number '" + t.text + "'";
      case Token::Ident: return "identifier '" + t.text + "'";
      case Token::End: return "end of input";
      default: return "'" + t.text + "'";
    }
  }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{Token::End, pos_, 0.0, ""};
    if (pos_ >= src_.size()) return;
    char c = src_[pos_];
    auto single = [&](Token::Kind k) {
      tok_ = Token{k, pos_, 0.0, std::string(1, c)};
      ++pos_;
    };
    switch (c) {
      case '+': single(Token::Plus); return;
      case '-': single(Token::Minus); return;
      case '*': single(Token::Star); return;
      case '/': single(Token::Slash); return;
      case '^': single(Token::Caret); return;
      case '(': single(Token::LParen); return;
      case ')': single(Token::RParen); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_ = Token{Token::Ident, start, 0.0, std::string(src_.substr(start, pos_ - start))};
      return;
    }
    tok_.offset = pos_;
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%02x", static_cast<unsigned char>(c));
    throw ParseError("syntax error at byte " + std::to_string(pos_) + ": invalid character " +
                         (std::isprint(static_cast<unsigned char>(c))
                              ? "'" + std::string(1, c) + "'"
                              : std::string(buf)),
                     pos_, {"number", "identifier", "operator", "'('"});
  }

  // NUMBER := digits [ "." digits ] [ ("e"|"E") ["+"|"-"] digits ]
  void lex_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        pos_ = mark; // bare 'e' after a number is the next token, not an exponent
      } else {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
      throw ParseError("syntax error at byte " + std::to_string(start) + ": bad number '" + text + "'",
                       start, {"number"});
    tok_ = Token{Token::Number, start, v, std::move(text)};
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& p) : p(p) {
      if (++p.depth_ > kMaxDepth)
        throw ParseError("syntax error at byte " + std::to_string(p.tok_.offset) +
                             ": expression nested too deeply",
                         p.tok_.offset, {});
    }
    ~DepthGuard() { --p.depth_; }
  };

  Expr parse_expr() {
    DepthGuard g(*this);
    Expr e = parse_term();
    while (tok_.kind == Token::Plus || tok_.kind == Token::Minus) {
      bool plus = tok_.kind == Token::Plus;
      advance();
      Expr r = parse_term();
      e = plus ? add(std::move(e), std::move(r)) : sub(std::move(e), std::move(r));
    }
    return e;
  }

  Expr parse_term() {
    DepthGuard g(*this);
    Expr e = parse_unary();
    while (tok_.kind == Token::Star || tok_.kind == Token::Slash) {
      bool star = tok_.kind == Token::Star;
      advance();
      Expr r = parse_unary();
      e = star ? mul(std::move(e), std::move(r)) : div(std::move(e), std::move(r));
    }
    return e;
  }

  Expr parse_unary() {
    DepthGuard g(*this);
    if (tok_.kind == Token::Minus) {
      advance();
      return neg(parse_unary());
    }
    return parse_power();
  }

  Expr parse_power() {
    DepthGuard g(*this);
    Expr base = parse_atom();
    if (tok_.kind == Token::Caret) {
      advance();
      return pow(std::move(base), parse_unary());
    }
    return base;
  }

  Expr parse_atom() {
    DepthGuard g(*this);
    switch (tok_.kind) {
      case Token::Number: {
        double v = tok_.value;
        advance();
        return num(v);
      }
      case Token::LParen: {
        advance();
        Expr e = parse_expr();
        if (tok_.kind != Token::RParen) fail("unexpected " + describe(tok_), {"')'"});
        advance();
        return e;
      }
      case Token::Ident: {
        std::string name = tok_.text;
        std::size_t at = tok_.offset;
        advance();
        if (tok_.kind == Token::LParen) {
          auto f = func_from_name(name);
          if (!f)
            throw ParseError("unknown function '" + name + "' at byte " + std::to_string(at), at,
                             {"sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt"});
          advance();
          Expr arg = parse_expr();
          if (tok_.kind != Token::RParen) fail("unexpected " + describe(tok_), {"')'"});
          advance();
          return call(*f, std::move(arg));
        }
        if (name == "pi") return pi_expr();
        if (func_from_name(name))
          throw ParseError("function '" + name + "' at byte " + std::to_string(at) +
                               " needs an argument list",
                           at, {"'('"});
        return var(std::move(name));
      }
      default:
        fail("unexpected " + describe(tok_), {"number", "identifier", "'('", "'-'"});
    }
  }
};

} // namespace

Expr parse(std::string_view source) { return Parser(source).run(); }

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

[[noreturn]] void domain_error(const std::string& what, const Expr& e) {
  throw EvalError(what + " in '" + to_string(e) + "'", to_string(e));
}

} // namespace

double evaluate(const Expr& e, const Env& env) {
  switch (e->kind) {
    case ExprKind::Number: return e->number;
    case ExprKind::Pi: return std::numbers::pi;
    case ExprKind::Var: {
      auto v = env.lookup(e->name);
      if (!v) throw EvalError("unbound variable '" + e->name + "'", e->name);
      return *v;
    }
    case ExprKind::Neg: return -evaluate(e->a, env);
    case ExprKind::Add: return evaluate(e->a, env) + evaluate(e->b, env);
    case ExprKind::Sub: return evaluate(e->a, env) - evaluate(e->b, env);
    case ExprKind::Mul: return evaluate(e->a, env) * evaluate(e->b, env);
    case ExprKind::Div: {
      double n = evaluate(e->a, env), d = evaluate(e->b, env);
      if (d == 0.0) domain_error("division by zero", e);
      return n / d;
    }
    case ExprKind::Pow: {
      double b = evaluate(e->a, env), x = evaluate(e->b, env);
      if (b < 0.0 && !is_integer(x)) domain_error("negative base with non-integer exponent", e);
      if (b == 0.0 && x < 0.0) domain_error("zero base with negative exponent", e);
      return std::pow(b, x);
    }
    case ExprKind::Call: {
      double a = evaluate(e->a, env);
      switch (e->func) {
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Tan: return std::tan(a);
        case Func::Sinh: return std::sinh(a);
        case Func::Cosh: return std::cosh(a);
        case Func::Tanh: return std::tanh(a);
        case Func::Exp: return std::exp(a);
        case Func::Log:
          if (a <= 0.0) domain_error("log of non-positive value", e);
          return std::log(a);
        case Func::Sqrt:
          if (a < 0.0) domain_error("sqrt of negative value", e);
          return std::sqrt(a);
      }
      break;
    }
  }
  throw EvalError("malformed expression node", "?");
}

// ---------------------------------------------------------------------------
// Differentiation.

Expr differentiate(const Expr& e, std::string_view name) {
  auto d = [&](const Expr& x) { return differentiate(x, name); };
  Expr result;
  switch (e->kind) {
    case ExprKind::Number:
    case ExprKind::Pi: result = num(0.0); break;
    case ExprKind::Var: result = num(e->name == name ? 1.0 : 0.0); break;
    case ExprKind::Neg: result = neg(d(e->a)); break;
    case ExprKind::Add: result = add(d(e->a), d(e->b)); break;
    case ExprKind::Sub: result = sub(d(e->a), d(e->b)); break;
    case ExprKind::Mul: result = add(mul(d(e->a), e->b), mul(e->a, d(e->b))); break;
    case ExprKind::Div:
      result = div(sub(mul(d(e->a), e->b), mul(e->a, d(e->b))), mul(e->b, e->b));
      break;
    case ExprKind::Pow: {
      if (!depends_on(e->b, name)) {
        // power rule with a constant exponent; keeps negative bases legal
        result = mul(mul(e->b, pow(e->a, sub(e->b, num(1.0)))), d(e->a));
      } else {
        // u^v * (v' log u + v u'/u)
        result = mul(pow(e->a, e->b),
                     add(mul(d(e->b), call(Func::Log, e->a)), mul(e->b, div(d(e->a), e->a))));
      }
      break;
    }
    case ExprKind::Call: {
      Expr inner = d(e->a);
      Expr outer;
      switch (e->func) {
        case Func::Sin: outer = call(Func::Cos, e->a); break;
        case Func::Cos: outer = neg(call(Func::Sin, e->a)); break;
        case Func::Tan: outer = div(num(1.0), pow(call(Func::Cos, e->a), num(2.0))); break;
        case Func::Sinh: outer = call(Func::Cosh, e->a); break;
        case Func::Cosh: outer = call(Func::Sinh, e->a); break;
        case Func::Tanh: outer = div(num(1.0), pow(call(Func::Cosh, e->a), num(2.0))); break;
        case Func::Exp: outer = call(Func::Exp, e->a); break;
        case Func::Log: outer = div(num(1.0), e->a); break;
        case Func::Sqrt: outer = div(num(1.0), mul(num(2.0), call(Func::Sqrt, e->a))); break;
      }
      result = mul(std::move(outer), std::move(inner));
      break;
    }
  }
  return simplify(result);
}

// ---------------------------------------------------------------------------
// Simplification.

namespace {

bool is_number(const Expr& e, double v) { return e->kind == ExprKind::Number && e->number == v; }

std::optional<double> as_number(const Expr& e) {
  if (e->kind == ExprKind::Number) return e->number;
  return std::nullopt;
}

} // namespace

Expr simplify(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Number:
    case ExprKind::Pi:
    case ExprKind::Var: return e;
    default: break;
  }
  Expr a = e->a ? simplify(e->a) : nullptr;
  Expr b = e->b ? simplify(e->b) : nullptr;
  auto na = a ? as_number(a) : std::nullopt;
  auto nb = b ? as_number(b) : std::nullopt;
  auto fold = [](double v) -> std::optional<Expr> {
    if (std::isfinite(v)) return num(v);
    return std::nullopt; // leave non-finite folds to runtime so errors surface
  };

  switch (e->kind) {
    case ExprKind::Neg:
      if (na)
        if (auto f = fold(-*na)) return *f;
      if (a->kind == ExprKind::Neg) return a->a;
      return neg(std::move(a));
    case ExprKind::Add:
      if (na && nb)
        if (auto f = fold(*na + *nb)) return *f;
      if (is_number(a, 0.0)) return b;
      if (is_number(b, 0.0)) return a;
      return add(std::move(a), std::move(b));
    case ExprKind::Sub:
      if (na && nb)
        if (auto f = fold(*na - *nb)) return *f;
      if (is_number(b, 0.0)) return a;
      if (is_number(a, 0.0)) return simplify(neg(std::move(b)));
      return sub(std::move(a), std::move(b));
    case ExprKind::Mul:
      if (na && nb)
        if (auto f = fold(*na * *nb)) return *f;
      if (is_number(a, 0.0) || is_number(b, 0.0)) return num(0.0);
      if (is_number(a, 1.0)) return b;
      if (is_number(b, 1.0)) return a;
      return mul(std::move(a), std::move(b));
    case ExprKind::Div:
      if (na && nb && *nb != 0.0)
        if (auto f = fold(*na / *nb)) return *f;
      if (is_number(a, 0.0)) return num(0.0); // 0/x; the x != 0 guard stays at evaluation
      if (is_number(b, 1.0)) return a;
      return div(std::move(a), std::move(b));
    case ExprKind::Pow:
      if (na && nb && !(*na < 0.0 && !is_integer(*nb)) && !(*na == 0.0 && *nb < 0.0))
        if (auto f = fold(std::pow(*na, *nb))) return *f;
      if (is_number(b, 1.0)) return a;
      if (is_number(b, 0.0)) return num(1.0);
      return pow(std::move(a), std::move(b));
    case ExprKind::Call:
      if (na) {
        bool legal = !((e->func == Func::Log && *na <= 0.0) || (e->func == Func::Sqrt && *na < 0.0));
        if (legal) {
          Env empty({}, {});
          double v = evaluate(call(e->func, num(*na)), empty);
          if (auto f = fold(v)) return *f;
        }
      }
      return call(e->func, std::move(a));
    default: return e;
  }
}

// ---------------------------------------------------------------------------
// Printing.

namespace {

// Precedence levels: Add/Sub 1, Mul/Div 2, Neg 3, Pow 4, atoms 5.
int precedence(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    case ExprKind::Number: return e->number < 0.0 ? 3 : 5; // negative literal prints a '-'
    default: return 5;
  }
}

void print(std::ostream& os, const Expr& e);

void print_child(std::ostream& os, const Expr& child, int min_prec) {
  if (precedence(child) < min_prec) {
    os << '(';
    print(os, child);
    os << ')';
  } else {
    print(os, child);
  }
}

void print(std::ostream& os, const Expr& e) {
  switch (e->kind) {
    case ExprKind::Number: os << format_double(e->number); break;
    case ExprKind::Var: os << e->name; break;
    case ExprKind::Pi: os << "pi"; break;
    case ExprKind::Neg:
      os << '-';
      print_child(os, e->a, 3);
      break;
    case ExprKind::Add:
      print_child(os, e->a, 1);
      os << " + ";
      print_child(os, e->b, 2);
      break;
    case ExprKind::Sub:
      print_child(os, e->a, 1);
      os << " - ";
      print_child(os, e->b, 2);
      break;
    case ExprKind::Mul:
      print_child(os, e->a, 2);
      os << '*';
      print_child(os, e->b, 3);
      break;
    case ExprKind::Div:
      print_child(os, e->a, 2);
      os << '/';
      print_child(os, e->b, 3);
      break;
    case ExprKind::Pow:
      print_child(os, e->a, 5);
      os << '^';
      // a bare Neg exponent re-parses identically (power := atom ["^" unary])
      if (e->b->kind == ExprKind::Neg || precedence(e->b) >= 4) {
        print(os, e->b);
      } else {
        os << '(';
        print(os, e->b);
        os << ')';
      }
      break;
    case ExprKind::Call:
      os << func_name(e->func) << '(';
      print(os, e->a);
      os << ')';
      break;
  }
}

} // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e);
  return os.str();
}

std::vector<std::string> variables(const Expr& e) {
  std::vector<std::string> out;
  auto walk = [&](auto&& self, const Expr& x) -> void {
    if (!x) return;
    if (x->kind == ExprKind::Var && std::find(out.begin(), out.end(), x->name) == out.end())
      out.push_back(x->name);
    self(self, x->a);
    self(self, x->b);
  };
  walk(walk, e);
  return out;
}

bool depends_on(const Expr& e, std::string_view name) {
  if (!e) return false;
  if (e->kind == ExprKind::Var && e->name == name) return true;
  return depends_on(e->a, name) || depends_on(e->b, name);
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    auto [p, ec] = std::from_chars(buf, buf + std::strlen(buf), back);
    (void)p;
    if (ec == std::errc() && back == v) break;
  }
  return buf;
}

Expr substitute(const Expr& e, const std::map<std::string, double>& bindings) {
  if (!e) return e;
  switch (e->kind) {
    case ExprKind::Number:
    case ExprKind::Pi: return e;
    case ExprKind::Var: {
      auto it = bindings.find(e->name);
      return it != bindings.end() ? num(it->second) : e;
    }
    default: {
      ExprNode n = *e;
      n.a = substitute(e->a, bindings);
      n.b = substitute(e->b, bindings);
      return std::make_shared<const ExprNode>(std::move(n));
    }
  }
}

// ---------------------------------------------------------------------------
// Matrices of expressions.

namespace {

ExprMatrix minor_matrix(const ExprMatrix& m, std::size_t row, std::size_t col) {
  ExprMatrix out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i == row) continue;
    std::vector<Expr> r;
    for (std::size_t j = 0; j < m.size(); ++j)
      if (j != col) r.push_back(m[i][j]);
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace

Expr det_expr(const ExprMatrix& m) {
  const std::size_t n = m.size();
  if (n == 0) return num(1.0);
  if (n == 1) return m[0][0];
  if (n == 2) return sub(mul(m[0][0], m[1][1]), mul(m[0][1], m[1][0]));
  Expr acc;
  for (std::size_t j = 0; j < n; ++j) {
    Expr term = mul(m[0][j], det_expr(minor_matrix(m, 0, j)));
    if (j % 2) term = neg(std::move(term));
    acc = acc ? add(std::move(acc), std::move(term)) : std::move(term);
  }
  return acc;
}

ExprMatrix inverse_exprs(const ExprMatrix& m) {
  const std::size_t n = m.size();
  Expr det = simplify(det_expr(m));
  ExprMatrix out(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Expr cof = n == 1 ? num(1.0) : det_expr(minor_matrix(m, j, i)); // adjugate: transposed cofactor
      if ((i + j) % 2) cof = neg(std::move(cof));
      out[i][j] = simplify(div(std::move(cof), det));
    }
  return out;
}

} // namespace conlab
