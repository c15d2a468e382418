#ifndef CONLAB_EXPR_HPP
#define CONLAB_EXPR_HPP

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conlab {

// Immutable arithmetic expression trees. Components of metrics and fields
// are written in a small textual language (see parse); evaluation and exact
// symbolic differentiation are the only operations the rest of the library
// needs, so residual checks are limited by floating-point roundoff alone.

enum class ExprKind { Number, Var, Pi, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Log, Sqrt };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  double number = 0.0;   // Number
  std::string name;      // Var
  Func func = Func::Sin; // Call
  Expr a, b;             // children; unary nodes use a only
};

// Builders. These fold nothing; use simplify() for that.
Expr num(double v);
Expr var(std::string name);
Expr pi_expr();
Expr neg(Expr e);
Expr add(Expr l, Expr r);
Expr sub(Expr l, Expr r);
Expr mul(Expr l, Expr r);
Expr div(Expr l, Expr r);
Expr pow(Expr base, Expr exponent);
Expr call(Func f, Expr arg);

std::string_view func_name(Func f);
std::optional<Func> func_from_name(std::string_view name);

/// Positioned syntax error. `offset` is the byte offset into the source;
/// `expected` lists the token classes that would have been accepted.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string msg, std::size_t offset, std::vector<std::string> expected = {})
      : std::runtime_error(std::move(msg)), offset(offset), expected(std::move(expected)) {}
  std::size_t offset;
  std::vector<std::string> expected;
};

/// Runtime evaluation failure (unbound variable or a domain violation such
/// as log of a non-positive value). `subexpr` prints the offending subtree.
class EvalError : public std::runtime_error {
public:
  EvalError(std::string msg, std::string subexpr)
      : std::runtime_error(std::move(msg)), subexpr(std::move(subexpr)) {}
  std::string subexpr;
};

/// Parses the expression grammar:
///   expr   := term { ("+"|"-") term }
///   term   := unary { ("*"|"/") unary }
///   unary  := "-" unary | power
///   power  := atom [ "^" unary ]            (right-associative)
///   atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
/// `^` binds tightest; unary minus sits below it, so -x^2 means -(x^2).
/// Reserved identifiers: pi and the function names sin, cos, tan, sinh,
/// cosh, tanh, exp, log, sqrt. Unknown identifiers become variables whose
/// binding is checked later, at chart load; unknown functions fail here.
Expr parse(std::string_view source);

/// Name -> value scope used by evaluate(). Coordinates are looked up first,
/// then named constants. The spans must outlive the Env.
class Env {
public:
  Env(std::span<const std::string> names, std::span<const double> values,
      const std::map<std::string, double>* constants = nullptr)
      : names_(names), values_(values), constants_(constants) {}

  std::optional<double> lookup(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return values_[i];
    if (constants_) {
      auto it = constants_->find(std::string(name));
      if (it != constants_->end()) return it->second;
    }
    return std::nullopt;
  }

private:
  std::span<const std::string> names_;
  std::span<const double> values_;
  const std::map<std::string, double>* constants_;
};

double evaluate(const Expr& e, const Env& env);

/// Exact symbolic partial derivative with respect to `name`. Total on valid
/// trees; the result is passed through simplify().
Expr differentiate(const Expr& e, std::string_view name);

/// Constant folding plus identity elimination (x+0, x*1, x*0, x^1, 0/x, ...).
/// Semantics-preserving up to 1 ulp; never folds a subtree whose value would
/// be non-finite, so runtime domain errors are not masked.
Expr simplify(const Expr& e);

/// Parseable text form; evaluate(parse(to_string(e))) == evaluate(e).
std::string to_string(const Expr& e);

/// Distinct variable names, in first-appearance order.
std::vector<std::string> variables(const Expr& e);

bool depends_on(const Expr& e, std::string_view name);

/// Shortest decimal form of v that parses back to exactly v.
std::string format_double(double v);

/// Replaces every variable present in `bindings` with its numeric value.
Expr substitute(const Expr& e, const std::map<std::string, double>& bindings);

// Small matrices of expressions, used for symbolic determinants and
// inverses of metrics. Laplace expansion: fine for the dimensions charts
// have, factorial growth beyond that.
using ExprMatrix = std::vector<std::vector<Expr>>;

Expr det_expr(const ExprMatrix& m);

/// Entrywise adjugate(m)/det(m), simplified. The determinant's nonvanishing
/// is a runtime (evaluation) concern, not checked here.
ExprMatrix inverse_exprs(const ExprMatrix& m);

} // namespace conlab

#endif
