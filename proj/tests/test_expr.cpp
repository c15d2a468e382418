#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "conlab/expr.hpp"
#include "support.hpp"

using namespace conlab;
using conlab::testing::rel_err;

namespace {

double eval_at(const Expr& e, const std::vector<std::string>& names,
               const std::vector<double>& values,
               const std::map<std::string, double>* consts = nullptr) {
  return evaluate(e, Env(names, values, consts));
}

double eval_const(const Expr& e) { return evaluate(e, Env({}, {})); }

} // namespace

TEST_CASE("parse literals and structure") {
  Expr zero = parse("0");
  CHECK(zero->kind == ExprKind::Number);
  CHECK(zero->number == 0.0);

  Expr s2 = parse("sin(theta)^2");
  REQUIRE(s2->kind == ExprKind::Pow);
  CHECK(s2->a->kind == ExprKind::Call);
  CHECK(s2->a->func == Func::Sin);
  CHECK(s2->a->a->kind == ExprKind::Var);
  CHECK(s2->a->a->name == "theta");
  CHECK(s2->b->number == 2.0);

  // named constant stays a variable until evaluation binds it
  Expr e = parse("-x0*exp(2*K0*x0)");
  std::map<std::string, double> consts{{"K0", 1.5}};
  CHECK(eval_at(e, {"x0"}, {0.0}, &consts) == 0.0);
  CHECK(eval_at(e, {"x0"}, {0.5}, &consts) == doctest::Approx(-0.5 * std::exp(1.5)).epsilon(1e-14));
}

TEST_CASE("evaluate basics") {
  CHECK(eval_const(parse("1+2*3")) == 7.0);
  CHECK(eval_at(parse("sin(theta)^2"), {"theta"}, {std::numbers::pi / 2}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_const(parse("exp(2*1*0.5)")) == std::exp(1.0)); // math-library oracle
  CHECK(eval_const(parse("pi")) == std::numbers::pi);
  CHECK(eval_const(parse("2e-3")) == 2e-3);
  CHECK(eval_const(parse("1.5e2")) == 150.0);
}

TEST_CASE("precedence and associativity") {
  CHECK(eval_at(parse("-x^2"), {"x"}, {3.0}) == -9.0); // unary minus below ^
  CHECK(eval_const(parse("2^3^2")) == 512.0);          // right-associative
  CHECK(eval_const(parse("2^-2")) == 0.25);
  CHECK(eval_const(parse("(-2)^2")) == 4.0);
  CHECK(eval_const(parse("6/3/2")) == 1.0);
  CHECK(eval_const(parse("1-2-3")) == -4.0);
  CHECK(eval_const(parse("2*-3")) == -6.0);
  CHECK(eval_const(parse("-2^2")) == -4.0);
  CHECK(eval_at(parse("2*x^2"), {"x"}, {3.0}) == 18.0);
}

TEST_CASE("parse errors carry offsets and expectations") {
  CHECK_THROWS_AS(parse(""), ParseError);
  try {
    parse("1 + * 2");
    FAIL("expected a throw");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
    CHECK(!e.expected.empty());
  }
  try {
    parse("foo(1)");
    FAIL("expected a throw");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("unknown function 'foo'") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("(1+2"), ParseError);
  CHECK_THROWS_AS(parse("1 2"), ParseError);
  CHECK_THROWS_AS(parse("sin + 1"), ParseError); // function name without arguments
  CHECK_THROWS_AS(parse("pi(1)"), ParseError);
  CHECK_THROWS_AS(parse("1 + \x01"), ParseError);
  CHECK_THROWS_AS(parse(std::string(3000, '(')), ParseError); // depth limit, no crash
}

TEST_CASE("evaluation domain errors name the subexpression") {
  CHECK_THROWS_AS(eval_const(parse("log(0-1)")), EvalError);
  CHECK_THROWS_AS(eval_const(parse("sqrt(0-2)")), EvalError);
  CHECK_THROWS_AS(eval_const(parse("1/(2-2)")), EvalError);
  CHECK_THROWS_AS(eval_const(parse("(0-2)^0.5")), EvalError);
  try {
    eval_at(parse("1 + q"), {"x"}, {1.0});
    FAIL("expected a throw");
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("unbound variable 'q'") != std::string::npos);
  }
  try {
    eval_at(parse("x / (y - y)"), {"x", "y"}, {1.0, 3.0});
    FAIL("expected a throw");
  } catch (const EvalError& e) {
    CHECK(e.subexpr.find("y - y") != std::string::npos);
  }
}

TEST_CASE("differentiate: calculus identities") {
  // d/dtheta sin^2 = 2 sin cos; at pi/4 the value is exactly 1
  Expr d = differentiate(parse("sin(theta)^2"), "theta");
  CHECK(eval_at(d, {"theta"}, {std::numbers::pi / 4}) == doctest::Approx(1.0).epsilon(1e-15));

  Expr dc = differentiate(parse("7"), "x");
  CHECK(dc->kind == ExprKind::Number);
  CHECK(dc->number == 0.0);

  // symbolic value 3 at x0 = 0, frozen from the central difference oracle
  Expr e = parse("exp(2*K*x0)");
  Expr de = differentiate(e, "x0");
  std::map<std::string, double> consts{{"K", 1.5}};
  double sym = eval_at(de, {"x0"}, {0.0}, &consts);
  CHECK(sym == doctest::Approx(3.0).epsilon(1e-14));
  double h = 1e-5;
  double fd = (eval_at(e, {"x0"}, {h}, &consts) - eval_at(e, {"x0"}, {-h}, &consts)) / (2 * h);
  CHECK(rel_err(sym, fd) < 1e-6);
}

TEST_CASE("differentiate: every node kind against the central difference") {
  const char* sources[] = {
      "x + y*x",        "x - y/x",       "x*y*x",        "(x + y)/(x - y + 3)",
      "x^3",            "x^y",           "2^x",          "-x^2 + y",
      "sin(x*y)",       "cos(x + y)",    "tan(x/2)",     "sinh(x)*cosh(y)",
      "tanh(x*y)",      "exp(x - y^2)",  "log(x + 2)",   "sqrt(x^2 + y^2 + 1)",
      "pi*x",           "x^0.5",         "sin(cos(x))",  "exp(sin(x) + cos(y))",
  };
  std::mt19937_64 rng(7);
  std::vector<std::string> names{"x", "y"};
  for (const char* src : sources) {
    Expr e = parse(src);
    for (const auto& v : names) {
      Expr d = differentiate(e, v);
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> p{0.3 + 1.2 * (rng() >> 11) * 0x1.0p-53,
                              0.2 + 1.1 * (rng() >> 11) * 0x1.0p-53};
        int axis = v == "x" ? 0 : 1;
        double h = 1e-5;
        auto hi = p, lo = p;
        hi[axis] += h;
        lo[axis] -= h;
        double fd = (eval_at(e, names, hi) - eval_at(e, names, lo)) / (2 * h);
        double sym = eval_at(d, names, p);
        CHECK(rel_err(sym, fd) < 1e-6);
      }
    }
  }
}

TEST_CASE("derivative linearity at random points") {
  Expr a = parse("sin(x*y) + x^3");
  Expr b = parse("exp(x - y) * y");
  Expr dsum = differentiate(add(a, b), "x");
  Expr da = differentiate(a, "x");
  Expr db = differentiate(b, "x");
  std::mt19937_64 rng(11);
  std::vector<std::string> names{"x", "y"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p{-1.0 + 2.0 * (rng() >> 11) * 0x1.0p-53,
                          -1.0 + 2.0 * (rng() >> 11) * 0x1.0p-53};
    CHECK(std::abs(eval_at(dsum, names, p) - (eval_at(da, names, p) + eval_at(db, names, p))) <=
          1e-12);
  }
}

TEST_CASE("second derivatives commute on catalog expressions") {
  std::mt19937_64 rng(13);
  for (const auto& ce : conlab::testing::all_catalog_exprs()) {
    const auto& chart = ce.chart;
    auto grid = make_grid(chart, {.seed = 13, .random_count = 10, .lattice_per_axis = 0});
    for (const auto& e : ce.exprs) {
      for (int i = 0; i < chart.dim(); ++i)
        for (int j = i + 1; j < chart.dim(); ++j) {
          Expr dij = differentiate(differentiate(e, chart.coords()[i]), chart.coords()[j]);
          Expr dji = differentiate(differentiate(e, chart.coords()[j]), chart.coords()[i]);
          for (const auto& p : grid) {
            double a = evaluate(dij, chart.env_at(p));
            double b = evaluate(dji, chart.env_at(p));
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
          }
        }
    }
  }
}

TEST_CASE("symbolic derivatives match the FD oracle on all catalog expressions") {
  for (const auto& ce : conlab::testing::all_catalog_exprs()) {
    const auto& chart = ce.chart;
    auto grid = make_grid(chart, {.seed = 99, .random_count = 25, .lattice_per_axis = 0});
    for (const auto& e : ce.exprs)
      for (int axis = 0; axis < chart.dim(); ++axis) {
        Expr d = differentiate(e, chart.coords()[axis]);
        for (const auto& p : grid) {
          double sym = evaluate(d, chart.env_at(p));
          double fd = conlab::testing::central_fd(e, chart, p, axis);
          CHECK(rel_err(sym, fd) < 1e-6);
        }
      }
  }
}

TEST_CASE("simplify folds constants and identities") {
  Expr e = simplify(parse("x*1+0"));
  CHECK(e->kind == ExprKind::Var);
  CHECK(e->name == "x");

  Expr f = simplify(parse("2*3"));
  CHECK(f->kind == ExprKind::Number);
  CHECK(f->number == 6.0);

  Expr d = simplify(differentiate(parse("x^2"), "x"));
  CHECK(eval_at(d, {"x"}, {3.0}) == 6.0);
  double fd = (eval_at(parse("x^2"), {"x"}, {3.0 + 1e-5}) -
               eval_at(parse("x^2"), {"x"}, {3.0 - 1e-5})) / 2e-5;
  CHECK(rel_err(6.0, fd) < 1e-6);

  CHECK(simplify(parse("0/x"))->number == 0.0);
  CHECK(simplify(parse("x^1"))->kind == ExprKind::Var);
  CHECK(simplify(parse("x^0"))->number == 1.0);
  // folding never bakes a non-finite value in; the error stays at runtime
  CHECK_THROWS_AS(eval_const(simplify(parse("log(0)"))), EvalError);
  CHECK_THROWS_AS(eval_const(simplify(parse("1/0"))), EvalError);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    double x = -2.0 + 4.0 * (rng() >> 11) * 0x1.0p-53;
    Expr raw = parse("(x + 0)*(1*x) + x^1 - 0/x + 0*sin(x)");
    CHECK(eval_at(simplify(raw), {"x"}, {x}) ==
          doctest::Approx(eval_at(raw, {"x"}, {x})).epsilon(1e-15));
  }
}

namespace {

Expr random_expr(std::mt19937_64& rng, int depth) {
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };
  if (depth <= 0 || pick(4) == 0) {
    switch (pick(3)) {
      case 0: return num(std::round(((rng() >> 11) * 0x1.0p-53 * 8.0 - 4.0) * 16.0) / 16.0);
      case 1: return var(pick(2) ? "x" : "y");
      default: return pi_expr();
    }
  }
  switch (pick(8)) {
    case 0: return add(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 1: return sub(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 2: return mul(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 3: return div(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 4: return neg(random_expr(rng, depth - 1));
    case 5: return pow(random_expr(rng, depth - 1), num(pick(4)));
    case 6: return call(static_cast<Func>(pick(9)), random_expr(rng, depth - 1));
    default: return call(Func::Exp, random_expr(rng, depth - 1));
  }
}

} // namespace

TEST_CASE("print/parse round trip preserves evaluation exactly") {
  std::mt19937_64 rng(23);
  std::vector<std::string> names{"x", "y"};
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    Expr e = random_expr(rng, 4);
    Expr back = parse(to_string(e));
    for (int pt = 0; pt < 5; ++pt) {
      std::vector<double> p{-1.5 + 3.0 * (rng() >> 11) * 0x1.0p-53,
                            -1.5 + 3.0 * (rng() >> 11) * 0x1.0p-53};
      double v1, v2;
      try {
        v1 = eval_at(e, names, p);
      } catch (const EvalError&) {
        continue; // domain errors are fine; both trees throw identically below
      }
      v2 = eval_at(back, names, p);
      if (std::isnan(v1)) {
        CHECK(std::isnan(v2));
      } else {
        CHECK(v1 == v2); // bit-exact: printing preserves structure
      }
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("parser fuzz: arbitrary bytes never crash") {
  std::mt19937_64 rng(42);
  const std::string alphabet = "0123456789.+-*/^() absintancoshexpqrtlgKpi_\t\x01\xff";
  for (int trial = 0; trial < 10000; ++trial) {
    std::string s;
    int len = static_cast<int>(rng() % 64);
    for (int i = 0; i < len; ++i) {
      if (rng() % 8 == 0)
        s.push_back(static_cast<char>(rng() % 256));
      else
        s.push_back(alphabet[rng() % alphabet.size()]);
    }
    try {
      Expr e = parse(s);
      (void)to_string(e); // a successful parse must also print
    } catch (const ParseError&) {
      // positioned rejection is the only acceptable failure mode
    }
  }
  CHECK(true);
}

TEST_CASE("substitute inlines named constants") {
  Expr e = parse("K*x + c");
  Expr s = substitute(e, {{"K", 2.0}, {"c", -1.0}});
  CHECK(eval_at(s, {"x"}, {3.0}) == 5.0);
  CHECK(variables(s) == std::vector<std::string>{"x"});
}

TEST_CASE("symbolic determinant and adjugate inverse") {
  ExprMatrix m{{parse("x"), parse("1")}, {parse("1"), parse("y")}};
  Expr d = det_expr(m);
  CHECK(eval_at(d, {"x", "y"}, {3.0, 2.0}) == 5.0);
  ExprMatrix inv = inverse_exprs(m);
  // multiply back at a sample point
  std::vector<std::string> names{"x", "y"};
  std::vector<double> p{3.0, 2.0};
  double i00 = eval_at(inv[0][0], names, p), i01 = eval_at(inv[0][1], names, p);
  double i10 = eval_at(inv[1][0], names, p), i11 = eval_at(inv[1][1], names, p);
  CHECK(3.0 * i00 + 1.0 * i10 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(3.0 * i01 + 1.0 * i11 == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(1.0 * i01 + 2.0 * i11 == doctest::Approx(1.0).epsilon(1e-15));

  ExprMatrix m3{{parse("2"), parse("0"), parse("1")},
                {parse("0"), parse("x"), parse("0")},
                {parse("1"), parse("0"), parse("2")}};
  CHECK(eval_at(det_expr(m3), {"x"}, {5.0}) == 15.0);
}
