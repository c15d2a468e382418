#include "conlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace conlab {

namespace {

constexpr double kZeroDetect = 1e-9; // dichotomy threshold for rho != 0 tests

ExprMatrix metric_exprs(const MetricChart& c) {
  const int n = c.dim();
  ExprMatrix m(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = c.g(i, j);
  return m;
}

std::map<std::string, double> merged_constants(const GeodesicPair& pair) {
  std::map<std::string, double> out = pair.g.constants();
  for (const auto& [k, v] : pair.gbar.constants()) {
    auto it = out.find(k);
    if (it != out.end() && it->second != v)
      throw ChartError("constant '" + k + "' has conflicting values in the two charts");
    out.emplace(k, v);
  }
  return out;
}

void require_shared_coords(const GeodesicPair& pair) {
  if (pair.g.coords() != pair.gbar.coords())
    throw ChartError("the two metrics must share coordinate names and order");
}

} // namespace

std::string_view to_string(RhoClass c) {
  switch (c) {
    case RhoClass::Basic: return "basic";
    case RhoClass::Exceptional: return "exceptional";
    case RhoClass::Indeterminate: return "indeterminate";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Concircular fields.

ConcircularResult check_concircular(const MetricChart& chart, const ConcircularCandidate& cand,
                                    const std::vector<Point>& grid, const RunConfig& cfg) {
  const int n = chart.dim();
  BoundCovector phi(chart, cand.phi);
  BoundScalar rho(chart, cand.rho);

  ConcircularResult out;
  ResidualAccumulator acc24;
  std::vector<Eigen::VectorXd> grad_rho(grid.size()), phi_vals(grid.size());
  for (std::size_t s = 0; s < grid.size(); ++s) {
    const Point& p = grid[s];
    Eigen::MatrixXd D = cov_deriv_covector(chart, phi, p);
    Eigen::MatrixXd g = metric_at(chart, p);
    double r = evaluate(cand.rho, chart.env_at(p));
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(D(j, i) - r * g(i, j)));
    acc24.add(p, worst);
    grad_rho[s] = rho.gradient(p);
    phi_vals[s] = phi.value(p);
    out.max_abs_rho = std::max(out.max_abs_rho, std::abs(r));
    out.max_abs_grad_rho = std::max(out.max_abs_grad_rho, grad_rho[s].cwiseAbs().maxCoeff());
  }
  out.concircular = acc24.finish("concircular", cfg.tolerance("concircular"));

  if (out.max_abs_rho >= 10.0 * kZeroDetect)
    out.rho_class = RhoClass::Basic;
  else if (out.max_abs_rho <= 0.1 * kZeroDetect)
    out.rho_class = RhoClass::Exceptional;
  else
    out.rho_class = RhoClass::Indeterminate;

  out.convergent = out.max_abs_grad_rho <= cfg.tolerance("convergent");

  double K = 0.0;
  if (cand.K) {
    K = *cand.K;
  } else {
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < grid.size(); ++s) {
      num += grad_rho[s].dot(phi_vals[s]);
      den += phi_vals[s].squaredNorm();
    }
    K = den >= 1e-18 ? num / den : 0.0;
  }
  out.K_used = K;

  ResidualAccumulator acc25;
  for (std::size_t s = 0; s < grid.size(); ++s)
    acc25.add(grid[s], (grad_rho[s] - K * phi_vals[s]).cwiseAbs().maxCoeff());
  out.special = acc25.finish("special", cfg.tolerance("special"));
  out.special.note = "K=" + format_double(K) + (cand.K ? " (supplied)" : " (fitted)");

  std::string cls(to_string(out.rho_class));
  if (out.convergent) cls += ", convergent";
  if (out.special.pass) cls += ", special K=" + format_double(K);
  out.concircular.note = cls;
  return out;
}

FitK fit_k(const MetricChart& chart, const ConcircularCandidate& cand,
           const std::vector<Point>& grid) {
  BoundCovector phi(chart, cand.phi);
  BoundScalar rho(chart, cand.rho);
  double num = 0.0, den = 0.0;
  std::vector<Eigen::VectorXd> gr(grid.size()), pv(grid.size());
  for (std::size_t s = 0; s < grid.size(); ++s) {
    gr[s] = rho.gradient(grid[s]);
    pv[s] = phi.value(grid[s]);
    num += gr[s].dot(pv[s]);
    den += pv[s].squaredNorm();
  }
  if (den < 1e-18) throw DegenerateFitError("phi vanishes on the grid; K is not identifiable");
  FitK out;
  out.K = num / den;
  for (std::size_t s = 0; s < grid.size(); ++s)
    out.residual_max = std::max(out.residual_max, (gr[s] - out.K * pv[s]).cwiseAbs().maxCoeff());
  return out;
}

// ---------------------------------------------------------------------------
// Geodesic equivalence.

std::vector<Expr> psi_exprs(const GeodesicPair& pair) {
  require_shared_coords(pair);
  const int n = pair.g.dim();
  Expr det_g = simplify(det_expr(metric_exprs(pair.g)));
  Expr det_gbar = simplify(det_expr(metric_exprs(pair.gbar)));
  std::vector<Expr> psi(n);
  double c = 1.0 / (2.0 * (n + 1));
  for (int i = 0; i < n; ++i) {
    const std::string& x = pair.g.coords()[i];
    // d/dx log|det| = det'/det, so the absolute value never materializes
    Expr t = sub(div(differentiate(det_gbar, x), det_gbar), div(differentiate(det_g, x), det_g));
    psi[i] = simplify(mul(num(c), std::move(t)));
  }
  return psi;
}

Eigen::VectorXd psi_from_pair(const GeodesicPair& pair, const Point& p) {
  auto exprs = pair.psi ? pair.psi->comp : psi_exprs(pair);
  auto consts = merged_constants(pair);
  Env env(pair.g.coords(), std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
          &consts);
  Eigen::VectorXd out(pair.g.dim());
  for (int i = 0; i < pair.g.dim(); ++i) out[i] = evaluate(exprs[i], env);
  return out;
}

ResidualReport check_levi_civita(const GeodesicPair& pair, const std::vector<Point>& grid,
                                 const RunConfig& cfg) {
  require_shared_coords(pair);
  const int n = pair.g.dim();
  auto psi = pair.psi ? pair.psi->comp : psi_exprs(pair);
  auto consts = merged_constants(pair);

  ResidualAccumulator acc;
  for (const Point& p : grid) {
    auto gamma = christoffel(pair.g, p);
    Eigen::MatrixXd gb = metric_at(pair.gbar, p);
    auto dgb = metric_partials_at(pair.gbar, p);
    Env env(pair.g.coords(), std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
            &consts);
    Eigen::VectorXd ps(n);
    for (int i = 0; i < n; ++i) ps[i] = evaluate(psi[i], env);

    double worst = 0.0;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double nab = dgb[k](i, j);
          for (int s = 0; s < n; ++s) nab -= gamma[s](k, i) * gb(s, j) + gamma[s](k, j) * gb(i, s);
          double r = nab - 2.0 * ps[k] * gb(i, j) - ps[i] * gb(j, k) - ps[j] * gb(i, k);
          worst = std::max(worst, std::abs(r));
        }
    acc.add(p, worst);
  }
  return acc.finish("levicivita", cfg.tolerance("levicivita"));
}

SinyukovSolution solution_from_metrics(const GeodesicPair& pair) {
  require_shared_coords(pair);
  const int n = pair.g.dim();
  auto consts = merged_constants(pair);
  ExprMatrix gm = metric_exprs(pair.g);
  ExprMatrix gbm = metric_exprs(pair.gbar);
  ExprMatrix ginv = inverse_exprs(gm);
  ExprMatrix gbinv = inverse_exprs(gbm);
  Expr det_g = simplify(det_expr(gm));
  Expr det_gbar = simplify(det_expr(gbm));
  // e^{2 Psi} = (det gbar / det g)^{1/(n+1)}; needs a positive ratio, which
  // equal signatures guarantee. Evaluation raises a domain error otherwise.
  Expr e2psi = pow(div(det_gbar, det_g), num(1.0 / (n + 1)));

  ExprMatrix a(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Expr sum;
      for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be) {
          Expr term = mul(mul(gbinv[al][be], gm[al][i]), gm[be][j]);
          sum = sum ? add(std::move(sum), std::move(term)) : std::move(term);
        }
      a[i][j] = a[j][i] = simplify(substitute(mul(e2psi, std::move(sum)), consts));
    }

  auto psi = psi_exprs(pair);
  std::vector<Expr> lambda(n);
  for (int i = 0; i < n; ++i) {
    Expr sum;
    for (int s = 0; s < n; ++s) {
      // a^s_i = g^{st} a_{ti}
      Expr asi;
      for (int t = 0; t < n; ++t) {
        Expr term = mul(ginv[s][t], a[t][i]);
        asi = asi ? add(std::move(asi), std::move(term)) : std::move(term);
      }
      Expr term = mul(std::move(asi), psi[s]);
      sum = sum ? add(std::move(sum), std::move(term)) : std::move(term);
    }
    lambda[i] = simplify(substitute(neg(std::move(sum)), consts));
  }

  SinyukovSolution sol;
  sol.a = BilinearField(std::move(a));
  sol.lambda = CovectorField{std::move(lambda)};
  sol.mu = num(0.0);
  sol.K = 0.0;
  return sol;
}

ResidualReport check_sinyukov(const MetricChart& chart, const SinyukovSolution& sol,
                              const std::vector<Point>& grid, const RunConfig& cfg) {
  const int n = chart.dim();
  BoundBilinear a(chart, sol.a);
  BoundCovector lambda(chart, sol.lambda);
  ResidualAccumulator acc;
  for (const Point& p : grid) {
    auto na = cov_deriv_bilinear(chart, a, p);
    Eigen::VectorXd lv = lambda.value(p);
    Eigen::MatrixXd g = metric_at(chart, p);
    double worst = 0.0;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          worst = std::max(worst, std::abs(na[k](i, j) - lv[i] * g(j, k) - lv[j] * g(i, k)));
    acc.add(p, worst);
  }
  return acc.finish("sinyukov", cfg.tolerance("sinyukov"));
}

VnKReports check_vnk(const MetricChart& chart, const SinyukovSolution& sol,
                     const std::vector<Point>& grid, const RunConfig& cfg) {
  const int n = chart.dim();
  BoundBilinear a(chart, sol.a);
  BoundCovector lambda(chart, sol.lambda);
  BoundScalar mu(chart, sol.mu);
  ResidualAccumulator acc7, acc8, joint;
  for (const Point& p : grid) {
    Eigen::MatrixXd D = cov_deriv_covector(chart, lambda, p);
    Eigen::MatrixXd av = a.value(p);
    Eigen::MatrixXd g = metric_at(chart, p);
    double m = mu.value(p);
    double w7 = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        w7 = std::max(w7, std::abs(D(j, i) - sol.K * av(i, j) - m * g(i, j)));
    double w8 = (mu.gradient(p) - 2.0 * sol.K * lambda.value(p)).cwiseAbs().maxCoeff();
    acc7.add(p, w7);
    acc8.add(p, w8);
    joint.add(p, std::max(w7, w8));
  }
  VnKReports out;
  out.eq7 = acc7.finish("vnk7", cfg.tolerance("vnk7"));
  out.eq8 = acc8.finish("vnk8", cfg.tolerance("vnk8"));
  out.joint = joint.finish("vnk", cfg.tolerance("vnk"));
  return out;
}

double fit_vnk_K(const MetricChart& chart, const SinyukovSolution& sol,
                 const std::vector<Point>& grid) {
  BoundBilinear a(chart, sol.a);
  BoundCovector lambda(chart, sol.lambda);
  BoundScalar mu(chart, sol.mu);
  double num = 0.0, den = 0.0;
  for (const Point& p : grid) {
    Eigen::MatrixXd D = cov_deriv_covector(chart, lambda, p);
    Eigen::MatrixXd av = a.value(p);
    Eigen::MatrixXd g = metric_at(chart, p);
    double m = mu.value(p);
    const int n = chart.dim();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        num += (D(j, i) - m * g(i, j)) * av(i, j);
        den += av(i, j) * av(i, j);
      }
  }
  if (den < 1e-18) throw DegenerateFitError("a vanishes on the grid; K is not identifiable");
  return num / den;
}

std::vector<ResidualReport> check_corollary1(const MetricChart& chart, const SinyukovSolution& sol,
                                             int e, const std::vector<Point>& grid,
                                             const RunConfig& cfg) {
  if (sol.K == 0.0) throw PreconditionError("these identities require K != 0");
  BoundBilinear a(chart, sol.a);
  BoundCovector lambda(chart, sol.lambda);
  BoundScalar mu(chart, sol.mu);
  ResidualAccumulator a36, a37, a38;
  for (const Point& p : grid) {
    Eigen::MatrixXd g = metric_at(chart, p);
    Eigen::MatrixXd ginv = inverse_metric(chart, p);
    Eigen::MatrixXd av = a.value(p);
    Eigen::VectorXd lv = lambda.value(p);
    double m = mu.value(p);
    Eigen::MatrixXd A = ginv * av;
    Eigen::MatrixXd r36 = sol.K * (A.transpose() * av) - lv * lv.transpose() - (e / sol.K) * g;
    Eigen::VectorXd r37 = sol.K * (A.transpose() * lv) - m * lv;
    double r38 = sol.K * lv.dot(ginv * lv) - m * m + e;
    a36.add(p, r36.cwiseAbs().maxCoeff());
    a37.add(p, r37.cwiseAbs().maxCoeff());
    a38.add(p, std::abs(r38));
  }
  return {a36.finish("corollary1_36", cfg.tolerance("corollary1_36")),
          a37.finish("corollary1_37", cfg.tolerance("corollary1_37")),
          a38.finish("corollary1_38", cfg.tolerance("corollary1_38"))};
}

ESelection select_corollary1_e(const MetricChart& chart, const SinyukovSolution& sol,
                               const std::vector<Point>& grid, const RunConfig& cfg) {
  ESelection out;
  int hits = 0;
  for (int e = -1; e <= 1; ++e) {
    auto reps = check_corollary1(chart, sol, e, grid, cfg);
    bool ok = all_pass(reps);
    out.passed[e + 1] = ok;
    if (ok) {
      out.e = e;
      ++hits;
    }
  }
  out.unambiguous = hits == 1;
  return out;
}

std::vector<ResidualReport> check_vn0(const MetricChart& chart, const SinyukovSolution& sol,
                                      const std::vector<Point>& grid, const RunConfig& cfg) {
  if (sol.K != 0.0) throw PreconditionError("the flat-type system requires K = 0");
  const int n = chart.dim();
  ResidualReport eq42 = check_sinyukov(chart, sol, grid, cfg);
  eq42.equation = "vn0_42";
  eq42.tolerance = cfg.tolerance("vn0_42");
  eq42.pass = eq42.max <= eq42.tolerance;

  BoundCovector lambda(chart, sol.lambda);
  BoundScalar mu(chart, sol.mu);
  ResidualAccumulator a43, amu;
  for (const Point& p : grid) {
    Eigen::MatrixXd D = cov_deriv_covector(chart, lambda, p);
    Eigen::MatrixXd g = metric_at(chart, p);
    double m = mu.value(p);
    double w = 0.0;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) w = std::max(w, std::abs(D(k, i) - m * g(i, k)));
    a43.add(p, w);
    amu.add(p, mu.gradient(p).cwiseAbs().maxCoeff());
  }
  return {std::move(eq42), a43.finish("vn0_43", cfg.tolerance("vn0_43")),
          amu.finish("vn0_mu_const", cfg.tolerance("vn0_mu_const"))};
}

// ---------------------------------------------------------------------------
// Transfer of rho.

Expr transfer_rho_expr(const GeodesicPair& pair, const ConcircularCandidate& cand) {
  require_shared_coords(pair);
  const int n = pair.g.dim();
  auto consts = merged_constants(pair);
  ExprMatrix gm = metric_exprs(pair.g);
  Expr det_g = simplify(det_expr(gm));
  Expr det_gbar = simplify(det_expr(metric_exprs(pair.gbar)));
  // e^{-Psi} = (det g / det gbar)^{1/(2(n+1))}
  Expr factor = pow(div(det_g, det_gbar), num(1.0 / (2.0 * (n + 1))));

  ExprMatrix ginv = inverse_exprs(gm);
  auto psi = pair.psi ? pair.psi->comp : psi_exprs(pair);
  Expr dot;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Expr term = mul(mul(ginv[i][j], cand.phi.comp[i]), psi[j]);
      dot = dot ? add(std::move(dot), std::move(term)) : std::move(term);
    }
  return simplify(substitute(mul(std::move(factor), add(cand.rho, std::move(dot))), consts));
}

double transfer_rho(const GeodesicPair& pair, const ConcircularCandidate& cand, const Point& p) {
  Expr rb = transfer_rho_expr(pair, cand);
  auto consts = merged_constants(pair);
  Env env(pair.g.coords(), std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
          &consts);
  return evaluate(rb, env);
}

ConcircularCandidate transfer_candidate(const GeodesicPair& pair, const ConcircularCandidate& cand,
                                        double K_bar) {
  Expr rho_bar = transfer_rho_expr(pair, cand);
  ConcircularCandidate out;
  out.phi.comp.resize(pair.g.dim());
  for (int i = 0; i < pair.g.dim(); ++i)
    out.phi.comp[i] = differentiate(rho_bar, pair.g.coords()[i]);
  out.rho = simplify(mul(num(K_bar), rho_bar));
  out.K = K_bar;
  return out;
}

// ---------------------------------------------------------------------------
// Products of concircular fields.

SinyukovSolution concircular_pair_solution(const ConcircularCandidate& c1,
                                           const ConcircularCandidate& c2, double K) {
  const int n = static_cast<int>(c1.phi.comp.size());
  if (static_cast<int>(c2.phi.comp.size()) != n)
    throw PreconditionError("the two fields have different dimensions");
  ExprMatrix a(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      a[i][j] = a[j][i] = simplify(mul(
          num(0.5), add(mul(c1.phi.comp[i], c2.phi.comp[j]), mul(c2.phi.comp[i], c1.phi.comp[j]))));
  std::vector<Expr> lambda(n);
  for (int i = 0; i < n; ++i)
    lambda[i] = simplify(
        mul(num(0.5), add(mul(c2.rho, c1.phi.comp[i]), mul(c1.rho, c2.phi.comp[i]))));
  SinyukovSolution sol;
  sol.a = BilinearField(std::move(a));
  sol.lambda = CovectorField{std::move(lambda)};
  sol.mu = simplify(mul(c1.rho, c2.rho));
  sol.K = K;
  return sol;
}

// ---------------------------------------------------------------------------
// Parallel covector sequences.

namespace {

struct GaussLegendre {
  std::vector<double> nodes;   // on [0,1]
  std::vector<double> weights; // sum to 1
};

// Nodes of the 64-point rule by Newton iteration on the Legendre recurrence.
const GaussLegendre& gl64() {
  static const GaussLegendre rule = [] {
    const int n = 64;
    GaussLegendre r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        pp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / pp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      double w = 2.0 / ((1.0 - x * x) * pp * pp);
      r.nodes[i] = 0.5 * (1.0 - x);
      r.nodes[n - 1 - i] = 0.5 * (1.0 + x);
      r.weights[i] = r.weights[n - 1 - i] = 0.5 * w;
    }
    return r;
  }();
  return rule;
}

struct Level {
  std::function<Eigen::VectorXd(const Point&)> value;
  std::function<Eigen::MatrixXd(const Point&)> covderiv; // (k,i)
};

double path_potential(const std::function<Eigen::VectorXd(const Point&)>& field, const Point& base,
                      const Point& p) {
  const auto& rule = gl64();
  Point delta = p - base;
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    Point c = base + rule.nodes[q] * delta;
    acc += rule.weights[q] * field(c).dot(delta);
  }
  return acc;
}

} // namespace

ParallelSequenceResult build_parallel_sequence(const MetricChart& chart,
                                               const SinyukovSolution& sol,
                                               const CovectorField& phi, const Point& base,
                                               const std::vector<Point>& grid,
                                               const SequenceOptions& opt) {
  const int n = chart.dim();
  auto a = std::make_shared<BoundBilinear>(chart, sol.a);
  auto lambda = std::make_shared<BoundCovector>(chart, sol.lambda);
  auto phi1 = std::make_shared<BoundCovector>(chart, phi);

  double lam_par = 0.0, phi_par = 0.0, phi_closed = 0.0;
  for (const Point& p : grid) {
    lam_par = std::max(lam_par, cov_deriv_covector(chart, *lambda, p).cwiseAbs().maxCoeff());
    Eigen::MatrixXd D = cov_deriv_covector(chart, *phi1, p);
    phi_par = std::max(phi_par, D.cwiseAbs().maxCoeff());
    Eigen::MatrixXd P = phi1->partials(p);
    phi_closed = std::max(phi_closed, (P - P.transpose()).cwiseAbs().maxCoeff());
  }
  if (lam_par > opt.parallel_tol)
    throw PreconditionError("lambda is not absolutely parallel (max residual " +
                            format_double(lam_par) + ")");
  if (phi_par > opt.parallel_tol)
    throw PreconditionError("phi is not absolutely parallel (max residual " +
                            format_double(phi_par) + ")");
  if (phi_closed > opt.closed_tol)
    throw PreconditionError("phi is not closed, so it has no potential (max residual " +
                            format_double(phi_closed) + ")");

  auto levels = std::make_shared<std::vector<Level>>();
  levels->push_back(
      {[phi1](const Point& p) { return phi1->value(p); },
       [phi1, &chart](const Point& p) { return cov_deriv_covector(chart, *phi1, p); }});

  auto extend = [&chart, a, lambda, levels, base, n]() {
    const Level prev = levels->back();
    auto fprev = [prev, base](const Point& p) { return path_potential(prev.value, base, p); };
    Level next;
    next.value = [prev, fprev, a, lambda, &chart](const Point& p) -> Eigen::VectorXd {
      Eigen::MatrixXd A = inverse_metric(chart, p) * a->value(p);
      return A.transpose() * prev.value(p) - fprev(p) * lambda->value(p);
    };
    next.covderiv = [prev, fprev, a, lambda, &chart, n](const Point& p) -> Eigen::MatrixXd {
      Eigen::MatrixXd ginv = inverse_metric(chart, p);
      Eigen::MatrixXd A = ginv * a->value(p);
      auto cov_a = cov_deriv_bilinear(chart, *a, p);
      Eigen::VectorXd pv = prev.value(p);
      Eigen::MatrixXd pd = prev.covderiv(p);
      Eigen::VectorXd lv = lambda->value(p);
      Eigen::MatrixXd ld = cov_deriv_covector(chart, *lambda, p);
      double f = fprev(p);
      Eigen::MatrixXd out(n, n);
      for (int k = 0; k < n; ++k) {
        // (nabla_k a^t_i) phi_t = phi^T ginv (nabla_k a)
        Eigen::RowVectorXd term1 = pv.transpose() * ginv * cov_a[k];
        for (int i = 0; i < n; ++i) {
          double v = term1[i];
          for (int t = 0; t < n; ++t) v += A(t, i) * pd(k, t);
          v -= pv[k] * lv[i];   // the potential's gradient is the field itself
          v -= f * ld(k, i);
          out(k, i) = v;
        }
      }
      return out;
    };
    levels->push_back(std::move(next));
  };

  // component matrix for the span test, sampled at 4n grid points
  std::vector<Point> rank_pts;
  {
    std::size_t want = std::max<std::size_t>(1, 4 * static_cast<std::size_t>(n));
    std::size_t stride = std::max<std::size_t>(1, grid.size() / want);
    for (std::size_t s = 0; s < grid.size() && rank_pts.size() < want; s += stride)
      rank_pts.push_back(grid[s]);
  }

  ParallelSequenceResult out;
  Eigen::MatrixXd span_cols(static_cast<long>(rank_pts.size()) * n, 0);

  auto record = [&](const Level& lvl) -> SequenceMember& {
    SequenceMember m;
    for (const Point& p : grid) {
      m.values.push_back(lvl.value(p));
      m.parallel_residual = std::max(m.parallel_residual, lvl.covderiv(p).cwiseAbs().maxCoeff());
      Eigen::VectorXd lam_up = raise_index(chart, p, lambda->value(p));
      m.orthogonality = std::max(m.orthogonality, std::abs(m.values.back().dot(lam_up)));
    }
    out.members.push_back(std::move(m));
    int idx = static_cast<int>(out.members.size());
    ResidualReport rp;
    rp.equation = "sequence_parallel_" + std::to_string(idx);
    rp.max = rp.mean = out.members.back().parallel_residual;
    rp.tolerance = opt.parallel_tol;
    rp.points = static_cast<int>(grid.size());
    rp.pass = rp.max <= rp.tolerance;
    out.reports.push_back(rp);
    ResidualReport ro;
    ro.equation = "sequence_orthogonality_" + std::to_string(idx);
    ro.max = ro.mean = out.members.back().orthogonality;
    ro.tolerance = opt.orth_tol;
    ro.points = static_cast<int>(grid.size());
    ro.pass = ro.max <= ro.tolerance;
    out.reports.push_back(ro);
    return out.members.back();
  };

  auto column_of = [&](const Level& lvl) {
    Eigen::VectorXd col(static_cast<long>(rank_pts.size()) * n);
    for (std::size_t s = 0; s < rank_pts.size(); ++s)
      col.segment(static_cast<long>(s) * n, n) = lvl.value(rank_pts[s]);
    return col;
  };

  for (int alpha = 1; alpha <= opt.max_len; ++alpha) {
    const Level lvl = (*levels)[alpha - 1];
    SequenceMember& m = record(lvl);

    Eigen::VectorXd col = column_of(lvl);
    if (alpha > 1) {
      double scale = std::max(1.0, col.norm());
      Eigen::VectorXd coef = span_cols.colPivHouseholderQr().solve(col);
      if ((span_cols * coef - col).norm() / scale <= opt.rank_tol) {
        out.termination = "dependent";
        return out;
      }
    }
    span_cols.conservativeResize(Eigen::NoChange, span_cols.cols() + 1);
    span_cols.col(span_cols.cols() - 1) = col;

    if (m.orthogonality > opt.orth_tol) {
      // phi^alpha(lambda*) != 0 forces nabla phi^{alpha+1} = (phi_t lambda^t) g
      out.termination = "obstruction";
      out.obstruction_value = m.orthogonality;
      return out;
    }
    if (alpha == opt.max_len) break;
    extend();
  }
  out.termination = "max_len";
  return out;
}

} // namespace conlab
