#include "conlab/cone.hpp"

#include <cmath>

namespace conlab {

namespace {

std::string pick_x0_name(const MetricChart& base) {
  for (const char* cand : {"x0", "t0", "u0", "w0"}) {
    if (base.coord_index(cand) < 0 && !base.constants().count(cand)) return cand;
  }
  throw ChartError("no free coordinate name for the cone direction");
}

MetricChart build_cone_chart(const MetricChart& base, double K, Interval x0_domain,
                             bool positive_norm, const std::string& x0, const Expr& e2kx) {
  if (K == 0.0) throw PreconditionError("the cone construction requires K != 0");
  const int n = base.dim();
  std::vector<std::string> coords;
  coords.push_back(x0);
  for (const auto& c : base.coords()) coords.push_back(c);
  std::vector<Interval> domain;
  domain.push_back(x0_domain);
  for (const auto& iv : base.domain()) domain.push_back(iv);

  ExprMatrix G(n + 1, std::vector<Expr>(n + 1));
  G[0][0] = positive_norm ? e2kx : neg(e2kx);
  for (int i = 0; i < n; ++i) {
    G[0][i + 1] = G[i + 1][0] = num(0.0);
    for (int j = i; j < n; ++j) {
      Expr block = div(base.g(i, j), num(positive_norm ? -K : K));
      G[i + 1][j + 1] = G[j + 1][i + 1] = mul(e2kx, std::move(block));
    }
  }
  return MetricChart(std::move(coords), std::move(domain), std::move(G), base.constants());
}

} // namespace

ConeSpace::ConeSpace(const MetricChart& base, double K, Interval x0_domain, bool positive_norm)
    : base_(base), K_(K), positive_norm_(positive_norm), x0_(pick_x0_name(base)),
      ekx_(call(Func::Exp, mul(num(K), var(x0_)))),
      e2kx_(call(Func::Exp, mul(num(2.0 * K), var(x0_)))),
      cone_(build_cone_chart(base, K, x0_domain, positive_norm, x0_, e2kx_)) {}

ExprMatrix ConeSpace::inverse_metric_exprs() const {
  const int n = base_.dim();
  ExprMatrix ginv = inverse_exprs([&] {
    ExprMatrix m(n, std::vector<Expr>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m[i][j] = base_.g(i, j);
    return m;
  }());
  Expr em2kx = call(Func::Exp, mul(num(-2.0 * K_), var(x0_)));
  ExprMatrix out(n + 1, std::vector<Expr>(n + 1));
  out[0][0] = positive_norm_ ? em2kx : neg(em2kx);
  for (int i = 0; i < n; ++i) {
    out[0][i + 1] = out[i + 1][0] = num(0.0);
    for (int j = 0; j < n; ++j)
      out[i + 1][j + 1] = mul(em2kx, mul(num(positive_norm_ ? -K_ : K_), ginv[i][j]));
  }
  return out;
}

LiftedCovector lift_concircular(const ConeSpace& cone, const ConcircularCandidate& cand,
                                const std::vector<Point>& base_grid, const RunConfig& cfg) {
  if (cand.K && *cand.K != cone.K())
    throw PreconditionError("candidate K does not match the cone's K");
  ConcircularCandidate probe = cand;
  probe.K = cone.K();
  RunConfig strict = cfg;
  double tol = cfg.tolerance("lift_precondition");
  strict.tol_overrides["concircular"] = tol;
  strict.tol_overrides["special"] = tol;
  auto res = check_concircular(cone.base(), probe, base_grid, strict);
  if (!res.concircular.pass)
    throw PreconditionError("lift rejected: the concircular law fails (max residual " +
                            format_double(res.concircular.max) + ")");
  if (!res.special.pass)
    throw PreconditionError("lift rejected: the special-field law fails for K=" +
                            format_double(cone.K()) + " (max residual " +
                            format_double(res.special.max) + ")");

  LiftedCovector out;
  out.K = cone.K();
  out.comp.push_back(mul(cone.lift_factor(), cand.rho));
  for (const auto& c : cand.phi.comp) out.comp.push_back(mul(cone.lift_factor(), c));
  return out;
}

LiftedBilinear lift_solution(const ConeSpace& cone, const SinyukovSolution& sol,
                             const std::vector<Point>& base_grid, const RunConfig& cfg) {
  if (sol.K != cone.K()) throw PreconditionError("solution K does not match the cone's K");
  RunConfig strict = cfg;
  double tol = cfg.tolerance("lift_precondition");
  strict.tol_overrides["sinyukov"] = tol;
  strict.tol_overrides["vnk7"] = tol;
  strict.tol_overrides["vnk8"] = tol;
  auto rs = check_sinyukov(cone.base(), sol, base_grid, strict);
  if (!rs.pass)
    throw PreconditionError("lift rejected: the solution law fails (max residual " +
                            format_double(rs.max) + ")");
  auto rv = check_vnk(cone.base(), sol, base_grid, strict);
  if (!rv.eq7.pass)
    throw PreconditionError("lift rejected: nabla lambda = K a + mu g fails (max residual " +
                            format_double(rv.eq7.max) + ")");
  if (!rv.eq8.pass)
    throw PreconditionError("lift rejected: nabla mu = 2K lambda fails (max residual " +
                            format_double(rv.eq8.max) + ")");

  const int n = cone.base().dim();
  ExprMatrix m(n + 1, std::vector<Expr>(n + 1));
  m[0][0] = mul(cone.lift_factor2(), sol.mu);
  for (int i = 0; i < n; ++i) {
    m[0][i + 1] = m[i + 1][0] = mul(cone.lift_factor2(), sol.lambda.comp[i]);
    for (int j = i; j < n; ++j)
      m[i + 1][j + 1] = m[j + 1][i + 1] = mul(cone.lift_factor2(), sol.a(i, j));
  }
  LiftedBilinear out;
  out.a = BilinearField(std::move(m));
  out.K = cone.K();
  return out;
}

namespace {

// Strips a top-level multiplication by the given factor; falls back to an
// explicit division when the tree was not built by our lift.
Expr strip_factor(const Expr& e, const Expr& factor) {
  if (e->kind == ExprKind::Mul && e->a.get() == factor.get()) return e->b;
  return div(e, factor);
}

} // namespace

UnliftedCovector unlift_covector(const ConeSpace& cone, const LiftedCovector& lifted) {
  UnliftedCovector out;
  out.rho = strip_factor(lifted.comp[0], cone.lift_factor());
  for (std::size_t i = 1; i < lifted.comp.size(); ++i)
    out.phi.comp.push_back(strip_factor(lifted.comp[i], cone.lift_factor()));
  return out;
}

SinyukovSolution unlift_solution(const ConeSpace& cone, const LiftedBilinear& lifted) {
  const int n = lifted.a.dim() - 1;
  SinyukovSolution out;
  out.mu = strip_factor(lifted.a(0, 0), cone.lift_factor2());
  for (int i = 0; i < n; ++i) out.lambda.comp.push_back(strip_factor(lifted.a(0, i + 1), cone.lift_factor2()));
  ExprMatrix m(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      m[i][j] = m[j][i] = strip_factor(lifted.a(i + 1, j + 1), cone.lift_factor2());
  out.a = BilinearField(std::move(m));
  out.K = cone.K();
  return out;
}

ResidualReport check_parallel_covector(const ConeSpace& cone, const std::vector<Expr>& comp,
                                       const std::vector<Point>& cone_grid, const RunConfig& cfg) {
  BoundCovector f(cone.chart(), CovectorField{comp});
  ResidualAccumulator acc;
  for (const Point& p : cone_grid)
    acc.add(p, cov_deriv_covector(cone.chart(), f, p).cwiseAbs().maxCoeff());
  return acc.finish("parallel_covector", cfg.tolerance("parallel_covector"));
}

ResidualReport check_parallel_bilinear(const ConeSpace& cone, const BilinearField& a,
                                       const std::vector<Point>& cone_grid, const RunConfig& cfg) {
  BoundBilinear f(cone.chart(), a);
  ResidualAccumulator acc;
  for (const Point& p : cone_grid) {
    auto d = cov_deriv_bilinear(cone.chart(), f, p);
    double worst = 0.0;
    for (const auto& mk : d) worst = std::max(worst, mk.cwiseAbs().maxCoeff());
    acc.add(p, worst);
  }
  return acc.finish("parallel_bilinear", cfg.tolerance("parallel_bilinear"));
}

ConvergentFieldReports check_convergent_field(const ConeSpace& cone,
                                              const std::vector<Point>& cone_grid,
                                              const RunConfig& cfg) {
  const int N = cone.chart().dim();
  std::vector<Expr> comp(N, num(0.0));
  comp[0] = num(1.0);
  BoundCovector f(cone.chart(), CovectorField{comp});
  ResidualAccumulator deriv, norm;
  for (const Point& p : cone_grid) {
    Eigen::MatrixXd D = cov_deriv_vector(cone.chart(), f, p);
    double worst = 0.0;
    for (int J = 0; J < N; ++J)
      for (int I = 0; I < N; ++I)
        worst = std::max(worst, std::abs(D(J, I) - (I == J ? cone.K() : 0.0)));
    deriv.add(p, worst);
    double g00 = evaluate(cone.chart().g(0, 0), cone.chart().env_at(p));
    norm.add(p, std::max(0.0, g00)); // the field's square norm is G_00 itself
  }
  ConvergentFieldReports out;
  out.deriv = deriv.finish("convergent_field_deriv", cfg.tolerance("convergent_field_deriv"));
  out.norm = norm.finish("convergent_field_norm", cfg.tolerance("convergent_field_norm"));
  if (!out.norm.pass) out.norm.note = "square norm is positive somewhere; adapted form violated";
  return out;
}

std::vector<ResidualReport> check_cone_connection(const ConeSpace& cone,
                                                  const std::vector<Point>& cone_grid,
                                                  const RunConfig& cfg) {
  const int n = cone.base().dim();
  ResidualAccumulator eq16, closed;
  for (const Point& P : cone_grid) {
    auto gamma = christoffel(cone.chart(), P);
    Point p = P.tail(n);
    auto gamma_base = christoffel(cone.base(), p);
    Eigen::MatrixXd g = metric_at(cone.base(), p);

    double w16 = 0.0;
    for (int I = 0; I <= n; ++I)
      for (int J = 0; J <= n; ++J)
        w16 = std::max(w16, std::abs(gamma[I](0, J) - (I == J ? cone.K() : 0.0)));
    eq16.add(P, w16);

    double wc = std::abs(gamma[0](0, 0) - cone.K());
    for (int j = 1; j <= n; ++j) wc = std::max(wc, std::abs(gamma[0](0, j)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        wc = std::max(wc, std::abs(gamma[0](i + 1, j + 1) - g(i, j)));
        for (int k = 0; k < n; ++k)
          wc = std::max(wc, std::abs(gamma[k + 1](i + 1, j + 1) - gamma_base[k](i, j)));
      }
    closed.add(P, wc);
  }
  auto r16 = eq16.finish("cone_eq16", cfg.tolerance("cone_eq16"));
  r16.note = "mixed block Gamma^i_{0j} = K delta^i_j generically; the plain delta^i_j "
             "table value holds only when K = 1";
  return {std::move(r16), closed.finish("cone_closed_form", cfg.tolerance("cone_closed_form"))};
}

ResidualReport check_cone_inverse(const ConeSpace& cone, const std::vector<Point>& cone_grid,
                                  const RunConfig& cfg) {
  const int N = cone.chart().dim();
  ExprMatrix inv = cone.inverse_metric_exprs();
  ResidualAccumulator acc;
  for (const Point& p : cone_grid) {
    Eigen::MatrixXd G = metric_at(cone.chart(), p);
    Env env = cone.chart().env_at(p);
    Eigen::MatrixXd Ginv(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) Ginv(i, j) = evaluate(inv[i][j], env);
    acc.add(p, (G * Ginv - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff());
  }
  return acc.finish("cone_inverse", cfg.tolerance("cone_inverse"));
}

} // namespace conlab
