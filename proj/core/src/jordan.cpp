#include "conlab/jordan.hpp"

#include <cmath>

namespace conlab {

namespace {

ExprMatrix metric_exprs(const MetricChart& c) {
  const int n = c.dim();
  ExprMatrix m(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = c.g(i, j);
  return m;
}

Expr acc_add(Expr& acc, Expr term) {
  acc = acc ? add(std::move(acc), std::move(term)) : std::move(term);
  return acc;
}

} // namespace

JordanElement JordanElement::admit(const MetricChart& chart, SinyukovSolution sol,
                                   const std::vector<Point>& grid, const RunConfig& cfg) {
  if (sol.K == 0.0) throw PreconditionError("the algebra is defined for K != 0");
  RunConfig strict = cfg;
  double tol = cfg.tolerance("admission");
  strict.tol_overrides["sinyukov"] = tol;
  strict.tol_overrides["vnk7"] = tol;
  strict.tol_overrides["vnk8"] = tol;
  auto rs = check_sinyukov(chart, sol, grid, strict);
  if (!rs.pass)
    throw PreconditionError("element rejected: solution law residual " + format_double(rs.max));
  auto rv = check_vnk(chart, sol, grid, strict);
  if (!rv.eq7.pass || !rv.eq8.pass)
    throw PreconditionError("element rejected: constant-K law residual " +
                            format_double(std::max(rv.eq7.max, rv.eq8.max)));
  return JordanElement(&chart, std::move(sol));
}

SinyukovSolution unit_solution(const MetricChart& chart, double K) {
  if (K == 0.0) throw PreconditionError("the unit needs K != 0");
  const int n = chart.dim();
  ExprMatrix a(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a[i][j] = a[j][i] = simplify(div(chart.g(i, j), num(K)));
  SinyukovSolution sol;
  sol.a = BilinearField(std::move(a));
  sol.lambda.comp.assign(n, num(0.0));
  sol.mu = num(-1.0);
  sol.K = K;
  return sol;
}

SinyukovSolution jordan_product_solution(const MetricChart& chart, const SinyukovSolution& s1,
                                         const SinyukovSolution& s2) {
  if (s1.K != s2.K) throw PreconditionError("product of elements with different K");
  const int n = chart.dim();
  const double K = s1.K;
  ExprMatrix B = inverse_exprs(metric_exprs(chart));
  Expr half = num(0.5);
  Expr Kc = num(K);

  // Every sum below pairs the (1,2) and (2,1) terms inside one addition, so
  // swapping the operands permutes only commutative IEEE operations and the
  // evaluated product is bit-identical under the swap.
  ExprMatrix a3(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Expr sum;
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t)
          acc_add(sum, mul(B[s][t], add(mul(s1.a(i, s), s2.a(t, j)),
                                        mul(s2.a(i, s), s1.a(t, j)))));
      Expr lam = add(mul(s1.lambda.comp[i], s2.lambda.comp[j]),
                     mul(s2.lambda.comp[i], s1.lambda.comp[j]));
      a3[i][j] = a3[j][i] = simplify(mul(half, sub(mul(Kc, std::move(sum)), std::move(lam))));
    }

  std::vector<Expr> l3(n);
  for (int i = 0; i < n; ++i) {
    Expr sum;
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t)
        acc_add(sum, mul(B[s][t], add(mul(s1.lambda.comp[s], s2.a(t, i)),
                                      mul(s2.lambda.comp[s], s1.a(t, i)))));
    Expr mus = add(mul(s1.mu, s2.lambda.comp[i]), mul(s2.mu, s1.lambda.comp[i]));
    l3[i] = simplify(mul(half, sub(mul(Kc, std::move(sum)), std::move(mus))));
  }

  Expr dot;
  for (int s = 0; s < n; ++s) {
    acc_add(dot, mul(B[s][s], mul(s1.lambda.comp[s], s2.lambda.comp[s])));
    for (int t = s + 1; t < n; ++t)
      acc_add(dot, mul(B[s][t], add(mul(s1.lambda.comp[s], s2.lambda.comp[t]),
                                    mul(s1.lambda.comp[t], s2.lambda.comp[s]))));
  }
  Expr mu3 = simplify(sub(mul(Kc, std::move(dot)), mul(s1.mu, s2.mu)));

  SinyukovSolution out;
  out.a = BilinearField(std::move(a3));
  out.lambda = CovectorField{std::move(l3)};
  out.mu = std::move(mu3);
  out.K = K;
  return out;
}

JordanElement jordan_product(const JordanElement& e1, const JordanElement& e2,
                             const std::vector<Point>& grid, const RunConfig& cfg) {
  if (&e1.chart() != &e2.chart()) throw PreconditionError("product across different charts");
  RunConfig closure = cfg;
  double tol = cfg.tolerance("closure");
  closure.tol_overrides["admission"] = tol;
  SinyukovSolution prod = jordan_product_solution(e1.chart(), e1.solution(), e2.solution());
  return JordanElement::admit(e1.chart(), std::move(prod), grid, closure);
}

// ---------------------------------------------------------------------------
// Sampled products (the n >= 4 route).

SampledSolution jordan_product_sampled(const JordanElement& e1, const JordanElement& e2,
                                       const std::vector<Point>& grid) {
  if (&e1.chart() != &e2.chart()) throw PreconditionError("product across different charts");
  if (e1.K() != e2.K()) throw PreconditionError("product of elements with different K");
  const MetricChart& chart = e1.chart();
  const int n = chart.dim();
  const double K = e1.K();

  BoundBilinear a1(chart, e1.solution().a), a2(chart, e2.solution().a);
  BoundCovector l1(chart, e1.solution().lambda), l2(chart, e2.solution().lambda);
  BoundScalar m1(chart, e1.solution().mu), m2(chart, e2.solution().mu);

  SampledSolution out;
  out.grid = grid;
  out.K = K;
  out.note = "sampled values; valid on the generating grid only";
  for (const Point& p : grid) {
    Eigen::MatrixXd B = inverse_metric(chart, p);
    auto dg = metric_partials_at(chart, p);
    Eigen::MatrixXd A1 = a1.value(p), A2 = a2.value(p);
    auto dA1 = a1.partials(p), dA2 = a2.partials(p);
    Eigen::VectorXd L1 = l1.value(p), L2 = l2.value(p);
    Eigen::MatrixXd dL1 = l1.partials(p), dL2 = l2.partials(p);
    double M1 = m1.value(p), M2 = m2.value(p);
    Eigen::VectorXd dM1 = m1.gradient(p), dM2 = m2.gradient(p);

    Eigen::MatrixXd a3 =
        0.5 * (K * (A1 * B * A2 + A2 * B * A1) - L1 * L2.transpose() - L2 * L1.transpose());
    Eigen::VectorXd l3 =
        0.5 * (K * ((B * A2).transpose() * L1 + (B * A1).transpose() * L2) - M1 * L2 - M2 * L1);
    double mu3 = K * L1.dot(B * L2) - M1 * M2;

    std::vector<Eigen::MatrixXd> da3(n);
    Eigen::MatrixXd dl3(n, n);
    Eigen::VectorXd dmu3(n);
    for (int k = 0; k < n; ++k) {
      Eigen::MatrixXd dB = -B * dg[k] * B;
      da3[k] = 0.5 * (K * (dA1[k] * B * A2 + A1 * dB * A2 + A1 * B * dA2[k] + dA2[k] * B * A1 +
                           A2 * dB * A1 + A2 * B * dA1[k]) -
                      dL1.row(k).transpose() * L2.transpose() - L1 * dL2.row(k) -
                      dL2.row(k).transpose() * L1.transpose() - L2 * dL1.row(k));
      Eigen::VectorXd t =
          0.5 * (K * ((dB * A2 + B * dA2[k]).transpose() * L1 +
                      (B * A2).transpose() * dL1.row(k).transpose() +
                      (dB * A1 + B * dA1[k]).transpose() * L2 +
                      (B * A1).transpose() * dL2.row(k).transpose()) -
                 dM1[k] * L2 - M1 * dL2.row(k).transpose() - dM2[k] * L1 -
                 M2 * dL1.row(k).transpose());
      dl3.row(k) = t.transpose();
      dmu3[k] = K * (dL1.row(k) * B * L2 + L1.transpose() * dB * L2 +
                     L1.transpose() * B * dL2.row(k).transpose())(0) -
                dM1[k] * M2 - M1 * dM2[k];
    }
    out.a.push_back(std::move(a3));
    out.lambda.push_back(std::move(l3));
    out.mu.push_back(mu3);
    out.da.push_back(std::move(da3));
    out.dlambda.push_back(std::move(dl3));
    out.dmu.push_back(std::move(dmu3));
  }
  return out;
}

ResidualReport check_sinyukov_sampled(const MetricChart& chart, const SampledSolution& sol,
                                      const RunConfig& cfg) {
  const int n = chart.dim();
  ResidualAccumulator acc;
  for (std::size_t s = 0; s < sol.grid.size(); ++s) {
    const Point& p = sol.grid[s];
    auto gamma = christoffel(chart, p);
    Eigen::MatrixXd g = metric_at(chart, p);
    double worst = 0.0;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double nab = sol.da[s][k](i, j);
          for (int t = 0; t < n; ++t)
            nab -= gamma[t](k, i) * sol.a[s](t, j) + gamma[t](k, j) * sol.a[s](i, t);
          worst = std::max(worst,
                           std::abs(nab - sol.lambda[s][i] * g(j, k) - sol.lambda[s][j] * g(i, k)));
        }
    acc.add(p, worst);
  }
  return acc.finish("sinyukov", cfg.tolerance("sinyukov"));
}

VnKReports check_vnk_sampled(const MetricChart& chart, const SampledSolution& sol,
                             const RunConfig& cfg) {
  const int n = chart.dim();
  ResidualAccumulator acc7, acc8, joint;
  for (std::size_t s = 0; s < sol.grid.size(); ++s) {
    const Point& p = sol.grid[s];
    auto gamma = christoffel(chart, p);
    Eigen::MatrixXd g = metric_at(chart, p);
    double w7 = 0.0;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        double nab = sol.dlambda[s](k, i);
        for (int t = 0; t < n; ++t) nab -= gamma[t](k, i) * sol.lambda[s][t];
        w7 = std::max(w7, std::abs(nab - sol.K * sol.a[s](i, k) - sol.mu[s] * g(i, k)));
      }
    double w8 = (sol.dmu[s] - 2.0 * sol.K * sol.lambda[s]).cwiseAbs().maxCoeff();
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

// ---------------------------------------------------------------------------
// Brackets on the cone.

BilinearField jordan_bracket_exprs(const ConeSpace& cone, const BilinearField& f1,
                                   const BilinearField& f2) {
  const int N = cone.chart().dim();
  if (f1.dim() != N || f2.dim() != N)
    throw PreconditionError("parallel forms do not match the cone dimension");
  ExprMatrix Ginv = cone.inverse_metric_exprs();
  Expr half = num(0.5);
  ExprMatrix out(N, std::vector<Expr>(N));
  for (int I = 0; I < N; ++I)
    for (int J = I; J < N; ++J) {
      Expr sum;
      for (int D = 0; D < N; ++D)
        for (int T = 0; T < N; ++T) {
          if (Ginv[D][T]->kind == ExprKind::Number && Ginv[D][T]->number == 0.0) continue;
          acc_add(sum, mul(Ginv[D][T], add(mul(f1(D, I), f2(T, J)), mul(f1(D, J), f2(T, I)))));
        }
      out[I][J] = out[J][I] = simplify(mul(half, std::move(sum)));
    }
  return BilinearField(std::move(out));
}

LiftedBilinear jordan_bracket(const ConeSpace& cone, const LiftedBilinear& f1,
                              const LiftedBilinear& f2, const std::vector<Point>& cone_grid,
                              const RunConfig& cfg) {
  if (f1.K != cone.K() || f2.K != cone.K())
    throw PreconditionError("forms were lifted with a different K than this cone");
  LiftedBilinear out;
  out.a = jordan_bracket_exprs(cone, f1.a, f2.a);
  out.K = cone.K();
  auto rep = check_parallel_bilinear(cone, out.a, cone_grid, cfg);
  if (!rep.pass)
    throw PreconditionError("bracket result is not parallel (max residual " +
                            format_double(rep.max) + ")");
  return out;
}

ResidualReport check_isomorphism(const ConeSpace& cone, const JordanElement& e1,
                                 const JordanElement& e2, const std::vector<Point>& base_grid,
                                 const std::vector<Point>& cone_grid, const RunConfig& cfg) {
  SinyukovSolution prod = jordan_product_solution(e1.chart(), e1.solution(), e2.solution());
  LiftedBilinear lifted_prod = lift_solution(cone, prod, base_grid, cfg);
  LiftedBilinear b1 = lift_solution(cone, e1.solution(), base_grid, cfg);
  LiftedBilinear b2 = lift_solution(cone, e2.solution(), base_grid, cfg);
  BilinearField bracket = jordan_bracket_exprs(cone, b1.a, b2.a);

  const int N = cone.chart().dim();
  ResidualAccumulator acc;
  for (const Point& p : cone_grid) {
    Env env = cone.chart().env_at(p);
    double worst = 0.0;
    for (int I = 0; I < N; ++I)
      for (int J = I; J < N; ++J)
        worst = std::max(worst,
                         std::abs(evaluate(lifted_prod.a(I, J), env) - evaluate(bracket(I, J), env)));
    acc.add(p, worst);
  }
  return acc.finish("isomorphism", cfg.tolerance("isomorphism"));
}

// ---------------------------------------------------------------------------
// Axioms.

namespace {

double solution_diff_max(const MetricChart& chart, const SinyukovSolution& s1,
                         const SinyukovSolution& s2, const Point& p) {
  const int n = chart.dim();
  Env env = chart.env_at(p);
  double worst = std::abs(evaluate(s1.mu, env) - evaluate(s2.mu, env));
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst,
                     std::abs(evaluate(s1.lambda.comp[i], env) - evaluate(s2.lambda.comp[i], env)));
    for (int j = i; j < n; ++j)
      worst = std::max(worst, std::abs(evaluate(s1.a(i, j), env) - evaluate(s2.a(i, j), env)));
  }
  return worst;
}

} // namespace

AxiomsResult check_jordan_axioms(const std::vector<JordanElement>& elements,
                                 const std::vector<Point>& grid, const RunConfig& cfg) {
  if (elements.empty()) throw PreconditionError("need at least one admitted element");
  const MetricChart& chart = elements.front().chart();
  const double K = elements.front().K();
  for (const auto& e : elements)
    if (&e.chart() != &chart || e.K() != K)
      throw PreconditionError("elements live on different charts or constants");

  ResidualAccumulator comm, unit_acc, jordan_acc;
  SinyukovSolution unit = unit_solution(chart, K);

  for (std::size_t i = 0; i < elements.size(); ++i) {
    const auto& x = elements[i].solution();
    SinyukovSolution ue = jordan_product_solution(chart, unit, x);
    SinyukovSolution eu = jordan_product_solution(chart, x, unit);
    SinyukovSolution xx = jordan_product_solution(chart, x, x);
    for (const Point& p : grid) {
      unit_acc.add(p, std::max(solution_diff_max(chart, ue, x, p),
                               solution_diff_max(chart, eu, x, p)));
    }
    for (std::size_t j = 0; j < elements.size(); ++j) {
      const auto& y = elements[j].solution();
      SinyukovSolution xy = jordan_product_solution(chart, x, y);
      SinyukovSolution yx = jordan_product_solution(chart, y, x);
      SinyukovSolution lhs = jordan_product_solution(chart, xy, xx);
      SinyukovSolution rhs = jordan_product_solution(chart, x, jordan_product_solution(chart, y, xx));
      for (const Point& p : grid) {
        comm.add(p, solution_diff_max(chart, xy, yx, p));
        jordan_acc.add(p, solution_diff_max(chart, lhs, rhs, p));
      }
    }
  }

  AxiomsResult out;
  out.commutativity = comm.finish("commutativity", cfg.tolerance("commutativity"));
  out.unit_law = unit_acc.finish("unit_law", cfg.tolerance("unit_law"));
  out.jordan_identity = jordan_acc.finish("jordan_identity", cfg.tolerance("jordan_identity"));
  return out;
}

// ---------------------------------------------------------------------------
// The concircular ideal.

namespace {

// Stacked (a upper triangle, lambda, mu) samples of one solution.
Eigen::VectorXd stack_solution(const MetricChart& chart, const SinyukovSolution& s,
                               const std::vector<Point>& grid) {
  const int n = chart.dim();
  const int per = n * (n + 1) / 2 + n + 1;
  Eigen::VectorXd out(static_cast<long>(grid.size()) * per);
  long at = 0;
  for (const Point& p : grid) {
    Env env = chart.env_at(p);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) out[at++] = evaluate(s.a(i, j), env);
    for (int i = 0; i < n; ++i) out[at++] = evaluate(s.lambda.comp[i], env);
    out[at++] = evaluate(s.mu, env);
  }
  return out;
}

} // namespace

IdealCheck check_ideal_membership(const MetricChart& chart,
                                  const std::vector<ConcircularCandidate>& basis, double K,
                                  const JordanElement& element, const std::vector<Point>& grid,
                                  const RunConfig& cfg) {
  const int n = chart.dim();
  const int m = static_cast<int>(basis.size());
  if (m == 0) throw PreconditionError("empty concircular basis");
  const double tol = cfg.tolerance("ideal");

  // generator triples for every unordered pair
  std::vector<std::pair<int, int>> pairs;
  std::vector<SinyukovSolution> gens;
  for (int al = 0; al < m; ++al)
    for (int be = al; be < m; ++be) {
      pairs.emplace_back(al, be);
      gens.push_back(concircular_pair_solution(basis[al], basis[be], K));
    }
  const int M = static_cast<int>(gens.size());

  Eigen::MatrixXd span(stack_solution(chart, gens[0], grid).size(), M);
  for (int c = 0; c < M; ++c) span.col(c) = stack_solution(chart, gens[c], grid);

  IdealCheck out;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(span);
  qr.setThreshold(1e-10);
  out.basis_rank_ok = qr.rank() == M;

  // products of the element with every generator, projected onto the span
  std::vector<Eigen::VectorXd> product_samples;
  for (int c = 0; c < M; ++c) {
    SinyukovSolution prod = jordan_product_solution(chart, element.solution(), gens[c]);
    Eigen::VectorXd v = stack_solution(chart, prod, grid);
    Eigen::VectorXd coef = qr.solve(v);
    double resid = (span * coef - v).cwiseAbs().maxCoeff();
    ResidualReport rep;
    rep.equation = "ideal_membership_" + std::to_string(pairs[c].first) + "_" +
                   std::to_string(pairs[c].second);
    rep.max = rep.mean = resid;
    rep.tolerance = tol;
    rep.points = static_cast<int>(grid.size());
    rep.pass = resid <= tol;
    out.memberships.push_back(std::move(rep));
    product_samples.push_back(std::move(v));
  }

  // recover F from Phi^b_i = K (A phi^b)_i - rho^b lambda_i and its scalar
  // block P^b = K g^{-1}(lambda, phi^b) - mu rho^b
  std::vector<BoundCovector> bphi;
  std::vector<BoundScalar> brho;
  for (const auto& c : basis) {
    bphi.emplace_back(chart, c.phi);
    brho.emplace_back(chart, c.rho);
  }
  BoundBilinear ba(chart, element.solution().a);
  BoundCovector bl(chart, element.solution().lambda);
  BoundScalar bm(chart, element.solution().mu);

  const long rows = static_cast<long>(grid.size()) * (n + 1);
  Eigen::MatrixXd basis_mat(rows, m);
  Eigen::MatrixXd phi_mat(rows, m);
  for (std::size_t s = 0; s < grid.size(); ++s) {
    const Point& p = grid[s];
    Eigen::MatrixXd ginv = inverse_metric(chart, p);
    Eigen::MatrixXd av = ba.value(p);
    Eigen::VectorXd lv = bl.value(p);
    double mv = bm.value(p);
    for (int b = 0; b < m; ++b) {
      Eigen::VectorXd ph = bphi[b].value(p);
      double rh = brho[b].value(p);
      Eigen::VectorXd Phi = K * (av * ginv * ph) - rh * lv;
      double P = K * lv.dot(ginv * ph) - mv * rh;
      long base = static_cast<long>(s) * (n + 1);
      basis_mat(base, b) = rh;
      phi_mat(base, b) = P;
      for (int i = 0; i < n; ++i) {
        basis_mat(base + 1 + i, b) = ph[i];
        phi_mat(base + 1 + i, b) = Phi[i];
      }
    }
  }
  out.F = basis_mat.colPivHouseholderQr().solve(phi_mat).transpose(); // F(b,c): Phi^b = F(b,c) phi^c

  // reproduce each product from F: e * gen(C) = sum over ordered (al,ga) of
  // D_{al,ga} gen(al,ga) with D = (C F + (C F)^T) / 2
  double recon_worst = 0.0;
  for (int c = 0; c < M; ++c) {
    auto [al0, be0] = pairs[c];
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
    if (al0 == be0)
      C(al0, be0) = 1.0;
    else
      C(al0, be0) = C(be0, al0) = 0.5;
    Eigen::MatrixXd D = 0.5 * (C * out.F + (C * out.F).transpose());
    Eigen::VectorXd predicted = Eigen::VectorXd::Zero(span.rows());
    for (int k = 0; k < M; ++k) {
      auto [al, ga] = pairs[k];
      double coef = al == ga ? D(al, ga) : 2.0 * D(al, ga);
      predicted += coef * span.col(k);
    }
    recon_worst = std::max(recon_worst, (product_samples[c] - predicted).cwiseAbs().maxCoeff());
  }
  out.reconstruction.equation = "ideal_reconstruction";
  out.reconstruction.max = out.reconstruction.mean = recon_worst;
  out.reconstruction.tolerance = tol;
  out.reconstruction.points = static_cast<int>(grid.size());
  out.reconstruction.pass = recon_worst <= tol;
  return out;
}

} // namespace conlab
