#include "conlab/geometry.hpp"

#include <cmath>
#include <sstream>

namespace conlab {

namespace {

std::string point_str(const Point& p) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

} // namespace

Eigen::MatrixXd metric_at(const MetricChart& chart, const Point& p) {
  const int n = chart.dim();
  Env env = chart.env_at(p);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) g(i, j) = g(j, i) = evaluate(chart.g(i, j), env);
  return g;
}

std::vector<Eigen::MatrixXd> metric_partials_at(const MetricChart& chart, const Point& p) {
  const int n = chart.dim();
  Env env = chart.env_at(p);
  std::vector<Eigen::MatrixXd> dg(n, Eigen::MatrixXd(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) dg[k](i, j) = dg[k](j, i) = evaluate(chart.dg(k, i, j), env);
  return dg;
}

double metric_det(const MetricChart& chart, const Point& p) {
  return metric_at(chart, p).determinant();
}

Eigen::MatrixXd inverse_metric(const MetricChart& chart, const Point& p) {
  Eigen::MatrixXd g = metric_at(chart, p);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  if (!lu.isInvertible())
    throw SingularMetricError("metric is singular at " + point_str(p), p);
  return lu.inverse();
}

std::vector<Eigen::MatrixXd> christoffel(const Eigen::MatrixXd& ginv,
                                         const std::vector<Eigen::MatrixXd>& dg) {
  const int n = static_cast<int>(ginv.rows());
  std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double sum = 0.0;
        for (int s = 0; s < n; ++s)
          sum += ginv(k, s) * (dg[i](s, j) + dg[j](s, i) - dg[s](i, j));
        gamma[k](i, j) = gamma[k](j, i) = 0.5 * sum;
      }
  return gamma;
}

std::vector<Eigen::MatrixXd> christoffel(const MetricChart& chart, const Point& p) {
  return christoffel(inverse_metric(chart, p), metric_partials_at(chart, p));
}

BoundCovector::BoundCovector(const MetricChart& chart, const CovectorField& field)
    : chart_(&chart), comp_(field.comp) {
  const int n = chart.dim();
  if (static_cast<int>(comp_.size()) != n)
    throw ChartError("covector component count does not match chart dimension");
  d_.resize(n * n);
  for (int i = 0; i < n; ++i) {
    chart.validate_bound(comp_[i], "covector component " + std::to_string(i));
    for (int k = 0; k < n; ++k) d_[k * n + i] = differentiate(comp_[i], chart.coords()[k]);
  }
}

Eigen::VectorXd BoundCovector::value(const Point& p) const {
  const int n = chart_->dim();
  Env env = chart_->env_at(p);
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = evaluate(comp_[i], env);
  return out;
}

Eigen::MatrixXd BoundCovector::partials(const Point& p) const {
  const int n = chart_->dim();
  Env env = chart_->env_at(p);
  Eigen::MatrixXd out(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) out(k, i) = evaluate(d_[k * n + i], env);
  return out;
}

BoundBilinear::BoundBilinear(const MetricChart& chart, BilinearField field)
    : chart_(&chart), field_(std::move(field)) {
  const int n = chart.dim();
  if (field_.dim() != n) throw ChartError("bilinear field dimension does not match chart");
  d_.resize(n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      chart.validate_bound(field_(i, j), "bilinear component");
      for (int k = 0; k < n; ++k) {
        Expr d = differentiate(field_(i, j), chart.coords()[k]);
        d_[(k * n + i) * n + j] = d;
        d_[(k * n + j) * n + i] = d;
      }
    }
}

Eigen::MatrixXd BoundBilinear::value(const Point& p) const {
  const int n = chart_->dim();
  Env env = chart_->env_at(p);
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) out(i, j) = out(j, i) = evaluate(field_(i, j), env);
  return out;
}

std::vector<Eigen::MatrixXd> BoundBilinear::partials(const Point& p) const {
  const int n = chart_->dim();
  Env env = chart_->env_at(p);
  std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        out[k](i, j) = out[k](j, i) = evaluate(d_[(k * n + i) * n + j], env);
  return out;
}

BoundScalar::BoundScalar(const MetricChart& chart, const Expr& e) : chart_(&chart), e_(e) {
  chart.validate_bound(e, "scalar field");
  for (int k = 0; k < chart.dim(); ++k) d_.push_back(differentiate(e, chart.coords()[k]));
}

double BoundScalar::value(const Point& p) const { return evaluate(e_, chart_->env_at(p)); }

Eigen::VectorXd BoundScalar::gradient(const Point& p) const {
  Env env = chart_->env_at(p);
  Eigen::VectorXd out(chart_->dim());
  for (int k = 0; k < chart_->dim(); ++k) out[k] = evaluate(d_[k], env);
  return out;
}

Eigen::MatrixXd cov_deriv_covector(const MetricChart& chart, const BoundCovector& phi,
                                   const Point& p) {
  const int n = chart.dim();
  auto gamma = christoffel(chart, p);
  Eigen::VectorXd f = phi.value(p);
  Eigen::MatrixXd d = phi.partials(p);
  Eigen::MatrixXd out(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      double sum = d(k, i);
      for (int s = 0; s < n; ++s) sum -= gamma[s](k, i) * f[s];
      out(k, i) = sum;
    }
  return out;
}

Eigen::MatrixXd cov_deriv_vector(const MetricChart& chart, const BoundCovector& v, const Point& p) {
  const int n = chart.dim();
  auto gamma = christoffel(chart, p);
  Eigen::VectorXd f = v.value(p);
  Eigen::MatrixXd d = v.partials(p);
  Eigen::MatrixXd out(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      double sum = d(k, i);
      for (int s = 0; s < n; ++s) sum += gamma[i](k, s) * f[s];
      out(k, i) = sum;
    }
  return out;
}

std::vector<Eigen::MatrixXd> cov_deriv_bilinear(const MetricChart& chart, const BoundBilinear& a,
                                                const Point& p) {
  const int n = chart.dim();
  auto gamma = christoffel(chart, p);
  Eigen::MatrixXd av = a.value(p);
  auto d = a.partials(p);
  std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double sum = d[k](i, j);
        for (int s = 0; s < n; ++s)
          sum -= gamma[s](k, i) * av(s, j) + gamma[s](k, j) * av(i, s);
        out[k](i, j) = out[k](j, i) = sum;
      }
  return out;
}

Eigen::VectorXd raise_index(const MetricChart& chart, const Point& p, const Eigen::VectorXd& w) {
  Eigen::MatrixXd g = metric_at(chart, p);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  if (!lu.isInvertible())
    throw SingularMetricError("metric is singular at " + point_str(p), p);
  return lu.solve(w);
}

Eigen::VectorXd lower_index(const MetricChart& chart, const Point& p, const Eigen::VectorXd& v) {
  return metric_at(chart, p) * v;
}

namespace {

struct GeodesicState {
  Point x;
  Eigen::VectorXd v;
};

GeodesicState rhs(const MetricChart& chart, const GeodesicState& s) {
  auto gamma = christoffel(chart, s.x);
  const int n = chart.dim();
  Eigen::VectorXd acc(n);
  for (int k = 0; k < n; ++k) acc[k] = -s.v.dot(gamma[k] * s.v);
  return {s.v, acc};
}

} // namespace

Trajectory integrate_geodesic(const MetricChart& chart, const Point& x0, const Eigen::VectorXd& v0,
                              int steps, double dt) {
  if (!chart.in_domain(x0)) throw ChartError("geodesic start point is outside the domain box");
  Trajectory out;
  out.requested_steps = steps;
  GeodesicState s{x0, v0};
  out.steps.push_back({0.0, s.x, s.v});
  for (int step = 0; step < steps; ++step) {
    GeodesicState k1 = rhs(chart, s);
    GeodesicState mid1{s.x + 0.5 * dt * k1.x, s.v + 0.5 * dt * k1.v};
    if (!chart.in_domain(mid1.x)) { out.truncated = true; break; }
    GeodesicState k2 = rhs(chart, mid1);
    GeodesicState mid2{s.x + 0.5 * dt * k2.x, s.v + 0.5 * dt * k2.v};
    if (!chart.in_domain(mid2.x)) { out.truncated = true; break; }
    GeodesicState k3 = rhs(chart, mid2);
    GeodesicState end{s.x + dt * k3.x, s.v + dt * k3.v};
    if (!chart.in_domain(end.x)) { out.truncated = true; break; }
    GeodesicState k4 = rhs(chart, end);
    Point x_next = s.x + (dt / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    Eigen::VectorXd v_next = s.v + (dt / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    if (!chart.in_domain(x_next)) { out.truncated = true; break; }
    s = {std::move(x_next), std::move(v_next)};
    out.steps.push_back({dt * (step + 1), s.x, s.v});
  }
  return out;
}

double energy(const MetricChart& chart, const Point& x, const Eigen::VectorXd& v) {
  return v.dot(metric_at(chart, x) * v);
}

ResidualReport geodesic_map_check(const MetricChart& g, const MetricChart& gbar, const Point& x0,
                                  const Eigen::VectorXd& v0, int steps, double dt,
                                  double tolerance) {
  if (g.coords() != gbar.coords())
    throw ChartError("geodesic map check requires both metrics on the same coordinates");
  Trajectory traj = integrate_geodesic(g, x0, v0, steps, dt);

  ResidualAccumulator acc;
  for (const auto& st : traj.steps) {
    if (!gbar.in_domain(st.x)) continue;
    auto gamma = christoffel(g, st.x);
    auto gamma_bar = christoffel(gbar, st.x);
    const int n = g.dim();
    Eigen::VectorXd A(n);
    for (int k = 0; k < n; ++k) A[k] = st.v.dot((gamma_bar[k] - gamma[k]) * st.v);
    Eigen::MatrixXd gb = metric_at(gbar, st.x);
    double a_norm2 = std::abs(A.dot(gb * A));
    if (a_norm2 < 1e-28) { // no acceleration difference: connections agree here
      acc.add(st.x, 0.0);
      continue;
    }
    double v_norm2 = st.v.dot(gb * st.v);
    Eigen::VectorXd A_orth = A - (A.dot(gb * st.v) / v_norm2) * st.v;
    double r = std::sqrt(std::abs(A_orth.dot(gb * A_orth)) / a_norm2);
    acc.add(st.x, r);
  }
  ResidualReport rep = acc.finish("mapcheck", tolerance);
  if (traj.truncated)
    rep.note = "trajectory truncated at step " + std::to_string(traj.steps.size() - 1) + " of " +
               std::to_string(traj.requested_steps) + " (domain exit)";
  return rep;
}

} // namespace conlab
