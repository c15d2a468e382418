#ifndef CONLAB_GEOMETRY_HPP
#define CONLAB_GEOMETRY_HPP

#include <vector>

#include <Eigen/Dense>

#include "conlab/chart.hpp"
#include "conlab/report.hpp"

namespace conlab {

/// Metric is numerically degenerate at a sampled point.
class SingularMetricError : public std::runtime_error {
public:
  SingularMetricError(std::string msg, Point where)
      : std::runtime_error(std::move(msg)), where(std::move(where)) {}
  Point where;
};

Eigen::MatrixXd metric_at(const MetricChart& chart, const Point& p);
/// ∂_k g_ij for all k, from the chart's cached symbolic derivatives.
std::vector<Eigen::MatrixXd> metric_partials_at(const MetricChart& chart, const Point& p);

double metric_det(const MetricChart& chart, const Point& p);

/// g^{ij}(p) by LU with full pivoting; throws SingularMetricError.
Eigen::MatrixXd inverse_metric(const MetricChart& chart, const Point& p);

/// Γ^k_{ij} = 1/2 g^{ks}(∂_i g_sj + ∂_j g_si − ∂_s g_ij). Returned as one
/// matrix per upper index k; lower-index symmetry holds by construction
/// (entries are computed once for i<=j and mirrored).
std::vector<Eigen::MatrixXd> christoffel(const MetricChart& chart, const Point& p);
std::vector<Eigen::MatrixXd> christoffel(const Eigen::MatrixXd& ginv,
                                         const std::vector<Eigen::MatrixXd>& dg);

/// A covector field bound to a chart: validates variable names once and
/// caches the symbolic partials of every component.
class BoundCovector {
public:
  BoundCovector(const MetricChart& chart, const CovectorField& field);

  Eigen::VectorXd value(const Point& p) const;
  /// (k,i) entry is ∂_k φ_i.
  Eigen::MatrixXd partials(const Point& p) const;
  const MetricChart& chart() const { return *chart_; }

private:
  const MetricChart* chart_;
  std::vector<Expr> comp_;
  std::vector<Expr> d_; // [k][i]
};

/// Symmetric bilinear field bound to a chart, with cached partials. Holds
/// its own copy of the field (entry trees are shared, so copies are cheap).
class BoundBilinear {
public:
  BoundBilinear(const MetricChart& chart, BilinearField field);

  Eigen::MatrixXd value(const Point& p) const;
  /// Element [k](i,j) is ∂_k a_ij.
  std::vector<Eigen::MatrixXd> partials(const Point& p) const;

private:
  const MetricChart* chart_;
  BilinearField field_;
  std::vector<Expr> d_; // [k][i][j], mirrored
};

/// Scalar field bound to a chart, with cached gradient expressions.
class BoundScalar {
public:
  BoundScalar(const MetricChart& chart, const Expr& e);

  double value(const Point& p) const;
  Eigen::VectorXd gradient(const Point& p) const;
  const Expr& expr() const { return e_; }
  const Expr& gradient_expr(int k) const { return d_[k]; }

private:
  const MetricChart* chart_;
  Expr e_;
  std::vector<Expr> d_;
};

/// ∇_k φ_i = ∂_k φ_i − Γ^s_{ki} φ_s, returned with (k,i) indexing.
Eigen::MatrixXd cov_deriv_covector(const MetricChart& chart, const BoundCovector& phi,
                                   const Point& p);

/// ∇_k v^i = ∂_k v^i + Γ^i_{ks} v^s for a contravariant field (component
/// expressions), returned with (k,i) indexing.
Eigen::MatrixXd cov_deriv_vector(const MetricChart& chart, const BoundCovector& v, const Point& p);

/// ∇_k a_ij = ∂_k a_ij − Γ^s_{ki} a_sj − Γ^s_{kj} a_is; element [k](i,j).
std::vector<Eigen::MatrixXd> cov_deriv_bilinear(const MetricChart& chart, const BoundBilinear& a,
                                                const Point& p);

/// ω^i = g^{is} ω_s and its inverse.
Eigen::VectorXd raise_index(const MetricChart& chart, const Point& p, const Eigen::VectorXd& w);
Eigen::VectorXd lower_index(const MetricChart& chart, const Point& p, const Eigen::VectorXd& v);

struct TrajectoryStep {
  double t;
  Point x;
  Eigen::VectorXd v;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  bool truncated = false; // left the domain box before completing all steps
  int requested_steps = 0;
};

/// Fixed-step RK4 integration of the geodesic equation
/// ẍ^k + Γ^k_{ij} ẋ^i ẋ^j = 0. Truncates (with notice in the result) as soon
/// as a step or one of its RK stages would leave the domain box.
Trajectory integrate_geodesic(const MetricChart& chart, const Point& x0, const Eigen::VectorXd& v0,
                              int steps, double dt);

/// Kinetic energy g(ẋ,ẋ) along a trajectory; a conserved quantity of the
/// exact flow, used as an integration quality measure.
double energy(const MetricChart& chart, const Point& x, const Eigen::VectorXd& v);

/// Integrates a g-geodesic and measures, at every step, how far the ḡ
/// acceleration difference A^k = (Γ̄^k_{ij} − Γ^k_{ij}) ẋ^i ẋ^j deviates from
/// being parallel to the tangent: the report's residual is
/// |A_orth|_ḡ / |A|_ḡ. Near-zero everywhere means the g-geodesic is a ḡ
/// pregeodesic. Both charts must share coordinate names.
ResidualReport geodesic_map_check(const MetricChart& g, const MetricChart& gbar, const Point& x0,
                                  const Eigen::VectorXd& v0, int steps, double dt,
                                  double tolerance);

} // namespace conlab

#endif
