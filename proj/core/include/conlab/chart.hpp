#ifndef CONLAB_CHART_HPP
#define CONLAB_CHART_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conlab/expr.hpp"

namespace conlab {

using Point = Eigen::VectorXd;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

class ChartError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A coordinate chart with a pseudo-Riemannian metric given componentwise as
/// expressions. Immutable after construction; all evaluation is pure.
/// Partial derivatives of the metric are differentiated symbolically once,
/// here, and cached for every downstream tensor computation.
class MetricChart {
public:
  MetricChart(std::vector<std::string> coords, std::vector<Interval> domain,
              std::vector<std::vector<Expr>> g_upper_or_full,
              std::map<std::string, double> constants = {});

  int dim() const { return static_cast<int>(coords_.size()); }
  const std::vector<std::string>& coords() const { return coords_; }
  const std::vector<Interval>& domain() const { return domain_; }
  const std::map<std::string, double>& constants() const { return constants_; }

  const Expr& g(int i, int j) const { return g_[idx(i, j)]; }
  /// Cached ∂_k g_ij.
  const Expr& dg(int k, int i, int j) const { return dg_[k * dim() * dim() + idx(i, j)]; }

  int coord_index(std::string_view name) const;
  bool in_domain(const Point& p) const;

  Env env_at(const Point& p) const {
    return Env(coords_, std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
               &constants_);
  }

  /// Throws ChartError if the expression references a name that is neither a
  /// coordinate nor a named constant of this chart.
  void validate_bound(const Expr& e, const std::string& what) const;

private:
  int idx(int i, int j) const { return i * dim() + j; }

  std::vector<std::string> coords_;
  std::vector<Interval> domain_;
  std::map<std::string, double> constants_;
  std::vector<Expr> g_;  // row-major, symmetric entries share one tree
  std::vector<Expr> dg_; // [k][i][j]
};

/// Covector field: one expression per chart coordinate.
struct CovectorField {
  std::vector<Expr> comp;
};

/// Symmetric bilinear field; entries (i,j) and (j,i) share one tree.
class BilinearField {
public:
  BilinearField() = default;
  /// Accepts a full or upper-triangular matrix; (i,j)/(j,i) mismatches throw.
  explicit BilinearField(std::vector<std::vector<Expr>> entries);
  static BilinearField from_upper(int n, const std::vector<Expr>& upper);

  int dim() const { return n_; }
  const Expr& operator()(int i, int j) const { return e_[i * n_ + j]; }

private:
  int n_ = 0;
  std::vector<Expr> e_;
};

struct GridSpec {
  std::uint64_t seed = 42;
  int random_count = 200;
  int lattice_per_axis = 8;
  double inset_fraction = 0.05;
};

/// Deterministic sample grid: an inset lattice plus seeded pseudo-random
/// points, identical across platforms for a fixed seed.
std::vector<Point> make_grid(const std::vector<Interval>& box, const GridSpec& spec);
std::vector<Point> make_grid(const MetricChart& chart, const GridSpec& spec = {});

/// Componentwise intersection of two domain boxes; throws ChartError when
/// empty on some axis.
std::vector<Interval> intersect_domains(const std::vector<Interval>& a,
                                        const std::vector<Interval>& b);

} // namespace conlab

#endif
