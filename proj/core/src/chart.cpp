#include "conlab/chart.hpp"

#include <algorithm>
#include <random>

namespace conlab {

namespace {

Expr zero_expr() {
  static Expr z = num(0.0);
  return z;
}

bool same_tree(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Number: return a->number == b->number;
    case ExprKind::Var: return a->name == b->name;
    case ExprKind::Pi: return true;
    case ExprKind::Call:
      if (a->func != b->func) return false;
      [[fallthrough]];
    default: return same_tree(a->a, b->a) && same_tree(a->b, b->b);
  }
}

} // namespace

MetricChart::MetricChart(std::vector<std::string> coords, std::vector<Interval> domain,
                         std::vector<std::vector<Expr>> g, std::map<std::string, double> constants)
    : coords_(std::move(coords)), domain_(std::move(domain)), constants_(std::move(constants)) {
  const int n = static_cast<int>(coords_.size());
  if (n < 1) throw ChartError("chart needs at least one coordinate");
  if (static_cast<int>(domain_.size()) != n)
    throw ChartError("domain box size does not match dimension");
  for (const auto& iv : domain_)
    if (!(iv.lo < iv.hi)) throw ChartError("empty domain interval");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coords_[i] == coords_[j]) throw ChartError("duplicate coordinate name '" + coords_[i] + "'");

  if (static_cast<int>(g.size()) != n) throw ChartError("metric matrix size does not match dimension");
  g_.assign(n * n, nullptr);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(g[i].size()) != n) throw ChartError("metric matrix is not square");
    for (int j = 0; j < n; ++j) {
      if (!g[i][j]) continue;
      Expr& slot = g_[idx(std::min(i, j), std::max(i, j))];
      if (slot && !same_tree(slot, g[i][j]))
        throw ChartError("conflicting entries for g(" + std::to_string(i) + "," + std::to_string(j) +
                         ") and its transpose");
      if (!slot) slot = g[i][j];
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      Expr& upper = g_[idx(j, i)];
      if (!upper) upper = zero_expr();
      g_[idx(i, j)] = upper; // mirror: shared tree, symmetric by construction
    }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) validate_bound(g_[idx(i, j)], "g(" + std::to_string(i) + "," + std::to_string(j) + ")");

  dg_.resize(n * n * n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        Expr d = differentiate(g_[idx(i, j)], coords_[k]);
        dg_[k * n * n + idx(i, j)] = d;
        dg_[k * n * n + idx(j, i)] = d;
      }
}

int MetricChart::coord_index(std::string_view name) const {
  for (int i = 0; i < dim(); ++i)
    if (coords_[i] == name) return i;
  return -1;
}

bool MetricChart::in_domain(const Point& p) const {
  if (p.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (p[i] < domain_[i].lo || p[i] > domain_[i].hi) return false;
  return true;
}

void MetricChart::validate_bound(const Expr& e, const std::string& what) const {
  for (const auto& v : variables(e)) {
    if (coord_index(v) >= 0) continue;
    if (constants_.count(v)) continue;
    throw ChartError("unknown variable '" + v + "' in " + what +
                     " (not a coordinate or named constant of this chart)");
  }
}

BilinearField::BilinearField(std::vector<std::vector<Expr>> entries) {
  n_ = static_cast<int>(entries.size());
  e_.assign(n_ * n_, nullptr);
  for (int i = 0; i < n_; ++i) {
    if (static_cast<int>(entries[i].size()) != n_) throw ChartError("bilinear field matrix is not square");
    for (int j = 0; j < n_; ++j) {
      if (!entries[i][j]) continue;
      Expr& slot = e_[std::min(i, j) * n_ + std::max(i, j)];
      if (slot && !same_tree(slot, entries[i][j]))
        throw ChartError("conflicting symmetric entries at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      if (!slot) slot = entries[i][j];
    }
  }
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j) {
      Expr& upper = e_[j * n_ + i];
      if (!upper) upper = zero_expr();
      e_[i * n_ + j] = upper;
    }
}

BilinearField BilinearField::from_upper(int n, const std::vector<Expr>& upper) {
  std::vector<std::vector<Expr>> m(n, std::vector<Expr>(n));
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m[i][j] = upper[k++];
  return BilinearField(std::move(m));
}

namespace {

// mt19937_64 output mapped to [0,1) through the top 53 bits; identical on
// every platform, unlike std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

std::vector<Point> make_grid(const std::vector<Interval>& box, const GridSpec& spec) {
  const int n = static_cast<int>(box.size());
  std::vector<Interval> inset(box);
  for (auto& iv : inset) {
    double m = spec.inset_fraction * iv.width();
    iv = {iv.lo + m, iv.hi - m};
  }

  std::vector<Point> pts;
  const int m = spec.lattice_per_axis;
  if (m > 0) {
    long total = 1;
    for (int i = 0; i < n; ++i) total *= m;
    for (long flat = 0; flat < total; ++flat) {
      Point p(n);
      long rem = flat;
      for (int i = 0; i < n; ++i) {
        int k = static_cast<int>(rem % m);
        rem /= m;
        p[i] = m == 1 ? 0.5 * (inset[i].lo + inset[i].hi)
                      : inset[i].lo + inset[i].width() * k / (m - 1);
      }
      pts.push_back(std::move(p));
    }
  }

  std::mt19937_64 rng(spec.seed);
  for (int s = 0; s < spec.random_count; ++s) {
    Point p(n);
    for (int i = 0; i < n; ++i) p[i] = inset[i].lo + inset[i].width() * uniform01(rng);
    pts.push_back(std::move(p));
  }
  return pts;
}

std::vector<Point> make_grid(const MetricChart& chart, const GridSpec& spec) {
  return make_grid(chart.domain(), spec);
}

std::vector<Interval> intersect_domains(const std::vector<Interval>& a,
                                        const std::vector<Interval>& b) {
  if (a.size() != b.size()) throw ChartError("domain boxes have different dimensions");
  std::vector<Interval> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = {std::max(a[i].lo, b[i].lo), std::min(a[i].hi, b[i].hi)};
    if (!(out[i].lo < out[i].hi))
      throw ChartError("domain boxes do not overlap on axis " + std::to_string(i));
  }
  return out;
}

} // namespace conlab
