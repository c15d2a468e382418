#ifndef CONLAB_TESTS_SUPPORT_HPP
#define CONLAB_TESTS_SUPPORT_HPP

#include <cmath>
#include <random>
#include <vector>

#include "conlab/catalog.hpp"
#include "conlab/fields.hpp"
#include "conlab/io.hpp"

namespace conlab::testing {

// Central finite difference, the independent oracle for every symbolic
// derivative in the suite. Never calls differentiate().
inline double central_fd(const Expr& e, const MetricChart& chart, const Point& p, int axis,
                         double h = 1e-5) {
  Point hi = p, lo = p;
  hi[axis] += h;
  lo[axis] -= h;
  return (evaluate(e, chart.env_at(hi)) - evaluate(e, chart.env_at(lo))) / (2.0 * h);
}

// |a - b| measured against max(|a|, |b|, 1): relative where the values are
// large, absolute near zero (where central differences bottom out anyway).
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

inline bool within_ulps(double a, double b, int ulps = 1) {
  if (a == b) return true;
  double lo = a, hi = a;
  for (int i = 0; i < ulps; ++i) {
    lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
    hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
  }
  return b >= lo && b <= hi;
}

inline MetricChart flat2() {
  return parse_metric(catalog_entry("flat2").metric_text);
}
inline MetricChart sphere2() {
  return parse_metric(catalog_entry("sphere2").metric_text);
}
inline MetricChart hyperbolic2() {
  return parse_metric(catalog_entry("hyperbolic2").metric_text);
}
inline MetricChart klein2() {
  return parse_metric(catalog_entry("klein2").metric_text);
}

inline FieldFile catalog_field(const std::string& entry, const std::string& file) {
  return parse_field(catalog_entry(entry).fields.at(file));
}

inline ConcircularCandidate field_of(const std::string& entry, const std::string& file) {
  return catalog_field(entry, file).concircular;
}

// Every expression a catalog entry ships (metric components and all field
// components), paired with the chart they are bound to.
struct CatalogExprs {
  MetricChart chart;
  std::vector<Expr> exprs;
};

inline std::vector<CatalogExprs> all_catalog_exprs() {
  std::vector<CatalogExprs> out;
  for (const auto& entry : catalog()) {
    CatalogExprs ce{parse_metric(entry.metric_text), {}};
    for (int i = 0; i < ce.chart.dim(); ++i)
      for (int j = i; j < ce.chart.dim(); ++j) ce.exprs.push_back(ce.chart.g(i, j));
    for (const auto& [name, text] : entry.fields) {
      FieldFile f = parse_field(text);
      switch (f.kind) {
        case FieldFile::Kind::Concircular:
          for (const auto& e : f.concircular.phi.comp) ce.exprs.push_back(e);
          ce.exprs.push_back(f.concircular.rho);
          break;
        case FieldFile::Kind::Sinyukov:
          for (int i = 0; i < f.sinyukov.a.dim(); ++i)
            for (int j = i; j < f.sinyukov.a.dim(); ++j) ce.exprs.push_back(f.sinyukov.a(i, j));
          for (const auto& e : f.sinyukov.lambda.comp) ce.exprs.push_back(e);
          ce.exprs.push_back(f.sinyukov.mu);
          break;
        case FieldFile::Kind::Covector:
          for (const auto& e : f.covector.comp) ce.exprs.push_back(e);
          break;
        case FieldFile::Kind::SinyukovLifted:
          for (int i = 0; i < f.lifted.dim(); ++i)
            for (int j = i; j < f.lifted.dim(); ++j) ce.exprs.push_back(f.lifted(i, j));
          break;
      }
    }
    out.push_back(std::move(ce));
  }
  return out;
}

} // namespace conlab::testing

#endif
