#include <benchmark/benchmark.h>

#include "conlab/catalog.hpp"
#include "conlab/io.hpp"
#include "conlab/jordan.hpp"

using namespace conlab;

namespace {

const MetricChart& sphere() {
  static MetricChart chart = parse_metric(catalog_entry("sphere2").metric_text);
  return chart;
}

Point sample_point() {
  Point p(2);
  p << 1.2, 0.7;
  return p;
}

void BM_Parse(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(parse("exp(2*K*x0)*sin(theta)^2/(1 - x^2 - y^2)^2 + cos(phi)"));
}
BENCHMARK(BM_Parse);

void BM_Evaluate(benchmark::State& state) {
  Expr e = parse("(1 - y^2)/(1 - x^2 - y^2)^2 + sin(x*y)");
  std::vector<std::string> names{"x", "y"};
  std::vector<double> vals{0.3, 0.1};
  Env env(names, vals);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(e, env));
}
BENCHMARK(BM_Evaluate);

void BM_Differentiate(benchmark::State& state) {
  Expr e = parse("(1 - y^2)/(1 - x^2 - y^2)^2 + sin(x*y)");
  for (auto _ : state) benchmark::DoNotOptimize(differentiate(e, "x"));
}
BENCHMARK(BM_Differentiate);

void BM_Christoffel(benchmark::State& state) {
  const MetricChart& chart = sphere();
  Point p = sample_point();
  for (auto _ : state) benchmark::DoNotOptimize(christoffel(chart, p));
}
BENCHMARK(BM_Christoffel);

void BM_ConeChristoffel(benchmark::State& state) {
  static ConeSpace cone(sphere(), -1.0);
  Point p(3);
  p << 0.1, 1.2, 0.7;
  for (auto _ : state) benchmark::DoNotOptimize(christoffel(cone.chart(), p));
}
BENCHMARK(BM_ConeChristoffel);

void BM_GeodesicSteps(benchmark::State& state) {
  const MetricChart& chart = sphere();
  Point x0(2);
  x0 << 1.5, 0.5;
  Eigen::VectorXd v0(2);
  v0 << 0.3, 0.4;
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_geodesic(chart, x0, v0, state.range(0), 1e-3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeodesicSteps)->Arg(100)->Arg(1000);

void BM_ConcircularCheck(benchmark::State& state) {
  const MetricChart& chart = sphere();
  auto cand = parse_field(catalog_entry("sphere2").fields.at("conc1.conc")).concircular;
  auto grid = make_grid(chart);
  for (auto _ : state) benchmark::DoNotOptimize(check_concircular(chart, cand, grid));
}
BENCHMARK(BM_ConcircularCheck);

void BM_JordanProduct(benchmark::State& state) {
  const MetricChart& chart = sphere();
  auto s1 = parse_field(catalog_entry("sphere2").fields.at("sol1.sink")).sinyukov;
  auto s2 = parse_field(catalog_entry("sphere2").fields.at("esol.sink")).sinyukov;
  for (auto _ : state) benchmark::DoNotOptimize(jordan_product_solution(chart, s1, s2));
}
BENCHMARK(BM_JordanProduct);

void BM_LeviCivitaGrid(benchmark::State& state) {
  static MetricChart flat = parse_metric(catalog_entry("flat2").metric_text);
  static MetricChart kl = parse_metric(catalog_entry("klein2").metric_text);
  GeodesicPair pair{flat, kl, std::nullopt};
  auto grid = make_grid(intersect_domains(flat.domain(), kl.domain()), GridSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(check_levi_civita(pair, grid));
  state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(BM_LeviCivitaGrid);

} // namespace

BENCHMARK_MAIN();
