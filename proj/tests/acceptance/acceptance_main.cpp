// Acceptance suite: every release-gating property of the toolkit, one
// pass/fail line each. Exits nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "conlab/jordan.hpp"
#include "../support.hpp"

using namespace conlab;
using namespace conlab::testing;

namespace {

int failures = 0;

void report(int id, const std::string& label, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, label.c_str(),
              detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<long>(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

// 1. The catalog concircular fields satisfy both defining laws at 1e-9.
void criterion1() {
  bool pass = true;
  std::string detail;
  for (const auto& [entry, K] :
       std::vector<std::pair<std::string, double>>{{"sphere2", -1.0}, {"hyperbolic2", 1.0}}) {
    auto t0 = std::chrono::steady_clock::now();
    MetricChart chart = parse_metric(catalog_entry(entry).metric_text);
    auto cand = field_of(entry, "conc1.conc");
    auto res = check_concircular(chart, cand, make_grid(chart));
    double elapsed = seconds_since(t0);
    bool ok = res.concircular.max <= 1e-9 && res.special.max <= 1e-9 && res.K_used &&
              *res.K_used == K && elapsed < 2.0;
    pass = pass && ok;
    detail += entry + ": law " + fmt(res.concircular.max) + ", special " + fmt(res.special.max) +
              ", " + fmt(elapsed) + "s; ";
  }
  report(1, "concircular catalog fields with their constants", pass, detail);
}

// 2. Cone correspondence: connection identities, the distinguished field,
//    parallel lifts, and exact unlifting.
void criterion2() {
  bool pass = true;
  std::string detail;
  for (const auto& [entry, K] :
       std::vector<std::pair<std::string, double>>{{"sphere2", -1.0}, {"hyperbolic2", 1.0}}) {
    MetricChart base = parse_metric(catalog_entry(entry).metric_text);
    ConeSpace cone(base, K);
    auto base_grid = make_grid(base);
    auto cone_grid = make_grid(cone.chart());

    auto conn = check_cone_connection(cone, cone_grid);
    bool eq16 = conn[0].max <= 1e-10;
    auto conv = check_convergent_field(cone, cone_grid);
    bool convergent = conv.deriv.pass && conv.norm.pass;

    auto cand = field_of(entry, "conc1.conc");
    auto lifted = lift_concircular(cone, cand, base_grid);
    double lift_res = check_parallel_covector(cone, lifted.comp, cone_grid).max;

    auto sol = catalog_field(entry, "sol1.sink").sinyukov;
    auto lsol = lift_solution(cone, sol, base_grid);
    double sol_res = check_parallel_bilinear(cone, lsol.a, cone_grid).max;

    bool round_trip = true;
    UnliftedCovector back = unlift_covector(cone, lifted);
    SinyukovSolution sback = unlift_solution(cone, lsol);
    for (const auto& p : base_grid) {
      Env env = base.env_at(p);
      round_trip = round_trip && within_ulps(evaluate(back.rho, env), evaluate(cand.rho, env), 1);
      for (int i = 0; i < base.dim(); ++i) {
        round_trip = round_trip && within_ulps(evaluate(back.phi.comp[i], env),
                                               evaluate(cand.phi.comp[i], env), 1);
        round_trip = round_trip && within_ulps(evaluate(sback.lambda.comp[i], env),
                                               evaluate(sol.lambda.comp[i], env), 1);
        for (int j = i; j < base.dim(); ++j)
          round_trip = round_trip &&
                       within_ulps(evaluate(sback.a(i, j), env), evaluate(sol.a(i, j), env), 1);
      }
      round_trip = round_trip && within_ulps(evaluate(sback.mu, env), evaluate(sol.mu, env), 1);
    }

    bool ok = eq16 && convergent && lift_res <= 1e-9 && sol_res <= 1e-9 && round_trip;
    pass = pass && ok;
    detail += entry + ": eq16 " + fmt(conn[0].max) + ", lifts " + fmt(lift_res) + "/" +
              fmt(sol_res) + (round_trip ? ", round trip exact; " : ", ROUND TRIP OFF; ");
  }
  report(2, "cone correspondence and exact unlifting", pass, detail);
}

// 3. The product algebra: isomorphism with the bracket algebra, closure,
//    unit laws, and the Jordan identity.
void criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  MetricChart sph = sphere2();
  ConeSpace cone(sph, -1.0);
  auto grid = make_grid(sph);
  auto cone_grid = make_grid(cone.chart());

  auto c1 = field_of("sphere2", "conc1.conc");
  auto c2 = field_of("sphere2", "conc2.conc");
  auto e1 = JordanElement::admit(sph, concircular_pair_solution(c1, c1, -1.0), grid);
  auto e2 = JordanElement::admit(sph, concircular_pair_solution(c2, c2, -1.0), grid);

  double iso = std::max(check_isomorphism(cone, e1, e2, grid, cone_grid).max,
                        check_isomorphism(cone, e2, e1, grid, cone_grid).max);

  RunConfig closure_cfg;
  closure_cfg.tol_overrides["closure"] = 1e-8;
  bool closure = true;
  double closure_max = 0.0;
  try {
    auto p = jordan_product(e1, e2, grid, closure_cfg);
    closure_max = std::max(check_sinyukov(sph, p.solution(), grid).max,
                           check_vnk(sph, p.solution(), grid).joint.max);
  } catch (const PreconditionError&) {
    closure = false;
  }

  auto axioms = check_jordan_axioms({e1, e2}, grid);
  double elapsed = seconds_since(t0);
  bool pass = iso <= 1e-9 && closure && closure_max <= 1e-8 && axioms.unit_law.max <= 1e-10 &&
              axioms.jordan_identity.max <= 1e-8 && cone_grid.size() >= 200 && elapsed < 10.0;
  report(3, "product algebra isomorphic to the parallel-form algebra", pass,
         "iso " + fmt(iso) + " at " + std::to_string(cone_grid.size()) + " points, closure " +
             fmt(closure_max) + ", unit " + fmt(axioms.unit_law.max) + ", identity " +
             fmt(axioms.jordan_identity.max) + ", " + fmt(elapsed) + "s");
}

// 4. The concircular span is an ideal and the recovered coefficients
//    reproduce every product.
void criterion4() {
  MetricChart sph = sphere2();
  auto grid = make_grid(sph);
  std::vector<ConcircularCandidate> basis{field_of("sphere2", "conc1.conc"),
                                          field_of("sphere2", "conc2.conc"),
                                          field_of("sphere2", "conc3.conc")};
  auto unit = JordanElement::admit(sph, unit_solution(sph, -1.0), grid);
  auto esol = JordanElement::admit(sph, catalog_field("sphere2", "esol.sink").sinyukov, grid);

  double membership = 0.0, reconstruction = 0.0;
  bool rank_ok = true;
  for (const auto* e : {&unit, &esol}) {
    auto res = check_ideal_membership(sph, basis, -1.0, *e, grid);
    rank_ok = rank_ok && res.basis_rank_ok;
    for (const auto& r : res.memberships) membership = std::max(membership, r.max);
    reconstruction = std::max(reconstruction, res.reconstruction.max);
  }
  bool pass = rank_ok && membership <= 1e-7 && reconstruction <= 1e-7;
  report(4, "products with generators stay in the concircular span", pass,
         "membership " + fmt(membership) + ", reconstruction via F " + fmt(reconstruction));
}

// 5. Geodesic-mapping ground truth on the flat/projective-disc pair, with
//    the conformal negative control.
void criterion5() {
  MetricChart flat = flat2();
  MetricChart kl = klein2();
  GeodesicPair pair{flat, kl, std::nullopt};
  auto grid = make_grid(intersect_domains(flat.domain(), kl.domain()), GridSpec{});
  double lc = check_levi_civita(pair, grid).max;

  auto map = geodesic_map_check(flat, kl, pt({0.1, 0.1}), pt({1.0, 0.5}), 1000, 1e-4, 1e-8);

  MetricChart conf = parse_metric(catalog_entry("flat2-conformal").metric_text);
  GeodesicPair bad{flat, conf, std::nullopt};
  double lc_bad = check_levi_civita(bad, make_grid(flat)).max;
  double map_bad =
      geodesic_map_check(flat, conf, pt({0.1, 0.1}), pt({1.0, 0.5}), 1000, 1e-4, 1e-8).max;

  bool pass = lc <= 1e-8 && map.max <= 1e-8 && !map.note.size() && lc_bad > 1e-2 && map_bad > 1e-2;
  report(5, "flat/projective-disc equivalence with negative control", pass,
         "equation " + fmt(lc) + ", map " + fmt(map.max) + " over 1000 steps, controls " +
             fmt(lc_bad) + "/" + fmt(map_bad));
}

// 6. Flat-type machinery: the K = 0 system at 1e-12 and the parallel
//    covector sequence with its orthogonality obstruction.
void criterion6() {
  MetricChart flat = flat2();
  auto grid = make_grid(flat);
  double vn0 = 0.0;
  for (const char* file : {"mu1.sink", "mu0.sink"}) {
    auto sol = catalog_field("flat-vn0", file).sinyukov;
    for (const auto& r : check_vn0(flat, sol, grid)) vn0 = std::max(vn0, r.max);
  }

  auto sol = catalog_field("flat-vn0", "mu0.sink").sinyukov;
  auto phi = catalog_field("flat-vn0", "seq-start.cov").covector;
  auto seq = build_parallel_sequence(flat, sol, phi, pt({0.0, 0.0}), grid);
  double par = 0.0, orth = 0.0;
  for (const auto& m : seq.members) {
    par = std::max(par, m.parallel_residual);
    orth = std::max(orth, m.orthogonality);
  }

  auto blocked = build_parallel_sequence(
      flat, sol, catalog_field("flat-vn0", "seq-obstructed.cov").covector, pt({0.0, 0.0}), grid);

  bool pass = vn0 <= 1e-12 && seq.members.size() >= 2 && par <= 1e-8 && orth <= 1e-8 &&
              blocked.termination == "obstruction";
  report(6, "flat-type system and the parallel sequence construction", pass,
         "system " + fmt(vn0) + ", " + std::to_string(seq.members.size()) + " members, parallel " +
             fmt(par) + ", orthogonality " + fmt(orth) + ", obstruction " +
             (blocked.termination == "obstruction" ? "detected" : "MISSED"));
}

// 7. Oracle agreement for every catalog expression, plus parser fuzzing.
void criterion7() {
  double worst = 0.0;
  for (const auto& ce : all_catalog_exprs()) {
    auto grid = make_grid(ce.chart, {.seed = 99, .random_count = 25, .lattice_per_axis = 0});
    for (const auto& e : ce.exprs)
      for (int axis = 0; axis < ce.chart.dim(); ++axis) {
        Expr d = differentiate(e, ce.chart.coords()[axis]);
        for (const auto& p : grid) {
          double sym = evaluate(d, ce.chart.env_at(p));
          double fd = central_fd(e, ce.chart, p, axis);
          worst = std::max(worst, rel_err(sym, fd));
        }
      }
  }

  std::mt19937_64 rng(42);
  const std::string alphabet = "0123456789.+-*/^() absintancoshexpqrtlgKpi_\t";
  int parsed = 0, rejected = 0;
  bool fuzz_ok = true;
  for (int trial = 0; trial < 10000; ++trial) {
    std::string s;
    int len = static_cast<int>(rng() % 64);
    for (int i = 0; i < len; ++i)
      s.push_back(rng() % 8 ? alphabet[rng() % alphabet.size()]
                            : static_cast<char>(rng() % 256));
    try {
      parse(s);
      ++parsed;
    } catch (const ParseError&) {
      ++rejected;
    } catch (...) {
      fuzz_ok = false; // anything but a positioned rejection is a defect
    }
  }

  bool pass = worst <= 1e-6 && fuzz_ok;
  report(7, "symbolic derivatives match central differences; parser survives fuzz", pass,
         "worst relative gap " + fmt(worst) + ", fuzz " + std::to_string(parsed) + " parsed / " +
             std::to_string(rejected) + " rejected");
}

// 8. The constant-e identities: exact for the unit, and the brute-force
//    selection is unambiguous across the catalog solutions.
void criterion8() {
  MetricChart sph = sphere2();
  auto grid = make_grid(sph);
  SinyukovSolution unit = unit_solution(sph, -1.0);
  double unit_max = 0.0;
  for (const auto& r : check_corollary1(sph, unit, 1, grid)) unit_max = std::max(unit_max, r.max);

  bool unambiguous = true;
  std::string picks;
  auto esol = catalog_field("sphere2", "esol.sink").sinyukov;
  SinyukovSolution zero{BilinearField({{num(0.0), num(0.0)}, {num(0.0), num(0.0)}}),
                        CovectorField{{num(0.0), num(0.0)}}, num(0.0), -1.0};
  MetricChart hyp = hyperbolic2();
  auto hgrid = make_grid(hyp);
  for (const auto& [chart, grd, sol] :
       std::vector<std::tuple<const MetricChart*, const std::vector<Point>*, SinyukovSolution>>{
           {&sph, &grid, unit},
           {&sph, &grid, esol},
           {&sph, &grid, zero},
           {&hyp, &hgrid, unit_solution(hyp, 1.0)}}) {
    auto sel = select_corollary1_e(*chart, sol, *grd);
    unambiguous = unambiguous && sel.unambiguous;
    picks += std::to_string(sel.e) + " ";
  }

  bool pass = unit_max <= 1e-12 && unambiguous;
  report(8, "constant-e identities and unambiguous e selection", pass,
         "unit residual " + fmt(unit_max) + ", picks e = " + picks +
             (unambiguous ? "(each unique)" : "(AMBIGUOUS)"));
}

} // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  if (failures) std::printf("%d criterion(s) FAILED\n", failures);
  else std::printf("all 8 criteria passed\n");
  return failures ? 1 : 0;
}
