// conlab: verification runs for geodesic mapping equations on coordinate
// charts. Every subcommand prints one JSON document to stdout (deterministic
// for a fixed seed) and exits 0 only when all requested checks pass.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "conlab/catalog.hpp"
#include "conlab/io.hpp"
#include "conlab/jordan.hpp"

using nlohmann::json;
using namespace conlab;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;

struct Options {
  std::uint64_t seed = 42;
  int grid_random = 200;
  int lattice = 8;
  double inset = 0.05;
  std::vector<std::string> tol_overrides;
  bool human = false;
};

RunConfig run_config(const Options& o) {
  RunConfig cfg;
  cfg.grid.seed = o.seed;
  cfg.grid.random_count = o.grid_random;
  cfg.grid.lattice_per_axis = o.lattice;
  cfg.grid.inset_fraction = o.inset;
  for (const auto& t : o.tol_overrides) {
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--tol", "expected EQUATION=VALUE, got '" + t + "'");
    double v = std::stod(t.substr(eq + 1));
    if (!(v > 0.0)) throw CLI::ValidationError("--tol", "tolerances must be positive");
    cfg.tol_overrides[t.substr(0, eq)] = v;
  }
  return cfg;
}

json config_json(const Options& o) {
  return json{{"seed", o.seed},
              {"grid_random", o.grid_random},
              {"lattice_per_axis", o.lattice},
              {"inset", o.inset}};
}

json point_json(const Point& p) {
  return std::vector<double>(p.data(), p.data() + p.size());
}

struct Document {
  json j;
  bool pass = true;

  explicit Document(const std::string& command, const Options& o) {
    j["schema_version"] = 1;
    j["tool"] = "conlab";
    j["command"] = command;
    j["config"] = config_json(o);
    j["reports"] = json::array();
  }
  void add(const ResidualReport& r) {
    j["reports"].push_back(to_json(r));
    pass = pass && r.pass;
  }
  void add(const std::vector<ResidualReport>& rs) {
    for (const auto& r : rs) add(r);
  }
  // classification-style report: shown, but not part of the verdict
  void add_informational(const ResidualReport& r) { j["reports"].push_back(to_json(r)); }
  int emit(const Options& o) {
    j["pass"] = pass;
    if (o.human) {
      std::printf("%-28s %12s %12s %12s  %s\n", "equation", "max", "mean", "tolerance", "verdict");
      for (const auto& r : j["reports"]) {
        std::printf("%-28s %12.3e %12.3e %12.3e  %s\n",
                    r.at("equation").get<std::string>().c_str(), r.at("max").get<double>(),
                    r.at("mean").get<double>(), r.at("tolerance").get<double>(),
                    r.at("pass").get<bool>() ? "pass" : "FAIL");
      }
      std::printf("overall: %s\n", pass ? "pass" : "FAIL");
    } else {
      std::cout << j.dump(2) << "\n";
    }
    return pass ? kExitPass : kExitCheckFailed;
  }
};

MetricChart metric_arg(const std::string& path) { return load_metric_file(path); }

ConcircularCandidate concircular_arg(const std::string& path) {
  FieldFile f = load_field_file(path);
  if (f.kind != FieldFile::Kind::Concircular)
    throw IoError(path + ": expected kind = concircular");
  return f.concircular;
}

SinyukovSolution sinyukov_arg(const std::string& path) {
  FieldFile f = load_field_file(path);
  if (f.kind != FieldFile::Kind::Sinyukov)
    throw IoError(path + ": expected kind = sinyukov");
  return f.sinyukov;
}

CovectorField covector_arg(const std::string& path) {
  FieldFile f = load_field_file(path);
  if (f.kind != FieldFile::Kind::Covector) throw IoError(path + ": expected kind = covector");
  return f.covector;
}

Point point_arg(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

std::vector<Point> pair_grid(const MetricChart& g, const MetricChart& gbar, const RunConfig& cfg) {
  return make_grid(intersect_domains(g.domain(), gbar.domain()), cfg.grid);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical verification of geodesic mapping equations on coordinate charts"};
  app.fallthrough(); // global options remain valid after a subcommand
  app.require_subcommand(1);

  Options opt;
  if (const char* env = std::getenv("CONLAB_SEED")) opt.seed = std::strtoull(env, nullptr, 10);
  app.add_option("--seed", opt.seed, "grid seed (env CONLAB_SEED)");
  app.add_option("--grid-size", opt.grid_random, "random sample count")->check(CLI::NonNegativeNumber);
  app.add_option("--lattice", opt.lattice, "lattice points per axis")->check(CLI::NonNegativeNumber);
  app.add_option("--inset", opt.inset, "fractional inset from the domain boundary");
  app.add_option("--tol", opt.tol_overrides, "tolerance override EQUATION=VALUE")->take_all();
  app.add_flag("--human", opt.human, "render a table instead of JSON");

  std::string metric_path, field_path, g_path, gbar_path, psi_path, out_path, out2_path;
  std::string e1_path, e2_path, element_path, solution_path;
  std::vector<std::string> basis_paths, element_paths;
  std::vector<double> x0_arg, v0_arg, at_arg, base_arg, x0_domain{-0.5, 0.5};
  double K_arg = 0.0, Kbar_arg = 0.0;
  int steps = 1000, max_len = 8, e_arg = 2;
  double dt = 1e-3;
  bool flip = false;

  // verify ------------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "residual checks on a base chart");
  verify->require_subcommand(1);

  auto* v_conc = verify->add_subcommand("concircular", "grad phi = rho g plus classification");
  v_conc->add_option("--metric", metric_path)->required();
  v_conc->add_option("--field", field_path)->required();

  auto* v_sin = verify->add_subcommand("sinyukov", "grad_k a_ij = lambda_i g_jk + lambda_j g_ik");
  v_sin->add_option("--metric", metric_path)->required();
  v_sin->add_option("--field", field_path)->required();

  auto* v_vnk = verify->add_subcommand("vnk", "grad lambda = K a + mu g and grad mu = 2K lambda");
  v_vnk->add_option("--metric", metric_path)->required();
  v_vnk->add_option("--field", field_path)->required();

  auto* v_vn0 = verify->add_subcommand("vn0", "the K = 0 system with constant mu");
  v_vn0->add_option("--metric", metric_path)->required();
  v_vn0->add_option("--field", field_path)->required();

  auto* v_lc = verify->add_subcommand("levicivita", "geodesic equivalence of two metrics");
  v_lc->add_option("--g", g_path)->required();
  v_lc->add_option("--gbar", gbar_path)->required();
  v_lc->add_option("--psi", psi_path, "covector file; omitted = recover automatically");

  auto* v_cor = verify->add_subcommand("corollary1", "the constant-e identities");
  v_cor->add_option("--metric", metric_path)->required();
  v_cor->add_option("--field", field_path)->required();
  v_cor->add_option("--e", e_arg, "-1, 0 or 1; omitted = brute-force selection");

  // cone ---------------------------------------------------------------------
  auto* cone_cmd = app.add_subcommand("cone", "the warped cone over a chart");
  cone_cmd->require_subcommand(1);

  auto* c_build = cone_cmd->add_subcommand("build", "emit the cone chart and sidecar");
  c_build->add_option("--metric", metric_path)->required();
  c_build->add_option("--K", K_arg)->required();
  c_build->add_option("--x0-domain", x0_domain)->expected(2);
  c_build->add_flag("--flip", flip, "positive-norm variant (both block signs flipped)");
  c_build->add_option("--out-metric", out_path);
  c_build->add_option("--out-sidecar", out2_path);

  auto* c_lift_f = cone_cmd->add_subcommand("lift-field", "lift a special concircular field");
  c_lift_f->add_option("--metric", metric_path)->required();
  c_lift_f->add_option("--K", K_arg)->required();
  c_lift_f->add_option("--field", field_path)->required();
  c_lift_f->add_option("--out", out_path);

  auto* c_lift_s = cone_cmd->add_subcommand("lift-solution", "lift a solution triple");
  c_lift_s->add_option("--metric", metric_path)->required();
  c_lift_s->add_option("--K", K_arg)->required();
  c_lift_s->add_option("--field", field_path)->required();
  c_lift_s->add_option("--out", out_path);

  auto* c_par = cone_cmd->add_subcommand("check-parallel", "grad of a lifted object on the cone");
  c_par->add_option("--metric", metric_path)->required();
  c_par->add_option("--K", K_arg)->required();
  c_par->add_option("--field", field_path, "covector or sinyukov-lifted file")->required();

  auto* c_conv = cone_cmd->add_subcommand("check-convergent", "the distinguished field's law and norm");
  c_conv->add_option("--metric", metric_path)->required();
  c_conv->add_option("--K", K_arg)->required();
  c_conv->add_flag("--flip", flip);

  // jordan ---------------------------------------------------------------------
  auto* jordan_cmd = app.add_subcommand("jordan", "the algebra of solution triples");
  jordan_cmd->require_subcommand(1);

  auto* j_mul = jordan_cmd->add_subcommand("multiply", "product with closure re-verification");
  j_mul->add_option("--metric", metric_path)->required();
  j_mul->add_option("--e1", e1_path)->required();
  j_mul->add_option("--e2", e2_path)->required();
  j_mul->add_option("--out", out_path);

  auto* j_ax = jordan_cmd->add_subcommand("check-axioms", "commutativity, unit, Jordan identity");
  j_ax->add_option("--metric", metric_path)->required();
  j_ax->add_option("--elements", element_paths)->required()->expected(-1);

  auto* j_iso = jordan_cmd->add_subcommand("check-isomorphism",
                                           "lift of the product vs the bracket of the lifts");
  j_iso->add_option("--metric", metric_path)->required();
  j_iso->add_option("--e1", e1_path)->required();
  j_iso->add_option("--e2", e2_path)->required();

  auto* j_ideal = jordan_cmd->add_subcommand("check-ideal", "membership in the concircular span");
  j_ideal->add_option("--metric", metric_path)->required();
  j_ideal->add_option("--basis", basis_paths)->required()->expected(-1);
  j_ideal->add_option("--element", element_path)->required();

  // geodesic ---------------------------------------------------------------------
  auto* geo = app.add_subcommand("geodesic", "trajectories and equivalence along them");
  geo->require_subcommand(1);

  auto* g_int = geo->add_subcommand("integrate", "RK4 geodesic; TSV trajectory via --out");
  g_int->add_option("--metric", metric_path)->required();
  g_int->add_option("--x0", x0_arg)->required()->expected(-1);
  g_int->add_option("--v0", v0_arg)->required()->expected(-1);
  g_int->add_option("--steps", steps);
  g_int->add_option("--dt", dt);
  g_int->add_option("--out", out_path, "TSV output path: t x^0..x^{n-1} v^0..v^{n-1}");

  auto* g_map = geo->add_subcommand("map-check", "orthogonal acceleration residual along a geodesic");
  g_map->add_option("--g", g_path)->required();
  g_map->add_option("--gbar", gbar_path)->required();
  g_map->add_option("--x0", x0_arg)->required()->expected(-1);
  g_map->add_option("--v0", v0_arg)->required()->expected(-1);
  g_map->add_option("--steps", steps);
  g_map->add_option("--dt", dt);

  // fields ---------------------------------------------------------------------
  auto* fields_cmd = app.add_subcommand("fields", "transfers and sequence constructions");
  fields_cmd->require_subcommand(1);

  auto* f_tr = fields_cmd->add_subcommand("transfer-rho", "rho on the counterpart metric");
  f_tr->add_option("--g", g_path)->required();
  f_tr->add_option("--gbar", gbar_path)->required();
  f_tr->add_option("--field", field_path)->required();
  f_tr->add_option("--at", at_arg, "evaluation point; omitted = first 5 grid points")->expected(-1);
  f_tr->add_option("--verify-Kbar", Kbar_arg,
                   "also verify the transferred field on gbar with this constant");

  auto* f_seq = fields_cmd->add_subcommand("build-sequence", "parallel covector iteration");
  f_seq->add_option("--metric", metric_path)->required();
  f_seq->add_option("--solution", solution_path)->required();
  f_seq->add_option("--field", field_path)->required();
  f_seq->add_option("--base", base_arg, "base point for potentials; omitted = domain center")
      ->expected(-1);
  f_seq->add_option("--max-len", max_len);

  // catalog ---------------------------------------------------------------------
  auto* cat = app.add_subcommand("catalog", "built-in analytic examples");
  cat->require_subcommand(1);
  auto* cat_list = cat->add_subcommand("list", "names and notes");
  std::string cat_name, cat_dir;
  auto* cat_emit = cat->add_subcommand("emit", "write an entry's files to a directory");
  cat_emit->add_option("name", cat_name)->required();
  cat_emit->add_option("dir", cat_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help
    std::ostringstream os;
    app.exit(e, os, os);
    std::cerr << os.str();
    return kExitUsage;
  }

  try {
    RunConfig cfg = run_config(opt);

    if (*v_conc) {
      Document doc("verify concircular", opt);
      MetricChart chart = metric_arg(metric_path);
      auto cand = concircular_arg(field_path);
      auto grid = make_grid(chart, cfg.grid);
      auto res = check_concircular(chart, cand, grid, cfg);
      doc.add(res.concircular);
      // the special-field law gates the verdict only when the file asserts K
      if (cand.K)
        doc.add(res.special);
      else
        doc.add_informational(res.special);
      doc.j["classification"] = {
          {"rho_class", std::string(to_string(res.rho_class))},
          {"convergent", res.convergent},
          {"special", res.special.pass},
          {"K", res.K_used ? json(*res.K_used) : json()},
          {"max_abs_rho", res.max_abs_rho},
          {"max_abs_grad_rho", res.max_abs_grad_rho},
      };
      return doc.emit(opt);
    }

    if (*v_sin) {
      Document doc("verify sinyukov", opt);
      MetricChart chart = metric_arg(metric_path);
      auto sol = sinyukov_arg(field_path);
      doc.add(check_sinyukov(chart, sol, make_grid(chart, cfg.grid), cfg));
      return doc.emit(opt);
    }

    if (*v_vnk) {
      Document doc("verify vnk", opt);
      MetricChart chart = metric_arg(metric_path);
      auto sol = sinyukov_arg(field_path);
      auto grid = make_grid(chart, cfg.grid);
      auto reps = check_vnk(chart, sol, grid, cfg);
      doc.add(reps.eq7);
      doc.add(reps.eq8);
      doc.add(reps.joint);
      doc.j["fitted_K"] = fit_vnk_K(chart, sol, grid);
      return doc.emit(opt);
    }

    if (*v_vn0) {
      Document doc("verify vn0", opt);
      MetricChart chart = metric_arg(metric_path);
      auto sol = sinyukov_arg(field_path);
      doc.add(check_vn0(chart, sol, make_grid(chart, cfg.grid), cfg));
      return doc.emit(opt);
    }

    if (*v_lc) {
      Document doc("verify levicivita", opt);
      MetricChart g = metric_arg(g_path), gbar = metric_arg(gbar_path);
      GeodesicPair pair{g, gbar, std::nullopt};
      if (!psi_path.empty()) pair.psi = covector_arg(psi_path);
      doc.add(check_levi_civita(pair, pair_grid(g, gbar, cfg), cfg));
      doc.j["psi_mode"] = psi_path.empty() ? "auto" : "supplied";
      return doc.emit(opt);
    }

    if (*v_cor) {
      Document doc("verify corollary1", opt);
      MetricChart chart = metric_arg(metric_path);
      auto sol = sinyukov_arg(field_path);
      auto grid = make_grid(chart, cfg.grid);
      if (e_arg >= -1 && e_arg <= 1) {
        doc.add(check_corollary1(chart, sol, e_arg, grid, cfg));
        doc.j["e"] = e_arg;
      } else {
        auto sel = select_corollary1_e(chart, sol, grid, cfg);
        doc.add(check_corollary1(chart, sol, sel.e, grid, cfg));
        doc.j["e"] = sel.e;
        doc.j["e_unambiguous"] = sel.unambiguous;
        doc.pass = doc.pass && sel.unambiguous;
      }
      return doc.emit(opt);
    }

    if (*c_build) {
      Document doc("cone build", opt);
      MetricChart base = metric_arg(metric_path);
      ConeSpace cone(base, K_arg, {x0_domain[0], x0_domain[1]}, flip);
      auto grid = make_grid(cone.chart(), cfg.grid);
      doc.add(check_cone_inverse(cone, grid, cfg));
      doc.add(check_cone_connection(cone, grid, cfg));
      std::string text = metric_to_text(cone.chart());
      json sidecar{{"K", K_arg},
                   {"base", metric_path},
                   {"x0_domain", x0_domain},
                   {"positive_norm", flip}};
      if (!out_path.empty()) write_file(out_path, text);
      if (!out2_path.empty()) write_file(out2_path, sidecar.dump(2) + "\n");
      doc.j["cone_metric"] = text;
      doc.j["sidecar"] = sidecar;
      return doc.emit(opt);
    }

    if (*c_lift_f) {
      Document doc("cone lift-field", opt);
      MetricChart base = metric_arg(metric_path);
      ConeSpace cone(base, K_arg);
      auto cand = concircular_arg(field_path);
      auto lifted = lift_concircular(cone, cand, make_grid(base, cfg.grid), cfg);
      doc.add(check_parallel_covector(cone, lifted.comp, make_grid(cone.chart(), cfg.grid), cfg));
      std::string text = field_to_text(lifted);
      if (!out_path.empty()) write_file(out_path, text);
      doc.j["lifted"] = text;
      return doc.emit(opt);
    }

    if (*c_lift_s) {
      Document doc("cone lift-solution", opt);
      MetricChart base = metric_arg(metric_path);
      ConeSpace cone(base, K_arg);
      auto sol = sinyukov_arg(field_path);
      auto lifted = lift_solution(cone, sol, make_grid(base, cfg.grid), cfg);
      doc.add(check_parallel_bilinear(cone, lifted.a, make_grid(cone.chart(), cfg.grid), cfg));
      std::string text = field_to_text(lifted);
      if (!out_path.empty()) write_file(out_path, text);
      doc.j["lifted"] = text;
      return doc.emit(opt);
    }

    if (*c_par) {
      Document doc("cone check-parallel", opt);
      MetricChart base = metric_arg(metric_path);
      ConeSpace cone(base, K_arg);
      FieldFile f = load_field_file(field_path);
      auto grid = make_grid(cone.chart(), cfg.grid);
      if (f.kind == FieldFile::Kind::Covector)
        doc.add(check_parallel_covector(cone, f.covector.comp, grid, cfg));
      else if (f.kind == FieldFile::Kind::SinyukovLifted)
        doc.add(check_parallel_bilinear(cone, f.lifted, grid, cfg));
      else
        throw IoError(field_path + ": expected a covector or sinyukov-lifted file");
      return doc.emit(opt);
    }

    if (*c_conv) {
      Document doc("cone check-convergent", opt);
      MetricChart base = metric_arg(metric_path);
      ConeSpace cone(base, K_arg, {x0_domain[0], x0_domain[1]}, flip);
      auto reps = check_convergent_field(cone, make_grid(cone.chart(), cfg.grid), cfg);
      doc.add(reps.deriv);
      doc.add(reps.norm);
      return doc.emit(opt);
    }

    if (*j_mul) {
      Document doc("jordan multiply", opt);
      MetricChart chart = metric_arg(metric_path);
      auto grid = make_grid(chart, cfg.grid);
      auto e1 = JordanElement::admit(chart, sinyukov_arg(e1_path), grid, cfg);
      auto e2 = JordanElement::admit(chart, sinyukov_arg(e2_path), grid, cfg);
      auto prod = jordan_product(e1, e2, grid, cfg);
      RunConfig strict = cfg;
      auto rs = check_sinyukov(chart, prod.solution(), grid, strict);
      rs.equation = "closure_sinyukov";
      auto rv = check_vnk(chart, prod.solution(), grid, strict);
      rv.joint.equation = "closure_vnk";
      doc.add(rs);
      doc.add(rv.joint);
      std::string text = field_to_text(prod.solution());
      if (!out_path.empty()) write_file(out_path, text);
      doc.j["product"] = text;
      return doc.emit(opt);
    }

    if (*j_ax) {
      Document doc("jordan check-axioms", opt);
      MetricChart chart = metric_arg(metric_path);
      auto grid = make_grid(chart, cfg.grid);
      std::vector<JordanElement> elements;
      for (const auto& p : element_paths)
        elements.push_back(JordanElement::admit(chart, sinyukov_arg(p), grid, cfg));
      auto res = check_jordan_axioms(elements, grid, cfg);
      doc.add(res.commutativity);
      doc.add(res.unit_law);
      doc.add(res.jordan_identity);
      return doc.emit(opt);
    }

    if (*j_iso) {
      Document doc("jordan check-isomorphism", opt);
      MetricChart chart = metric_arg(metric_path);
      auto grid = make_grid(chart, cfg.grid);
      auto e1 = JordanElement::admit(chart, sinyukov_arg(e1_path), grid, cfg);
      auto e2 = JordanElement::admit(chart, sinyukov_arg(e2_path), grid, cfg);
      if (e1.K() != e2.K()) throw PreconditionError("elements disagree on K");
      ConeSpace cone(chart, e1.K());
      auto cone_grid = make_grid(cone.chart(), cfg.grid);
      doc.add(check_isomorphism(cone, e1, e2, grid, cone_grid, cfg));
      return doc.emit(opt);
    }

    if (*j_ideal) {
      Document doc("jordan check-ideal", opt);
      MetricChart chart = metric_arg(metric_path);
      auto grid = make_grid(chart, cfg.grid);
      std::vector<ConcircularCandidate> basis;
      std::optional<double> K;
      for (const auto& p : basis_paths) {
        basis.push_back(concircular_arg(p));
        if (basis.back().K) K = K ? K : basis.back().K;
      }
      if (!K) throw PreconditionError("basis fields must declare K");
      auto element = JordanElement::admit(chart, sinyukov_arg(element_path), grid, cfg);
      auto res = check_ideal_membership(chart, basis, *K, element, grid, cfg);
      doc.add(res.memberships);
      doc.add(res.reconstruction);
      std::vector<std::vector<double>> F;
      for (long r = 0; r < res.F.rows(); ++r)
        F.emplace_back(res.F.row(r).begin(), res.F.row(r).end());
      doc.j["F"] = F;
      doc.j["basis_rank_ok"] = res.basis_rank_ok;
      doc.pass = doc.pass && res.basis_rank_ok;
      return doc.emit(opt);
    }

    if (*g_int) {
      Document doc("geodesic integrate", opt);
      MetricChart chart = metric_arg(metric_path);
      Point x0 = point_arg(x0_arg);
      Eigen::VectorXd v0 = point_arg(v0_arg);
      auto traj = integrate_geodesic(chart, x0, v0, steps, dt);
      if (!out_path.empty()) {
        std::ostringstream os;
        for (const auto& st : traj.steps) {
          os << format_double(st.t);
          for (int i = 0; i < st.x.size(); ++i) os << "\t" << format_double(st.x[i]);
          for (int i = 0; i < st.v.size(); ++i) os << "\t" << format_double(st.v[i]);
          os << "\n";
        }
        write_file(out_path, os.str());
      }
      double e0 = energy(chart, traj.steps.front().x, traj.steps.front().v);
      double e1 = energy(chart, traj.steps.back().x, traj.steps.back().v);
      doc.j["steps_completed"] = traj.steps.size() - 1;
      doc.j["truncated"] = traj.truncated;
      doc.j["energy_initial"] = e0;
      doc.j["energy_final"] = e1;
      doc.j["energy_drift"] = e0 != 0.0 ? std::abs(e1 - e0) / std::abs(e0) : std::abs(e1 - e0);
      doc.j["final_point"] = point_json(traj.steps.back().x);
      return doc.emit(opt);
    }

    if (*g_map) {
      Document doc("geodesic map-check", opt);
      MetricChart g = metric_arg(g_path), gbar = metric_arg(gbar_path);
      auto rep = geodesic_map_check(g, gbar, point_arg(x0_arg), point_arg(v0_arg), steps, dt,
                                    cfg.tolerance("mapcheck"));
      doc.add(rep);
      return doc.emit(opt);
    }

    if (*f_tr) {
      Document doc("fields transfer-rho", opt);
      MetricChart g = metric_arg(g_path), gbar = metric_arg(gbar_path);
      GeodesicPair pair{g, gbar, std::nullopt};
      auto cand = concircular_arg(field_path);
      Expr rho_bar = transfer_rho_expr(pair, cand);
      doc.j["rho_bar"] = to_string(rho_bar);
      std::vector<Point> eval_points;
      if (!at_arg.empty()) {
        eval_points.push_back(point_arg(at_arg));
      } else {
        auto grid = pair_grid(g, gbar, cfg);
        for (std::size_t i = 0; i < grid.size() && eval_points.size() < 5; i += grid.size() / 5)
          eval_points.push_back(grid[i]);
      }
      json values = json::array();
      for (const auto& p : eval_points)
        values.push_back({{"point", point_json(p)}, {"rho_bar", transfer_rho(pair, cand, p)}});
      doc.j["values"] = values;
      if (Kbar_arg != 0.0) {
        auto transferred = transfer_candidate(pair, cand, Kbar_arg);
        RunConfig loose = cfg;
        loose.tol_overrides["concircular"] = cfg.tolerance("transfer");
        loose.tol_overrides["special"] = cfg.tolerance("transfer");
        auto res = check_concircular(gbar, transferred, pair_grid(g, gbar, cfg), loose);
        doc.add(res.concircular);
        doc.add(res.special);
      }
      return doc.emit(opt);
    }

    if (*f_seq) {
      Document doc("fields build-sequence", opt);
      MetricChart chart = metric_arg(metric_path);
      auto sol = sinyukov_arg(solution_path);
      auto phi = covector_arg(field_path);
      Point base;
      if (!base_arg.empty()) {
        base = point_arg(base_arg);
      } else {
        base = Point(chart.dim());
        for (int i = 0; i < chart.dim(); ++i)
          base[i] = 0.5 * (chart.domain()[i].lo + chart.domain()[i].hi);
      }
      SequenceOptions seq_opt;
      seq_opt.max_len = max_len;
      seq_opt.parallel_tol = cfg.tolerance("sequence_parallel");
      seq_opt.orth_tol = cfg.tolerance("sequence_orthogonality");
      auto grid = make_grid(chart, cfg.grid);
      auto res = build_parallel_sequence(chart, sol, phi, base, grid, seq_opt);
      doc.add(res.reports);
      doc.j["members"] = res.members.size();
      doc.j["termination"] = res.termination;
      if (res.termination == "obstruction") {
        doc.j["obstruction_value"] = res.obstruction_value;
        doc.pass = false;
      }
      return doc.emit(opt);
    }

    if (*cat_list) {
      Document doc("catalog list", opt);
      json names = json::array();
      for (const auto& e : catalog()) {
        json files = json::array();
        for (const auto& [f, _] : e.fields) files.push_back(f);
        names.push_back({{"name", e.name}, {"note", e.note}, {"fields", files}});
      }
      doc.j["entries"] = names;
      return doc.emit(opt);
    }

    if (*cat_emit) {
      Document doc("catalog emit", opt);
      const CatalogEntry& e = catalog_entry(cat_name);
      std::filesystem::create_directories(cat_dir);
      auto path = [&](const std::string& f) { return (std::filesystem::path(cat_dir) / f).string(); };
      write_file(path(e.name + ".metric"), e.metric_text);
      json files = json::array({e.name + ".metric"});
      for (const auto& [f, text] : e.fields) {
        write_file(path(f), text);
        files.push_back(f);
      }
      if (!e.sidecar_json.empty()) {
        write_file(path(e.name + ".cone.json"), e.sidecar_json + "\n");
        files.push_back(e.name + ".cone.json");
      }
      doc.j["written"] = files;
      return doc.emit(opt);
    }

    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const SingularMetricError& e) {
    std::cout << json{{"schema_version", 1}, {"error", e.what()}, {"pass", false}}.dump(2) << "\n";
    return kExitDegenerate;
  } catch (const DegenerateFitError& e) {
    std::cout << json{{"schema_version", 1}, {"error", e.what()}, {"pass", false}}.dump(2) << "\n";
    return kExitDegenerate;
  } catch (const EvalError& e) {
    std::cout << json{{"schema_version", 1}, {"error", e.what()}, {"pass", false}}.dump(2) << "\n";
    return kExitDegenerate;
  } catch (const PreconditionError& e) {
    std::cout << json{{"schema_version", 1}, {"error", e.what()}, {"pass", false}}.dump(2) << "\n";
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
