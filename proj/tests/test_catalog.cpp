#include <doctest.h>

#include <chrono>

#include <nlohmann/json.hpp>

#include "conlab/cone.hpp"
#include "support.hpp"

using namespace conlab;
using namespace conlab::testing;

namespace {

// every self-declared check of an entry must pass within this many seconds
struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

} // namespace

TEST_CASE("catalog lists the expected entries and all files parse") {
  std::vector<std::string> names;
  for (const auto& e : catalog()) names.push_back(e.name);
  for (const char* required : {"flat2", "sphere2", "hyperbolic2", "klein2", "flat-vn0",
                               "cone-of-hyperbolic2"})
    CHECK(std::find(names.begin(), names.end(), required) != names.end());
  CHECK(names.size() >= 6);

  for (const auto& e : catalog()) {
    MetricChart chart = parse_metric(e.metric_text);
    for (const auto& p : make_grid(chart, {.random_count = 30}))
      CHECK_NOTHROW(inverse_metric(chart, p)); // nondegenerate everywhere sampled
    for (const auto& [name, text] : e.fields) CHECK_NOTHROW(parse_field(text));
    if (!e.sidecar_json.empty()) {
      auto sidecar = nlohmann::json::parse(e.sidecar_json);
      CHECK(sidecar.is_object());
    }
  }
  CHECK_THROWS_AS(catalog_entry("nonexistent"), std::out_of_range);
}

TEST_CASE("declared concircular classifications hold") {
  for (const auto& e : catalog()) {
    MetricChart chart = parse_metric(e.metric_text);
    auto grid = make_grid(chart);
    for (const auto& [file, expectation] : e.expected) {
      if (file.find(".conc") == std::string::npos) continue;
      Timer t;
      auto cand = parse_field(e.fields.at(file)).concircular;
      auto res = check_concircular(chart, cand, grid);
      CHECK(res.concircular.pass);
      bool expect_basic = expectation.find("basic") != std::string::npos;
      CHECK((res.rho_class == RhoClass::Basic) == expect_basic);
      if (expectation.find("special") != std::string::npos) CHECK(res.special.pass);
      if (expectation.find("convergent") != std::string::npos) CHECK(res.convergent);
      CHECK(t.seconds() < 10.0);
    }
  }
}

TEST_CASE("sphere2 solutions verify at their declared tolerances") {
  Timer t;
  MetricChart sph = sphere2();
  auto grid = make_grid(sph);
  for (const char* file : {"sol1.sink", "esol.sink"}) {
    auto sol = catalog_field("sphere2", file).sinyukov;
    CHECK(check_sinyukov(sph, sol, grid).max <= 1e-10);
    CHECK(check_vnk(sph, sol, grid).joint.max <= 1e-10);
  }
  auto esol = catalog_field("sphere2", "esol.sink").sinyukov;
  for (const auto& r : check_corollary1(sph, esol, 1, grid)) CHECK(r.max <= 1e-9);
  CHECK(t.seconds() < 10.0);
}

TEST_CASE("hyperbolic2 solution verifies") {
  Timer t;
  MetricChart hyp = hyperbolic2();
  auto grid = make_grid(hyp);
  auto sol = catalog_field("hyperbolic2", "sol1.sink").sinyukov;
  CHECK(check_sinyukov(hyp, sol, grid).max <= 1e-10);
  CHECK(check_vnk(hyp, sol, grid).joint.max <= 1e-10);
  CHECK(t.seconds() < 10.0);
}

TEST_CASE("klein2 pairs with flat2 as a geodesic equivalence") {
  Timer t;
  MetricChart g = flat2();
  MetricChart kl = klein2();
  GeodesicPair pair{g, kl, std::nullopt};
  auto grid = make_grid(intersect_domains(g.domain(), kl.domain()), GridSpec{});
  CHECK(check_levi_civita(pair, grid).max <= 1e-8);
  CHECK(t.seconds() < 10.0);
}

TEST_CASE("flat2-conformal is rejected as an equivalence") {
  MetricChart g = flat2();
  MetricChart conf = parse_metric(catalog_entry("flat2-conformal").metric_text);
  GeodesicPair pair{g, conf, std::nullopt};
  auto rep = check_levi_civita(pair, make_grid(g));
  CHECK(!rep.pass);
  CHECK(rep.max > 1e-2);
}

TEST_CASE("flat-vn0 checks pass at 1e-12") {
  Timer t;
  MetricChart flat = flat2();
  auto grid = make_grid(flat);
  for (const char* file : {"mu1.sink", "mu0.sink"}) {
    auto sol = catalog_field("flat-vn0", file).sinyukov;
    for (const auto& r : check_vn0(flat, sol, grid)) CHECK(r.max <= 1e-12);
  }
  CHECK(t.seconds() < 10.0);
}

TEST_CASE("cone-of-hyperbolic2 matches the built cone") {
  MetricChart emitted = parse_metric(catalog_entry("cone-of-hyperbolic2").metric_text);
  ConeSpace built(hyperbolic2(), 1.0);
  auto grid = make_grid(emitted, {.random_count = 50});
  for (const auto& p : grid)
    CHECK((metric_at(emitted, p) - metric_at(built.chart(), p)).cwiseAbs().maxCoeff() <= 1e-15);

  auto sidecar = nlohmann::json::parse(catalog_entry("cone-of-hyperbolic2").sidecar_json);
  CHECK(sidecar.at("K").get<double>() == 1.0);
  CHECK(sidecar.at("x0_domain")[0].get<double>() == -0.5);
}
