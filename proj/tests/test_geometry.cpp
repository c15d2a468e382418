#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conlab/geometry.hpp"
#include "support.hpp"

using namespace conlab;
using namespace conlab::testing;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<long>(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

// independent Christoffel assembly from centrally-differenced metric
// derivatives; never touches the symbolic path
std::vector<Eigen::MatrixXd> christoffel_fd(const MetricChart& chart, const Point& p) {
  const int n = chart.dim();
  std::vector<Eigen::MatrixXd> dg(n, Eigen::MatrixXd(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dg[k](i, j) = central_fd(chart.g(i, j), chart, p, k);
  Eigen::MatrixXd ginv = metric_at(chart, p).fullPivLu().inverse();
  return christoffel(ginv, dg);
}

} // namespace

TEST_CASE("inverse metric") {
  MetricChart flat = flat2();
  CHECK(inverse_metric(flat, pt({0.2, -0.7})).isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-15));

  MetricChart sph = sphere2();
  Eigen::MatrixXd inv = inverse_metric(sph, pt({std::numbers::pi / 2, 1.0}));
  CHECK(std::abs(inv(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(inv(1, 1) - 1.0) < 1e-12);
  CHECK(std::abs(inv(0, 1)) < 1e-15);

  // multiply-back oracle on the projective disc chart
  MetricChart kl = klein2();
  Point p = pt({0.3, 0.0});
  Eigen::MatrixXd g = metric_at(kl, p);
  CHECK((g * inverse_metric(kl, p) - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("degenerate metrics raise a positioned error") {
  MetricChart bad({"x", "y"}, {{-1, 1}, {-1, 1}}, {{num(0.0), num(0.0)}, {num(0.0), num(1.0)}});
  Point p = pt({0.3, 0.3});
  CHECK_THROWS_AS(inverse_metric(bad, p), SingularMetricError);
  CHECK_THROWS_AS(raise_index(bad, p, Eigen::Vector2d(1.0, 0.0)), SingularMetricError);
  try {
    inverse_metric(bad, p);
  } catch (const SingularMetricError& e) {
    CHECK(e.where == p);
    CHECK(std::string(e.what()).find("0.3") != std::string::npos);
  }
}

TEST_CASE("inverse consistency over the default grid, all catalog charts") {
  for (const auto& entry : catalog()) {
    MetricChart chart = parse_metric(entry.metric_text);
    for (const auto& p : make_grid(chart)) {
      Eigen::MatrixXd g = metric_at(chart, p);
      Eigen::MatrixXd I = Eigen::MatrixXd::Identity(chart.dim(), chart.dim());
      CHECK((g * inverse_metric(chart, p) - I).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("christoffel symbols: closed forms and the FD oracle") {
  MetricChart flat = flat2();
  for (const auto& m : christoffel(flat, pt({0.1, 0.4}))) CHECK(m.cwiseAbs().maxCoeff() == 0.0);

  MetricChart sph = sphere2();
  Point p = pt({1.0, 0.5});
  auto gamma = christoffel(sph, p);
  CHECK(gamma[0](1, 1) == doctest::Approx(-std::sin(1.0) * std::cos(1.0)).epsilon(1e-14));
  CHECK(gamma[1](0, 1) == doctest::Approx(std::cos(1.0) / std::sin(1.0)).epsilon(1e-14));
  CHECK(gamma[1](1, 0) == gamma[1](0, 1)); // mirrored, bitwise

  for (const auto& entry : catalog()) {
    MetricChart chart = parse_metric(entry.metric_text);
    auto grid = make_grid(chart, {.seed = 5, .random_count = 10, .lattice_per_axis = 0});
    for (const auto& q : grid) {
      auto sym = christoffel(chart, q);
      auto fd = christoffel_fd(chart, q);
      for (int k = 0; k < chart.dim(); ++k)
        for (int i = 0; i < chart.dim(); ++i)
          for (int j = 0; j < chart.dim(); ++j)
            CHECK(rel_err(sym[k](i, j), fd[k](i, j)) < 1e-6);
    }
  }
}

TEST_CASE("metricity: nabla g = 0 on every catalog chart") {
  for (const auto& entry : catalog()) {
    MetricChart chart = parse_metric(entry.metric_text);
    BilinearField g_field = [&] {
      std::vector<std::vector<Expr>> m(chart.dim(), std::vector<Expr>(chart.dim()));
      for (int i = 0; i < chart.dim(); ++i)
        for (int j = 0; j < chart.dim(); ++j) m[i][j] = chart.g(i, j);
      return BilinearField(std::move(m));
    }();
    BoundBilinear bg(chart, g_field);
    double worst = 0.0;
    for (const auto& p : make_grid(chart)) {
      for (const auto& mk : cov_deriv_bilinear(chart, bg, p))
        worst = std::max(worst, mk.cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("covariant derivative of covectors") {
  MetricChart flat = flat2();
  BoundCovector c(flat, CovectorField{{parse("1"), parse("2")}});
  CHECK(cov_deriv_covector(flat, c, pt({0.3, 0.3})).cwiseAbs().maxCoeff() == 0.0);

  // phi = d(cos theta): nabla_j phi_i = -cos(theta) g_ij
  MetricChart sph = sphere2();
  BoundCovector phi(sph, CovectorField{{parse("-sin(theta)"), parse("0")}});
  Point p = pt({1.2, 0.7});
  Eigen::MatrixXd D = cov_deriv_covector(sph, phi, p);
  Eigen::MatrixXd expect = -std::cos(1.2) * metric_at(sph, p);
  CHECK((D - expect.transpose()).cwiseAbs().maxCoeff() <= 1e-10);

  // phi = d(cosh r): nabla_j phi_i = cosh(r) g_ij
  MetricChart hyp = hyperbolic2();
  BoundCovector psi(hyp, CovectorField{{parse("sinh(r)"), parse("0")}});
  Point q = pt({1.0, 0.7});
  Eigen::MatrixXd Dh = cov_deriv_covector(hyp, psi, q);
  Eigen::MatrixXd expecth = std::cosh(1.0) * metric_at(hyp, q);
  CHECK((Dh - expecth.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("covariant derivative of bilinear fields") {
  // metric compatibility again, through the public entry point
  MetricChart sph = sphere2();
  BilinearField g_field({{sph.g(0, 0), sph.g(0, 1)}, {sph.g(1, 0), sph.g(1, 1)}});
  BoundBilinear bg(sph, g_field);
  for (const auto& mk : cov_deriv_bilinear(sph, bg, pt({0.9, 1.1})))
    CHECK(mk.cwiseAbs().maxCoeff() <= 1e-12);

  // flat chart, a = x (x) c + c (x) x with c = dx:
  // nabla_k a_ij = c_i delta_jk + c_j delta_ik  (hand differentiation)
  MetricChart flat = flat2();
  BilinearField a({{parse("2*x"), parse("y")}, {parse("y"), parse("0")}});
  BoundBilinear ba(flat, a);
  Point p = pt({0.2, -0.4});
  auto D = cov_deriv_bilinear(flat, ba, p);
  Eigen::Vector2d c(1.0, 0.0);
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double expect = c[i] * (j == k ? 1.0 : 0.0) + c[j] * (i == k ? 1.0 : 0.0);
        CHECK(D[k](i, j) == doctest::Approx(expect).epsilon(1e-15));
      }

  // partials of a catalog bilinear field against the FD oracle
  FieldFile sol = catalog_field("sphere2", "sol1.sink");
  BoundBilinear bs(sph, sol.sinyukov.a);
  for (const auto& q : make_grid(sph, {.seed = 3, .random_count = 10, .lattice_per_axis = 0})) {
    auto partials = bs.partials(q);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(rel_err(partials[k](i, j), central_fd(sol.sinyukov.a(i, j), sph, q, k)) < 1e-6);
  }
}

TEST_CASE("raise and lower indices") {
  MetricChart flat = flat2();
  Eigen::Vector2d w(0.3, -0.8);
  CHECK((raise_index(flat, pt({0.1, 0.1}), w) - w).cwiseAbs().maxCoeff() == 0.0);

  MetricChart sph = sphere2();
  Point eq = pt({std::numbers::pi / 2, 1.0});
  CHECK((raise_index(sph, eq, w) - w).cwiseAbs().maxCoeff() <= 1e-12);

  MetricChart hyp = hyperbolic2();
  Point q = pt({1.0, 0.5});
  Eigen::VectorXd up = raise_index(hyp, q, Eigen::Vector2d(0.0, 1.0));
  CHECK(up[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(up[1] == doctest::Approx(1.0 / (std::sinh(1.0) * std::sinh(1.0))).epsilon(1e-14));

  for (const auto& p : make_grid(hyp, {.seed = 9, .random_count = 20, .lattice_per_axis = 0})) {
    Eigen::VectorXd rt = lower_index(hyp, p, raise_index(hyp, p, w));
    CHECK((rt - w).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("geodesics: flat straight lines are reproduced") {
  MetricChart flat = flat2();
  // dyadic data keeps every RK4 operation exact
  Point x0 = pt({0.25, -0.5});
  Eigen::VectorXd v0 = pt({0.5, 0.25});
  auto traj = integrate_geodesic(flat, x0, v0, 512, 1.0 / 1024.0);
  CHECK(!traj.truncated);
  REQUIRE(traj.steps.size() == 513);
  for (const auto& st : traj.steps) {
    CHECK(st.x[0] == x0[0] + st.t * v0[0]);
    CHECK(st.x[1] == x0[1] + st.t * v0[1]);
    CHECK(st.v[0] == v0[0]);
  }
}

TEST_CASE("geodesics: the equator stays put") {
  MetricChart sph = sphere2();
  auto traj = integrate_geodesic(sph, pt({std::numbers::pi / 2, 0.2}), pt({0.0, 1.0}), 1000, 1e-3);
  CHECK(!traj.truncated);
  for (const auto& st : traj.steps) CHECK(std::abs(st.x[0] - std::numbers::pi / 2) <= 1e-10);
}

TEST_CASE("geodesics: energy conservation") {
  MetricChart hyp = hyperbolic2();
  Point x0 = pt({1.0, 0.5});
  Eigen::VectorXd v0 = pt({0.3, 0.4});
  double e0 = energy(hyp, x0, v0);
  auto traj = integrate_geodesic(hyp, x0, v0, 1000, 1e-3);
  CHECK(!traj.truncated);
  for (const auto& st : traj.steps)
    CHECK(std::abs(energy(hyp, st.x, st.v) - e0) / std::abs(e0) <= 1e-8);

  MetricChart sph = sphere2();
  Point y0 = pt({1.5, 0.5});
  double f0 = energy(sph, y0, v0);
  for (const auto& st : integrate_geodesic(sph, y0, v0, 1000, 1e-3).steps)
    CHECK(std::abs(energy(sph, st.x, st.v) - f0) / std::abs(f0) <= 1e-6);
}

TEST_CASE("geodesics: domain exit truncates with notice") {
  MetricChart flat = flat2();
  auto traj = integrate_geodesic(flat, pt({0.9, 0.0}), pt({1.0, 0.0}), 1000, 1e-3);
  CHECK(traj.truncated);
  CHECK(traj.steps.size() < 1001);
  CHECK(traj.steps.size() > 90);
  CHECK_THROWS_AS(integrate_geodesic(flat, pt({1.5, 0.0}), pt({1.0, 0.0}), 10, 1e-3), ChartError);
}

TEST_CASE("geodesic map check: identical metrics give zero") {
  MetricChart g = sphere2();
  MetricChart gbar = sphere2();
  auto rep = geodesic_map_check(g, gbar, pt({1.2, 0.5}), pt({0.2, 0.3}), 200, 1e-3, 1e-8);
  CHECK(rep.max == 0.0);
  CHECK(rep.pass);
}

TEST_CASE("geodesic map check: flat lines are projective-disc pregeodesics") {
  MetricChart flat = flat2();
  MetricChart kl = klein2();
  Point x0 = pt({0.1, 0.1});
  Eigen::VectorXd v0 = pt({1.0, 0.5});
  auto rep = geodesic_map_check(flat, kl, x0, v0, 1000, 1e-4, 1e-8);
  CHECK(rep.pass);
  CHECK(rep.max <= 1e-8);

  // brute-force oracle: integrating the disc metric's own geodesic from the
  // same point and direction must trace the same straight line
  auto traj = integrate_geodesic(kl, x0, 0.5 * v0, 1000, 5e-4);
  CHECK(traj.steps.size() > 500);
  for (const auto& st : traj.steps) {
    double cross = (st.x[0] - x0[0]) * v0[1] - (st.x[1] - x0[1]) * v0[0];
    CHECK(std::abs(cross) <= 1e-8);
  }
}

TEST_CASE("geodesic map check: conformal scaling is not geodesic-preserving") {
  MetricChart flat = flat2();
  MetricChart conf = parse_metric(catalog_entry("flat2-conformal").metric_text);
  auto rep = geodesic_map_check(flat, conf, pt({0.1, 0.1}), pt({1.0, 0.5}), 1000, 1e-4, 1e-8);
  CHECK(!rep.pass);
  CHECK(rep.max > 1e-2);
}
