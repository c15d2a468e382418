#include "conlab/catalog.hpp"

#include <stdexcept>

namespace conlab {

namespace {

std::vector<CatalogEntry> build_catalog() {
  std::vector<CatalogEntry> out;

  {
    CatalogEntry e;
    e.name = "flat2";
    e.note = "Euclidean plane; radial field x dx + y dy has hessian = g (rho = 1), "
             "constant covectors are parallel";
    e.metric_text =
        "# Euclidean plane\n"
        "dim = 2\n"
        "coord 0 = x\n"
        "coord 1 = y\n"
        "domain 0 = -1 1\n"
        "domain 1 = -1 1\n"
        "g 0 0 = 1\n"
        "g 1 1 = 1\n";
    e.fields["radial.conc"] =
        "# phi = d(r^2/2): grad_j phi_i = d_j x_i = delta_ij, so rho = 1 and\n"
        "# grad rho = 0 = K phi with K = 0 (basic, convergent, special)\n"
        "kind = concircular\n"
        "phi 0 = x\n"
        "phi 1 = y\n"
        "rho = 1\n"
        "K = 0\n";
    e.fields["parallel.conc"] =
        "# constant covector: grad phi = 0, rho = 0 (exceptional, convergent)\n"
        "kind = concircular\n"
        "phi 0 = 1\n"
        "phi 1 = 0\n"
        "rho = 0\n"
        "K = 0\n";
    e.fields["const.cov"] =
        "kind = covector\n"
        "w 0 = 1\n"
        "w 1 = 0\n";
    e.expected["radial.conc"] = "basic, convergent, special K=0";
    e.expected["parallel.conc"] = "exceptional, convergent";
    out.push_back(std::move(e));
  }

  {
    CatalogEntry e;
    e.name = "sphere2";
    e.note = "unit sphere (K = -1 space); the three first spherical harmonics u = cos(theta), "
             "sin(theta)cos(phi), sin(theta)sin(phi) give hess u = -u g, so phi = du, rho = -u, "
             "and grad rho = -du = -phi";
    e.metric_text =
        "# unit sphere, polar chart away from the poles\n"
        "dim = 2\n"
        "coord 0 = theta\n"
        "coord 1 = phi\n"
        "domain 0 = 0.2 2.9\n"
        "domain 1 = 0.1 3.0\n"
        "g 0 0 = 1\n"
        "g 1 1 = sin(theta)^2\n";
    e.fields["conc1.conc"] =
        "# u = cos(theta): phi = du = (-sin(theta), 0), rho = -u\n"
        "kind = concircular\n"
        "phi 0 = -sin(theta)\n"
        "phi 1 = 0\n"
        "rho = -cos(theta)\n"
        "K = -1\n";
    e.fields["conc2.conc"] =
        "# u = sin(theta)cos(phi)\n"
        "kind = concircular\n"
        "phi 0 = cos(theta)*cos(phi)\n"
        "phi 1 = -sin(theta)*sin(phi)\n"
        "rho = -sin(theta)*cos(phi)\n"
        "K = -1\n";
    e.fields["conc3.conc"] =
        "# u = sin(theta)sin(phi)\n"
        "kind = concircular\n"
        "phi 0 = cos(theta)*sin(phi)\n"
        "phi 1 = sin(theta)*cos(phi)\n"
        "rho = -sin(theta)*sin(phi)\n"
        "K = -1\n";
    e.fields["sol1.sink"] =
        "# generated by conc1 with itself: a = phi x phi, lambda = rho phi, mu = rho^2\n"
        "kind = sinyukov\n"
        "a 0 0 = sin(theta)^2\n"
        "a 1 1 = 0\n"
        "lambda 0 = cos(theta)*sin(theta)\n"
        "lambda 1 = 0\n"
        "mu = cos(theta)^2\n"
        "K = -1\n";
    e.fields["esol.sink"] =
        "# unit + 2 (phi x phi) for phi = d(cos theta): the lifted operator squares\n"
        "# to the identity, so the constant-e identities hold with e = 1\n"
        "kind = sinyukov\n"
        "a 0 0 = 2*sin(theta)^2 - 1\n"
        "a 1 1 = -sin(theta)^2\n"
        "lambda 0 = 2*cos(theta)*sin(theta)\n"
        "lambda 1 = 0\n"
        "mu = 2*cos(theta)^2 - 1\n"
        "K = -1\n";
    e.expected["conc1.conc"] = "basic, special K=-1";
    e.expected["conc2.conc"] = "basic, special K=-1";
    e.expected["conc3.conc"] = "basic, special K=-1";
    out.push_back(std::move(e));
  }

  {
    CatalogEntry e;
    e.name = "hyperbolic2";
    e.note = "hyperbolic plane (K = +1 space): u = cosh(r) has hess u = u g, so phi = du = "
             "(sinh r, 0), rho = cosh r, grad rho = phi";
    e.metric_text =
        "# hyperbolic plane, polar chart\n"
        "dim = 2\n"
        "coord 0 = r\n"
        "coord 1 = phi\n"
        "domain 0 = 0.2 2.0\n"
        "domain 1 = 0.1 3.0\n"
        "g 0 0 = 1\n"
        "g 1 1 = sinh(r)^2\n";
    e.fields["conc1.conc"] =
        "kind = concircular\n"
        "phi 0 = sinh(r)\n"
        "phi 1 = 0\n"
        "rho = cosh(r)\n"
        "K = 1\n";
    e.fields["sol1.sink"] =
        "# generated by conc1 with itself\n"
        "kind = sinyukov\n"
        "a 0 0 = sinh(r)^2\n"
        "a 1 1 = 0\n"
        "lambda 0 = cosh(r)*sinh(r)\n"
        "lambda 1 = 0\n"
        "mu = cosh(r)^2\n"
        "K = 1\n";
    e.expected["conc1.conc"] = "basic, special K=1";
    out.push_back(std::move(e));
  }

  {
    CatalogEntry e;
    e.name = "klein2";
    e.note = "projective-disc model of the hyperbolic plane: straight lines are its geodesics, "
             "so it is geodesically equivalent to the flat chart on the same coordinates";
    e.metric_text =
        "# projective disc model, u = 1 - x^2 - y^2:\n"
        "#   g = ((1-y^2) dx^2 + 2xy dx dy + (1-x^2) dy^2) / u^2\n"
        "dim = 2\n"
        "coord 0 = x\n"
        "coord 1 = y\n"
        "domain 0 = -0.4 0.4\n"
        "domain 1 = -0.4 0.4\n"
        "g 0 0 = (1 - y^2)/(1 - x^2 - y^2)^2\n"
        "g 0 1 = x*y/(1 - x^2 - y^2)^2\n"
        "g 1 1 = (1 - x^2)/(1 - x^2 - y^2)^2\n";
    e.fields["linear-x.conc"] =
        "# restriction of the ambient linear function x/sqrt(u) to the hyperboloid;\n"
        "# hess(v) = v g with v = x (1-x^2-y^2)^(-1/2), so phi = dv, rho = v, K = 1\n"
        "kind = concircular\n"
        "phi 0 = (1 - y^2)/(1 - x^2 - y^2)^1.5\n"
        "phi 1 = x*y/(1 - x^2 - y^2)^1.5\n"
        "rho = x/(1 - x^2 - y^2)^0.5\n"
        "K = 1\n";
    e.expected["linear-x.conc"] = "basic, special K=1";
    out.push_back(std::move(e));
  }

  {
    CatalogEntry e;
    e.name = "flat-vn0";
    e.note = "flat chart carrying K = 0 solutions: a = x x^T + I with lambda = x, mu = 1; and "
             "the mu = 0 solution a = [[2x, y],[y, 1]], lambda = dx used by the parallel "
             "sequence construction";
    e.metric_text =
        "dim = 2\n"
        "coord 0 = x\n"
        "coord 1 = y\n"
        "domain 0 = -1 1\n"
        "domain 1 = -1 1\n"
        "g 0 0 = 1\n"
        "g 1 1 = 1\n";
    e.fields["mu1.sink"] =
        "# a_ij = x_i x_j + delta_ij: d_k a_ij = delta_ik x_j + delta_jk x_i,\n"
        "# lambda = x, grad lambda = I = mu g with mu = 1, K = 0\n"
        "kind = sinyukov\n"
        "a 0 0 = x^2 + 1\n"
        "a 0 1 = x*y\n"
        "a 1 1 = y^2 + 1\n"
        "lambda 0 = x\n"
        "lambda 1 = y\n"
        "mu = 1\n"
        "K = 0\n";
    e.fields["mu0.sink"] =
        "# a = x (x) c + c (x) x + diag(0,1) with c = dx: lambda = c is parallel (mu = 0)\n"
        "kind = sinyukov\n"
        "a 0 0 = 2*x\n"
        "a 0 1 = y\n"
        "a 1 1 = 1\n"
        "lambda 0 = 1\n"
        "lambda 1 = 0\n"
        "mu = 0\n"
        "K = 0\n";
    e.fields["seq-start.cov"] =
        "# parallel covector orthogonal to lambda*: starts the sequence\n"
        "kind = covector\n"
        "w 0 = 0\n"
        "w 1 = 1\n";
    e.fields["seq-obstructed.cov"] =
        "# parallel but phi(lambda*) = 1 != 0: the construction must refuse to iterate\n"
        "kind = covector\n"
        "w 0 = 1\n"
        "w 1 = 0\n";
    out.push_back(std::move(e));
  }

  {
    CatalogEntry e;
    e.name = "cone-of-hyperbolic2";
    e.note = "the 3-dimensional cone over hyperbolic2 with K = 1 in adapted coordinates; "
             "emitted as a plain metric so the generic machinery can be pointed at it";
    e.metric_text =
        "# G = exp(2 x0) diag(-1, g_hyperbolic / 1)\n"
        "dim = 3\n"
        "coord 0 = x0\n"
        "coord 1 = r\n"
        "coord 2 = phi\n"
        "domain 0 = -0.5 0.5\n"
        "domain 1 = 0.2 2.0\n"
        "domain 2 = 0.1 3.0\n"
        "g 0 0 = -exp(2*x0)\n"
        "g 1 1 = exp(2*x0)\n"
        "g 2 2 = exp(2*x0)*sinh(r)^2\n";
    e.sidecar_json = "{\"K\": 1.0, \"base\": \"hyperbolic2.metric\", \"x0_domain\": [-0.5, 0.5]}";
    out.push_back(std::move(e));
  }

  {
    CatalogEntry e;
    e.name = "flat2-conformal";
    e.note = "flat metric scaled by exp(x): NOT geodesically equivalent to the flat chart; "
             "negative control for the equivalence checks";
    e.metric_text =
        "dim = 2\n"
        "coord 0 = x\n"
        "coord 1 = y\n"
        "domain 0 = -1 1\n"
        "domain 1 = -1 1\n"
        "g 0 0 = exp(x)\n"
        "g 1 1 = exp(x)\n";
    out.push_back(std::move(e));
  }

  return out;
}

} // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = build_catalog();
  return entries;
}

const CatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return e;
  throw std::out_of_range("no catalog entry named '" + name + "'");
}

} // namespace conlab
