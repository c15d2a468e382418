#include "conlab/report.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace conlab {

void ResidualAccumulator::add(const Point& p, double abs_residual) {
  abs_residual = std::abs(abs_residual);
  if (count_ == 0 || abs_residual > max_) {
    max_ = abs_residual;
    worst_ = p;
  }
  sum_ += abs_residual;
  ++count_;
}

ResidualReport ResidualAccumulator::finish(std::string equation, double tolerance) const {
  ResidualReport r;
  r.equation = std::move(equation);
  r.max = max_;
  r.mean = count_ ? sum_ / count_ : 0.0;
  r.tolerance = tolerance;
  r.points = count_;
  r.pass = max_ <= tolerance;
  r.worst_point = worst_;
  return r;
}

nlohmann::json to_json(const ResidualReport& r) {
  nlohmann::json j{
      {"equation", r.equation}, {"max", r.max},       {"mean", r.mean},
      {"tolerance", r.tolerance}, {"points", r.points}, {"pass", r.pass},
  };
  j["worst_point"] = std::vector<double>(r.worst_point.data(), r.worst_point.data() + r.worst_point.size());
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

ResidualReport report_from_json(const nlohmann::json& j) {
  ResidualReport r;
  r.equation = j.at("equation").get<std::string>();
  r.max = j.at("max").get<double>();
  r.mean = j.at("mean").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  r.points = j.at("points").get<int>();
  r.pass = j.at("pass").get<bool>();
  auto wp = j.at("worst_point").get<std::vector<double>>();
  r.worst_point = Eigen::Map<const Eigen::VectorXd>(wp.data(), static_cast<long>(wp.size()));
  if (j.contains("note")) r.note = j.at("note").get<std::string>();
  return r;
}

bool all_pass(const std::vector<ResidualReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

double RunConfig::default_tolerance(const std::string& eq) {
  static const std::map<std::string, double> table = {
      {"concircular", 1e-9},       // nabla_j phi_i = rho g_ij
      {"special", 1e-9},           // nabla_j rho = K phi_j
      {"convergent", 1e-9},        // max |nabla rho| for the convergent verdict
      {"levicivita", 1e-8},
      {"sinyukov", 1e-8},
      {"vnk7", 1e-8},
      {"vnk8", 1e-8},
      {"vnk", 1e-8},
      {"vn0_42", 1e-12},
      {"vn0_43", 1e-12},
      {"vn0_mu_const", 1e-12},
      {"corollary1_36", 1e-9},
      {"corollary1_37", 1e-9},
      {"corollary1_38", 1e-9},
      {"cone_eq16", 1e-10},
      {"cone_closed_form", 1e-10},
      {"cone_metricity", 1e-10},
      {"cone_inverse", 1e-12},
      {"convergent_field_deriv", 1e-10},
      {"convergent_field_norm", 1e-12},
      {"parallel_covector", 1e-9},
      {"parallel_bilinear", 1e-9},
      {"lift_precondition", 1e-8},
      {"admission", 1e-8},
      {"unit_law", 1e-10},
      {"jordan_identity", 1e-8},
      {"commutativity", 1e-10},
      {"isomorphism", 1e-9},
      {"closure", 1e-8},
      {"ideal", 1e-7},
      {"mapcheck", 1e-8},
      {"metricity", 1e-10},
      {"inverse_consistency", 1e-12},
      {"energy_drift", 1e-6},
      {"sequence_parallel", 1e-8},
      {"sequence_orthogonality", 1e-8},
      {"closedness", 1e-9},
      {"transfer", 1e-6},
  };
  auto it = table.find(eq);
  return it != table.end() ? it->second : 1e-9;
}

double RunConfig::tolerance(const std::string& eq) const {
  auto it = tol_overrides.find(eq);
  return it != tol_overrides.end() ? it->second : default_tolerance(eq);
}

} // namespace conlab
