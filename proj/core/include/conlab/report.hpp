#ifndef CONLAB_REPORT_HPP
#define CONLAB_REPORT_HPP

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "conlab/chart.hpp"

namespace conlab {

/// Per-equation residual summary over a sample grid.
struct ResidualReport {
  std::string equation;
  double max = 0.0;
  double mean = 0.0;
  double tolerance = 0.0;
  int points = 0;
  bool pass = false;
  Point worst_point; // empty when no points were sampled
  std::string note;  // optional annotation (classification, truncation, ...)
};

/// Streams per-point residuals and produces the summary. The verdict is
/// pass iff max <= tolerance.
class ResidualAccumulator {
public:
  void add(const Point& p, double abs_residual);
  ResidualReport finish(std::string equation, double tolerance) const;

private:
  double max_ = 0.0;
  double sum_ = 0.0;
  int count_ = 0;
  Point worst_;
};

nlohmann::json to_json(const ResidualReport& r);
ResidualReport report_from_json(const nlohmann::json& j);

bool all_pass(const std::vector<ResidualReport>& reports);

/// Grid generation and per-equation tolerance configuration for a run.
/// Tolerances not overridden fall back to the built-in defaults table.
struct RunConfig {
  GridSpec grid;
  std::map<std::string, double> tol_overrides;

  double tolerance(const std::string& equation) const;
  static double default_tolerance(const std::string& equation);
};

} // namespace conlab

#endif
