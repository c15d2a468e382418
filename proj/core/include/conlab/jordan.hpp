#ifndef CONLAB_JORDAN_HPP
#define CONLAB_JORDAN_HPP

#include "conlab/cone.hpp"

namespace conlab {

/// A solution triple admitted to the algebra: admission re-verifies the full
/// system at the admission tolerance, so every element genuinely solves it.
/// Elements keep a pointer to their chart; products require the same chart
/// object and the same K.
class JordanElement {
public:
  static JordanElement admit(const MetricChart& chart, SinyukovSolution sol,
                             const std::vector<Point>& grid, const RunConfig& cfg = {});

  const SinyukovSolution& solution() const { return sol_; }
  const MetricChart& chart() const { return *chart_; }
  double K() const { return sol_.K; }

private:
  JordanElement(const MetricChart* chart, SinyukovSolution sol)
      : chart_(chart), sol_(std::move(sol)) {}
  const MetricChart* chart_;
  SinyukovSolution sol_;
};

/// The unit (g/K, 0, -1).
SinyukovSolution unit_solution(const MetricChart& chart, double K);

/// Raw symbolic product (no re-verification):
///   2 a3_ij = K g^{st} (a1_is a2_tj + a2_is a1_tj) - (l1_i l2_j + l2_i l1_j)
///   2 l3_i  = K (l1 A2 + l2 A1)_i - (mu1 l2_i + mu2 l1_i),  A = g^{-1} a
///   mu3     = K g^{-1}(l1, l2) - mu1 mu2
/// Terms are arranged so that swapping the operands yields bit-identical
/// evaluation (IEEE addition and multiplication commute). The symbolic
/// inverse goes through the adjugate; use the sampled product for n >= 4.
SinyukovSolution jordan_product_solution(const MetricChart& chart, const SinyukovSolution& s1,
                                         const SinyukovSolution& s2);

/// Product with closure re-verification; throws PreconditionError when the
/// result fails re-admission (it never silently accepts).
JordanElement jordan_product(const JordanElement& e1, const JordanElement& e2,
                             const std::vector<Point>& grid, const RunConfig& cfg = {});

/// Product evaluated pointwise on a grid (the n >= 4 route, where adjugate
/// expressions blow up). Values and derivatives come from the product rule
/// with d(g^{-1}) = -g^{-1} (dg) g^{-1}; closure checks use the same grid.
struct SampledSolution {
  std::vector<Point> grid;
  std::vector<Eigen::MatrixXd> a;
  std::vector<Eigen::VectorXd> lambda;
  std::vector<double> mu;
  std::vector<std::vector<Eigen::MatrixXd>> da; // [point][k](i,j)
  std::vector<Eigen::MatrixXd> dlambda;         // [point](k,i)
  std::vector<Eigen::VectorXd> dmu;             // [point][k]
  double K = 0.0;
  std::string note;
};

SampledSolution jordan_product_sampled(const JordanElement& e1, const JordanElement& e2,
                                       const std::vector<Point>& grid);

ResidualReport check_sinyukov_sampled(const MetricChart& chart, const SampledSolution& sol,
                                      const RunConfig& cfg = {});
VnKReports check_vnk_sampled(const MetricChart& chart, const SampledSolution& sol,
                             const RunConfig& cfg = {});

/// Bracket of parallel forms on the cone:
///   2 {a;b}_IJ = G^{DT} (a_DI b_TJ + a_DJ b_TI).
/// The result is re-verified parallel on `cone_grid`; failure throws.
LiftedBilinear jordan_bracket(const ConeSpace& cone, const LiftedBilinear& f1,
                              const LiftedBilinear& f2, const std::vector<Point>& cone_grid,
                              const RunConfig& cfg = {});

/// Bracket without the parallel re-verification (for sign-law tests).
BilinearField jordan_bracket_exprs(const ConeSpace& cone, const BilinearField& f1,
                                   const BilinearField& f2);

/// max_IJ | lift(e1 * e2) - {lift e1; lift e2} | over the cone grid.
ResidualReport check_isomorphism(const ConeSpace& cone, const JordanElement& e1,
                                 const JordanElement& e2, const std::vector<Point>& base_grid,
                                 const std::vector<Point>& cone_grid, const RunConfig& cfg = {});

struct AxiomsResult {
  ResidualReport commutativity;   // e1*e2 vs e2*e1, max over pairs and grid
  ResidualReport unit_law;        // unit*e vs e and e*unit vs e
  ResidualReport jordan_identity; // (x*y)*(x*x) vs x*(y*(x*x))
};

AxiomsResult check_jordan_axioms(const std::vector<JordanElement>& elements,
                                 const std::vector<Point>& grid, const RunConfig& cfg = {});

/// Ideal membership of products against the span generated by pairwise
/// symmetric products of the concircular basis. F is the recovered constant
/// coefficient matrix of the contracted fields Phi^b = sum_c F(b,c) phi^c,
/// and `reconstruction` verifies that F reproduces every product.
struct IdealCheck {
  std::vector<ResidualReport> memberships;
  Eigen::MatrixXd F;
  ResidualReport reconstruction;
  bool basis_rank_ok = true;
};

IdealCheck check_ideal_membership(const MetricChart& chart,
                                  const std::vector<ConcircularCandidate>& basis, double K,
                                  const JordanElement& element, const std::vector<Point>& grid,
                                  const RunConfig& cfg = {});

} // namespace conlab

#endif
