#ifndef CONLAB_CONE_HPP
#define CONLAB_CONE_HPP

#include "conlab/fields.hpp"

namespace conlab {

/// The (n+1)-dimensional warped cone over a base chart, in the adapted
/// coordinates where the metric takes the block form
///   G_00 = -exp(2K x0),  G_0i = 0,  G_ij = exp(2K x0) g_ij / K.
/// `positive_norm` flips both block signs (G -> -G), the variant carrying a
/// convergent field of positive square norm; the connection is unchanged.
class ConeSpace {
public:
  ConeSpace(const MetricChart& base, double K, Interval x0_domain = {-0.5, 0.5},
            bool positive_norm = false);

  const MetricChart& chart() const { return cone_; }
  const MetricChart& base() const { return base_; }
  double K() const { return K_; }
  bool positive_norm() const { return positive_norm_; }
  const std::string& x0_name() const { return x0_; }
  /// exp(K x0) and exp(2K x0) as shared trees (the lift factors).
  const Expr& lift_factor() const { return ekx_; }
  const Expr& lift_factor2() const { return e2kx_; }

  /// Closed-form inverse exp(-2K x0) diag(-1, K g^{ij}).
  ExprMatrix inverse_metric_exprs() const;

private:
  MetricChart base_;
  double K_;
  bool positive_norm_;
  std::string x0_;
  Expr ekx_, e2kx_;
  MetricChart cone_;
};

/// Lift of a special concircular field: exp(K x0) (rho, phi_i).
struct LiftedCovector {
  std::vector<Expr> comp; // n+1 entries
  double K = 0.0;
};

/// Lift of a solution triple: exp(2K x0) [[mu, lambda],[lambda, a]].
struct LiftedBilinear {
  BilinearField a; // (n+1) x (n+1)
  double K = 0.0;
};

struct UnliftedCovector {
  CovectorField phi;
  Expr rho;
};

/// Validates the concircular and special-field laws for the cone's K (at
/// the lift_precondition tolerance) on `base_grid`, then builds the lift.
/// Throws PreconditionError naming the failing equation.
LiftedCovector lift_concircular(const ConeSpace& cone, const ConcircularCandidate& cand,
                                const std::vector<Point>& base_grid, const RunConfig& cfg = {});

/// Validates the full solution system for the cone's K, then lifts.
LiftedBilinear lift_solution(const ConeSpace& cone, const SinyukovSolution& sol,
                             const std::vector<Point>& base_grid, const RunConfig& cfg = {});

/// Splits the blocks and strips the exp(K x0) factor. When the component was
/// built by lift_concircular the original trees are recovered exactly;
/// otherwise the factor is divided out.
UnliftedCovector unlift_covector(const ConeSpace& cone, const LiftedCovector& lifted);
SinyukovSolution unlift_solution(const ConeSpace& cone, const LiftedBilinear& lifted);

ResidualReport check_parallel_covector(const ConeSpace& cone, const std::vector<Expr>& comp,
                                       const std::vector<Point>& cone_grid,
                                       const RunConfig& cfg = {});

ResidualReport check_parallel_bilinear(const ConeSpace& cone, const BilinearField& a,
                                       const std::vector<Point>& cone_grid,
                                       const RunConfig& cfg = {});

struct ConvergentFieldReports {
  ResidualReport deriv; // nabla_J phi^I - K delta^I_J for phi^I = delta^I_0
  ResidualReport norm;  // residual max(0, G_00): the square norm must stay negative
};

ConvergentFieldReports check_convergent_field(const ConeSpace& cone,
                                              const std::vector<Point>& cone_grid,
                                              const RunConfig& cfg = {});

/// Connection identities of the adapted coordinates, from the generic
/// Christoffel computation:
///   "cone_eq16":        Gamma^I_{0J} = K delta^I_J
///   "cone_closed_form": Gamma^0_00 = K, Gamma^0_{0j} = 0, Gamma^0_{ij} = g_ij,
///                       Gamma^k_{ij} = base Gamma^k_{ij}
/// The mixed block comes out as K delta^i_j; the popular table value
/// delta^i_j matches only at K = 1, which the eq16 report makes visible.
std::vector<ResidualReport> check_cone_connection(const ConeSpace& cone,
                                                  const std::vector<Point>& cone_grid,
                                                  const RunConfig& cfg = {});

/// Product check of the generic numeric inverse against the closed form.
ResidualReport check_cone_inverse(const ConeSpace& cone, const std::vector<Point>& cone_grid,
                                  const RunConfig& cfg = {});

} // namespace conlab

#endif
