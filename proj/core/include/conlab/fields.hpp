#ifndef CONLAB_FIELDS_HPP
#define CONLAB_FIELDS_HPP

#include <functional>
#include <optional>

#include "conlab/geometry.hpp"
#include "conlab/report.hpp"

namespace conlab {

/// Candidate concircular field: covector φ, scalar ρ, and optionally the
/// constant K of the special-field law ∇ρ = Kφ. Nothing is assumed; every
/// claim is tested.
struct ConcircularCandidate {
  CovectorField phi;
  Expr rho;
  std::optional<double> K;
};

/// Candidate solution of the geodesic-mapping system: symmetric a, covector
/// λ, scalar μ, and the space constant K (zero for the flat-type system).
struct SinyukovSolution {
  BilinearField a;
  CovectorField lambda;
  Expr mu;
  double K = 0.0;
};

/// Two metrics on the same coordinates, claimed geodesically equivalent.
/// psi empty means "recover from the determinant potential".
struct GeodesicPair {
  const MetricChart& g;
  const MetricChart& gbar;
  std::optional<CovectorField> psi;
};

class PreconditionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DegenerateFitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// --- concircular fields ----------------------------------------------------

enum class RhoClass { Basic, Exceptional, Indeterminate };

std::string_view to_string(RhoClass c);

struct ConcircularResult {
  ResidualReport concircular; // ∇_j φ_i − ρ g_ij
  ResidualReport special;     // ∇_j ρ − K φ_j with supplied or fitted K
  RhoClass rho_class = RhoClass::Exceptional;
  bool convergent = false;
  std::optional<double> K_used;
  double max_abs_rho = 0.0;
  double max_abs_grad_rho = 0.0;
};

ConcircularResult check_concircular(const MetricChart& chart, const ConcircularCandidate& cand,
                                    const std::vector<Point>& grid, const RunConfig& cfg = {});

struct FitK {
  double K = 0.0;
  double residual_max = 0.0; // max |∇_j ρ − K φ_j| after the fit
};

/// Least-squares K minimizing Σ|∇_j ρ − K φ_j|² over the grid.
/// Throws DegenerateFitError when φ vanishes identically on the grid.
FitK fit_k(const MetricChart& chart, const ConcircularCandidate& cand,
           const std::vector<Point>& grid);

// --- geodesic equivalence --------------------------------------------------

/// Symbolic ψ_i = ∂_i Ψ with Ψ = ln|det ḡ / det g| / (2(n+1)); the
/// derivative of log|det| is computed as det'/det, so no logarithm appears.
std::vector<Expr> psi_exprs(const GeodesicPair& pair);

Eigen::VectorXd psi_from_pair(const GeodesicPair& pair, const Point& p);

/// Residual of ∇_k ḡ_ij = 2ψ_k ḡ_ij + ψ_i ḡ_jk + ψ_j ḡ_ik (∇ of g).
ResidualReport check_levi_civita(const GeodesicPair& pair, const std::vector<Point>& grid,
                                 const RunConfig& cfg = {});

/// a_ij = e^{2Ψ} ḡ^{αβ} g_αi g_βj and λ_i = −a^s_i ψ_s, built symbolically.
/// Requires det ḡ / det g > 0 on the domain (same signature); evaluation
/// raises a domain error otherwise. μ and K are left unset (zero).
SinyukovSolution solution_from_metrics(const GeodesicPair& pair);

ResidualReport check_sinyukov(const MetricChart& chart, const SinyukovSolution& sol,
                              const std::vector<Point>& grid, const RunConfig& cfg = {});

struct VnKReports {
  ResidualReport eq7;   // ∇_j λ_i − K a_ij − μ g_ij
  ResidualReport eq8;   // ∇_k μ − 2K λ_k
  ResidualReport joint; // max of both blocks
};

VnKReports check_vnk(const MetricChart& chart, const SinyukovSolution& sol,
                     const std::vector<Point>& grid, const RunConfig& cfg = {});

/// Least-squares K from the first block, given (a, λ, μ) but ignoring sol.K.
double fit_vnk_K(const MetricChart& chart, const SinyukovSolution& sol,
                 const std::vector<Point>& grid);

/// The three constant-e identities satisfied by the distinguished solution:
///   K a(AX,Y) − (λ⊗λ)(X,Y) = e g(X,Y)/K
///   K λ(AX) − μ λ(X) = 0
///   K g⁻¹(λ,λ) − μ² = −e
std::vector<ResidualReport> check_corollary1(const MetricChart& chart, const SinyukovSolution& sol,
                                             int e, const std::vector<Point>& grid,
                                             const RunConfig& cfg = {});

struct ESelection {
  int e = 0;
  bool unambiguous = false; // exactly one of {−1,0,1} passed
  std::array<bool, 3> passed{}; // indexed e+1
};

ESelection select_corollary1_e(const MetricChart& chart, const SinyukovSolution& sol,
                               const std::vector<Point>& grid, const RunConfig& cfg = {});

/// K = 0 system: ∇_k a_ij = λ_i g_jk + λ_j g_ik and ∇_k λ_i = μ g_ik with μ
/// constant (its gradient expression must evaluate to ~0).
std::vector<ResidualReport> check_vn0(const MetricChart& chart, const SinyukovSolution& sol,
                                      const std::vector<Point>& grid, const RunConfig& cfg = {});

// --- transfer of ρ under a geodesic mapping --------------------------------

/// ρ̄ = e^{−Ψ} (ρ + g^{ij} φ_i ψ_j), as an expression. Ψ is the determinant
/// potential of psi_exprs(); the inverse factor e^{−Ψ} is what maps the
/// flat-chart fields onto genuine concircular scalars of the counterpart
/// metric (transfer-then-verify fixes the sign; see tests).
Expr transfer_rho_expr(const GeodesicPair& pair, const ConcircularCandidate& cand);

double transfer_rho(const GeodesicPair& pair, const ConcircularCandidate& cand, const Point& p);

/// The transferred candidate on ḡ for a known target constant K̄:
/// φ̄ = d ρ̄ and ρ = K̄ ρ̄ (any scale of a concircular field is concircular).
ConcircularCandidate transfer_candidate(const GeodesicPair& pair, const ConcircularCandidate& cand,
                                        double K_bar);

// --- products of concircular fields ----------------------------------------

/// The solution generated by two special concircular fields with one K:
/// a = sym(φ¹⊗φ²), λ = (ρ²φ¹ + ρ¹φ²)/2, μ = ρ¹ρ², same K.
SinyukovSolution concircular_pair_solution(const ConcircularCandidate& c1,
                                           const ConcircularCandidate& c2, double K);

// --- parallel covector sequences on flat-type solutions ---------------------

struct SequenceOptions {
  int max_len = 8;
  double parallel_tol = 1e-8;
  double orth_tol = 1e-8;
  double closed_tol = 1e-9;
  double rank_tol = 1e-8;
};

struct SequenceMember {
  std::vector<Eigen::VectorXd> values; // sampled at the grid points
  double parallel_residual = 0.0;      // max |∇_k φ_i|
  double orthogonality = 0.0;          // max |φ_t λ^t|
};

struct ParallelSequenceResult {
  std::vector<SequenceMember> members;
  std::string termination;        // "dependent", "max_len", or "obstruction"
  double obstruction_value = 0.0; // the φ_t λ^t magnitude that stopped iteration
  std::vector<ResidualReport> reports;
};

/// Iterates φ^{α+1}(X) = φ^α(AX) − f^α λ(X) with A = g⁻¹a and f^α the path
/// potential of φ^α from `base` (64-node Gauss–Legendre along the segment).
/// Requires ∇λ = 0 and ∇φ = 0 within tolerance and φ closed (a potential
/// must exist). Orthogonality φ^α(λ*) is re-checked every level; a violation
/// is the analytic obstruction to the next iterate being parallel and stops
/// the sequence with termination = "obstruction".
ParallelSequenceResult build_parallel_sequence(const MetricChart& chart,
                                               const SinyukovSolution& sol,
                                               const CovectorField& phi, const Point& base,
                                               const std::vector<Point>& grid,
                                               const SequenceOptions& opt = {});

} // namespace conlab

#endif
