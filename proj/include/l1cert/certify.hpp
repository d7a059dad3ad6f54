#pragma once

#include <optional>

#include "l1cert/common.hpp"

namespace l1cert {

// A support set with its sign pattern: the object a dual certificate is
// checked against.
struct SupportPattern {
  IndexSet support;        // strictly increasing indices
  std::vector<int> signs;  // entries in {-1, +1}, aligned with support

  Index size() const { return static_cast<Index>(support.size()); }
};

// Validates ordering, uniqueness, and sign values.
SupportPattern make_pattern(IndexSet support, std::vector<int> signs);
SupportPattern pattern_of(const Vector& x, double rel_tol = kSupportRelTol);
Vector sign_vector(const SupportPattern& sp);  // signs as doubles

struct DualCertificate {
  Vector y;
  double eq_residual = 0.0;  // ||a_I^T y - s||_inf
  double margin = 0.0;       // 1 - max off-support |a_i^T y|; +inf when no off-support column
};

// Computes both residuals from scratch; this is the re-validation used by
// every soundness check.
DualCertificate evaluate_certificate(const Matrix& a, const SupportPattern& sp, Vector y);
bool is_valid_strict(const DualCertificate& cert, double eq_tol = kEqTol,
                     double margin_tol = kStrictTol);

// --- Exact engine -----------------------------------------------------------

// Max-margin linear program: maximize eps subject to a_I^T y = s and
// |a_i^T y| <= 1 - eps off the support. eps_star > 0 decides the existence of
// a strict certificate exactly (up to LP tolerances). When the support covers
// every column, eps_star is +inf and y is the least-norm equality solution.
struct MaxMarginResult {
  bool equality_consistent = false;
  double eps_star = 0.0;
  Vector y;
};

MaxMarginResult certificate_lp(const Matrix& a, const SupportPattern& sp);

// --- Iterative engines ------------------------------------------------------

enum class CertEngineStatus { kConverged, kInfeasible, kDiverged };

struct EngineCertificate {
  CertEngineStatus status = CertEngineStatus::kDiverged;
  DualCertificate certificate;  // meaningful when converged
  int iterations = 0;
  // Set when the engine failed without an exact verdict; callers should
  // confirm with certificate_lp before concluding anything.
  bool needs_lp_confirmation = false;
  std::vector<double> objective_trace;  // barrier objective per accepted step
};

// Equality-constrained Newton on the log-barrier objective
//   minimize -sum_{i off support} [log(1 - a_i^T y) + log(1 + a_i^T y)]
//   subject to a_I^T y = s.
// Any finite-objective feasible point is a strict certificate; the returned
// point is the analytic center of the margin region. The seeded overload
// requires an interior starting point (equality satisfied, all off-support
// values strictly inside (-1, 1)); the other obtains one from certificate_lp
// and reports kInfeasible when no interior point exists.
EngineCertificate certificate_barrier(const Matrix& a, const SupportPattern& sp,
                                      const Vector& y0);
EngineCertificate certificate_barrier(const Matrix& a, const SupportPattern& sp);

struct AdmmOptions {
  double rho = 1.0;  // initial value; residual balancing adapts it
  int max_iters = 10000;
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double divergence_bound = 1e8;  // on ||(y, z, u)||_inf
};

// ADMM on the consensus form with z = a_{I^c}^T y: the y-update is an
// equality-constrained least squares (one KKT factorization per rho), the
// z-update solves one cubic per coordinate, and the scaled dual u follows the
// residual. Started from the origin. If no strict certificate exists the
// iteration has nothing to converge to: either the iterates blow up or they
// creep onto the boundary, and both are reported kDiverged. Divergence is
// evidence, not proof, so needs_lp_confirmation is set in that case.
EngineCertificate certificate_admm(const Matrix& a, const SupportPattern& sp,
                                   const AdmmOptions& opts = {});

// The unique root z in (-1, 1) of rho z^3 - rho v z^2 - (2 + rho) z + rho v,
// i.e. the stationary point of -log(1-z) - log(1+z) + rho/2 (z - v)^2.
// Safeguarded Newton with a bisection bracket.
double admm_cubic_root(double rho, double v);

// --- Strictification --------------------------------------------------------

// Perturbs an optimal dual y_star (for the minimum-l1 problem with datum
// a x_star) so that every off-support constraint becomes strictly inactive
// while the dual objective b^T y is preserved. Touching off-support
// constraints are collected in L (at -1) and U (at +1); the correction comes
// from an auxiliary LP in (p, q) and is applied as y + p when q* = 0 or as
// the midpoint with p/q* otherwise. alpha is halved on failure, up to
// max_attempts; when the instance admits no strict certificate every attempt
// fails and success is false.
struct StrictifyResult {
  bool success = false;
  Vector y;
  int attempts = 0;
  double alpha_used = 0.0;
};

StrictifyResult strictify(const Matrix& a, const SupportPattern& sp, const Vector& y_star,
                          const Vector& x_star, std::optional<double> alpha0 = std::nullopt,
                          int max_attempts = 20);

// --- Full test --------------------------------------------------------------

enum class Engine { kLP, kBarrier, kADMM };

struct UniquenessCondition {
  enum class Status { kHolds, kFails, kBorderline };
  Status status = Status::kFails;
  bool rank_ok = false;
  bool equality_consistent = false;
  double eps_star = 0.0;
  std::optional<DualCertificate> certificate;
  bool needs_lp_confirmation = false;

  bool holds() const { return status == Status::kHolds; }
};

// Full-column-rank test on a_I plus existence of a strict certificate.
// The LP engine is decisive; margins inside (0, kStrictTol) are reported
// kBorderline rather than forced into a boolean. An empty support holds
// vacuously with y = 0. Barrier/ADMM failures report kFails with
// needs_lp_confirmation set.
UniquenessCondition check_uniqueness_condition(const Matrix& a, const SupportPattern& sp,
                                  Engine engine = Engine::kLP);

}  // namespace l1cert
