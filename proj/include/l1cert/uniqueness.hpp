#pragma once

#include <optional>
#include <string>

#include "l1cert/certify.hpp"
#include "l1cert/common.hpp"
#include "l1cert/solvers.hpp"

namespace l1cert {

enum class Verdict { kUnique, kNotUnique, kIndeterminate };

enum class WitnessKind { kNone, kNullDirection, kSecondPoint };

// The top-level answer. A kUnique verdict always carries a certificate
// that re-validates from scratch; a kNotUnique verdict always carries a
// witness: either a nonzero direction d with a_I d_I = 0 (so x* can be
// perturbed along it) or a second optimal point. kIndeterminate is reserved
// for non-optimal inputs, borderline margins, and engine failures; it is
// never used to dodge a decidable case.
struct UniquenessVerdict {
  Verdict status = Verdict::kIndeterminate;
  std::string reason;
  std::optional<DualCertificate> certificate;
  std::optional<Vector> witness;
  WitnessKind witness_kind = WitnessKind::kNone;
  double eps_star = 0.0;
  SupportPattern pattern;
};

// Minimum-l1 uniqueness at a feasible point: feasibility of x_star plus the
// rank-and-certificate test on its support pattern decide the verdict
// without needing a separate optimality proof.
UniquenessVerdict verify_bp(const Matrix& a, const Vector& b, const Vector& x_star,
                            Engine engine = Engine::kLP);

// Any of the four models: gate on first-order optimality, reduce to the
// minimum-l1 form, then decide as in verify_bp. x_star = 0 short-circuits to
// kUnique (the reduced datum is zero).
UniquenessVerdict verify_model(const ProblemInstance& inst, const Vector& x_star,
                               Engine engine = Engine::kLP);

// Indices where |a_i^T (b - a x*)| matches lambda (relative tolerance).
struct EquicorrelationSet {
  IndexSet j;
  std::vector<double> values;
};

EquicorrelationSet equicorrelation(const Matrix& a, const Vector& b, double lambda,
                                   const Vector& x_star);

// Full column rank of a_J is sufficient for uniqueness of a penalized
// least-squares solution, but not necessary; hence kInconclusive.
enum class SufficiencyResult { kUnique, kInconclusive };

SufficiencyResult equicorrelation_rank_sufficient(const Matrix& a, const Vector& b, double lambda,
                                      const Vector& x_star);

// When |J| = |I| + 1 the rank of a_J decides uniqueness exactly; otherwise
// the check does not apply.
struct AdjacentEquicorrelationResult {
  bool applicable = false;
  UniquenessVerdict verdict;
};

AdjacentEquicorrelationResult adjacent_equicorrelation_check(const Matrix& a, const Vector& b, double lambda,
                                  const Vector& x_star);

// For a square, full-rank a_I the penalized least-squares optimality
// conditions hold with strict inequality off the support; the report checks
// them at y = (b - a_I x_I) / lambda.
struct SquareSupportReport {
  bool applicable = false;
  bool passes = false;
  Vector y;
  double eq_residual = 0.0;       // ||a_I^T (b - a_I x_I) - lambda s||_inf
  double off_support_max = 0.0;   // max off-support |a_i^T (b - a_I x_I)|
  bool rank_ok = false;
};

SquareSupportReport square_support_check(const Matrix& a, const Vector& b, double lambda,
                                  const Vector& x_star, double tol = kKktTol);

// Recognition from a primal-dual pair: with J = {i : |a_i^T y*| = 1},
// rank(a_J) = |J| and supp(x*) = J certify uniqueness. The converse needs a
// minimal-J dual (e.g. from an interior-point method), which this library
// does not compute, so everything else is kIndeterminate. A non-optimal pair
// throws std::invalid_argument.
UniquenessVerdict recognize_from_dual(const Matrix& a, const Vector& b, const Vector& x_star,
                                      const Vector& y_star);

// Active set of a first-order condition; always contains the support.
struct ActiveSet {
  IndexSet p;
  Model kind = Model::kPenalizedLS;
  double multiplier = 0.0;
};

// The reduced test: run the rank-and-certificate check on the columns of the
// active set only. Equivalent to the full check for optimal nonzero x*; not
// applicable to basis pursuit or to x* = 0.
struct ReducedCondition {
  bool applicable = false;
  UniquenessCondition::Status status = UniquenessCondition::Status::kFails;
  ActiveSet active_set;
  std::optional<DualCertificate> certificate;

  bool holds() const { return applicable && status == UniquenessCondition::Status::kHolds; }
};

ReducedCondition check_reduced_condition(const ProblemInstance& inst, const Vector& x_star,
                                    Engine engine = Engine::kLP);

}  // namespace l1cert
