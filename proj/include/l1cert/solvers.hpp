#pragma once

#include <optional>
#include <utility>

#include "l1cert/common.hpp"

namespace l1cert {

// The four problem shapes handled by the library, all built around the same
// data (a, b) and a single scalar parameter:
//   kBasisPursuit:        min ||x||_1            s.t. a x = b
//   kPenalizedLS:         min 1/2||a x - b||^2 + lambda ||x||_1
//   kResidualConstrained: min ||x||_1            s.t. 1/2||a x - b||^2 <= sigma
//   kL1Constrained:       min 1/2||a x - b||^2   s.t. ||x||_1 <= tau
enum class Model { kBasisPursuit, kPenalizedLS, kResidualConstrained, kL1Constrained };

struct ProblemInstance {
  Model model = Model::kBasisPursuit;
  Matrix a;
  Vector b;
  double param = 0.0;   // lambda, sigma, or tau; unused for basis pursuit
  bool full_row_rank = true;
};

// Validates dimensions and the parameter, and records (without failing)
// whether a has full row rank.
ProblemInstance make_instance(Model model, Matrix a, Vector b,
                              std::optional<double> param = std::nullopt);

// First-order optimality data at a point x. The subgradient is the best
// element of the l1 subdifferential model: the exact sign on the support and
// the clipped stationarity value off it. feasibility_slack is signed
// (positive means infeasible); for the residual- and l1-constrained models a
// nonzero x is only optimal when the constraint binds, so the slack must be
// near zero, not merely nonpositive.
struct KKTReport {
  Model model = Model::kBasisPursuit;
  double stationarity_residual = 0.0;
  Vector subgradient;
  double multiplier = 0.0;  // lambda, eta, or nu
  double feasibility_slack = 0.0;
  bool degenerate_support = false;  // multiplier fitted on an empty support

  bool optimal(double tol = kKktTol) const;
};

KKTReport kkt_report(const ProblemInstance& inst, const Vector& x);

class InfeasibleSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct BPSolution {
  Vector x;  // an optimal point (a vertex; no uniqueness claim)
  Vector y;  // optimal dual: ||a^T y||_inf <= 1, b^T y = ||x||_1
  double objective = 0.0;
};

// Minimum-l1 solve via the split {u - v} linear program. Throws
// InfeasibleSystem when a x = b has no solution.
BPSolution solve_bp(const Matrix& a, const Vector& b);

struct LassoOptions {
  int max_iters = 50000;
  double tol = 1e-10;  // stationarity residual target
};

struct LassoResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> objectives;  // one entry per iterate, non-increasing
};

class LassoDidNotConverge : public NumericalError {
 public:
  LassoDidNotConverge(const std::string& what, Vector best, double residual)
      : NumericalError(what), best_iterate(std::move(best)), residual(residual) {}
  Vector best_iterate;
  double residual;
};

// Accelerated proximal gradient with step 1/L (L = squared top singular
// value) and restart-on-increase, which keeps the objective sequence
// monotone. Stops when the stationarity residual drops below opts.tol.
LassoResult solve_lasso_full(const Matrix& a, const Vector& b, double lambda,
                             const LassoOptions& opts = {});
Vector solve_lasso(const Matrix& a, const Vector& b, double lambda,
                   const LassoOptions& opts = {});

// Replaces the instance by the minimum-l1 problem with datum b* = a x_star,
// which has the same solution set. x_star must pass the optimality gate of
// kkt_report; a violation throws std::invalid_argument naming the failed
// condition. Basis pursuit instances are returned unchanged.
std::pair<Matrix, Vector> reduce_to_bp(const ProblemInstance& inst, const Vector& x_star,
                                       double tol = kKktTol);

}  // namespace l1cert
