#pragma once

#include "l1cert/common.hpp"

namespace l1cert {

// Standard-form linear program: minimize c^T x subject to a_eq x = b_eq, x >= 0.
struct StandardLP {
  Vector c;
  Matrix a_eq;
  Vector b_eq;

  Index num_vars() const { return c.size(); }
  Index num_rows() const { return b_eq.size(); }
};

enum class LPStatus { kOptimal, kInfeasible, kUnbounded };

struct LPSolution {
  LPStatus status = LPStatus::kInfeasible;
  Vector x;  // primal point, length num_vars (empty unless optimal)
  Vector y;  // dual multipliers of the equality rows (empty unless optimal)
  double objective = 0.0;
  double phase1_objective = 0.0;
  int iterations = 0;
};

// Two-phase dense primal simplex with Bland's rule. An optimal return carries
// a certified primal-dual pair: the solution is recomputed from the final
// basis and checked for feasibility, dual feasibility, and a small duality
// gap before being handed back. Cycling cannot occur; the iteration cap
// (50 * (vars + rows)) only guards against implementation bugs and raises
// NumericalError instead of returning a wrong answer.
LPSolution solve_lp(const StandardLP& lp);

// The dual vector of an optimal solve. Throws std::logic_error when sol is
// not optimal.
Vector dual_of(const StandardLP& lp, const LPSolution& sol);

}  // namespace l1cert
