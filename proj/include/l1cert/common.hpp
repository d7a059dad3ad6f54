#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace l1cert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

// Shared numerical policy. Tolerances are pinned here so every module and
// every test agrees on what "zero", "strict", and "feasible" mean.
inline constexpr double kFeasTol = 1e-9;        // LP feasibility, absolute
inline constexpr double kGapTol = 1e-8;         // LP duality gap, relative
inline constexpr double kStrictTol = 1e-6;      // margin that counts as strictly inside
inline constexpr double kEqTol = 1e-8;          // certificate equality residual bound
inline constexpr double kZeroMarginTol = 1e-9;  // margins at or below this count as zero
inline constexpr double kSupportRelTol = 1e-8;  // support detection, relative to max entry
inline constexpr double kMembershipTol = 1e-6;  // active-set / equicorrelation membership
inline constexpr double kFaceWidthTol = 1e-7;   // face singleton threshold
inline constexpr double kKktTol = 1e-6;         // default optimality gate

// Thrown when an iterative routine exceeds its budget or a computed result
// fails its own consistency check. Distinct from std::invalid_argument,
// which signals a caller-side contract violation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Support of x under the scale-aware threshold |x_i| > tol * max(1, ||x||_inf).
IndexSet support_of(const Vector& x, double rel_tol = kSupportRelTol);

// Complement of a sorted index set within {0, ..., n-1}.
IndexSet complement_of(const IndexSet& idx, Index n);

}  // namespace l1cert
