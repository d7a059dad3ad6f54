#pragma once

#include "l1cert/common.hpp"
#include "l1cert/solvers.hpp"

namespace l1cert {

// Coordinate-wise extent of the optimal face of a minimum-l1 problem:
// lower_j / upper_j are the min/max of x_j over all optimal points, each
// obtained from an auxiliary LP over {a x = b, ||x||_1 <= t*}. The face is a
// singleton exactly when every width is zero.
struct FaceRange {
  double optimal_value = 0.0;
  Vector lower;
  Vector upper;
  std::vector<Vector> min_attaining;  // optimal point attaining lower_j
  std::vector<Vector> max_attaining;  // optimal point attaining upper_j

  double max_width() const;
};

FaceRange bp_face_range(const Matrix& a, const Vector& b);

// Ground-truth uniqueness by brute force: reduce the instance to its
// minimum-l1 form and test whether the optimal face is a singleton
// (max width <= tol). x_star must be optimal; a non-optimal point throws
// std::invalid_argument. Deliberately shares only the simplex engine with
// the certificate path.
bool oracle_unique(const ProblemInstance& inst, const Vector& x_star,
                   double width_tol = kFaceWidthTol);

}  // namespace l1cert
