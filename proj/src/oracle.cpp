#include "l1cert/oracle.hpp"

#include <cmath>
#include <sstream>

#include "l1cert/simplex.hpp"

namespace l1cert {

double FaceRange::max_width() const {
  double w = 0.0;
  for (Index j = 0; j < lower.size(); ++j) w = std::max(w, upper[j] - lower[j]);
  return w;
}

FaceRange bp_face_range(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("bp_face_range: dimension mismatch");
  }
  const Index m = a.rows();
  const Index n = a.cols();
  const BPSolution base = solve_bp(a, b);

  FaceRange fr;
  fr.optimal_value = base.objective;
  fr.lower = Vector::Zero(n);
  fr.upper = Vector::Zero(n);
  fr.min_attaining.resize(static_cast<std::size_t>(n));
  fr.max_attaining.resize(static_cast<std::size_t>(n));

  // min / max of x_j over {a x = b, ||x||_1 <= t*} via the split form with
  // one budget row.
  StandardLP lp;
  lp.a_eq = Matrix::Zero(m + 1, 2 * n + 1);
  lp.a_eq.block(0, 0, m, n) = a;
  lp.a_eq.block(0, n, m, n) = -a;
  lp.a_eq.row(m).head(2 * n).setOnes();
  lp.a_eq(m, 2 * n) = 1.0;
  lp.b_eq = Vector(m + 1);
  lp.b_eq.head(m) = b;
  lp.b_eq[m] = fr.optimal_value;
  lp.c = Vector::Zero(2 * n + 1);

  for (Index j = 0; j < n; ++j) {
    for (int dir = 0; dir < 2; ++dir) {
      const double sgn = dir == 0 ? 1.0 : -1.0;  // minimize sgn * x_j
      lp.c.setZero();
      lp.c[j] = sgn;
      lp.c[n + j] = -sgn;
      const LPSolution sol = solve_lp(lp);
      if (sol.status != LPStatus::kOptimal) {
        throw NumericalError("bp_face_range: face probe did not solve");
      }
      const Vector point = sol.x.head(n) - sol.x.segment(n, n);
      if (dir == 0) {
        fr.lower[j] = point[j];
        fr.min_attaining[static_cast<std::size_t>(j)] = point;
      } else {
        fr.upper[j] = point[j];
        fr.max_attaining[static_cast<std::size_t>(j)] = point;
      }
    }
  }
  return fr;
}

bool oracle_unique(const ProblemInstance& inst, const Vector& x_star, double width_tol) {
  const auto [a, b_star] = reduce_to_bp(inst, x_star);
  const FaceRange fr = bp_face_range(a, b_star);
  if (inst.model == Model::kBasisPursuit) {
    // The reduction gate only checks feasibility for this model; uniqueness
    // of the face is about the optimal set, so x_star itself must be optimal.
    const double l1 = x_star.cwiseAbs().sum();
    if (l1 > fr.optimal_value + 1e-7 * (1.0 + fr.optimal_value)) {
      std::ostringstream msg;
      msg << "oracle_unique: x is feasible but suboptimal (" << l1 << " > "
          << fr.optimal_value << ")";
      throw std::invalid_argument(msg.str());
    }
  }
  return fr.max_width() <= width_tol;
}

}  // namespace l1cert
