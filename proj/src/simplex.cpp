#include "l1cert/simplex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace l1cert {

namespace {

constexpr double kRedCostTol = 1e-9;   // entering threshold
constexpr double kPivotEps = 1e-9;     // smallest usable pivot
constexpr double kRatioTieTol = 1e-12;
constexpr double kPhase1Tol = 1e-8;

struct Working {
  // Row-flipped copy so the right-hand side is nonnegative. Artificial
  // variable r corresponds to flipped row r.
  Matrix a;
  Vector b;
  Vector flip;  // +-1 per row
};

Working flip_rows(const StandardLP& lp) {
  Working w{lp.a_eq, lp.b_eq, Vector::Ones(lp.num_rows())};
  for (Index r = 0; r < w.b.size(); ++r) {
    if (w.b[r] < 0.0) {
      w.a.row(r) *= -1.0;
      w.b[r] *= -1.0;
      w.flip[r] = -1.0;
    }
  }
  return w;
}

class Tableau {
 public:
  Tableau(const Working& w, const Vector& c)
      : m_(w.b.size()), n_(c.size()), c_(c), banned_(n_ + m_, false) {
    tab_.resize(m_ + 2, n_ + m_ + 1);
    tab_.setZero();
    tab_.block(0, 0, m_, n_) = w.a;
    tab_.block(0, n_, m_, m_) = Matrix::Identity(m_, m_);
    tab_.col(n_ + m_).head(m_) = w.b;
    tab_.row(m_).head(n_) = c.transpose();
    // Phase-1 costs reduced against the all-artificial basis.
    for (Index j = 0; j < n_; ++j) tab_(m_ + 1, j) = -w.a.col(j).sum();
    tab_(m_ + 1, n_ + m_) = -w.b.sum();
    basis_.resize(m_);
    for (Index r = 0; r < m_; ++r) basis_[r] = n_ + r;
  }

  Index rows() const { return m_; }
  Index cols() const { return n_; }
  const std::vector<Index>& basis() const { return basis_; }
  double phase1_objective() const { return -tab_(m_ + 1, n_ + m_); }
  double rhs(Index r) const { return tab_(r, n_ + m_); }

  // Bland's rule: the lowest-index admissible column with a negative reduced
  // cost, or -1 at optimality.
  Index entering(bool phase1) const {
    const Index cost_row = phase1 ? m_ + 1 : m_;
    const Index limit = phase1 ? n_ + m_ : n_;
    for (Index j = 0; j < limit; ++j) {
      if (banned_[static_cast<std::size_t>(j)]) continue;
      if (tab_(cost_row, j) < -kRedCostTol) return j;
    }
    return -1;
  }

  // Minimum-ratio row; ties go to the smallest basis variable index. Returns
  // -1 when the column is a ray (unbounded).
  Index leaving(Index j) const {
    Index best = -1;
    double best_ratio = 0.0;
    for (Index r = 0; r < m_; ++r) {
      const double piv = tab_(r, j);
      if (piv <= kPivotEps) continue;
      const double ratio = std::max(0.0, rhs(r) / piv);
      if (best < 0 || ratio < best_ratio - kRatioTieTol ||
          (std::abs(ratio - best_ratio) <= kRatioTieTol && basis_[r] < basis_[best])) {
        best = r;
        best_ratio = ratio;
      }
    }
    return best;
  }

  void pivot(Index r, Index j) {
    const Index old = basis_[r];
    if (old >= n_) banned_[static_cast<std::size_t>(old)] = true;  // artificials never return
    tab_.row(r) /= tab_(r, j);
    for (Index i = 0; i < m_ + 2; ++i) {
      if (i == r) continue;
      const double f = tab_(i, j);
      if (f != 0.0) tab_.row(i) -= f * tab_.row(r);
    }
    basis_[r] = j;
  }

  void forbid_artificials() {
    for (Index j = n_; j < n_ + m_; ++j) banned_[static_cast<std::size_t>(j)] = true;
  }

  // Pivot basic artificials onto structural columns where possible; rows
  // without a usable pivot are redundant and keep their artificial at level
  // zero.
  void drive_out_artificials() {
    for (Index r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      for (Index j = 0; j < n_; ++j) {
        if (std::abs(tab_(r, j)) > 1e-7) {
          pivot(r, j);
          break;
        }
      }
    }
  }

  // Rebuilds every row from the original data and the current basis. Used
  // when accumulated pivot roundoff disagrees with the fresh basis solve.
  void refresh(const Working& w, const Matrix& basis_matrix,
               const Eigen::PartialPivLU<Matrix>& lu) {
    Matrix rhs_block(m_, n_ + m_ + 1);
    rhs_block.block(0, 0, m_, n_) = w.a;
    rhs_block.block(0, n_, m_, m_) = Matrix::Identity(m_, m_);
    rhs_block.col(n_ + m_) = w.b;
    tab_.topRows(m_) = lu.solve(rhs_block);
    Vector cb(m_);
    for (Index r = 0; r < m_; ++r) cb[r] = basis_[r] < n_ ? c_[basis_[r]] : 0.0;
    const Vector yt = basis_matrix.transpose().partialPivLu().solve(cb);
    for (Index j = 0; j < n_; ++j) tab_(m_, j) = c_[j] - yt.dot(w.a.col(j));
    for (Index j = 0; j < m_; ++j) tab_(m_, n_ + j) = -yt[j];
    tab_(m_, n_ + m_) = -cb.dot(tab_.col(n_ + m_).head(m_));
  }

 private:
  Index m_;
  Index n_;
  Vector c_;
  Matrix tab_;
  std::vector<Index> basis_;
  std::vector<bool> banned_;
};

Matrix basis_columns(const Working& w, const std::vector<Index>& basis) {
  const Index m = w.b.size();
  const Index n = w.a.cols();
  Matrix bm(m, m);
  for (Index r = 0; r < m; ++r) {
    const Index j = basis[r];
    if (j < n) {
      bm.col(r) = w.a.col(j);
    } else {
      bm.col(r) = Vector::Unit(m, j - n);
    }
  }
  return bm;
}

struct BasisSolve {
  Vector x_basic;
  Vector y;  // in the flipped row space
  Matrix basis_matrix;
  Eigen::PartialPivLU<Matrix> lu;
};

BasisSolve solve_from_basis(const Working& w, const Vector& c,
                            const std::vector<Index>& basis) {
  BasisSolve out;
  out.basis_matrix = basis_columns(w, basis);
  out.lu = out.basis_matrix.partialPivLu();
  out.x_basic = out.lu.solve(w.b);
  Vector cb(w.b.size());
  for (Index r = 0; r < w.b.size(); ++r) {
    cb[r] = basis[r] < w.a.cols() ? c[basis[r]] : 0.0;
  }
  out.y = out.basis_matrix.transpose().partialPivLu().solve(cb);
  const double scale = std::max(1.0, w.b.cwiseAbs().maxCoeff());
  if ((out.basis_matrix * out.x_basic - w.b).cwiseAbs().maxCoeff() > 1e-7 * scale) {
    throw NumericalError("solve_lp: final basis is numerically singular");
  }
  return out;
}

}  // namespace

LPSolution solve_lp(const StandardLP& lp) {
  const Index n = lp.num_vars();
  const Index m = lp.num_rows();
  if (n <= 0) throw std::invalid_argument("solve_lp: no variables");
  if (lp.a_eq.rows() != m || lp.a_eq.cols() != n) {
    throw std::invalid_argument("solve_lp: dimension mismatch");
  }
  if (m == 0) {
    LPSolution sol;
    sol.iterations = 0;
    if (lp.c.minCoeff() < -kRedCostTol) {
      sol.status = LPStatus::kUnbounded;
    } else {
      sol.status = LPStatus::kOptimal;
      sol.x = Vector::Zero(n);
      sol.y = Vector(0);
    }
    return sol;
  }

  const Working w = flip_rows(lp);
  Tableau tab(w, lp.c);
  const int iter_cap = 50 * static_cast<int>(n + m);
  int iters = 0;

  auto run_phase = [&](bool phase1) -> bool {
    for (;;) {
      const Index j = tab.entering(phase1);
      if (j < 0) return true;
      const Index r = tab.leaving(j);
      if (r < 0) {
        if (phase1) throw NumericalError("solve_lp: phase-1 ray (should be impossible)");
        return false;  // unbounded
      }
      tab.pivot(r, j);
      if (++iters > iter_cap) {
        std::ostringstream msg;
        msg << "solve_lp: iteration cap " << iter_cap << " exceeded";
        throw NumericalError(msg.str());
      }
    }
  };

  run_phase(true);
  LPSolution sol;
  sol.phase1_objective = tab.phase1_objective();
  sol.iterations = iters;
  if (sol.phase1_objective > kPhase1Tol) {
    sol.status = LPStatus::kInfeasible;
    return sol;
  }
  tab.drive_out_artificials();
  tab.forbid_artificials();

  for (int refreshes = 0;; ++refreshes) {
    if (!run_phase(false)) {
      sol.status = LPStatus::kUnbounded;
      sol.iterations = iters;
      return sol;
    }
    // Recompute the pair from the final basis; the tableau only steers.
    BasisSolve bs = solve_from_basis(w, lp.c, tab.basis());
    Vector x = Vector::Zero(n);
    bool artificial_nonzero = false;
    for (Index r = 0; r < m; ++r) {
      if (tab.basis()[r] < n) {
        x[tab.basis()[r]] = bs.x_basic[r];
      } else if (std::abs(bs.x_basic[r]) > 1e-7) {
        artificial_nonzero = true;
      }
    }
    if (artificial_nonzero) {
      throw NumericalError("solve_lp: artificial variable stuck at a nonzero level");
    }
    const Vector reduced = lp.c - w.a.transpose() * bs.y;
    const double worst_reduced = reduced.minCoeff();
    const double worst_primal = x.minCoeff();
    if ((worst_reduced < -kFeasTol || worst_primal < -kFeasTol) && refreshes < 3) {
      tab.refresh(w, bs.basis_matrix, bs.lu);
      continue;
    }
    if (worst_reduced < -kFeasTol || worst_primal < -kFeasTol) {
      throw NumericalError("solve_lp: optimality could not be certified");
    }
    sol.status = LPStatus::kOptimal;
    sol.x = x;
    sol.objective = lp.c.dot(x);
    // Undo the row flips for the caller-facing dual.
    sol.y = bs.y.cwiseProduct(w.flip);
    sol.iterations = iters;
    const double gap = std::abs(sol.objective - lp.b_eq.dot(sol.y));
    if (gap > kGapTol * (1.0 + std::abs(sol.objective))) {
      throw NumericalError("solve_lp: duality gap exceeds tolerance");
    }
    const double feas = (lp.a_eq * x - lp.b_eq).cwiseAbs().maxCoeff();
    if (feas > std::max(kFeasTol, 1e-12 * lp.b_eq.cwiseAbs().maxCoeff())) {
      throw NumericalError("solve_lp: primal residual exceeds tolerance");
    }
    return sol;
  }
}

Vector dual_of(const StandardLP& lp, const LPSolution& sol) {
  if (sol.status != LPStatus::kOptimal) {
    throw std::logic_error("dual_of: solution is not optimal");
  }
  const double gap = std::abs(lp.b_eq.dot(sol.y) - sol.objective);
  if (gap > kGapTol * (1.0 + std::abs(sol.objective))) {
    throw std::logic_error("dual_of: stored dual does not match the objective");
  }
  return sol.y;
}

}  // namespace l1cert
