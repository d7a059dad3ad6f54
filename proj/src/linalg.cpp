#include "l1cert/linalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace l1cert {

IndexSet support_of(const Vector& x, double rel_tol) {
  const double scale = std::max(1.0, x.size() > 0 ? x.cwiseAbs().maxCoeff() : 0.0);
  IndexSet idx;
  for (Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > rel_tol * scale) idx.push_back(i);
  }
  return idx;
}

IndexSet complement_of(const IndexSet& idx, Index n) {
  IndexSet out;
  std::size_t p = 0;
  for (Index i = 0; i < n; ++i) {
    if (p < idx.size() && idx[p] == i) {
      ++p;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

Matrix make_matrix(Index rows, Index cols, std::span<const double> row_major) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("make_matrix: dimensions must be positive");
  }
  if (static_cast<Index>(row_major.size()) != rows * cols) {
    throw std::invalid_argument("make_matrix: entry count does not match rows * cols");
  }
  Matrix a(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const double v = row_major[static_cast<std::size_t>(r * cols + c)];
      if (!std::isfinite(v)) {
        throw std::invalid_argument("make_matrix: non-finite entry");
      }
      a(r, c) = v;
    }
  }
  return a;
}

Vector make_vector(std::span<const double> entries) {
  if (entries.empty()) {
    throw std::invalid_argument("make_vector: length must be positive");
  }
  Vector v(static_cast<Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!std::isfinite(entries[i])) {
      throw std::invalid_argument("make_vector: non-finite entry");
    }
    v[static_cast<Index>(i)] = entries[i];
  }
  return v;
}

Matrix column_submatrix(const Matrix& a, const IndexSet& idx) {
  Matrix out(a.rows(), static_cast<Index>(idx.size()));
  Index prev = -1;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Index j = idx[k];
    if (j < 0 || j >= a.cols()) {
      throw std::invalid_argument("column_submatrix: index out of range");
    }
    if (j <= prev) {
      throw std::invalid_argument("column_submatrix: indices must be strictly increasing");
    }
    prev = j;
    out.col(static_cast<Index>(k)) = a.col(j);
  }
  return out;
}

double default_rank_tol(const Matrix& a) {
  return static_cast<double>(std::max(a.rows(), a.cols())) *
         std::numeric_limits<double>::epsilon();
}

Index numerical_rank(const Matrix& a, double rel_tol) {
  if (rel_tol < 0.0) {
    throw std::invalid_argument("numerical_rank: tolerance must be nonnegative");
  }
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  // Eigen compares |R_kk| against threshold * |max pivot|, and with column
  // pivoting the max pivot is the leading one.
  qr.setThreshold(rel_tol);
  return qr.rank();
}

Index numerical_rank(const Matrix& a) { return numerical_rank(a, default_rank_tol(a)); }

std::optional<Vector> least_norm_solution(const Matrix& m, const Vector& c) {
  if (m.rows() != c.size()) {
    throw std::invalid_argument("least_norm_solution: dimension mismatch");
  }
  if (m.cols() == 0) {
    // Only the empty solution is available; consistent iff c is zero.
    if (c.size() == 0 || c.cwiseAbs().maxCoeff() <= kFeasTol) return Vector(0);
    return std::nullopt;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
  Vector y = cod.solve(c);
  const double residual = (m * y - c).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if (residual > 1e-9 * scale) return std::nullopt;
  return y;
}

Matrix null_space_basis(const Matrix& a) {
  const Index n = a.cols();
  if (a.rows() == 0 || n == 0) return Matrix::Identity(n, n);
  // The trailing columns of Q in a pivoted QR of a^T span the orthogonal
  // complement of the row space.
  Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
  qr.setThreshold(default_rank_tol(a));
  const Index r = qr.rank();
  Matrix q = qr.householderQ();
  return q.rightCols(n - r);
}

}  // namespace l1cert
