#pragma once

#include <optional>
#include <span>

#include "l1cert/common.hpp"

namespace l1cert {

// Validating constructors. Both reject non-finite entries; the matrix
// constructor additionally checks the entry count against rows * cols.
// Entries are given in row-major order.
Matrix make_matrix(Index rows, Index cols, std::span<const double> row_major);
Vector make_vector(std::span<const double> entries);

// Columns of a selected by idx, in order. idx must be sorted, duplicate-free,
// and in range; violations throw std::invalid_argument.
Matrix column_submatrix(const Matrix& a, const IndexSet& idx);

// Default relative rank tolerance: max(rows, cols) * machine epsilon.
double default_rank_tol(const Matrix& a);

// Rank by column-pivoted Householder QR: the number of diagonal entries of R
// exceeding rel_tol times the leading (largest) pivot.
Index numerical_rank(const Matrix& a);
Index numerical_rank(const Matrix& a, double rel_tol);

// Minimum-Euclidean-norm y with m y = c, or nullopt when the system is
// inconsistent. Dimension mismatches throw std::invalid_argument.
std::optional<Vector> least_norm_solution(const Matrix& m, const Vector& c);

// Orthonormal basis of the null space of a, as a cols x (cols - rank) matrix.
Matrix null_space_basis(const Matrix& a);

}  // namespace l1cert
