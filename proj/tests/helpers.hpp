// Test-only utilities: independent oracles and small builders. Everything
// here stays clear of the library's LP/certificate code paths so the checks
// remain meaningful cross-validation.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

#include "l1cert/common.hpp"

namespace testutil {

using l1cert::Index;
using l1cert::Matrix;
using l1cert::Vector;

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.begin()->size());
  Matrix a(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double v : row) a(i, j++) = v;
    ++i;
  }
  return a;
}

inline Vector vec(std::initializer_list<double> entries) {
  Vector v(static_cast<Index>(entries.size()));
  Index i = 0;
  for (double e : entries) v[i++] = e;
  return v;
}

// The matrix and datum of the running 2x3 example used across the suites.
inline Matrix example_matrix() { return mat({{1, 0, 2}, {0, 2, -2}}); }
inline Vector example_datum() { return vec({1, 1}); }

// Brute-force minimum-l1 oracle over {x : a x = b}: enumerate all column
// subsets of size <= m, solve the restricted system exactly, and keep every
// distinct optimal point. Exponential, test-only.
struct EnumResult {
  bool feasible = false;
  double value = 0.0;
  std::vector<Vector> optima;  // distinct optimal candidates found
};

inline EnumResult enumerate_bp_optima(const Matrix& a, const Vector& b) {
  const Index m = a.rows();
  const Index n = a.cols();
  EnumResult res;
  const double b_scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<Index>(__builtin_popcount(mask)) > m) continue;
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j) {
      if (mask & (1u << j)) cols.push_back(j);
    }
    Matrix sub(m, static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) sub.col(static_cast<Index>(i)) = a.col(cols[i]);
    Vector xs;
    if (cols.empty()) {
      if (b.cwiseAbs().maxCoeff() > 1e-9 * b_scale) continue;
      xs = Vector(0);
    } else {
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sub);
      xs = cod.solve(b);
      if ((sub * xs - b).cwiseAbs().maxCoeff() > 1e-9 * b_scale) continue;
    }
    Vector x = Vector::Zero(n);
    for (std::size_t i = 0; i < cols.size(); ++i) x[cols[i]] = xs[static_cast<Index>(i)];
    const double val = x.cwiseAbs().sum();
    if (!res.feasible || val < res.value - 1e-9) {
      res.feasible = true;
      res.value = val;
      res.optima.clear();
      res.optima.push_back(x);
    } else if (std::abs(val - res.value) <= 1e-9) {
      bool fresh = true;
      for (const Vector& seen : res.optima) {
        if ((seen - x).cwiseAbs().maxCoeff() <= 1e-7) {
          fresh = false;
          break;
        }
      }
      if (fresh) res.optima.push_back(x);
    }
  }
  return res;
}

// Root of a monotone-crossing function on [lo, hi] by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Minimizer of a strictly unimodal function on [lo, hi] by ternary search.
inline double ternary_min(const std::function<double(double)>& f, double lo, double hi,
                          int iters = 300) {
  for (int i = 0; i < iters; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace testutil
