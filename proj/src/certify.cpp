#include "l1cert/certify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "l1cert/linalg.hpp"
#include "l1cert/simplex.hpp"

namespace l1cert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector off_support_values(const Matrix& a, const IndexSet& off, const Vector& y) {
  Vector t(static_cast<Index>(off.size()));
  for (std::size_t i = 0; i < off.size(); ++i) {
    t[static_cast<Index>(i)] = a.col(off[i]).dot(y);
  }
  return t;
}

void validate_pattern_against(const Matrix& a, const SupportPattern& sp) {
  if (!sp.support.empty() && sp.support.back() >= a.cols()) {
    throw std::invalid_argument("support index out of range");
  }
}

}  // namespace

SupportPattern make_pattern(IndexSet support, std::vector<int> signs) {
  if (support.size() != signs.size()) {
    throw std::invalid_argument("make_pattern: support and signs differ in length");
  }
  Index prev = -1;
  for (Index i : support) {
    if (i < 0 || i <= prev) {
      throw std::invalid_argument("make_pattern: indices must be strictly increasing");
    }
    prev = i;
  }
  for (int s : signs) {
    if (s != 1 && s != -1) {
      throw std::invalid_argument("make_pattern: signs must be +1 or -1");
    }
  }
  return SupportPattern{std::move(support), std::move(signs)};
}

SupportPattern pattern_of(const Vector& x, double rel_tol) {
  SupportPattern sp;
  sp.support = support_of(x, rel_tol);
  sp.signs.reserve(sp.support.size());
  for (Index i : sp.support) sp.signs.push_back(x[i] > 0.0 ? 1 : -1);
  return sp;
}

Vector sign_vector(const SupportPattern& sp) {
  Vector s(sp.size());
  for (Index i = 0; i < sp.size(); ++i) s[i] = static_cast<double>(sp.signs[i]);
  return s;
}

DualCertificate evaluate_certificate(const Matrix& a, const SupportPattern& sp, Vector y) {
  validate_pattern_against(a, sp);
  if (y.size() != a.rows()) {
    throw std::invalid_argument("evaluate_certificate: y has the wrong length");
  }
  DualCertificate cert;
  cert.eq_residual = 0.0;
  for (Index i = 0; i < sp.size(); ++i) {
    cert.eq_residual = std::max(
        cert.eq_residual, std::abs(a.col(sp.support[i]).dot(y) - sp.signs[i]));
  }
  const IndexSet off = complement_of(sp.support, a.cols());
  if (off.empty()) {
    cert.margin = kInf;
  } else {
    cert.margin = 1.0 - off_support_values(a, off, y).cwiseAbs().maxCoeff();
  }
  cert.y = std::move(y);
  return cert;
}

bool is_valid_strict(const DualCertificate& cert, double eq_tol, double margin_tol) {
  return cert.eq_residual <= eq_tol && cert.margin >= margin_tol;
}

MaxMarginResult certificate_lp(const Matrix& a, const SupportPattern& sp) {
  validate_pattern_against(a, sp);
  const Index m = a.rows();
  const Index k = sp.size();
  const IndexSet off = complement_of(sp.support, a.cols());
  const Index f = static_cast<Index>(off.size());

  MaxMarginResult out;
  if (f == 0) {
    const Matrix ait = column_submatrix(a, sp.support).transpose();
    auto y = least_norm_solution(ait, sign_vector(sp));
    if (!y) return out;
    out.equality_consistent = true;
    out.eps_star = kInf;
    out.y = *y;
    return out;
  }

  // Minimize eta = max off-support |a_i^T y| subject to the sign equalities;
  // the margin is 1 - eta. Free y is split into y+ - y-.
  const Index nv = 2 * m + 1 + 2 * f;
  const Index eta = 2 * m;
  StandardLP lp;
  lp.c = Vector::Zero(nv);
  lp.c[eta] = 1.0;
  lp.a_eq = Matrix::Zero(k + 2 * f, nv);
  lp.b_eq = Vector::Zero(k + 2 * f);
  for (Index r = 0; r < k; ++r) {
    const Vector col = a.col(sp.support[r]);
    lp.a_eq.row(r).segment(0, m) = col.transpose();
    lp.a_eq.row(r).segment(m, m) = -col.transpose();
    lp.b_eq[r] = static_cast<double>(sp.signs[r]);
  }
  for (Index i = 0; i < f; ++i) {
    const Vector col = a.col(off[static_cast<std::size_t>(i)]);
    const Index rp = k + 2 * i;
    const Index rn = k + 2 * i + 1;
    lp.a_eq.row(rp).segment(0, m) = col.transpose();
    lp.a_eq.row(rp).segment(m, m) = -col.transpose();
    lp.a_eq(rp, eta) = -1.0;
    lp.a_eq(rp, eta + 1 + 2 * i) = 1.0;
    lp.a_eq.row(rn).segment(0, m) = -col.transpose();
    lp.a_eq.row(rn).segment(m, m) = col.transpose();
    lp.a_eq(rn, eta) = -1.0;
    lp.a_eq(rn, eta + 2 + 2 * i) = 1.0;
  }

  const LPSolution sol = solve_lp(lp);
  if (sol.status == LPStatus::kInfeasible) return out;
  if (sol.status != LPStatus::kOptimal) {
    throw NumericalError("certificate_lp: unexpected unbounded margin program");
  }
  out.equality_consistent = true;
  out.y = sol.x.segment(0, m) - sol.x.segment(m, m);
  // Report the margin of the vector actually returned, not the LP value.
  out.eps_star = 1.0 - off_support_values(a, off, out.y).cwiseAbs().maxCoeff();
  return out;
}

// --- log-barrier engine -----------------------------------------------------

namespace {

double barrier_value(const Vector& t) {
  double phi = 0.0;
  for (Index i = 0; i < t.size(); ++i) {
    phi -= std::log(1.0 - t[i]) + std::log(1.0 + t[i]);
  }
  return phi;
}

EngineCertificate barrier_newton(const Matrix& a, const SupportPattern& sp, Vector y) {
  const IndexSet off = complement_of(sp.support, a.cols());
  EngineCertificate out;
  if (off.empty()) {
    out.status = CertEngineStatus::kConverged;
    out.certificate = evaluate_certificate(a, sp, std::move(y));
    return out;
  }
  const Matrix a_off = column_submatrix(a, off);
  const Matrix a_sup = column_submatrix(a, sp.support);
  const Matrix nullb = null_space_basis(a_sup.transpose());  // directions keeping a_I^T y fixed

  Vector t = a_off.transpose() * y;
  double phi = barrier_value(t);
  out.objective_trace.push_back(phi);
  if (nullb.cols() == 0) {
    out.status = CertEngineStatus::kConverged;
    out.certificate = evaluate_certificate(a, sp, std::move(y));
    return out;
  }

  const int max_iters = 200;
  for (int iter = 1; iter <= max_iters; ++iter) {
    Vector w1(t.size()), w2(t.size());
    for (Index i = 0; i < t.size(); ++i) {
      const double lo = 1.0 - t[i];
      const double hi = 1.0 + t[i];
      w1[i] = 1.0 / lo - 1.0 / hi;
      w2[i] = 1.0 / (lo * lo) + 1.0 / (hi * hi);
    }
    const Vector grad = nullb.transpose() * (a_off * w1);
    const double gnorm = grad.cwiseAbs().maxCoeff();
    if (gnorm <= 1e-10 * (1.0 + std::abs(phi))) {
      out.status = CertEngineStatus::kConverged;
      out.iterations = iter - 1;
      out.certificate = evaluate_certificate(a, sp, std::move(y));
      return out;
    }
    const Matrix ao_n = a_off.transpose() * nullb;
    Matrix hess = ao_n.transpose() * w2.asDiagonal() * ao_n;
    const double mu = 1e-12 * std::max(1.0, hess.trace());
    hess.diagonal().array() += mu;
    const Vector dz = hess.ldlt().solve(-grad);
    const double slope = grad.dot(dz);
    // Squared Newton decrement ~ objective suboptimality; its attainable
    // floor is a few ulps of phi because the line search works on function
    // values, so stop at that scale rather than at a fixed 1e-16.
    if (-slope <= 20.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(phi))) {
      out.status = CertEngineStatus::kConverged;
      out.iterations = iter - 1;
      out.certificate = evaluate_certificate(a, sp, std::move(y));
      return out;
    }

    double step = 1.0;
    const Vector dt = ao_n * dz;
    bool accepted = false;
    while (step >= 1e-16) {
      const Vector t_try = t + step * dt;
      if (t_try.cwiseAbs().maxCoeff() < 1.0) {
        const double phi_try = barrier_value(t_try);
        if (phi_try <= phi + 0.25 * step * slope) {
          y += step * (nullb * dz);
          t = t_try;
          phi = phi_try;
          out.objective_trace.push_back(phi);
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent left; treat the current point as converged if the
      // decrement or gradient is small, otherwise give up.
      if (-slope <= 1e-12 * (1.0 + std::abs(phi)) || gnorm <= 1e-6 * (1.0 + std::abs(phi))) {
        out.status = CertEngineStatus::kConverged;
        out.iterations = iter;
        out.certificate = evaluate_certificate(a, sp, std::move(y));
        return out;
      }
      out.status = CertEngineStatus::kDiverged;
      out.needs_lp_confirmation = true;
      out.iterations = iter;
      return out;
    }
  }
  out.status = CertEngineStatus::kDiverged;
  out.needs_lp_confirmation = true;
  out.iterations = max_iters;
  return out;
}

}  // namespace

EngineCertificate certificate_barrier(const Matrix& a, const SupportPattern& sp,
                                      const Vector& y0) {
  validate_pattern_against(a, sp);
  if (y0.size() != a.rows()) {
    throw std::invalid_argument("certificate_barrier: y0 has the wrong length");
  }
  const DualCertificate start = evaluate_certificate(a, sp, y0);
  if (start.eq_residual > kEqTol || !(start.margin > 0.0)) {
    throw std::invalid_argument("certificate_barrier: y0 is not an interior starting point");
  }
  return barrier_newton(a, sp, y0);
}

EngineCertificate certificate_barrier(const Matrix& a, const SupportPattern& sp) {
  validate_pattern_against(a, sp);
  const MaxMarginResult seed = certificate_lp(a, sp);
  EngineCertificate out;
  if (!seed.equality_consistent || seed.eps_star <= kZeroMarginTol) {
    out.status = CertEngineStatus::kInfeasible;
    return out;
  }
  return barrier_newton(a, sp, seed.y);
}

// --- ADMM engine -------------------------------------------------------------

double admm_cubic_root(double rho, double v) {
  if (rho <= 0.0) throw std::invalid_argument("admm_cubic_root: rho must be positive");
  auto g = [&](double z) { return ((rho * z - rho * v) * z - (2.0 + rho)) * z + rho * v; };
  auto gp = [&](double z) { return (3.0 * rho * z - 2.0 * rho * v) * z - (2.0 + rho); };
  // g(-1) = 2, g(1) = -2 for every (rho, v), so the bracket never fails.
  double lo = -1.0, hi = 1.0;
  double z = std::clamp(v, -0.5, 0.5);
  for (int iter = 0; iter < 200; ++iter) {
    const double gz = g(z);
    if (gz == 0.0) return z;
    if (gz > 0.0) {
      lo = z;
    } else {
      hi = z;
    }
    const double d = gp(z);
    double z_next = d != 0.0 ? z - gz / d : 0.5 * (lo + hi);
    if (!(z_next > lo && z_next < hi)) z_next = 0.5 * (lo + hi);
    if (std::abs(z_next - z) <= 1e-17 * std::max(1.0, std::abs(z))) return z_next;
    z = z_next;
  }
  return z;
}

EngineCertificate certificate_admm(const Matrix& a, const SupportPattern& sp,
                                   const AdmmOptions& opts) {
  validate_pattern_against(a, sp);
  if (opts.rho <= 0.0) throw std::invalid_argument("certificate_admm: rho must be positive");
  const Index m = a.rows();
  const Index k = sp.size();
  const IndexSet off = complement_of(sp.support, a.cols());
  const Index f = static_cast<Index>(off.size());
  const Matrix a_sup = column_submatrix(a, sp.support);
  const Vector s = sign_vector(sp);

  EngineCertificate out;
  if (f == 0) {
    auto y = least_norm_solution(a_sup.transpose(), s);
    if (!y) {
      out.status = CertEngineStatus::kDiverged;
      out.needs_lp_confirmation = true;
      return out;
    }
    out.status = CertEngineStatus::kConverged;
    out.certificate = evaluate_certificate(a, sp, *y);
    return out;
  }
  if (k > 0 && !least_norm_solution(a_sup.transpose(), s)) {
    out.status = CertEngineStatus::kDiverged;
    out.needs_lp_confirmation = true;
    return out;
  }

  const Matrix a_off = column_submatrix(a, off);
  // KKT system of the y-update; refactored only when rho changes.
  double rho = opts.rho;
  Eigen::CompleteOrthogonalDecomposition<Matrix> kkt_cod;
  auto refactor = [&] {
    Matrix kkt = Matrix::Zero(m + k, m + k);
    kkt.topLeftCorner(m, m) = rho * (a_off * a_off.transpose());
    if (k > 0) {
      kkt.topRightCorner(m, k) = a_sup;
      kkt.bottomLeftCorner(k, m) = a_sup.transpose();
    }
    kkt_cod.compute(kkt);
  };
  refactor();

  Vector z = Vector::Zero(f);
  Vector u = Vector::Zero(f);
  Vector y = Vector::Zero(m);
  Vector rhs(m + k);
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    rhs.head(m) = rho * (a_off * (z + u));
    if (k > 0) rhs.tail(k) = s;
    y = kkt_cod.solve(rhs).head(m);
    const Vector t = a_off.transpose() * y;
    const Vector z_old = z;
    for (Index i = 0; i < f; ++i) {
      z[i] = admm_cubic_root(rho, t[i] - u[i]);
    }
    u += z - t;

    const double primal = (z - t).cwiseAbs().maxCoeff();
    const double dual = rho * (a_off * (z - z_old)).cwiseAbs().maxCoeff();
    // With a large adapted rho the dual residual bottoms out at rho times
    // the roundoff jitter of z, so ulp-level settlement of the iterate
    // counts as convergence too; the margin gate below still arbitrates.
    const bool settled =
        (z - z_old).cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + z.cwiseAbs().maxCoeff());
    if (primal <= opts.primal_tol && (dual <= opts.dual_tol || settled)) {
      out.iterations = iter;
      out.certificate = evaluate_certificate(a, sp, y);
      // Settling onto the boundary means the interior problem had no
      // solution to find; report that as divergence evidence, not success.
      if (out.certificate.margin > kZeroMarginTol) {
        out.status = CertEngineStatus::kConverged;
      } else {
        out.status = CertEngineStatus::kDiverged;
        out.needs_lp_confirmation = true;
      }
      return out;
    }
    const double norm = std::max({y.cwiseAbs().maxCoeff(), z.cwiseAbs().maxCoeff(),
                                  u.cwiseAbs().maxCoeff()});
    if (norm > opts.divergence_bound) {
      out.status = CertEngineStatus::kDiverged;
      out.needs_lp_confirmation = true;
      out.iterations = iter;
      return out;
    }
    // Penalty adaptation: the z-step is the prox of the coordinate barrier
    // with parameter rho, so its contraction factor is curv / (curv + rho).
    // Track the worst barrier curvature among the iterates; without this a
    // constraint hugging its wall (curvature ~ 1/margin^2) stalls the
    // iteration for good.
    if (iter % 10 == 0) {
      double curv = 0.0;
      for (Index i = 0; i < f; ++i) {
        const double lo = 1.0 - z[i];
        const double hi = 1.0 + z[i];
        curv = std::max(curv, 1.0 / (lo * lo) + 1.0 / (hi * hi));
      }
      if (curv > 4.0 * rho || curv < 0.25 * rho) {
        const double rho_new = std::clamp(curv, 1e-4, 1e8);
        u *= rho / rho_new;
        rho = rho_new;
        refactor();
      }
    }
  }
  out.status = CertEngineStatus::kDiverged;
  out.needs_lp_confirmation = true;
  out.iterations = opts.max_iters;
  return out;
}

// --- strictification ---------------------------------------------------------

namespace {

// Solves max b^T p - t q subject to |(a^T p - alpha r)_j| <= q, q >= 0 and
// returns (p, q).
std::pair<Vector, double> touching_correction_lp(const Matrix& a, const Vector& b,
                                                 double t, double alpha, const Vector& r) {
  const Index m = a.rows();
  const Index n = a.cols();
  const Index nv = 2 * m + 1 + 2 * n;
  const Index qi = 2 * m;
  StandardLP lp;
  lp.c = Vector::Zero(nv);
  lp.c.segment(0, m) = -b;
  lp.c.segment(m, m) = b;
  lp.c[qi] = t;
  lp.a_eq = Matrix::Zero(2 * n, nv);
  lp.b_eq = Vector::Zero(2 * n);
  for (Index j = 0; j < n; ++j) {
    const Vector col = a.col(j);
    lp.a_eq.row(2 * j).segment(0, m) = col.transpose();
    lp.a_eq.row(2 * j).segment(m, m) = -col.transpose();
    lp.a_eq(2 * j, qi) = -1.0;
    lp.a_eq(2 * j, qi + 1 + 2 * j) = 1.0;
    lp.b_eq[2 * j] = alpha * r[j];
    lp.a_eq.row(2 * j + 1).segment(0, m) = -col.transpose();
    lp.a_eq.row(2 * j + 1).segment(m, m) = col.transpose();
    lp.a_eq(2 * j + 1, qi) = -1.0;
    lp.a_eq(2 * j + 1, qi + 2 + 2 * j) = 1.0;
    lp.b_eq[2 * j + 1] = -alpha * r[j];
  }
  const LPSolution sol = solve_lp(lp);
  if (sol.status != LPStatus::kOptimal) {
    throw NumericalError("strictify: correction program failed to solve");
  }
  return {sol.x.segment(0, m) - sol.x.segment(m, m), sol.x[qi]};
}

}  // namespace

StrictifyResult strictify(const Matrix& a, const SupportPattern& sp, const Vector& y_star,
                          const Vector& x_star, std::optional<double> alpha0,
                          int max_attempts) {
  validate_pattern_against(a, sp);
  if (y_star.size() != a.rows() || x_star.size() != a.cols()) {
    throw std::invalid_argument("strictify: dimension mismatch");
  }
  const Vector b = a * x_star;
  const double t = x_star.cwiseAbs().sum();
  const Vector corr = a.transpose() * y_star;
  if (corr.cwiseAbs().maxCoeff() > 1.0 + kMembershipTol) {
    throw std::invalid_argument("strictify: y_star is not dual feasible");
  }
  if (std::abs(b.dot(y_star) - t) > kMembershipTol * (1.0 + t)) {
    throw std::invalid_argument("strictify: y_star is not dual optimal for a x_star");
  }

  const IndexSet off = complement_of(sp.support, a.cols());
  Vector r = Vector::Zero(a.cols());
  bool any_touching = false;
  for (Index i : off) {
    if (corr[i] <= -1.0 + kMembershipTol) {
      r[i] = 1.0;
      any_touching = true;
    } else if (corr[i] >= 1.0 - kMembershipTol) {
      r[i] = -1.0;
      any_touching = true;
    }
  }
  StrictifyResult out;
  if (!any_touching) {
    out.success = true;
    out.y = y_star;
    return out;
  }

  double alpha = alpha0.value_or(1e-3 * (1.0 + a.cwiseAbs().maxCoeff()));
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    out.attempts = attempt;
    out.alpha_used = alpha;
    auto [p, q] = touching_correction_lp(a, b, t, alpha, r);
    Vector y_new;
    if (q <= 1e-9) {
      y_new = y_star + p;
    } else {
      Vector ray = p / q;
      const double along = b.dot(ray);
      // Snap the dual objective back onto t; the optimal ray satisfies
      // b^T ray = t up to LP tolerances, so this is a relative-1e-3 guard,
      // not a repair of a genuinely wrong ray.
      if (t > 0.0 && std::abs(along / t - 1.0) <= 1e-3 && along != 0.0) {
        ray *= t / along;
      }
      // The correction program is homogeneous in alpha, so a vertex solution
      // keeps alpha/q fixed and an even blend can overshoot the opposite
      // wall at -1 when alpha/q > 2. Weighting by q/(2q + alpha) keeps every
      // touched value inside [0, 1 - theta*alpha/q] and recovers the even
      // blend as alpha/q -> 0.
      const double theta = q / (2.0 * q + alpha);
      y_new = (1.0 - theta) * y_star + theta * ray;
    }
    const double obj_drift = std::abs(b.dot(y_new) - t);
    const Vector corr_new = a.transpose() * y_new;
    double on_max = 0.0;
    for (Index idx = 0; idx < sp.size(); ++idx) {
      on_max = std::max(on_max, std::abs(corr_new[sp.support[idx]]));
    }
    double off_max = 0.0;
    for (Index i : off) off_max = std::max(off_max, std::abs(corr_new[i]));
    const bool ok = obj_drift <= 1e-8 * (1.0 + t) && on_max <= 1.0 + kFeasTol &&
                    off_max < 1.0 - kZeroMarginTol;
    if (ok) {
      out.success = true;
      out.y = std::move(y_new);
      return out;
    }
    alpha *= 0.5;
  }
  out.success = false;
  out.y = y_star;
  return out;
}

// --- combined test ------------------------------------------------------------

UniquenessCondition check_uniqueness_condition(const Matrix& a, const SupportPattern& sp, Engine engine) {
  validate_pattern_against(a, sp);
  UniquenessCondition res;
  if (sp.size() == 0) {
    res.status = UniquenessCondition::Status::kHolds;
    res.rank_ok = true;
    res.equality_consistent = true;
    res.eps_star = 1.0;
    res.certificate = evaluate_certificate(a, sp, Vector::Zero(a.rows()));
    return res;
  }
  const Matrix a_sup = column_submatrix(a, sp.support);
  res.rank_ok = numerical_rank(a_sup) == sp.size();
  if (!res.rank_ok) {
    res.status = UniquenessCondition::Status::kFails;
    res.equality_consistent =
        least_norm_solution(a_sup.transpose(), sign_vector(sp)).has_value();
    return res;
  }

  if (engine == Engine::kLP) {
    const MaxMarginResult mm = certificate_lp(a, sp);
    res.equality_consistent = mm.equality_consistent;
    if (!mm.equality_consistent) {
      res.status = UniquenessCondition::Status::kFails;
      return res;
    }
    res.eps_star = mm.eps_star;
    if (mm.eps_star >= kStrictTol) {
      res.status = UniquenessCondition::Status::kHolds;
      res.certificate = evaluate_certificate(a, sp, mm.y);
    } else if (mm.eps_star <= kZeroMarginTol) {
      res.status = UniquenessCondition::Status::kFails;
    } else {
      res.status = UniquenessCondition::Status::kBorderline;
      res.certificate = evaluate_certificate(a, sp, mm.y);
    }
    return res;
  }

  const EngineCertificate eng = engine == Engine::kBarrier
                                    ? certificate_barrier(a, sp)
                                    : certificate_admm(a, sp);
  res.equality_consistent = eng.status != CertEngineStatus::kInfeasible;
  if (eng.status == CertEngineStatus::kConverged) {
    res.eps_star = eng.certificate.margin;
    if (is_valid_strict(eng.certificate)) {
      res.status = UniquenessCondition::Status::kHolds;
      res.certificate = eng.certificate;
    } else if (eng.certificate.margin > 0.0) {
      res.status = UniquenessCondition::Status::kBorderline;
      res.certificate = eng.certificate;
      res.needs_lp_confirmation = true;
    } else {
      res.status = UniquenessCondition::Status::kFails;
      res.needs_lp_confirmation = true;
    }
  } else {
    res.status = UniquenessCondition::Status::kFails;
    res.needs_lp_confirmation = eng.needs_lp_confirmation;
  }
  return res;
}

}  // namespace l1cert
