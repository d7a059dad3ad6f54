#include "l1cert/uniqueness.hpp"

#include <algorithm>
#include <cmath>

#include "l1cert/linalg.hpp"
#include "l1cert/oracle.hpp"

namespace l1cert {

namespace {

// A nonzero direction d supported on I with a_I d_I = 0, scaled so that
// x_star + d keeps the signs of x_star on its support.
Vector null_direction_witness(const Matrix& a, const SupportPattern& sp,
                              const Vector& x_star) {
  const Matrix a_sup = column_submatrix(a, sp.support);
  const Matrix basis = null_space_basis(a_sup);
  Vector d = Vector::Zero(a.cols());
  if (basis.cols() == 0) return d;
  const Vector dir = basis.col(0);
  double min_mag = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < sp.size(); ++i) {
    min_mag = std::min(min_mag, std::abs(x_star[sp.support[i]]));
  }
  const double dir_max = dir.cwiseAbs().maxCoeff();
  const double scale =
      (std::isfinite(min_mag) && min_mag > 0.0 && dir_max > 0.0) ? 0.5 * min_mag / dir_max : 1.0;
  for (Index i = 0; i < sp.size(); ++i) {
    d[sp.support[i]] = scale * dir[i];
  }
  return d;
}

// A second optimal point of the minimum-l1 problem, taken from the face
// probes; empty when every probe lands back on x_star.
std::optional<Vector> second_point_witness(const Matrix& a, const Vector& b,
                                           const Vector& x_star) {
  const FaceRange fr = bp_face_range(a, b);
  double best_dist = 1e-6;
  std::optional<Vector> best;
  for (const auto& bucket : {fr.min_attaining, fr.max_attaining}) {
    for (const Vector& p : bucket) {
      const double dist = (p - x_star).cwiseAbs().maxCoeff();
      if (dist > best_dist) {
        best_dist = dist;
        best = p;
      }
    }
  }
  return best;
}

UniquenessVerdict decide_from_condition(const Matrix& a, const Vector& b,
                                        const Vector& x_star, const SupportPattern& sp,
                                        Engine engine) {
  UniquenessVerdict v;
  v.pattern = sp;
  const UniquenessCondition cond = check_uniqueness_condition(a, sp, engine);
  v.eps_star = cond.eps_star;
  if (!cond.rank_ok) {
    v.status = Verdict::kNotUnique;
    v.reason = "support columns are rank deficient";
    v.witness = null_direction_witness(a, sp, x_star);
    v.witness_kind = WitnessKind::kNullDirection;
    return v;
  }
  switch (cond.status) {
    case UniquenessCondition::Status::kHolds:
      v.status = Verdict::kUnique;
      v.reason = "strict dual certificate";
      v.certificate = cond.certificate;
      return v;
    case UniquenessCondition::Status::kBorderline:
      v.status = Verdict::kIndeterminate;
      v.reason = "certificate margin below strict tolerance";
      v.certificate = cond.certificate;
      return v;
    case UniquenessCondition::Status::kFails:
      break;
  }
  if (cond.needs_lp_confirmation) {
    v.status = Verdict::kIndeterminate;
    v.reason = "engine inconclusive; rerun with the lp engine";
    return v;
  }
  v.status = Verdict::kNotUnique;
  v.reason = cond.equality_consistent ? "no strict dual certificate exists"
                                      : "sign equations are inconsistent";
  if (auto w = second_point_witness(a, b, x_star)) {
    v.witness = std::move(*w);
    v.witness_kind = WitnessKind::kSecondPoint;
  } else {
    v.status = Verdict::kIndeterminate;
    v.reason = "certificate refuted but no witness found (borderline instance)";
  }
  return v;
}

IndexSet matching_indices(const Vector& values, double target, double rel_tol) {
  IndexSet out;
  const double tol = rel_tol * std::max(target, 1.0);
  for (Index i = 0; i < values.size(); ++i) {
    if (std::abs(std::abs(values[i]) - target) <= tol) out.push_back(i);
  }
  return out;
}

}  // namespace

UniquenessVerdict verify_bp(const Matrix& a, const Vector& b, const Vector& x_star,
                            Engine engine) {
  if (a.rows() != b.size() || a.cols() != x_star.size()) {
    throw std::invalid_argument("verify_bp: dimension mismatch");
  }
  UniquenessVerdict v;
  const double infeas = (a * x_star - b).cwiseAbs().maxCoeff();
  if (infeas > 1e-7 * (1.0 + b.cwiseAbs().maxCoeff())) {
    v.status = Verdict::kIndeterminate;
    v.reason = "not feasible";
    return v;
  }
  return decide_from_condition(a, b, x_star, pattern_of(x_star), engine);
}

UniquenessVerdict verify_model(const ProblemInstance& inst, const Vector& x_star,
                               Engine engine) {
  UniquenessVerdict v;
  const KKTReport rep = kkt_report(inst, x_star);
  if (!rep.optimal()) {
    v.status = Verdict::kIndeterminate;
    v.reason = inst.model == Model::kBasisPursuit ? "not feasible" : "not optimal";
    return v;
  }
  const auto [a, b_star] = reduce_to_bp(inst, x_star);
  UniquenessVerdict out = verify_bp(a, b_star, x_star, engine);
  if (out.status == Verdict::kUnique && support_of(x_star).empty() &&
      inst.model != Model::kBasisPursuit) {
    out.reason = "zero solution: the reduced datum is zero";
  }
  return out;
}

EquicorrelationSet equicorrelation(const Matrix& a, const Vector& b, double lambda,
                                   const Vector& x_star) {
  if (lambda <= 0.0) throw std::invalid_argument("equicorrelation: lambda must be positive");
  const Vector corr = a.transpose() * (b - a * x_star);
  EquicorrelationSet out;
  out.j = matching_indices(corr, lambda, kMembershipTol);
  for (Index i : out.j) out.values.push_back(std::abs(corr[i]));
  return out;
}

SufficiencyResult equicorrelation_rank_sufficient(const Matrix& a, const Vector& b, double lambda,
                                      const Vector& x_star) {
  const EquicorrelationSet eq = equicorrelation(a, b, lambda, x_star);
  const Matrix a_j = column_submatrix(a, eq.j);
  return numerical_rank(a_j) == static_cast<Index>(eq.j.size()) ? SufficiencyResult::kUnique
                                                                : SufficiencyResult::kInconclusive;
}

AdjacentEquicorrelationResult adjacent_equicorrelation_check(const Matrix& a, const Vector& b, double lambda,
                                  const Vector& x_star) {
  AdjacentEquicorrelationResult out;
  const EquicorrelationSet eq = equicorrelation(a, b, lambda, x_star);
  const SupportPattern sp = pattern_of(x_star);
  if (eq.j.size() != sp.support.size() + 1) return out;  // not applicable
  out.applicable = true;
  out.verdict.pattern = sp;
  const Matrix a_j = column_submatrix(a, eq.j);
  if (numerical_rank(a_j) == static_cast<Index>(eq.j.size())) {
    out.verdict.status = Verdict::kUnique;
    out.verdict.reason = "equicorrelation columns have full rank";
    const UniquenessCondition cond = check_uniqueness_condition(a, sp);
    out.verdict.eps_star = cond.eps_star;
    out.verdict.certificate = cond.certificate;
    return out;
  }
  // Rank-deficient a_J with |J| = |I| + 1: the extra column is a combination
  // of the support columns, which yields an explicit optimal direction.
  out.verdict.status = Verdict::kNotUnique;
  out.verdict.reason = "equicorrelation columns are rank deficient";
  const Matrix kernel = null_space_basis(a_j);
  if (kernel.cols() > 0) {
    const Vector w = kernel.col(0);
    Index extra_pos = -1;
    for (std::size_t i = 0; i < eq.j.size(); ++i) {
      if (!std::binary_search(sp.support.begin(), sp.support.end(), eq.j[i])) {
        extra_pos = static_cast<Index>(i);
        break;
      }
    }
    if (extra_pos >= 0 && std::abs(w[extra_pos]) > 1e-12) {
      Vector d = Vector::Zero(a.cols());
      for (std::size_t i = 0; i < eq.j.size(); ++i) d[eq.j[i]] = w[static_cast<Index>(i)];
      // Walk along d (sign chosen so the l1 norm is non-increasing) just far
      // enough to keep the support signs.
      double step = std::numeric_limits<double>::infinity();
      for (Index i : sp.support) {
        if (std::abs(d[i]) > 1e-14) step = std::min(step, 0.5 * std::abs(x_star[i]) / std::abs(d[i]));
      }
      if (!std::isfinite(step)) step = 1.0;
      const Vector cand_plus = x_star + step * d;
      const Vector cand_minus = x_star - step * d;
      const double l1 = x_star.cwiseAbs().sum();
      const Vector& witness = std::abs(cand_plus.cwiseAbs().sum() - l1) <=
                                      std::abs(cand_minus.cwiseAbs().sum() - l1)
                                  ? cand_plus
                                  : cand_minus;
      out.verdict.witness = witness;
      out.verdict.witness_kind = WitnessKind::kSecondPoint;
    }
  }
  if (!out.verdict.witness) {
    out.verdict.witness = null_direction_witness(a, sp, x_star);
    out.verdict.witness_kind = WitnessKind::kNullDirection;
  }
  return out;
}

SquareSupportReport square_support_check(const Matrix& a, const Vector& b, double lambda,
                                  const Vector& x_star, double tol) {
  SquareSupportReport out;
  ProblemInstance inst;
  inst.model = Model::kPenalizedLS;
  inst.a = a;
  inst.b = b;
  inst.param = lambda;
  if (!kkt_report(inst, x_star).optimal(tol)) return out;
  const SupportPattern sp = pattern_of(x_star);
  if (sp.size() != a.rows()) return out;
  const Matrix a_sup = column_submatrix(a, sp.support);
  out.rank_ok = numerical_rank(a_sup) == sp.size();
  if (!out.rank_ok) return out;
  out.applicable = true;
  Vector x_sup(sp.size());
  for (Index i = 0; i < sp.size(); ++i) x_sup[i] = x_star[sp.support[i]];
  const Vector res = b - a_sup * x_sup;
  out.y = res / lambda;
  out.eq_residual = (a_sup.transpose() * res - lambda * sign_vector(sp)).cwiseAbs().maxCoeff();
  const IndexSet off = complement_of(sp.support, a.cols());
  out.off_support_max = 0.0;
  for (Index i : off) out.off_support_max = std::max(out.off_support_max, std::abs(a.col(i).dot(res)));
  out.passes = out.eq_residual <= tol * std::max(1.0, lambda) &&
               out.off_support_max < lambda * (1.0 - kMembershipTol);
  return out;
}

UniquenessVerdict recognize_from_dual(const Matrix& a, const Vector& b, const Vector& x_star,
                                      const Vector& y_star) {
  if (a.rows() != b.size() || a.cols() != x_star.size() || y_star.size() != a.rows()) {
    throw std::invalid_argument("recognize_from_dual: dimension mismatch");
  }
  const double primal_res = (a * x_star - b).cwiseAbs().maxCoeff();
  const Vector corr = a.transpose() * y_star;
  const double l1 = x_star.cwiseAbs().sum();
  if (primal_res > 1e-7 * (1.0 + b.cwiseAbs().maxCoeff()) ||
      corr.cwiseAbs().maxCoeff() > 1.0 + kMembershipTol ||
      std::abs(b.dot(y_star) - l1) > kMembershipTol * (1.0 + l1)) {
    throw std::invalid_argument("recognize_from_dual: (x, y) is not an optimal pair");
  }
  UniquenessVerdict v;
  v.pattern = pattern_of(x_star);
  const IndexSet j = matching_indices(corr, 1.0, kMembershipTol);
  const Matrix a_j = column_submatrix(a, j);
  const bool rank_ok = numerical_rank(a_j) == static_cast<Index>(j.size());
  if (rank_ok && j == v.pattern.support) {
    v.status = Verdict::kUnique;
    v.reason = "dual touches exactly the support and those columns have full rank";
    v.certificate = evaluate_certificate(a, v.pattern, y_star);
    v.eps_star = v.certificate->margin;
    return v;
  }
  v.status = Verdict::kIndeterminate;
  v.reason = rank_ok ? "dual touches more columns than the support"
                     : "touched columns are rank deficient";
  return v;
}

ReducedCondition check_reduced_condition(const ProblemInstance& inst, const Vector& x_star,
                                    Engine engine) {
  ReducedCondition out;
  if (inst.model == Model::kBasisPursuit) return out;  // no active-set notion here
  const SupportPattern sp = pattern_of(x_star);
  if (sp.size() == 0) return out;  // excluded: route x = 0 through the reduction
  const KKTReport rep = kkt_report(inst, x_star);
  const Vector corr = inst.a.transpose() * (inst.b - inst.a * x_star);

  IndexSet p;
  switch (inst.model) {
    case Model::kPenalizedLS:
      p = matching_indices(corr, inst.param, kMembershipTol);
      break;
    case Model::kResidualConstrained:
      // |eta a_i^T (b - a x)| = 1
      p = matching_indices(rep.multiplier * corr, 1.0, kMembershipTol);
      break;
    case Model::kL1Constrained:
      p = matching_indices(corr, rep.multiplier, kMembershipTol);
      break;
    case Model::kBasisPursuit:
      break;
  }
  // The support is contained in every active set; enforce it against roundoff.
  IndexSet merged = p;
  merged.insert(merged.end(), sp.support.begin(), sp.support.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  out.applicable = true;
  out.active_set.p = merged;
  out.active_set.kind = inst.model;
  out.active_set.multiplier = rep.multiplier;

  // Positions of the support inside the reduced column set.
  IndexSet reduced_support;
  std::vector<int> reduced_signs;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const auto it = std::lower_bound(sp.support.begin(), sp.support.end(), merged[i]);
    if (it != sp.support.end() && *it == merged[i]) {
      reduced_support.push_back(static_cast<Index>(i));
      reduced_signs.push_back(sp.signs[static_cast<std::size_t>(it - sp.support.begin())]);
    }
  }
  const Matrix a_p = column_submatrix(inst.a, merged);
  const UniquenessCondition cond =
      check_uniqueness_condition(a_p, make_pattern(reduced_support, reduced_signs), engine);
  out.status = cond.status;
  out.certificate = cond.certificate;
  return out;
}

}  // namespace l1cert
