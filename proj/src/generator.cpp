#include "l1cert/generator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "l1cert/linalg.hpp"

namespace l1cert {

double SeededRng::uniform() {
  // 53-bit mantissa from the top bits of the raw draw.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SeededRng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(angle);
  have_spare_ = true;
  return r * std::cos(angle);
}

Index SeededRng::below(Index n) {
  return static_cast<Index>(engine_() % static_cast<std::uint64_t>(n));
}

int SeededRng::sign() { return (engine_() & 1u) ? 1 : -1; }

IndexSet SeededRng::sample_sorted(Index n, Index k) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < k; ++i) {
    const Index j = i + below(n - i);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  IndexSet out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

Matrix draw_matrix(SeededRng& rng, const GeneratorSpec& spec) {
  Matrix a(spec.m, spec.n);
  switch (spec.ensemble) {
    case Ensemble::kGaussian:
      for (Index r = 0; r < spec.m; ++r) {
        for (Index c = 0; c < spec.n; ++c) a(r, c) = rng.gaussian();
      }
      break;
    case Ensemble::kPartialIdentity:
      if (spec.n < spec.m) {
        throw std::invalid_argument("generator: partial-identity ensemble needs n >= m");
      }
      a.leftCols(spec.m) = Matrix::Identity(spec.m, spec.m);
      for (Index r = 0; r < spec.m; ++r) {
        for (Index c = spec.m; c < spec.n; ++c) a(r, c) = rng.gaussian();
      }
      break;
  }
  return a;
}

void validate_spec(const GeneratorSpec& spec) {
  if (spec.m <= 0 || spec.n <= 0) {
    throw std::invalid_argument("generator: m and n must be positive");
  }
  if (spec.k < 0 || spec.k > std::min(spec.m, spec.n)) {
    throw std::invalid_argument("generator: k must satisfy 0 <= k <= min(m, n)");
  }
  if (!(spec.delta > 0.0 && spec.delta < 1.0)) {
    throw std::invalid_argument("generator: delta must lie in (0, 1)");
  }
}

Vector planted_solution(SeededRng& rng, const SupportPattern& sp, Index n) {
  Vector x = Vector::Zero(n);
  for (Index i = 0; i < sp.size(); ++i) {
    x[sp.support[i]] = sp.signs[i] * rng.uniform(0.5, 1.5);
  }
  return x;
}

}  // namespace

PocsTrace project_to_certificate(const Matrix& a, const SupportPattern& sp, double delta,
                                 int max_iters) {
  const IndexSet off = complement_of(sp.support, a.cols());
  const Matrix a_sup = column_submatrix(a, sp.support);
  const Matrix ait = a_sup.transpose();
  const Vector s = sign_vector(sp);
  const double limit = 1.0 - delta;

  PocsTrace trace;
  auto start = least_norm_solution(ait, s);
  if (!start) return trace;  // inconsistent equality set: cannot converge
  Vector y = *start;

  std::vector<double> col_sq(off.size());
  for (std::size_t i = 0; i < off.size(); ++i) col_sq[i] = a.col(off[i]).squaredNorm();

  for (int iter = 0; iter < max_iters; ++iter) {
    const Vector y_prev = y;
    // One pass of half-space corrections toward the slab, in index order.
    for (std::size_t i = 0; i < off.size(); ++i) {
      if (col_sq[i] <= 0.0) continue;
      const double t = a.col(off[i]).dot(y);
      const double clipped = std::clamp(t, -limit, limit);
      if (t != clipped) y -= ((t - clipped) / col_sq[i]) * a.col(off[i]);
    }
    // Re-project onto the affine sign set (least-norm correction).
    if (sp.size() > 0) {
      auto corr = least_norm_solution(ait, s - ait * y);
      if (!corr) return trace;
      y += *corr;
    }
    trace.displacement.push_back((y - y_prev).norm());

    trace.eq_residual = sp.size() > 0 ? (ait * y - s).cwiseAbs().maxCoeff() : 0.0;
    trace.slab_violation = 0.0;
    for (Index i : off) {
      trace.slab_violation =
          std::max(trace.slab_violation, std::abs(a.col(i).dot(y)) - limit);
    }
    if (trace.eq_residual <= 1e-9 && trace.slab_violation <= 1e-9) {
      trace.converged = true;
      break;
    }
  }
  trace.y = std::move(y);
  return trace;
}

GeneratedInstance generate_unique(const GeneratorSpec& spec) {
  validate_spec(spec);
  SeededRng rng(spec.seed);
  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt <= spec.max_redraws; ++attempt) {
    Matrix a = draw_matrix(rng, spec);
    const IndexSet support = rng.sample_sorted(spec.n, spec.k);
    std::vector<int> signs(static_cast<std::size_t>(spec.k));
    for (auto& s : signs) s = rng.sign();
    const SupportPattern sp = make_pattern(support, signs);

    if (spec.k == 0) {
      GeneratedInstance inst;
      inst.a = std::move(a);
      inst.b = Vector::Zero(spec.m);
      inst.x_star = Vector::Zero(spec.n);
      inst.certificate = evaluate_certificate(inst.a, sp, Vector::Zero(spec.m));
      inst.redraws = attempt;
      return inst;
    }
    if (numerical_rank(column_submatrix(a, support)) != spec.k) {
      last_failure = "support columns were rank deficient";
      continue;
    }
    PocsTrace trace = project_to_certificate(a, sp, spec.delta, spec.max_pocs_iters);
    if (!trace.converged) {
      last_failure = "alternating projections did not reach the margin target";
      continue;
    }
    GeneratedInstance inst;
    inst.x_star = planted_solution(rng, sp, spec.n);
    inst.b = a * inst.x_star;
    inst.certificate = evaluate_certificate(a, sp, trace.y);
    inst.a = std::move(a);
    inst.redraws = attempt;
    inst.pocs_iterations = static_cast<int>(trace.displacement.size());
    // Every emitted instance must re-validate under the exact checker.
    if (!check_uniqueness_condition(inst.a, sp).holds()) {
      last_failure = "projected certificate failed re-validation";
      continue;
    }
    return inst;
  }
  std::ostringstream msg;
  msg << "generate_unique: gave up after " << spec.max_redraws + 1 << " draws (m=" << spec.m
      << ", n=" << spec.n << ", k=" << spec.k << ", delta=" << spec.delta
      << "); last failure: " << last_failure
      << (spec.k >= spec.m ? " (k = m leaves no margin room)" : "");
  throw GenerationFailed(msg.str());
}

GeneratedInstance generate_nonunique(const GeneratorSpec& spec) {
  validate_spec(spec);
  if (spec.k < 1) {
    throw std::invalid_argument("generate_nonunique: k must be at least 1");
  }
  if (spec.k >= spec.n) {
    throw std::invalid_argument("generate_nonunique: needs an off-support column (k < n)");
  }
  GeneratedInstance inst = generate_unique(spec);
  const SupportPattern sp = pattern_of(inst.x_star);
  const Vector s = sign_vector(sp);
  SeededRng rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
  const Matrix a_base = inst.a;

  const IndexSet off = complement_of(sp.support, spec.n);
  const Matrix a_sup = column_submatrix(inst.a, sp.support);

  // Rewrite one off-support column as a_I beta with beta^T s = 1: any dual
  // with the right signs is pinned to |a_target^T y| = 1, so the best margin
  // is exactly zero while x_star stays optimal.
  for (int attempt = 0; attempt <= spec.max_redraws; ++attempt) {
    const Index target =
        off[static_cast<std::size_t>(rng.below(static_cast<Index>(off.size())))];
    Vector beta(spec.k);
    for (;;) {
      for (Index i = 0; i < spec.k; ++i) beta[i] = rng.gaussian();
      const double c = beta.dot(s);
      if (std::abs(c) > 1e-3) {
        beta /= c;
        break;
      }
    }
    inst.a = a_base;
    inst.a.col(target) = a_sup * beta;
    inst.b = inst.a * inst.x_star;  // unchanged in exact arithmetic (target is off-support)
    inst.certificate = evaluate_certificate(inst.a, sp, inst.certificate.y);
    // The planted dual must keep x_star optimal (feasible with a touching
    // value), and the exact checker must refute any strict certificate.
    const bool still_optimal = inst.certificate.eq_residual <= kEqTol &&
                               inst.certificate.margin >= -kZeroMarginTol;
    const UniquenessCondition cond = check_uniqueness_condition(inst.a, sp);
    if (still_optimal && cond.rank_ok && cond.equality_consistent &&
        cond.status == UniquenessCondition::Status::kFails) {
      return inst;
    }
  }
  throw GenerationFailed("generate_nonunique: planted degeneracy failed re-validation");
}

}  // namespace l1cert
