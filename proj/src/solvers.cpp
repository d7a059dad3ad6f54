#include "l1cert/solvers.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "l1cert/linalg.hpp"
#include "l1cert/simplex.hpp"

namespace l1cert {

namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double lasso_objective(const Matrix& a, const Vector& b, double lambda, const Vector& x) {
  return 0.5 * (a * x - b).squaredNorm() + lambda * x.cwiseAbs().sum();
}

// Residual of p = g/scale against the l1 subdifferential at x: exact signs on
// the support, values clipped into [-1, 1] off it. Returns the best
// subgradient alongside.
std::pair<double, Vector> subdifferential_fit(const Vector& x, const Vector& g,
                                              double scale, const IndexSet& supp) {
  const Index n = x.size();
  Vector p(n);
  double residual = 0.0;
  std::size_t si = 0;
  for (Index i = 0; i < n; ++i) {
    const double pi = g[i] / scale;
    if (si < supp.size() && supp[si] == i) {
      const double s = x[i] > 0.0 ? 1.0 : -1.0;
      p[i] = s;
      residual = std::max(residual, std::abs(pi - s));
      ++si;
    } else {
      p[i] = std::clamp(pi, -1.0, 1.0);
      residual = std::max(residual, std::max(0.0, std::abs(pi) - 1.0));
    }
  }
  return {residual, p};
}

}  // namespace

ProblemInstance make_instance(Model model, Matrix a, Vector b, std::optional<double> param) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("make_instance: a.rows() must equal b.size()");
  }
  ProblemInstance inst;
  inst.model = model;
  if (model == Model::kBasisPursuit) {
    inst.param = 0.0;
  } else {
    if (!param.has_value() || *param <= 0.0) {
      throw std::invalid_argument("make_instance: model requires a positive parameter");
    }
    inst.param = *param;
  }
  inst.full_row_rank = numerical_rank(a) == a.rows();
  inst.a = std::move(a);
  inst.b = std::move(b);
  return inst;
}

bool KKTReport::optimal(double tol) const {
  switch (model) {
    case Model::kBasisPursuit:
      return feasibility_slack <= tol;
    case Model::kPenalizedLS:
      return stationarity_residual <= tol;
    case Model::kResidualConstrained:
    case Model::kL1Constrained:
      // A nonzero point needs a binding constraint; feasibility_slack is
      // signed, so "binding" means small in absolute value. The degenerate
      // (zero-support) case only needs feasibility.
      if (degenerate_support) return feasibility_slack <= tol;
      return stationarity_residual <= tol && std::abs(feasibility_slack) <= tol;
  }
  return false;
}

KKTReport kkt_report(const ProblemInstance& inst, const Vector& x) {
  if (x.size() != inst.a.cols()) {
    throw std::invalid_argument("kkt_report: x has the wrong length");
  }
  KKTReport rep;
  rep.model = inst.model;
  const Vector residual = inst.a * x - inst.b;
  const Vector g = -(inst.a.transpose() * residual);  // a^T (b - a x)
  const IndexSet supp = support_of(x);

  switch (inst.model) {
    case Model::kBasisPursuit: {
      rep.feasibility_slack = residual.cwiseAbs().maxCoeff();
      rep.multiplier = 0.0;
      rep.subgradient = Vector::Zero(x.size());
      for (Index i : supp) rep.subgradient[i] = x[i] > 0.0 ? 1.0 : -1.0;
      rep.stationarity_residual = 0.0;
      break;
    }
    case Model::kPenalizedLS: {
      rep.multiplier = inst.param;
      auto [res, p] = subdifferential_fit(x, g, inst.param, supp);
      rep.stationarity_residual = res;
      rep.subgradient = std::move(p);
      rep.feasibility_slack = 0.0;
      break;
    }
    case Model::kResidualConstrained: {
      rep.feasibility_slack = 0.5 * residual.squaredNorm() - inst.param;
      if (supp.empty()) {
        rep.degenerate_support = true;
        rep.multiplier = 0.0;
        rep.subgradient = Vector::Zero(x.size());
        rep.stationarity_residual = 0.0;
        break;
      }
      // eta >= 0 minimizing sum over the support of (eta g_i - s_i)^2.
      double num = 0.0, den = 0.0;
      for (Index i : supp) {
        const double s = x[i] > 0.0 ? 1.0 : -1.0;
        num += s * g[i];
        den += g[i] * g[i];
      }
      const double eta = den > 0.0 ? std::max(0.0, num / den) : 0.0;
      rep.multiplier = eta;
      if (eta <= 0.0) {
        rep.degenerate_support = den <= 0.0;
        rep.stationarity_residual = 1.0;  // sign s_i unreachable with eta = 0
        rep.subgradient = Vector::Zero(x.size());
        break;
      }
      auto [res, p] = subdifferential_fit(x, g, 1.0 / eta, supp);
      rep.stationarity_residual = res;
      rep.subgradient = std::move(p);
      break;
    }
    case Model::kL1Constrained: {
      rep.feasibility_slack = x.cwiseAbs().sum() - inst.param;
      if (supp.empty()) {
        rep.degenerate_support = true;
        rep.multiplier = 0.0;
        rep.subgradient = Vector::Zero(x.size());
        rep.stationarity_residual = g.cwiseAbs().maxCoeff();
        break;
      }
      // nu >= 0 minimizing sum over the support of (nu s_i - g_i)^2.
      double num = 0.0;
      for (Index i : supp) {
        const double s = x[i] > 0.0 ? 1.0 : -1.0;
        num += s * g[i];
      }
      const double nu = std::max(0.0, num / static_cast<double>(supp.size()));
      rep.multiplier = nu;
      if (nu <= 0.0) {
        // Stationarity degenerates to a^T (a x - b) = 0.
        rep.stationarity_residual = g.cwiseAbs().maxCoeff();
        rep.subgradient = Vector::Zero(x.size());
        break;
      }
      auto [res, p] = subdifferential_fit(x, g, nu, supp);
      rep.stationarity_residual = res;
      rep.subgradient = std::move(p);
      break;
    }
  }
  return rep;
}

BPSolution solve_bp(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("solve_bp: dimension mismatch");
  }
  const Index n = a.cols();
  StandardLP lp;
  lp.c = Vector::Ones(2 * n);
  lp.a_eq.resize(a.rows(), 2 * n);
  lp.a_eq.leftCols(n) = a;
  lp.a_eq.rightCols(n) = -a;
  lp.b_eq = b;
  const LPSolution sol = solve_lp(lp);
  if (sol.status == LPStatus::kInfeasible) {
    throw InfeasibleSystem("solve_bp: a x = b has no solution");
  }
  if (sol.status != LPStatus::kOptimal) {
    throw NumericalError("solve_bp: unexpected unbounded split program");
  }
  BPSolution out;
  out.x = sol.x.head(n) - sol.x.tail(n);
  out.y = sol.y;
  out.objective = sol.objective;
  return out;
}

LassoResult solve_lasso_full(const Matrix& a, const Vector& b, double lambda,
                             const LassoOptions& opts) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("solve_lasso: dimension mismatch");
  }
  if (lambda <= 0.0) {
    throw std::invalid_argument("solve_lasso: lambda must be positive");
  }
  const Index n = a.cols();
  const ProblemInstance inst = [&] {
    ProblemInstance tmp;
    tmp.model = Model::kPenalizedLS;
    tmp.a = a;
    tmp.b = b;
    tmp.param = lambda;
    return tmp;
  }();

  LassoResult out;
  const double sigma_max = a.jacobiSvd().singularValues()(0);
  if (sigma_max <= 0.0) {
    out.x = Vector::Zero(n);
    out.objectives.push_back(lasso_objective(a, b, lambda, out.x));
    return out;
  }
  const double lip = sigma_max * sigma_max;

  Vector x = Vector::Zero(n);
  Vector x_prev = x;
  Vector momentum = x;
  double t = 1.0;
  double obj = lasso_objective(a, b, lambda, x);
  out.objectives.push_back(obj);

  auto prox_step = [&](const Vector& point) {
    const Vector grad = a.transpose() * (a * point - b);
    Vector next(n);
    for (Index i = 0; i < n; ++i) {
      next[i] = soft_threshold(point[i] - grad[i] / lip, lambda / lip);
    }
    return next;
  };

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    Vector candidate = prox_step(momentum);
    double cand_obj = lasso_objective(a, b, lambda, candidate);
    if (cand_obj > obj) {
      // Momentum overshot: restart from the last iterate. A plain proximal
      // step from x cannot increase the objective.
      momentum = x;
      t = 1.0;
      candidate = prox_step(momentum);
      cand_obj = lasso_objective(a, b, lambda, candidate);
      cand_obj = std::min(cand_obj, obj);
    }
    x_prev = x;
    x = candidate;
    obj = cand_obj;
    out.objectives.push_back(obj);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    momentum = x + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;

    const double residual = kkt_report(inst, x).stationarity_residual;
    if (residual <= opts.tol) {
      out.x = x;
      out.iterations = iter;
      out.residual = residual;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "solve_lasso: no convergence in " << opts.max_iters << " iterations";
  throw LassoDidNotConverge(msg.str(), x, kkt_report(inst, x).stationarity_residual);
}

Vector solve_lasso(const Matrix& a, const Vector& b, double lambda, const LassoOptions& opts) {
  return solve_lasso_full(a, b, lambda, opts).x;
}

std::pair<Matrix, Vector> reduce_to_bp(const ProblemInstance& inst, const Vector& x_star,
                                       double tol) {
  const KKTReport rep = kkt_report(inst, x_star);
  if (!rep.optimal(tol)) {
    std::ostringstream msg;
    msg << "reduce_to_bp: x is not optimal within " << tol << " (";
    if (rep.stationarity_residual > tol) {
      msg << "stationarity residual " << rep.stationarity_residual;
    } else if (rep.feasibility_slack > tol) {
      msg << "feasibility slack " << rep.feasibility_slack;
    } else {
      msg << "constraint not binding, slack " << rep.feasibility_slack;
    }
    msg << ")";
    throw std::invalid_argument(msg.str());
  }
  if (inst.model == Model::kBasisPursuit) {
    return {inst.a, inst.b};
  }
  return {inst.a, inst.a * x_star};
}

}  // namespace l1cert
