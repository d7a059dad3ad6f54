#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "l1cert/generator.hpp"
#include "l1cert/linalg.hpp"
#include "l1cert/oracle.hpp"
#include "l1cert/uniqueness.hpp"

using namespace l1cert;
using testutil::mat;
using testutil::vec;

namespace {

// A witness must re-validate on its own: either a null direction of the
// support columns or a distinct point with the same residual and l1 norm.
void check_witness(const UniquenessVerdict& v, const Matrix& a, const Vector& b,
                   const Vector& x_star) {
  REQUIRE(v.witness.has_value());
  if (v.witness_kind == WitnessKind::kNullDirection) {
    const Matrix a_sup = column_submatrix(a, v.pattern.support);
    Vector d_sup(v.pattern.size());
    for (Index i = 0; i < v.pattern.size(); ++i) d_sup[i] = (*v.witness)[v.pattern.support[i]];
    CHECK(v.witness->cwiseAbs().maxCoeff() > 0.0);
    CHECK((a_sup * d_sup).cwiseAbs().maxCoeff() <= 1e-8);
  } else {
    CHECK((*v.witness - x_star).cwiseAbs().maxCoeff() > 1e-6);
    CHECK((a * *v.witness - b).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(v.witness->cwiseAbs().sum() <= x_star.cwiseAbs().sum() + 1e-6);
  }
}

}  // namespace

TEST_CASE("verify_bp on the worked instances") {
  SUBCASE("identity: unique with certificate (1, 0)") {
    const UniquenessVerdict v = verify_bp(Matrix::Identity(2, 2), vec({1, 0}), vec({1, 0}));
    CHECK(v.status == Verdict::kUnique);
    REQUIRE(v.certificate.has_value());
    CHECK((v.certificate->y - vec({1, 0})).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("2x3 example: not unique with a verifiable witness") {
    const Matrix a = testutil::example_matrix();
    const Vector b = testutil::example_datum();
    const Vector x = vec({1, 0.5, 0});
    const UniquenessVerdict v = verify_bp(a, b, x);
    CHECK(v.status == Verdict::kNotUnique);
    check_witness(v, a, b, x);
  }
  SUBCASE("infeasible point is indeterminate") {
    const UniquenessVerdict v = verify_bp(Matrix::Identity(2, 2), vec({1, 0}), vec({0, 1}));
    CHECK(v.status == Verdict::kIndeterminate);
    CHECK(v.reason == "not feasible");
  }
}

TEST_CASE("verify_model") {
  const Matrix a = testutil::example_matrix();
  const Vector b = testutil::example_datum();
  SUBCASE("worked penalized instance: unique") {
    const auto inst = make_instance(Model::kPenalizedLS, a, b, 1.0);
    const UniquenessVerdict v = verify_model(inst, vec({0, 0.25, 0}));
    CHECK(v.status == Verdict::kUnique);
    REQUIRE(v.certificate.has_value());
    CHECK(is_valid_strict(*v.certificate));
    CHECK(v.eps_star == doctest::Approx(2.0 / 3).epsilon(1e-9));
  }
  SUBCASE("identity penalized instance: unique") {
    const auto inst = make_instance(Model::kPenalizedLS, Matrix::Identity(2, 2), vec({2, 0}), 1.0);
    CHECK(verify_model(inst, vec({1, 0})).status == Verdict::kUnique);
  }
  SUBCASE("non-optimal point: indeterminate") {
    const auto inst = make_instance(Model::kPenalizedLS, a, b, 1.0);
    const UniquenessVerdict v = verify_model(inst, vec({0.1, 0.2, 0}));
    CHECK(v.status == Verdict::kIndeterminate);
    CHECK(v.reason == "not optimal");
  }
  SUBCASE("zero solution routes through the reduction") {
    // lambda above the datum correlation: x* = 0 is optimal and unique.
    const auto inst = make_instance(Model::kPenalizedLS, Matrix::Identity(2, 2),
                                    vec({0.4, -0.2}), 1.0);
    const UniquenessVerdict v = verify_model(inst, vec({0, 0}));
    CHECK(v.status == Verdict::kUnique);
    REQUIRE(v.certificate.has_value());
    CHECK(v.certificate->y.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("constrained models verify at a supplied point") {
    const auto res_con =
        make_instance(Model::kResidualConstrained, Matrix::Identity(2, 2), vec({3, 0}), 0.5);
    CHECK(verify_model(res_con, vec({2, 0})).status == Verdict::kUnique);
    const auto l1_con =
        make_instance(Model::kL1Constrained, Matrix::Identity(2, 2), vec({2, 0}), 1.0);
    CHECK(verify_model(l1_con, vec({1, 0})).status == Verdict::kUnique);
    // Slack constraint at a nonzero point: indeterminate, not a verdict.
    CHECK(verify_model(l1_con, vec({0.5, 0})).status == Verdict::kIndeterminate);
  }
}

TEST_CASE("equicorrelation sets") {
  const Matrix a = testutil::example_matrix();
  const Vector b = testutil::example_datum();
  SUBCASE("worked instance: all three columns") {
    const EquicorrelationSet eq = equicorrelation(a, b, 1.0, vec({0, 0.25, 0}));
    CHECK(eq.j == IndexSet{0, 1, 2});
  }
  SUBCASE("identity instance: only the surviving coordinate") {
    const EquicorrelationSet eq =
        equicorrelation(Matrix::Identity(2, 2), vec({2, 0.5}), 1.0, vec({1, 0}));
    CHECK(eq.j == IndexSet{0});
  }
  SUBCASE("upper-triangular instance: both columns") {
    const EquicorrelationSet eq =
        equicorrelation(mat({{1, 1}, {0, 1}}), vec({2, 0}), 1.0, vec({1, 0}));
    CHECK(eq.j == IndexSet{0, 1});
  }
}

TEST_CASE("equicorrelation_rank_sufficient") {
  SUBCASE("full-rank equicorrelation certifies uniqueness") {
    CHECK(equicorrelation_rank_sufficient(mat({{1, 1}, {0, 1}}), vec({2, 0}), 1.0, vec({1, 0})) ==
          SufficiencyResult::kUnique);
    CHECK(equicorrelation_rank_sufficient(Matrix::Identity(2, 2), vec({2, 0.5}), 1.0, vec({1, 0})) ==
          SufficiencyResult::kUnique);
  }
  SUBCASE("worked instance is inconclusive despite being unique") {
    CHECK(equicorrelation_rank_sufficient(testutil::example_matrix(), testutil::example_datum(), 1.0,
                              vec({0, 0.25, 0})) == SufficiencyResult::kInconclusive);
  }
}

TEST_CASE("adjacent_equicorrelation_check") {
  SUBCASE("applicable and unique on the triangular instance") {
    const AdjacentEquicorrelationResult res =
        adjacent_equicorrelation_check(mat({{1, 1}, {0, 1}}), vec({2, 0}), 1.0, vec({1, 0}));
    REQUIRE(res.applicable);
    CHECK(res.verdict.status == Verdict::kUnique);
  }
  SUBCASE("not applicable on the worked instance (|J| = |I| + 2)") {
    CHECK_FALSE(adjacent_equicorrelation_check(testutil::example_matrix(), testutil::example_datum(), 1.0,
                                 vec({0, 0.25, 0}))
                    .applicable);
  }
  SUBCASE("not applicable when J equals the support") {
    CHECK_FALSE(
        adjacent_equicorrelation_check(Matrix::Identity(2, 2), vec({2, 2}), 1.0, vec({1, 1})).applicable);
  }
  SUBCASE("rank-deficient case yields a second optimal point") {
    // Duplicated column with matching sign: J = {0, 1} but I = {0}, and the
    // mass can be shifted between the twins without changing anything.
    const Matrix a = mat({{1, 1, 0}, {0, 0, 0.3}});
    const Vector b = vec({2, 1});
    const Vector x = vec({1, 0, 0});
    REQUIRE(kkt_report(make_instance(Model::kPenalizedLS, a, b, 1.0), x).optimal());
    const AdjacentEquicorrelationResult res = adjacent_equicorrelation_check(a, b, 1.0, x);
    REQUIRE(res.applicable);
    CHECK(res.verdict.status == Verdict::kNotUnique);
    REQUIRE(res.verdict.witness.has_value());
    REQUIRE(res.verdict.witness_kind == WitnessKind::kSecondPoint);
    CHECK((a * *res.verdict.witness - a * x).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(std::abs(res.verdict.witness->cwiseAbs().sum() - x.cwiseAbs().sum()) <= 1e-6);
  }
}

TEST_CASE("square_support_check") {
  SUBCASE("square support with a spare column") {
    const Matrix a = mat({{1, 0, 0.3}, {0, 1, 0.4}});
    const SquareSupportReport rep = square_support_check(a, vec({2, 2}), 1.0, vec({1, 1, 0}));
    REQUIRE(rep.applicable);
    CHECK(rep.passes);
    CHECK((rep.y - vec({1, 1})).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(rep.off_support_max == doctest::Approx(0.7));
  }
  SUBCASE("worked instance not applicable (support smaller than m)") {
    CHECK_FALSE(square_support_check(testutil::example_matrix(), testutil::example_datum(), 1.0,
                                 vec({0, 0.25, 0}))
                    .applicable);
  }
  SUBCASE("identity with empty off-support set") {
    const SquareSupportReport rep =
        square_support_check(Matrix::Identity(2, 2), vec({2, 2}), 1.0, vec({1, 1}));
    REQUIRE(rep.applicable);
    CHECK(rep.passes);
    CHECK(rep.off_support_max == 0.0);
  }
}

TEST_CASE("recognize_from_dual") {
  SUBCASE("identity pair certifies uniqueness") {
    const UniquenessVerdict v =
        recognize_from_dual(Matrix::Identity(2, 2), vec({1, 0}), vec({1, 0}), vec({1, 0}));
    CHECK(v.status == Verdict::kUnique);
    REQUIRE(v.certificate.has_value());
    CHECK(is_valid_strict(*v.certificate));
  }
  SUBCASE("worked pair with flat dual is indeterminate") {
    const UniquenessVerdict v = recognize_from_dual(
        testutil::example_matrix(), testutil::example_datum(), vec({1, 0.5, 0}), vec({1, 0.5}));
    CHECK(v.status == Verdict::kIndeterminate);
  }
  SUBCASE("degenerate dual vertex on the identity") {
    const UniquenessVerdict v =
        recognize_from_dual(Matrix::Identity(2, 2), vec({1, 0}), vec({1, 0}), vec({1, 1}));
    CHECK(v.status == Verdict::kIndeterminate);
  }
  SUBCASE("non-optimal pair is a contract violation") {
    CHECK_THROWS_AS(
        recognize_from_dual(Matrix::Identity(2, 2), vec({1, 0}), vec({1, 0}), vec({0.2, 0})),
        std::invalid_argument);
  }
}

TEST_CASE("check_reduced_condition") {
  const Matrix a = testutil::example_matrix();
  const Vector b = testutil::example_datum();
  SUBCASE("worked instance: active set {0,1,2}, holds") {
    const auto inst = make_instance(Model::kPenalizedLS, a, b, 1.0);
    const ReducedCondition res = check_reduced_condition(inst, vec({0, 0.25, 0}));
    REQUIRE(res.applicable);
    CHECK(res.active_set.p == IndexSet{0, 1, 2});
    CHECK(res.holds());
  }
  SUBCASE("identity instance: active set {0}") {
    const auto inst = make_instance(Model::kPenalizedLS, Matrix::Identity(2, 2), vec({2, 0.5}), 1.0);
    const ReducedCondition res = check_reduced_condition(inst, vec({1, 0}));
    REQUIRE(res.applicable);
    CHECK(res.active_set.p == IndexSet{0});
    CHECK(res.holds());
  }
  SUBCASE("triangular instance: active set {0,1}") {
    const auto inst = make_instance(Model::kPenalizedLS, mat({{1, 1}, {0, 1}}), vec({2, 0}), 1.0);
    const ReducedCondition res = check_reduced_condition(inst, vec({1, 0}));
    REQUIRE(res.applicable);
    CHECK(res.active_set.p == IndexSet{0, 1});
    CHECK(res.holds());
  }
  SUBCASE("excluded cases") {
    const auto bp = make_instance(Model::kBasisPursuit, a, b);
    CHECK_FALSE(check_reduced_condition(bp, vec({1, 0.5, 0})).applicable);
    const auto pen = make_instance(Model::kPenalizedLS, Matrix::Identity(2, 2), vec({0.4, 0}), 1.0);
    CHECK_FALSE(check_reduced_condition(pen, vec({0, 0})).applicable);
  }
}

TEST_CASE("reduced test agrees with the full test on random optimal points") {
  SeededRng rng(57);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Index m = 2 + rng.below(4);
    const Index n = 3 + rng.below(5);
    Matrix a(m, n);
    Vector b(m);
    for (Index i = 0; i < m; ++i) {
      b[i] = rng.gaussian();
      for (Index j = 0; j < n; ++j) a(i, j) = rng.gaussian();
    }
    const double lambda = rng.uniform(0.2, 1.0);
    Vector x;
    try {
      x = solve_lasso(a, b, lambda);
    } catch (const LassoDidNotConverge&) {
      continue;
    }
    if (support_of(x).empty()) continue;
    const auto inst = make_instance(Model::kPenalizedLS, a, b, lambda);
    const ReducedCondition reduced = check_reduced_condition(inst, x);
    REQUIRE(reduced.applicable);
    const UniquenessCondition full = check_uniqueness_condition(a, pattern_of(x));
    if (full.status == UniquenessCondition::Status::kBorderline ||
        reduced.status == UniquenessCondition::Status::kBorderline) {
      continue;
    }
    CHECK(reduced.holds() == full.holds());
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("the sufficient rank test never contradicts the full verdict") {
  SeededRng rng(73);
  int sufficient_hits = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Index m = 2 + rng.below(4);
    const Index n = 3 + rng.below(5);
    Matrix a(m, n);
    Vector b(m);
    for (Index i = 0; i < m; ++i) {
      b[i] = rng.gaussian();
      for (Index j = 0; j < n; ++j) a(i, j) = rng.gaussian();
    }
    const double lambda = rng.uniform(0.3, 1.0);
    Vector x;
    try {
      x = solve_lasso(a, b, lambda);
    } catch (const LassoDidNotConverge&) {
      continue;
    }
    if (equicorrelation_rank_sufficient(a, b, lambda, x) != SufficiencyResult::kUnique) continue;
    ++sufficient_hits;
    const auto inst = make_instance(Model::kPenalizedLS, a, b, lambda);
    CHECK(verify_model(inst, x).status == Verdict::kUnique);
  }
  CHECK(sufficient_hits >= 15);
}

TEST_CASE("verdicts agree with the oracle on mixed instances") {
  SeededRng rng(91);
  int unique_count = 0, nonunique_count = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Index m = 2 + rng.below(4);
    const Index n = 3 + rng.below(6);
    Matrix a(m, n);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < n; ++j) a(i, j) = rng.gaussian();
    }
    Vector x0 = Vector::Zero(n);
    const IndexSet support = rng.sample_sorted(n, rng.below(std::min(m, n)) + 1);
    for (Index i : support) x0[i] = rng.sign() * rng.uniform(0.5, 1.5);
    const Vector b = a * x0;
    const auto inst = make_instance(Model::kBasisPursuit, a, b);
    const Vector x = solve_bp(a, b).x;
    const UniquenessVerdict v = verify_model(inst, x);
    if (v.status == Verdict::kIndeterminate) continue;  // borderline margin
    const bool unique = oracle_unique(inst, x);
    CHECK((v.status == Verdict::kUnique) == unique);
    if (unique) {
      ++unique_count;
      REQUIRE(v.certificate.has_value());
      CHECK(is_valid_strict(*v.certificate));
    } else {
      ++nonunique_count;
      check_witness(v, a, b, x);
    }
  }
  CHECK(unique_count + nonunique_count >= 28);
}
