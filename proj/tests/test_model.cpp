#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mcr2/params.hpp"
#include "mcr2/partition.hpp"
#include "mcr2/rng.hpp"

using namespace mcr2;

TEST_CASE("partition sizes, offsets, and blocks") {
  const ClassPartition part({30, 70, 40, 60});
  CHECK(part.num_classes() == 4);
  CHECK(part.total() == 200);
  CHECK(part.max_size() == 70);
  CHECK(part.size(0) == 30);
  CHECK(part.offset(0) == 0);
  CHECK(part.offset(1) == 30);
  CHECK(part.offset(3) == 140);
  CHECK(part == ClassPartition({30, 70, 40, 60}));
  CHECK_FALSE(part == ClassPartition({30, 70, 40, 61}));

  CHECK_THROWS_AS(ClassPartition({}), std::invalid_argument);
  CHECK_THROWS_AS(ClassPartition({10, 0}), std::invalid_argument);
  CHECK_THROWS_AS(ClassPartition({10, -3}), std::invalid_argument);
}

TEST_CASE("feature matrix blocks view the right columns") {
  const ClassPartition part({2, 3});
  Eigen::MatrixXd M(4, 5);
  for (int j = 0; j < 5; ++j) M.col(j).setConstant(j);
  const FeatureMatrix Z(M, part);
  CHECK(Z.d() == 4);
  CHECK(Z.m() == 5);
  CHECK(Z.block(0).cols() == 2);
  CHECK(Z.block(1).cols() == 3);
  CHECK(Z.block(1)(0, 0) == 2.0);
  CHECK(Z.block(1)(3, 2) == 4.0);

  CHECK_THROWS_AS(FeatureMatrix(Eigen::MatrixXd::Zero(4, 4), part),
                  std::invalid_argument);
  CHECK_THROWS_AS(FeatureMatrix(Eigen::MatrixXd::Zero(0, 5), part),
                  std::invalid_argument);
  const FeatureMatrix Z0 = FeatureMatrix::zero(3, part);
  CHECK(Z0.entries().norm() == 0.0);
}

TEST_CASE("alpha coefficients satisfy the weighting identity") {
  const ClassPartition part({50, 50, 50, 50});
  const ProblemParams p(100, part, 0.5, 0.1);
  CHECK(p.alpha() == doctest::Approx(2.0).epsilon(1e-15));
  for (int k = 0; k < 4; ++k) {
    CHECK(p.alpha_k(k) == doctest::Approx(8.0).epsilon(1e-15));
    // alpha_k * m_k == alpha * m up to a few ulp.
    const double lhs = p.alpha_k(k) * part.size(k);
    const double rhs = p.alpha() * part.total();
    CHECK(std::abs(lhs - rhs) <= 4.0 * std::abs(rhs) *
                                     std::numeric_limits<double>::epsilon());
  }

  const ClassPartition odd({30, 70, 40, 60});
  const ProblemParams q(100, odd, 0.5, 0.1);
  for (int k = 0; k < 4; ++k) {
    const double lhs = q.alpha_k(k) * odd.size(k);
    const double rhs = q.alpha() * odd.total();
    CHECK(std::abs(lhs - rhs) <= 4.0 * std::abs(rhs) *
                                     std::numeric_limits<double>::epsilon());
  }

  CHECK_THROWS_AS(ProblemParams(0, part, 0.5, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(ProblemParams(100, part, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(ProblemParams(100, part, -1.0, 0.1), std::invalid_argument);
}

TEST_CASE("admissible lambda window") {
  const ProblemParams balanced(100, ClassPartition({50, 50, 50, 50}), 0.5, 0.1);
  const LambdaWindow w = lambda_window(balanced);
  CHECK_FALSE(w.degenerate);
  CHECK(w.lambda_max == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(lambda_in_window(0.1, w));
  CHECK(lambda_in_window(w.lambda_max, w));  // closed right endpoint
  CHECK(lambda_in_window(w.lambda_max * (1.0 + 0.9e-12), w));
  CHECK_FALSE(lambda_in_window(w.lambda_max * (1.0 + 1e-9), w));
  CHECK_FALSE(lambda_in_window(0.0, w));
  CHECK_FALSE(lambda_in_window(-0.1, w));

  const ProblemParams unbalanced(100, ClassPartition({30, 70, 40, 60}), 0.5, 0.1);
  CHECK(lambda_window(unbalanced).lambda_max ==
        doctest::Approx(0.5131816719386979).epsilon(1e-14));

  // Single class: rho = 1 and no positive lambda is admissible.
  const ProblemParams single(10, ClassPartition({20}), 0.5, 0.1);
  CHECK(lambda_window(single).degenerate);
}

TEST_CASE("validation accepts the window and names each violation") {
  const ClassPartition part({50, 50, 50, 50});
  const ProblemParams good(100, part, 0.5, 0.1);
  CHECK(hypothesis_violations(good).empty());
  const ValidationResult vr = validate(good);
  CHECK(vr.ok());
  CHECK(vr.valid.has_value());
  CHECK((*vr.valid)->lambda() == 0.1);

  const ProblemParams big(100, part, 0.5, 0.7);
  const auto viol = hypothesis_violations(big);
  REQUIRE(viol.size() == 1);
  CHECK(viol[0].find("lambda") != std::string::npos);
  CHECK(viol[0].find("exceeds") != std::string::npos);
  CHECK_FALSE(validate(big).ok());
  CHECK_THROWS_AS(require_valid(big), std::invalid_argument);

  const ProblemParams zero(100, part, 0.5, 0.0);
  CHECK_FALSE(hypothesis_violations(zero).empty());
  CHECK_THROWS_AS(ProblemParams(100, part, 0.5, -0.2), std::invalid_argument);

  const ProblemParams single(10, ClassPartition({20}), 0.5, 0.1);
  const auto sviol = hypothesis_violations(single);
  REQUIRE_FALSE(sviol.empty());
  CHECK(sviol[0].find("class") != std::string::npos);
}

TEST_CASE("params JSON round trip") {
  const ProblemParams p(100, ClassPartition({30, 70, 40, 60}), 0.5, 0.1);
  const std::string text = params_to_json_text(p);
  const ProblemParams q = params_from_json_text(text);
  CHECK(q == p);
  CHECK(q.alpha() == p.alpha());

  CHECK_THROWS_AS(params_from_json_text("not json"), std::invalid_argument);
  CHECK_THROWS_AS(params_from_json_text("{\"d\": 100}"), std::invalid_argument);
  CHECK_THROWS_AS(
      params_from_json_text(
          "{\"d\": 2.5, \"class_sizes\": [2], \"epsilon\": 1, \"lambda\": 0.1}"),
      std::invalid_argument);
}

TEST_CASE("rng is deterministic and the orthonormal factor is orthonormal") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
  const Eigen::MatrixXd M1 = a.gaussian_matrix(7, 5);
  const Eigen::MatrixXd M2 = b.gaussian_matrix(7, 5);
  CHECK((M1 - M2).norm() == 0.0);

  Rng c(7);
  const Eigen::MatrixXd Q = random_orthonormal(20, 6, c);
  CHECK(Q.rows() == 20);
  CHECK(Q.cols() == 6);
  CHECK((Q.transpose() * Q - Eigen::MatrixXd::Identity(6, 6)).norm() <= 1e-12);

  Rng d1(7), d2(7);
  const Eigen::MatrixXd Qa = random_orthonormal(20, 6, d1);
  const Eigen::MatrixXd Qb = random_orthonormal(20, 6, d2);
  CHECK((Qa - Qb).norm() == 0.0);
}
