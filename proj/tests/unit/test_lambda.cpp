#include <gtest/gtest.h>

#include <random>

#include "brute_force_ils.hpp"
#include "trgnss/error.hpp"
#include "trgnss/lambda.hpp"

using namespace trgnss;

namespace {

Eigen::MatrixXi random_unimodular(std::mt19937_64& gen, int n) {
  std::uniform_int_distribution<int> u(-2, 2);
  Eigen::MatrixXi z = Eigen::MatrixXi::Identity(n, n);
  for (int k = 0; k < 3 * n; ++k) {
    const int i = k % n, j = (k + 1 + k / n) % n;
    if (i == j) continue;
    z.row(i) += u(gen) * z.row(j);
  }
  return z;
}

}  // namespace

TEST(Lambda, DiagonalCaseIsRounding) {
  AmbiguityProblem p{Eigen::Vector3d(1.3, -0.4, 2.6), Eigen::Matrix3d::Identity()};
  const auto r = lambda_resolve(p, 3.0);
  EXPECT_EQ(r.integers, Eigen::Vector3i(1, 0, 3));
  EXPECT_NEAR(r.best_distance, 0.09 + 0.16 + 0.16, 1e-12);
  // runner-up moves the least certain axis (0.4 -> 0.6)
  EXPECT_NEAR(r.second_distance, 0.09 + 0.36 + 0.16, 1e-12);
  EXPECT_NEAR(r.ratio, 0.61 / 0.41, 1e-12);
  EXPECT_FALSE(r.accepted);
}

TEST(Lambda, TwoDimensionalCorrelatedCase) {
  Eigen::Matrix2d q;
  q << 6.29, 5.978, 5.978, 6.292;
  AmbiguityProblem p{Eigen::Vector2d(5.45, 3.1), q};
  const auto r = lambda_resolve(p, 3.0);
  double best = 0;
  const Eigen::VectorXi oracle = test::brute_force_ils(p.float_values, q, 10, &best);
  EXPECT_EQ(r.integers, oracle);
  EXPECT_NEAR(r.best_distance, best, 1e-9);
}

TEST(Lambda, RandomProblemsMatchBruteForce) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 3 + trial % 3;
    const auto p = test::random_ambiguity_problem(gen, n);
    const auto r = lambda_resolve(p, 3.0);
    double best = 0;
    EXPECT_EQ(r.integers, test::brute_force_ils(p.float_values, p.covariance, 8, &best)) << "trial " << trial;
    EXPECT_NEAR(r.best_distance, best, 1e-8 * std::max(1.0, best));
    EXPECT_GE(r.second_distance, r.best_distance);
    EXPECT_GE(r.ratio, 1.0);
  }
}

TEST(Lambda, InvariantUnderUnimodularTransform) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 3;
    const auto p = test::random_ambiguity_problem(gen, n);
    const Eigen::MatrixXi z = random_unimodular(gen, n);
    const Eigen::MatrixXd zd = z.cast<double>();
    ASSERT_NEAR(std::abs(zd.determinant()), 1.0, 1e-9);
    AmbiguityProblem t{zd.transpose() * p.float_values, zd.transpose() * p.covariance * zd};
    const auto a = lambda_resolve(p, 3.0);
    const auto b = lambda_resolve(t, 3.0);
    const Eigen::VectorXd back = zd.transpose().inverse() * b.integers.cast<double>();
    EXPECT_EQ(back.array().round().cast<int>().matrix(), a.integers);
    EXPECT_NEAR(a.best_distance, b.best_distance, 1e-6 * std::max(1.0, a.best_distance));
  }
}

TEST(Lambda, DecorrelationIsUnimodularAndHelps) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = test::random_ambiguity_problem(gen, 3 + trial % 3);
    const Eigen::MatrixXd z = lambda_decorrelation(p.covariance);
    EXPECT_LT((z - z.array().round().matrix()).norm(), 1e-12);
    EXPECT_NEAR(std::abs(z.determinant()), 1.0, 1e-9);
    const Eigen::MatrixXd qz = z.transpose() * p.covariance * z;
    // product of the conditional variances is preserved; the diagonal does not grow overall
    EXPECT_NEAR(qz.determinant(), p.covariance.determinant(), 1e-6 * p.covariance.determinant());
    EXPECT_LE(qz.diagonal().prod(), p.covariance.diagonal().prod() * (1 + 1e-9));
  }
}

TEST(Lambda, ExactIntegersAreAcceptedWithLargeRatio) {
  AmbiguityProblem p{Eigen::Vector4d(3, -7, 12, 0), 1e-4 * Eigen::Matrix4d::Identity()};
  const auto r = lambda_resolve(p, 3.0);
  EXPECT_EQ(r.integers, Eigen::Vector4i(3, -7, 12, 0));
  EXPECT_TRUE(r.accepted);
  EXPECT_DOUBLE_EQ(r.ratio, kMaxAmbiguityRatio);
}

TEST(Lambda, OneDimensional) {
  AmbiguityProblem p{Eigen::VectorXd::Constant(1, 2.2), Eigen::MatrixXd::Constant(1, 1, 0.01)};
  const auto r = lambda_resolve(p, 3.0);
  EXPECT_EQ(r.integers(0), 2);
  EXPECT_EQ(r.second_best(0), 3);
  EXPECT_NEAR(r.ratio, 0.64 / 0.04, 1e-9);
  EXPECT_TRUE(r.accepted);
}

TEST(Lambda, RejectsIndefiniteCovariance) {
  Eigen::Matrix2d q;
  q << 1.0, 2.0, 2.0, 1.0;
  try {
    lambda_resolve({Eigen::Vector2d(0.1, 0.2), q}, 3.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
}

TEST(BruteForceOracle, FindsPlantedMinimum) {
  Eigen::Matrix3d q = Eigen::Matrix3d::Identity();
  EXPECT_EQ(test::brute_force_ils(Eigen::Vector3d(4.9, -2.2, 0.4), q, 3), Eigen::Vector3i(5, -2, 0));
}
