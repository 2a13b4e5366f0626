#pragma once

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "trgnss/lambda.hpp"

namespace trgnss::test {

/// Exhaustive integer least squares over round(a) +- half_width in every axis.
inline Eigen::VectorXi brute_force_ils(const Eigen::VectorXd& a, const Eigen::MatrixXd& q, int half_width,
                                       double* best_distance = nullptr) {
  const int n = static_cast<int>(a.size());
  const Eigen::MatrixXd w = q.inverse();
  Eigen::VectorXi center(n);
  for (int i = 0; i < n; ++i) center(i) = static_cast<int>(std::lround(a(i)));
  Eigen::VectorXi cand = center.array() - half_width;
  Eigen::VectorXi best = center;
  double best_q = std::numeric_limits<double>::infinity();
  Eigen::VectorXd d(n);
  const int last = n - 1;
  while (true) {
    // innermost axis in closed form over its range
    for (int i = 0; i < last; ++i) d(i) = cand(i) - a(i);
    double c = 0.0, b = 0.0;
    for (int i = 0; i < last; ++i) {
      b += w(last, i) * d(i);
      for (int j = 0; j < last; ++j) c += d(i) * w(i, j) * d(j);
    }
    for (int k = -half_width; k <= half_width; ++k) {
      const double dl = center(last) + k - a(last);
      const double v = c + 2.0 * b * dl + w(last, last) * dl * dl;
      if (v < best_q) {
        best_q = v;
        best = cand;
        best(last) = center(last) + k;
      }
    }
    int axis = last - 1;
    while (axis >= 0 && cand(axis) == center(axis) + half_width) {
      cand(axis) = center(axis) - half_width;
      --axis;
    }
    if (axis < 0) break;
    ++cand(axis);
  }
  if (best_distance) *best_distance = best_q;
  return best;
}

// Random SPD problem whose minimizer is guaranteed inside the +-8 box.
inline AmbiguityProblem random_ambiguity_problem(std::mt19937_64& gen, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  while (true) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(gen);
    AmbiguityProblem p;
    p.covariance = 0.3 * a * a.transpose() + 0.02 * Eigen::MatrixXd::Identity(n, n);
    p.float_values.resize(n);
    for (int i = 0; i < n; ++i) p.float_values(i) = u(gen);
    Eigen::VectorXd r = p.float_values.array().round();
    const Eigen::VectorXd d = r - p.float_values;
    const double q_round = d.dot(p.covariance.inverse() * d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.covariance);
    if (std::sqrt(q_round * eig.eigenvalues().maxCoeff()) < 7.5) return p;
  }
}

}  // namespace trgnss::test
