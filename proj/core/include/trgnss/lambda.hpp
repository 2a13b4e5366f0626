#pragma once

#include <Eigen/Core>

namespace trgnss {

/// Float ambiguities (cycles) with their covariance (cycles^2).
struct AmbiguityProblem {
  Eigen::VectorXd float_values;
  Eigen::MatrixXd covariance;
};

struct AmbiguityResolution {
  Eigen::VectorXi integers;         // best candidate
  Eigen::VectorXi second_best;      // runner-up (equal to best when dimension allows only one)
  double best_distance = 0.0;       // (a - a_hat)' Q^-1 (a - a_hat) for the best candidate
  double second_distance = 0.0;
  double ratio = 0.0;               // second_distance / best_distance, capped at kMaxRatio
  bool accepted = false;            // ratio >= threshold
};

inline constexpr double kMaxAmbiguityRatio = 999.9;

/// Integer least-squares via decorrelation (integer Gauss transforms and permutations) and a
/// bounded depth-first search for the two best candidates. Throws NotPositiveDefinite.
AmbiguityResolution lambda_resolve(const AmbiguityProblem& problem, double ratio_threshold);

/// Z-transform produced by the decorrelation step; exposed for testing. Returns Z such that
/// z = Z' a has a more diagonal covariance Z' Q Z.
Eigen::MatrixXd lambda_decorrelation(const Eigen::MatrixXd& covariance);

}  // namespace trgnss
