#pragma once

#include <string>
#include <vector>

#include "trgnss/types.hpp"

namespace trgnss {

struct RpeResult {
  double mean = 0.0;  // over epochs i >= 1
  double max = 0.0;
  std::vector<double> series;  // series[0] is always 0
};

struct ApeResult {
  double mean = 0.0;
  std::vector<double> series;
};

/// Start-referenced relative error |(est_i - est_0) - (truth_i - truth_0)|. Throws LengthMismatch.
RpeResult compute_rpe(const std::vector<EcefVector>& estimate, const std::vector<EcefVector>& truth);
/// |est_i - truth_i|. Throws LengthMismatch.
ApeResult compute_ape(const std::vector<EcefVector>& estimate, const std::vector<EcefVector>& truth);

struct EvaluationReport {
  std::string method_label;
  double rpe_mean = 0.0;
  double rpe_max = 0.0;
  double ape_mean = 0.0;
  std::vector<double> rpe_series;
  std::vector<double> ape_series;
};

EvaluationReport evaluate_trajectory(const std::vector<EcefVector>& estimate, const std::vector<EcefVector>& truth,
                                     std::string method_label);

}  // namespace trgnss
