#include "trgnss/metrics.hpp"

#include <algorithm>

#include "trgnss/error.hpp"

namespace trgnss {

namespace {

void check_lengths(std::size_t a, std::size_t b, std::size_t minimum) {
  if (a != b) {
    throw Error(ErrorCode::LengthMismatch,
                "estimate has " + std::to_string(a) + " epochs, truth has " + std::to_string(b));
  }
  if (a < minimum) throw Error(ErrorCode::LengthMismatch, "need at least " + std::to_string(minimum) + " epochs");
}

}  // namespace

RpeResult compute_rpe(const std::vector<EcefVector>& estimate, const std::vector<EcefVector>& truth) {
  check_lengths(estimate.size(), truth.size(), 2);
  RpeResult r;
  r.series.reserve(estimate.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double e = ((estimate[i] - estimate[0]) - (truth[i] - truth[0])).norm();
    r.series.push_back(e);
    if (i == 0) continue;
    sum += e;
    r.max = std::max(r.max, e);
  }
  r.mean = sum / static_cast<double>(estimate.size() - 1);
  return r;
}

ApeResult compute_ape(const std::vector<EcefVector>& estimate, const std::vector<EcefVector>& truth) {
  check_lengths(estimate.size(), truth.size(), 1);
  ApeResult r;
  double sum = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    r.series.push_back((estimate[i] - truth[i]).norm());
    sum += r.series.back();
  }
  r.mean = sum / static_cast<double>(estimate.size());
  return r;
}

EvaluationReport evaluate_trajectory(const std::vector<EcefVector>& estimate, const std::vector<EcefVector>& truth,
                                     std::string method_label) {
  const RpeResult rpe = compute_rpe(estimate, truth);
  const ApeResult ape = compute_ape(estimate, truth);
  return {std::move(method_label), rpe.mean, rpe.max, ape.mean, rpe.series, ape.series};
}

}  // namespace trgnss
