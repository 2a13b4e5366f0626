#pragma once

#include <vector>

#include "trgnss/graph.hpp"

namespace trgnss {

struct OptimizerConfig {
  int max_iterations = 100;
  double relative_tolerance = 1e-8;   // on the cost change of an accepted step
  double gradient_tolerance = 1e-6;   // infinity norm of J' Omega e
  double initial_radius = 1e4;        // m
  double max_radius = 1e8;
  double relinearization_threshold = 10.0;  // m of node motion before a pseudorange row is rebuilt
};

struct OptimizerReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Cost after every accepted step, starting with the initial cost.
  std::vector<double> costs;
  /// Indices into `costs` where a relinearization started a new cost function.
  std::vector<std::size_t> segment_starts;
  int relinearizations = 0;
  int rejected_steps = 0;
};

struct OptimizationResult {
  std::vector<StateVector> states;
  OptimizerReport report;
  /// Graph with pseudorange rows at their final linearization points.
  Graph graph;
};

/// Powell dogleg on the sparse normal equations. Returns converged = false instead of throwing
/// when the iteration budget runs out; throws SingularNormalEquations when J'J is not PD.
OptimizationResult optimize(const Graph& graph, const OptimizerConfig& config = {});

}  // namespace trgnss
