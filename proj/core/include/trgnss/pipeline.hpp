#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trgnss/estimation.hpp"
#include "trgnss/graph.hpp"
#include "trgnss/optimizer.hpp"
#include "trgnss/trrtk.hpp"

namespace trgnss {

struct SolverConfig {
  EstimationConfig estimation;
  TrRtkConfig trrtk;
  GraphConfig graph;
  OptimizerConfig optimizer;
  AtmosphereModels atmosphere{default_klobuchar(), {}};
  /// Each extra pass recomputes TR-RTK baselines around the previous optimized trajectory.
  int trrtk_passes = 2;
  bool use_baseline_prior = true;
  /// Let fixed baselines of shorter pairs feed the float-solution prior of longer ones.
  bool chain_prior = true;
  double baseline_prior_inflation = 1.0;  // variance scale on the integrated prior
};

struct TrRtkBucket {
  std::size_t attempted = 0;
  std::size_t fixed = 0;
};

struct TrRtkStats {
  std::size_t attempted = 0;
  std::size_t fixed = 0;
  std::size_t float_only = 0;
  std::size_t rejected = 0;
  std::size_t failed = 0;  // pairs that threw (too few satellites, singular geometry, ...)
  /// Keyed by the time difference rounded to whole seconds.
  std::map<int, TrRtkBucket> histogram;

  double fix_rate() const noexcept {
    return attempted ? static_cast<double>(fixed) / static_cast<double>(attempted) : 0.0;
  }
};

struct SolveResult {
  std::string method_label;
  std::vector<GpsTime> times;
  std::vector<std::optional<SppSolution>> spp;
  std::vector<std::optional<VelocitySolution>> velocities;
  std::vector<EcefVector> initial_positions;    // Doppler dead reckoning from the first SPP fix
  std::vector<EcefVector> optimized_positions;
  /// Every attempted pair of the final pass, fixed or not.
  std::vector<TrRtkEdge> trrtk_edges;
  TrRtkStats trrtk_stats;
  OptimizationResult optimization;
  std::vector<std::string> log;
};

/// TR-RTK over the pair lattice with positions from `linearization`, shortest time difference
/// first. The float-solution prior of each pair is the least-variance chain of Doppler steps and
/// already fixed baselines. Pairs that throw are counted as failed and skipped.
std::vector<TrRtkEdge> compute_trrtk_edges(const std::vector<Epoch>& epochs,
                                           const std::vector<const SatelliteStateMap*>& states,
                                           const std::vector<EcefVector>& linearization,
                                           const std::vector<std::optional<VelocitySolution>>& velocities,
                                           const SolverConfig& config, TrRtkStats* stats = nullptr);

/// SPP, Doppler velocity, TR-RTK, graph construction and optimization for a whole session.
/// Throws EmptyInput, MissingSatellite, MissingVelocity or SingularNormalEquations.
SolveResult solve_trajectory(const std::vector<Epoch>& epochs, const SatelliteStateTable& sat_states,
                             const SolverConfig& config);

std::string method_label(const SolverConfig& config);

}  // namespace trgnss
