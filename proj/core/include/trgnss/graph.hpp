#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "trgnss/estimation.hpp"
#include "trgnss/trrtk.hpp"
#include "trgnss/types.hpp"

namespace trgnss {

inline constexpr int kStateDim = 7;
using StateArray = Eigen::Matrix<double, kStateDim, 1>;

/// Per-epoch unknowns: position offset from the graph origin and one clock term per system.
/// The GPS slot is the receiver clock; GLO/GAL/BDS slots are offsets relative to GPS (m).
struct StateVector {
  StateArray values = StateArray::Zero();

  auto position_offset() { return values.head<3>(); }
  auto position_offset() const { return values.head<3>(); }
  double& clock_bias(Constellation c) { return values(3 + index_of(c)); }
  double clock_bias(Constellation c) const { return values(3 + index_of(c)); }
};

struct VelocityFactor {
  int node_i = 0;
  int node_j = 1;
  EcefVector measured_velocity = EcefVector::Zero();
  double dt = 1.0;
  Eigen::Matrix3d information = Eigen::Matrix3d::Identity();
};

struct TrRtkFactor {
  int node_past = 0;
  int node_current = 1;
  EcefVector baseline = EcefVector::Zero();
  Eigen::Matrix3d information = Eigen::Matrix3d::Identity();
  double time_difference = 0.0;
  double ratio = 0.0;
};

/// Linearized pseudorange: e = row * [d - linearization_point; clocks] - corrected_measurement.
struct PseudorangeFactor {
  int node = 0;
  SatelliteId sat;
  double pseudorange = 0.0;
  SatelliteState sat_state;
  double ionosphere = 0.0;
  double troposphere = 0.0;
  double elevation = 0.0;
  EcefVector linearization_point = EcefVector::Zero();  // position offset
  double corrected_measurement = 0.0;  // rho - r0 + c dT - I - T
  StateArray row = StateArray::Zero();
  double information = 1.0;
};

/// Scalar Gaussian prior on one state component.
struct StatePrior {
  int node = 0;
  int dimension = 0;
  double mean = 0.0;
  double information = 1.0;
};

struct Graph {
  EcefVector origin = EcefVector::Zero();  // absolute position of the zero offset
  std::vector<GpsTime> node_times;
  std::vector<StateVector> initial_states;
  std::vector<VelocityFactor> velocity_factors;
  std::vector<TrRtkFactor> trrtk_factors;
  std::vector<PseudorangeFactor> pseudorange_factors;
  std::vector<StatePrior> priors;

  std::size_t node_count() const noexcept { return initial_states.size(); }
  std::size_t factor_count() const noexcept {
    return velocity_factors.size() + trrtk_factors.size() + pseudorange_factors.size();
  }
};

struct KnownPosition {
  EcefVector position = EcefVector::Zero();
  double sigma = 0.1;  // m per axis
};

struct GraphConfig {
  double origin_prior_sigma = 2.0;   // m per axis on node 0
  double clock_prior_sigma = 100.0;  // m on unobserved clock dimensions
  double pseudorange_a = 0.3;
  double pseudorange_b = 0.3;
  double elevation_mask = 15.0 * 3.14159265358979323846 / 180.0;
  double velocity_sigma_floor = 0.01;
  bool use_pseudorange_factors = true;
  bool use_trrtk_factors = true;
  bool apply_ionosphere = true;
  bool apply_troposphere = true;
  std::optional<KnownPosition> initial_position_prior;
};

/// A TR-RTK estimate attached to its graph nodes.
struct TrRtkEdge {
  int node_past = 0;
  int node_current = 0;
  TrRtkResult result;
};

/// Graph inputs aligned by epoch index. velocities[i] links epoch i and i+1.
struct GraphInputs {
  const std::vector<Epoch>* epochs = nullptr;
  const std::vector<const SatelliteStateMap*>* sat_states = nullptr;
  const std::vector<std::optional<VelocitySolution>>* velocities = nullptr;
  const std::vector<std::optional<SppSolution>>* spp = nullptr;
  const std::vector<TrRtkEdge>* trrtk = nullptr;
  const AtmosphereModels* models = nullptr;
};

/// Throws EmptyInput or MissingVelocity.
Graph build_graph(const GraphInputs& inputs, const GraphConfig& config);

Eigen::Vector3d residual_velocity(const VelocityFactor& f, const StateVector& xi, const StateVector& xj);
Eigen::Vector3d residual_trrtk(const TrRtkFactor& f, const StateVector& x_past, const StateVector& x_current);
double residual_pseudorange(const PseudorangeFactor& f, const StateVector& x);

/// d residual / d x_i and d residual / d x_j (3x7 each).
std::pair<Eigen::Matrix<double, 3, kStateDim>, Eigen::Matrix<double, 3, kStateDim>> jacobian_velocity(
    const VelocityFactor& f);
std::pair<Eigen::Matrix<double, 3, kStateDim>, Eigen::Matrix<double, 3, kStateDim>> jacobian_trrtk(
    const TrRtkFactor& f);
Eigen::Matrix<double, 1, kStateDim> jacobian_pseudorange(const PseudorangeFactor& f);

/// Builds the linearization of a pseudorange observation at `offset` from `origin`.
void linearize_pseudorange(PseudorangeFactor& f, const EcefVector& origin, const EcefVector& offset);

struct CostBreakdown {
  double velocity = 0.0;
  double trrtk = 0.0;
  double pseudorange = 0.0;
  double prior = 0.0;
  double total() const noexcept { return velocity + trrtk + pseudorange + prior; }
};

CostBreakdown cost_breakdown(const Graph& g, const std::vector<StateVector>& states);
/// Sum of e' Omega e over all factors and priors.
double evaluate_cost(const Graph& g, const std::vector<StateVector>& states);

/// Absolute ECEF position of a node.
inline EcefVector absolute_position(const Graph& g, const StateVector& x) {
  return g.origin + x.position_offset();
}

}  // namespace trgnss
