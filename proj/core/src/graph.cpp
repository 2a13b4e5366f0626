#include "trgnss/graph.hpp"

#include <array>
#include <cmath>

#include <Eigen/LU>

#include "trgnss/constants.hpp"
#include "trgnss/error.hpp"
#include "trgnss/geodesy.hpp"

namespace trgnss {

namespace {

Eigen::Matrix3d symmetric_inverse(const Eigen::Matrix3d& m) {
  Eigen::Matrix3d inv = (0.5 * (m + m.transpose())).inverse();
  return 0.5 * (inv + inv.transpose());
}

}  // namespace

void linearize_pseudorange(PseudorangeFactor& f, const EcefVector& origin, const EcefVector& offset) {
  const LineOfSight los = line_of_sight(origin + offset, f.sat_state);
  f.linearization_point = offset;
  f.row.setZero();
  f.row.head<3>() = -los.unit;
  f.row(3) = 1.0;
  if (f.sat.constellation != Constellation::GPS) f.row(3 + index_of(f.sat.constellation)) = 1.0;
  f.corrected_measurement = f.pseudorange - los.range + kSpeedOfLight * f.sat_state.clock_bias -
                            f.ionosphere - f.troposphere;
}

Graph build_graph(const GraphInputs& in, const GraphConfig& config) {
  if (!in.epochs || in.epochs->empty() || !in.spp || in.spp->empty()) {
    throw Error(ErrorCode::EmptyInput, "graph needs at least one epoch");
  }
  const auto& epochs = *in.epochs;
  const std::size_t n = epochs.size();
  if (!in.velocities || in.velocities->size() + 1 < n) {
    throw Error(ErrorCode::MissingVelocity, "velocity list shorter than epoch count - 1");
  }
  if (in.spp->size() != n) throw Error(ErrorCode::InvalidArgument, "SPP list not aligned with epochs");
  if (!(*in.spp)[0]) throw Error(ErrorCode::EmptyInput, "first epoch has no SPP solution to anchor the graph");
  if (config.use_pseudorange_factors && (!in.sat_states || in.sat_states->size() != n)) {
    throw Error(ErrorCode::InvalidArgument, "satellite states not aligned with epochs");
  }

  Graph g;
  g.origin = (*in.spp)[0]->position;
  g.node_times.reserve(n);
  g.initial_states.resize(n);

  // Nodes from accumulated Doppler velocity; clocks from the epoch's SPP (or the previous node).
  for (std::size_t i = 0; i < n; ++i) {
    g.node_times.push_back(epochs[i].time);
    StateVector& x = g.initial_states[i];
    if (i > 0) {
      const auto& v = (*in.velocities)[i - 1];
      if (!v) throw Error(ErrorCode::MissingVelocity, "no velocity between epochs " + std::to_string(i - 1) +
                                                          " and " + std::to_string(i));
      const double dt = epochs[i].time - epochs[i - 1].time;
      x.values = g.initial_states[i - 1].values;
      x.position_offset() += v->velocity * dt;
    }
    if (const auto& spp = (*in.spp)[i]) {
      for (const auto& [sys, bias] : spp->clock_biases) x.clock_bias(sys) = bias;
    }
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& v = *(*in.velocities)[i];
    VelocityFactor f;
    f.node_i = static_cast<int>(i);
    f.node_j = static_cast<int>(i + 1);
    f.measured_velocity = v.velocity;
    f.dt = epochs[i + 1].time - epochs[i].time;
    f.information = symmetric_inverse(floored_covariance(v.covariance, config.velocity_sigma_floor) * f.dt * f.dt);
    g.velocity_factors.push_back(f);
  }

  if (config.use_trrtk_factors && in.trrtk) {
    for (const auto& edge : *in.trrtk) {
      if (edge.result.status != TrRtkStatus::Fixed) continue;
      if (edge.node_past < 0 || edge.node_current >= static_cast<int>(n) || edge.node_past >= edge.node_current) {
        throw Error(ErrorCode::InvalidArgument, "TR-RTK edge references invalid nodes");
      }
      TrRtkFactor f;
      f.node_past = edge.node_past;
      f.node_current = edge.node_current;
      f.baseline = edge.result.baseline;
      f.information = symmetric_inverse(edge.result.covariance);
      f.time_difference = edge.result.time_difference;
      f.ratio = edge.result.ratio;
      g.trrtk_factors.push_back(f);
    }
  }

  std::vector<std::array<bool, kNumConstellations>> observed(n, {false, false, false, false});
  if (config.use_pseudorange_factors) {
    for (std::size_t i = 0; i < n; ++i) {
      const SatelliteStateMap* states = (*in.sat_states)[i];
      if (!states) continue;
      const EcefVector offset = g.initial_states[i].position_offset();
      const EcefVector position = g.origin + offset;
      const GeodeticPosition geo = ecef_to_geodetic(position);
      for (const auto& obs : epochs[i].observations) {
        auto it = states->find(obs.sat);
        if (it == states->end() || !(obs.pseudorange > 0.0)) continue;
        const LineOfSight los = line_of_sight(position, it->second);
        const ElevationAzimuth ea = elevation_azimuth(geo, los.sat_position);
        if (ea.elevation < config.elevation_mask) continue;

        PseudorangeFactor f;
        f.node = static_cast<int>(i);
        f.sat = obs.sat;
        f.pseudorange = obs.pseudorange;
        f.sat_state = it->second;
        f.elevation = ea.elevation;
        if (in.models) {
          const PropagationDelays d = propagation_delays(*in.models, epochs[i].time, geo, ea.elevation,
                                                         ea.azimuth, config.apply_ionosphere,
                                                         config.apply_troposphere);
          f.ionosphere = d.ionosphere;
          f.troposphere = d.troposphere;
        }
        f.information = 1.0 / pseudorange_variance(ea.elevation, obs.snr, config.pseudorange_a, config.pseudorange_b);
        linearize_pseudorange(f, g.origin, offset);
        g.pseudorange_factors.push_back(f);
        observed[i][index_of(Constellation::GPS)] = true;
        observed[i][index_of(obs.sat.constellation)] = true;
      }
    }
  }

  // Gauge: node 0 position prior; weak priors on clock dimensions nothing observes.
  const double origin_info = 1.0 / (config.origin_prior_sigma * config.origin_prior_sigma);
  EcefVector origin_mean = EcefVector::Zero();
  double origin_prior_info = origin_info;
  if (config.initial_position_prior) {
    origin_mean = config.initial_position_prior->position - g.origin;
    origin_prior_info = 1.0 / (config.initial_position_prior->sigma * config.initial_position_prior->sigma);
  }
  for (int d = 0; d < 3; ++d) g.priors.push_back({0, d, origin_mean(d), origin_prior_info});

  const double clock_info = 1.0 / (config.clock_prior_sigma * config.clock_prior_sigma);
  for (std::size_t i = 0; i < n; ++i) {
    for (Constellation c : kAllConstellations) {
      if (!observed[i][index_of(c)]) {
        g.priors.push_back({static_cast<int>(i), 3 + index_of(c), g.initial_states[i].clock_bias(c), clock_info});
      }
    }
  }
  return g;
}

Eigen::Vector3d residual_velocity(const VelocityFactor& f, const StateVector& xi, const StateVector& xj) {
  return (xj.position_offset() - xi.position_offset()) - f.measured_velocity * f.dt;
}

Eigen::Vector3d residual_trrtk(const TrRtkFactor& f, const StateVector& x_past, const StateVector& x_current) {
  return (x_current.position_offset() - x_past.position_offset()) - f.baseline;
}

double residual_pseudorange(const PseudorangeFactor& f, const StateVector& x) {
  StateArray delta = x.values;
  delta.head<3>() -= f.linearization_point;
  return f.row.dot(delta) - f.corrected_measurement;
}

std::pair<Eigen::Matrix<double, 3, kStateDim>, Eigen::Matrix<double, 3, kStateDim>> jacobian_velocity(
    const VelocityFactor&) {
  Eigen::Matrix<double, 3, kStateDim> ji = Eigen::Matrix<double, 3, kStateDim>::Zero();
  Eigen::Matrix<double, 3, kStateDim> jj = Eigen::Matrix<double, 3, kStateDim>::Zero();
  ji.leftCols<3>() = -Eigen::Matrix3d::Identity();
  jj.leftCols<3>() = Eigen::Matrix3d::Identity();
  return {ji, jj};
}

std::pair<Eigen::Matrix<double, 3, kStateDim>, Eigen::Matrix<double, 3, kStateDim>> jacobian_trrtk(
    const TrRtkFactor&) {
  Eigen::Matrix<double, 3, kStateDim> jp = Eigen::Matrix<double, 3, kStateDim>::Zero();
  Eigen::Matrix<double, 3, kStateDim> jc = Eigen::Matrix<double, 3, kStateDim>::Zero();
  jp.leftCols<3>() = -Eigen::Matrix3d::Identity();
  jc.leftCols<3>() = Eigen::Matrix3d::Identity();
  return {jp, jc};
}

Eigen::Matrix<double, 1, kStateDim> jacobian_pseudorange(const PseudorangeFactor& f) { return f.row.transpose(); }

CostBreakdown cost_breakdown(const Graph& g, const std::vector<StateVector>& states) {
  if (states.size() != g.node_count()) {
    throw Error(ErrorCode::InvalidArgument, "state count does not match graph nodes");
  }
  CostBreakdown c;
  for (const auto& f : g.velocity_factors) {
    const Eigen::Vector3d e = residual_velocity(f, states[f.node_i], states[f.node_j]);
    c.velocity += e.dot(f.information * e);
  }
  for (const auto& f : g.trrtk_factors) {
    const Eigen::Vector3d e = residual_trrtk(f, states[f.node_past], states[f.node_current]);
    c.trrtk += e.dot(f.information * e);
  }
  for (const auto& f : g.pseudorange_factors) {
    const double e = residual_pseudorange(f, states[f.node]);
    c.pseudorange += e * f.information * e;
  }
  for (const auto& p : g.priors) {
    const double e = states[p.node].values(p.dimension) - p.mean;
    c.prior += e * p.information * e;
  }
  return c;
}

double evaluate_cost(const Graph& g, const std::vector<StateVector>& states) {
  return cost_breakdown(g, states).total();
}

}  // namespace trgnss
