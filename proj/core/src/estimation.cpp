#include "trgnss/estimation.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "trgnss/constants.hpp"
#include "trgnss/error.hpp"
#include "trgnss/geodesy.hpp"

namespace trgnss {

namespace {

struct Row {
  Eigen::Matrix<double, 7, 1> h;
  double residual;
  double weight;
  Constellation system;
};

double condition_number(const Eigen::MatrixXd& normal) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

double pseudorange_variance(double elevation, double /*snr*/, double a, double b) {
  const double s = std::sin(elevation);
  return a * a + b * b / (s * s);
}

PropagationDelays propagation_delays(const AtmosphereModels& models, const GpsTime& time,
                                     const GeodeticPosition& user, double elevation, double azimuth,
                                     bool apply_iono, bool apply_tropo) {
  PropagationDelays d;
  if (apply_iono) d.ionosphere = klobuchar_delay(models.iono, time, user, std::max(elevation, 0.0), azimuth);
  if (apply_tropo) d.troposphere = saastamoinen_delay(models.tropo, user, elevation);
  return d;
}

SppSolution solve_spp(const Epoch& epoch, const SatelliteStateMap& sats, const AtmosphereModels& models,
                      const EstimationConfig& config) {
  Eigen::Matrix<double, 7, 1> x = Eigen::Matrix<double, 7, 1>::Zero();
  if (config.initial_position) x.head<3>() = *config.initial_position;

  std::vector<Row> rows;
  rows.reserve(epoch.observations.size());
  SppSolution sol;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const EcefVector pos = x.head<3>();
    const bool near_earth = pos.norm() > 1e6;
    GeodeticPosition geo;
    if (near_earth) geo = ecef_to_geodetic(pos);

    rows.clear();
    std::array<int, kNumConstellations> counts{};
    for (const auto& obs : epoch.observations) {
      auto it = sats.find(obs.sat);
      if (it == sats.end() || !(obs.pseudorange > 0.0)) continue;
      const SatelliteState& sv = it->second;
      const LineOfSight los = line_of_sight(pos, sv);

      double elevation = kPi / 2.0;
      PropagationDelays delays;
      if (near_earth) {
        const ElevationAzimuth ea = elevation_azimuth(geo, los.sat_position);
        if (ea.elevation < config.elevation_mask) continue;
        elevation = ea.elevation;
        delays = propagation_delays(models, epoch.time, geo, ea.elevation, ea.azimuth,
                                    config.apply_ionosphere, config.apply_troposphere);
      }

      Row row;
      row.system = obs.sat.constellation;
      row.h.setZero();
      row.h.head<3>() = -los.unit;
      row.h(3) = 1.0;
      if (row.system != Constellation::GPS) row.h(3 + index_of(row.system)) = 1.0;
      const double modeled = los.range - kSpeedOfLight * sv.clock_bias + delays.ionosphere +
                             delays.troposphere + row.h.tail<4>().dot(x.tail<4>());
      row.residual = obs.pseudorange - modeled;
      row.weight = 1.0 / pseudorange_variance(elevation, obs.snr, config.pseudorange_a, config.pseudorange_b);
      rows.push_back(row);
      ++counts[index_of(row.system)];
    }

    // Active unknowns: position, GPS clock, and an offset per other observed system.
    std::vector<int> active = {0, 1, 2, 3};
    for (Constellation c : {Constellation::GLO, Constellation::GAL, Constellation::BDS}) {
      if (counts[index_of(c)] > 0) active.push_back(3 + index_of(c));
    }
    const int n = static_cast<int>(active.size());
    if (counts[index_of(Constellation::GPS)] == 0 || static_cast<int>(rows.size()) < std::max(4, n)) {
      throw Error(ErrorCode::InsufficientSatellites,
                  std::to_string(rows.size()) + " usable satellites for " + std::to_string(n) + " unknowns");
    }

    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (const auto& row : rows) {
      Eigen::VectorXd h(n);
      for (int j = 0; j < n; ++j) h(j) = row.h(active[j]);
      normal.noalias() += row.weight * h * h.transpose();
      rhs.noalias() += row.weight * h * row.residual;
    }
    if (condition_number(normal) > config.max_condition_number) {
      throw Error(ErrorCode::SingularGeometry, "SPP normal matrix is ill-conditioned");
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    const Eigen::VectorXd dx = ldlt.solve(rhs);
    for (int j = 0; j < n; ++j) x(active[j]) += dx(j);

    if (dx.head<3>().norm() < config.convergence_threshold) {
      const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
      sol.position = x.head<3>();
      sol.covariance.setZero();
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) sol.covariance(active[a], active[b]) = cov(a, b);
      }
      sol.clock_biases[Constellation::GPS] = x(3);
      for (Constellation c : {Constellation::GLO, Constellation::GAL, Constellation::BDS}) {
        if (counts[index_of(c)] > 0) sol.clock_biases[c] = x(3 + index_of(c));
      }
      for (Constellation c : kAllConstellations) {
        if (counts[index_of(c)] > 0) sol.used_satellites[c] = counts[index_of(c)];
      }
      sol.iterations = iter + 1;
      return sol;
    }
  }
  throw Error(ErrorCode::NoConvergence, "SPP did not converge within " +
                                            std::to_string(config.max_iterations) + " iterations");
}

VelocitySolution solve_doppler_velocity(const Epoch& epoch, const SatelliteStateMap& sats,
                                        const EcefVector& position, const EstimationConfig& config) {
  const GeodeticPosition geo = ecef_to_geodetic(position);
  Eigen::Matrix4d normal = Eigen::Matrix4d::Zero();
  Eigen::Vector4d rhs = Eigen::Vector4d::Zero();
  int used = 0;
  for (const auto& obs : epoch.observations) {
    auto it = sats.find(obs.sat);
    if (it == sats.end() || obs.wavelength <= 0.0) continue;
    const SatelliteState& sv = it->second;
    const LineOfSight los = line_of_sight(position, sv);
    const ElevationAzimuth ea = elevation_azimuth(geo, los.sat_position);
    if (ea.elevation < config.elevation_mask) continue;

    const double measured = -obs.wavelength * obs.doppler;
    const double at_rest = range_rate(los, position, EcefVector::Zero(), sv);
    Eigen::Vector4d h;
    h.head<3>() = range_rate_velocity_gradient(los, sv);
    h(3) = 1.0;
    const double y = measured - at_rest + kSpeedOfLight * sv.clock_drift;
    const double sigma = config.doppler_sigma / std::sin(ea.elevation);
    const double w = 1.0 / (sigma * sigma);
    normal.noalias() += w * h * h.transpose();
    rhs.noalias() += w * h * y;
    ++used;
  }
  if (used < 4) {
    throw Error(ErrorCode::InsufficientSatellites, std::to_string(used) + " usable Doppler measurements");
  }
  if (condition_number(normal) > config.max_condition_number) {
    throw Error(ErrorCode::SingularGeometry, "Doppler normal matrix is ill-conditioned");
  }
  Eigen::LDLT<Eigen::Matrix4d> ldlt(normal);
  const Eigen::Vector4d x = ldlt.solve(rhs);
  const Eigen::Matrix4d cov = ldlt.solve(Eigen::Matrix4d::Identity());

  VelocitySolution sol;
  sol.velocity = x.head<3>();
  sol.clock_drift = x(3);
  sol.covariance = 0.5 * (cov.topLeftCorner<3, 3>() + cov.topLeftCorner<3, 3>().transpose());
  sol.used_satellites = used;
  return sol;
}

Eigen::Matrix3d floored_covariance(const Eigen::Matrix3d& covariance, double sigma_floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(0.5 * (covariance + covariance.transpose()));
  Eigen::Vector3d values = eig.eigenvalues().cwiseMax(sigma_floor * sigma_floor);
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace trgnss
