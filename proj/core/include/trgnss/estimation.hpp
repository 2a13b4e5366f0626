#pragma once

#include <map>
#include <optional>

#include <Eigen/Core>

#include "trgnss/atmosphere.hpp"
#include "trgnss/types.hpp"

namespace trgnss {

struct EstimationConfig {
  double elevation_mask = 15.0 * 3.14159265358979323846 / 180.0;  // rad
  double pseudorange_a = 0.3;        // m, elevation-independent term
  double pseudorange_b = 0.3;        // m, scaled by 1/sin(el)
  double doppler_sigma = 0.05;       // m/s at zenith
  double velocity_sigma_floor = 0.01;  // m/s per axis
  int max_iterations = 10;
  double convergence_threshold = 1e-4;  // m
  double max_condition_number = 1e12;
  bool apply_ionosphere = true;
  bool apply_troposphere = true;
  /// Linearization start for SPP; the geocenter when empty.
  std::optional<EcefVector> initial_position;
};

/// Ionosphere and troposphere models shared by the corrector and the simulator.
struct AtmosphereModels {
  KlobucharParams iono;
  TropoModel tropo;
};

struct SppSolution {
  EcefVector position = EcefVector::Zero();
  /// GPS entry is the receiver clock (m); other entries are system offsets relative to GPS (m).
  std::map<Constellation, double> clock_biases;
  /// Ordered [x, y, z, GPS, GLO, GAL, BDS]; rows of unobserved systems are zero.
  Eigen::Matrix<double, 7, 7> covariance = Eigen::Matrix<double, 7, 7>::Zero();
  std::map<Constellation, int> used_satellites;
  int iterations = 0;
};

struct VelocitySolution {
  EcefVector velocity = EcefVector::Zero();  // m/s
  double clock_drift = 0.0;                  // m/s
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  int used_satellites = 0;
};

/// sigma^2 = a^2 + b^2 / sin^2(el). SNR is accepted but does not enter the weight.
double pseudorange_variance(double elevation, double snr, double a = 0.3, double b = 0.3);

/// Slant ionosphere (group) and troposphere delays for one satellite, both in meters.
struct PropagationDelays {
  double ionosphere = 0.0;
  double troposphere = 0.0;
};

PropagationDelays propagation_delays(const AtmosphereModels& models, const GpsTime& time,
                                     const GeodeticPosition& user, double elevation, double azimuth,
                                     bool apply_iono = true, bool apply_tropo = true);

/// Iterated weighted least-squares single point positioning.
SppSolution solve_spp(const Epoch& epoch, const SatelliteStateMap& sats, const AtmosphereModels& models,
                      const EstimationConfig& config);

/// Least-squares receiver velocity from Doppler range rates (range rate = -lambda * doppler).
VelocitySolution solve_doppler_velocity(const Epoch& epoch, const SatelliteStateMap& sats,
                                        const EcefVector& position, const EstimationConfig& config);

/// Eigenvalue floor: every principal variance is raised to at least sigma_floor^2.
Eigen::Matrix3d floored_covariance(const Eigen::Matrix3d& covariance, double sigma_floor);

}  // namespace trgnss
