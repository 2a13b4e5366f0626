#pragma once

#include <Eigen/Core>

#include "trgnss/types.hpp"

namespace trgnss {

EcefVector geodetic_to_ecef(const GeodeticPosition& pos);

/// Iterative inverse of geodetic_to_ecef. Throws NearSingular below 1e6 m from the geocenter.
GeodeticPosition ecef_to_geodetic(const EcefVector& pos);

/// Rotation taking ECEF differences into the local east/north/up frame at `origin`.
Eigen::Matrix3d enu_rotation(const GeodeticPosition& origin);

EcefVector ecef_to_enu(const GeodeticPosition& origin, const EcefVector& point);

struct LineOfSight {
  EcefVector unit;           // receiver -> satellite
  double range = 0.0;        // m, earth-rotation corrected
  EcefVector sat_position;   // satellite position rotated into the receive-time frame
};

/// Geometric range with the earth-rotation correction solved by fixed-point iteration on
/// the flight time. Throws DegenerateGeometry when the separation is below 1e6 m.
LineOfSight line_of_sight(const EcefVector& receiver, const SatelliteState& sat);

/// Time derivative of the received range for a moving receiver. The satellite state is taken at
/// transmission, so both the frame rotation and the transmit time follow the flight time.
/// Clock drifts are not included.
double range_rate(const LineOfSight& los, const EcefVector& receiver,
                  const EcefVector& receiver_velocity, const SatelliteState& sat);

/// Partial derivative of range_rate with respect to the receiver velocity.
Eigen::Vector3d range_rate_velocity_gradient(const LineOfSight& los, const SatelliteState& sat);

struct ElevationAzimuth {
  double elevation = 0.0;  // rad, [-pi/2, pi/2]
  double azimuth = 0.0;    // rad, [0, 2 pi)
};

ElevationAzimuth elevation_azimuth(const GeodeticPosition& receiver, const EcefVector& sat);

}  // namespace trgnss
