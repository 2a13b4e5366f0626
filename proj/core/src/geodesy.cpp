#include "trgnss/geodesy.hpp"

#include <cmath>

#include "trgnss/constants.hpp"
#include "trgnss/error.hpp"

namespace trgnss {

namespace {

constexpr double kE2 = kWgs84Flattening * (2.0 - kWgs84Flattening);

double prime_vertical_radius(double sin_lat) {
  return kWgs84SemiMajorAxis / std::sqrt(1.0 - kE2 * sin_lat * sin_lat);
}

}  // namespace

EcefVector geodetic_to_ecef(const GeodeticPosition& pos) {
  const double sin_lat = std::sin(pos.latitude);
  const double cos_lat = std::cos(pos.latitude);
  const double n = prime_vertical_radius(sin_lat);
  return {(n + pos.height) * cos_lat * std::cos(pos.longitude),
          (n + pos.height) * cos_lat * std::sin(pos.longitude),
          (n * (1.0 - kE2) + pos.height) * sin_lat};
}

GeodeticPosition ecef_to_geodetic(const EcefVector& pos) {
  const double r = pos.norm();
  if (!(r > 1e6)) {
    throw Error(ErrorCode::NearSingular, "position too close to the geocenter for geodetic conversion");
  }
  const double p = std::hypot(pos.x(), pos.y());
  double lat = std::atan2(pos.z(), p * (1.0 - kE2));
  for (int iter = 0; iter < 10; ++iter) {
    const double sin_lat = std::sin(lat);
    const double n = prime_vertical_radius(sin_lat);
    const double next = std::atan2(pos.z() + kE2 * n * sin_lat, p);
    const bool done = std::abs(next - lat) < 1e-15;
    lat = next;
    if (done) break;
  }
  const double sin_lat = std::sin(lat);
  const double cos_lat = std::cos(lat);
  const double n = prime_vertical_radius(sin_lat);
  // Numerically stable at the poles and the equator alike.
  const double height = p * cos_lat + (pos.z() + kE2 * n * sin_lat) * sin_lat - n;
  const double lon = (p == 0.0) ? 0.0 : std::atan2(pos.y(), pos.x());
  return {lat, lon, height};
}

Eigen::Matrix3d enu_rotation(const GeodeticPosition& origin) {
  const double sl = std::sin(origin.latitude), cl = std::cos(origin.latitude);
  const double so = std::sin(origin.longitude), co = std::cos(origin.longitude);
  Eigen::Matrix3d r;
  r << -so, co, 0.0,
       -sl * co, -sl * so, cl,
       cl * co, cl * so, sl;
  return r;
}

EcefVector ecef_to_enu(const GeodeticPosition& origin, const EcefVector& point) {
  return enu_rotation(origin) * (point - geodetic_to_ecef(origin));
}

LineOfSight line_of_sight(const EcefVector& receiver, const SatelliteState& sat) {
  const double geometric = (sat.position - receiver).norm();
  if (!(geometric >= 1e6)) {
    throw Error(ErrorCode::DegenerateGeometry, "receiver-satellite separation below 1e6 m");
  }
  LineOfSight los;
  double range = geometric;
  EcefVector rotated = sat.position;
  for (int iter = 0; iter < 5; ++iter) {
    const double theta = kEarthRotationRate * range / kSpeedOfLight;
    const double c = std::cos(theta), s = std::sin(theta);
    rotated = EcefVector(c * sat.position.x() + s * sat.position.y(),
                         -s * sat.position.x() + c * sat.position.y(), sat.position.z());
    const double next = (rotated - receiver).norm();
    const bool done = std::abs(next - range) < 1e-9;
    range = next;
    if (done) break;
  }
  los.range = range;
  los.sat_position = rotated;
  los.unit = (rotated - receiver) / range;
  return los;
}

namespace {

// d range / d (sat velocity, receiver velocity) scale: the rotation angle itself grows with the
// range, which feeds back through 1 / (1 - k).
double light_time_feedback(const LineOfSight& los, const SatelliteState& sat) {
  const double theta = kEarthRotationRate * los.range / kSpeedOfLight;
  const double c = std::cos(theta), s = std::sin(theta);
  const EcefVector d_rotated(-s * sat.position.x() + c * sat.position.y(), -c * sat.position.x() - s * sat.position.y(),
                             0.0);
  const EcefVector vs(c * sat.velocity.x() + s * sat.velocity.y(), -s * sat.velocity.x() + c * sat.velocity.y(),
                      sat.velocity.z());
  // a later flight time rotates the frame further and moves the transmit time back
  return 1.0 / (1.0 - los.unit.dot(d_rotated * kEarthRotationRate - vs) / kSpeedOfLight);
}

}  // namespace

double range_rate(const LineOfSight& los, const EcefVector& receiver,
                  const EcefVector& receiver_velocity, const SatelliteState& sat) {
  (void)receiver;
  const double theta = kEarthRotationRate * los.range / kSpeedOfLight;
  const double c = std::cos(theta), s = std::sin(theta);
  const EcefVector vs(c * sat.velocity.x() + s * sat.velocity.y(), -s * sat.velocity.x() + c * sat.velocity.y(),
                      sat.velocity.z());
  return light_time_feedback(los, sat) * los.unit.dot(vs - receiver_velocity);
}

Eigen::Vector3d range_rate_velocity_gradient(const LineOfSight& los, const SatelliteState& sat) {
  return -light_time_feedback(los, sat) * los.unit;
}

ElevationAzimuth elevation_azimuth(const GeodeticPosition& receiver, const EcefVector& sat) {
  const EcefVector enu = ecef_to_enu(receiver, sat);
  const double horizontal = std::hypot(enu.x(), enu.y());
  ElevationAzimuth out;
  out.elevation = std::atan2(enu.z(), horizontal);
  double az = std::atan2(enu.x(), enu.y());
  if (az < 0.0) az += 2.0 * kPi;
  if (az >= 2.0 * kPi) az = 0.0;
  out.azimuth = az;
  return out;
}

}  // namespace trgnss
