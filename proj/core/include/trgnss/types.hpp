#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "trgnss/time.hpp"

namespace trgnss {

/// Earth-centered earth-fixed vector in meters (or m/s for velocities).
using EcefVector = Eigen::Vector3d;

struct GeodeticPosition {
  double latitude = 0.0;   // rad
  double longitude = 0.0;  // rad
  double height = 0.0;     // m above the WGS-84 ellipsoid
};

enum class Constellation { GPS = 0, GLO = 1, GAL = 2, BDS = 3 };

inline constexpr std::array<Constellation, 4> kAllConstellations = {
    Constellation::GPS, Constellation::GLO, Constellation::GAL, Constellation::BDS};
inline constexpr int kNumConstellations = 4;

constexpr int index_of(Constellation c) noexcept { return static_cast<int>(c); }
char system_char(Constellation c) noexcept;
std::optional<Constellation> constellation_from_char(char c) noexcept;
std::string_view to_string(Constellation c) noexcept;

struct SatelliteId {
  Constellation constellation = Constellation::GPS;
  int prn = 1;

  friend auto operator<=>(const SatelliteId&, const SatelliteId&) = default;
};

/// "G07" style identifier used by RINEX and the CSV sidecars.
std::string to_string(const SatelliteId& id);
std::optional<SatelliteId> parse_satellite_id(std::string_view text);

struct SatelliteState {
  EcefVector position = EcefVector::Zero();  // at signal transmission
  EcefVector velocity = EcefVector::Zero();
  double clock_bias = 0.0;   // s
  double clock_drift = 0.0;  // s/s
};

using SatelliteStateMap = std::map<SatelliteId, SatelliteState>;

struct Observation {
  SatelliteId sat;
  double pseudorange = 0.0;    // m
  double carrier_phase = 0.0;  // cycles
  double doppler = 0.0;        // Hz
  double wavelength = 0.0;     // m
  int lock_count = 0;          // consecutive epochs of continuous lock
  bool loss_of_lock = false;   // slip flagged at this epoch
  double snr = 0.0;            // dB-Hz
};

struct Epoch {
  GpsTime time;
  std::vector<Observation> observations;

  const Observation* find(const SatelliteId& sat) const;
  /// Sorts by (constellation, prn); throws InvalidArgument on duplicate satellites.
  void normalize();
};

/// Satellite states keyed by exact epoch time.
class SatelliteStateTable {
 public:
  void insert(const GpsTime& time, const SatelliteId& sat, const SatelliteState& state);
  void insert(const GpsTime& time, SatelliteStateMap states);
  const SatelliteStateMap* find(const GpsTime& time) const;
  /// Throws MissingSatellite when the epoch has no entry.
  const SatelliteStateMap& at(const GpsTime& time) const;
  std::size_t size() const noexcept { return table_.size(); }
  const std::map<std::int64_t, std::pair<GpsTime, SatelliteStateMap>>& entries() const noexcept {
    return table_;
  }

 private:
  std::map<std::int64_t, std::pair<GpsTime, SatelliteStateMap>> table_;
};

}  // namespace trgnss
