#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "trgnss/estimation.hpp"
#include "trgnss/types.hpp"

namespace trgnss {

/// Nominal circular orbit. RAAN is measured in the earth-fixed frame at the reference time.
struct OrbitElements {
  SatelliteId sat;
  double semi_major_axis = 0.0;  // m
  double inclination = 0.0;      // rad
  double raan = 0.0;             // rad
  double argument_of_latitude = 0.0;  // rad at the reference time
  GpsTime reference_time;
  int glonass_channel = 0;
  double clock_bias = 0.0;   // s at the reference time
  double clock_drift = 0.0;  // s/s
};

using ConstellationElements = std::map<SatelliteId, OrbitElements>;

struct SatelliteClockConfig {
  double bias_sigma = 1e-4;    // s, per-satellite offset at the reference time
  double drift = 1e-10;        // s/s, shared by every satellite
  double drift_spread = 0.0;   // s/s, per-satellite deviation from `drift`
};

ConstellationElements generate_constellation(std::uint64_t seed, const std::map<Constellation, int>& counts,
                                             const GpsTime& reference_time,
                                             const SatelliteClockConfig& clock = {});

SatelliteState propagate_satellite(const OrbitElements& elements, const GpsTime& time);

/// Carrier wavelength (m) of the single band each system is simulated on.
double carrier_wavelength(Constellation c, int glonass_channel = 0);

enum class TrajectoryType { Static, Line, Circle, Waypoints };

std::string_view to_string(TrajectoryType t);
std::optional<TrajectoryType> trajectory_type_from_string(std::string_view text);

struct NoiseConfig {
  double pseudorange_sigma = 0.5;  // m at zenith
  double phase_sigma = 0.003;      // m at zenith
  double doppler_sigma = 0.05;     // m/s at zenith
};

struct CycleSlip {
  SatelliteId sat;
  double time = 0.0;  // s after the scenario start
};

struct ReceiverClockConfig {
  double bias0 = 1e-5;  // s
  double drift = 5e-9;  // s/s
  /// Constant per-system hardware offsets relative to GPS (m).
  std::map<Constellation, double> system_offsets = {{Constellation::GLO, 12.0},
                                                    {Constellation::GAL, 4.0},
                                                    {Constellation::BDS, 7.0}};
};

struct ScenarioConfig {
  GpsTime start_time{2300, 345600.0};
  double duration = 200.0;  // s
  double rate = 1.0;        // Hz
  GeodeticPosition origin{35.68 * 3.14159265358979323846 / 180.0, 140.02 * 3.14159265358979323846 / 180.0, 35.0};
  TrajectoryType trajectory = TrajectoryType::Waypoints;
  double speed = 1.0;                  // m/s
  double heading = 0.0;                // rad from north, Line only
  double circle_radius = 30.0;         // m
  /// Local east/north/up points relative to the origin; the path closes back to the first point.
  std::vector<Eigen::Vector3d> waypoints = {{0, 0, 0}, {60, 0, 0}, {60, 40, 0}, {0, 40, 0}};
  NoiseConfig noise;
  std::vector<CycleSlip> cycle_slips;
  ReceiverClockConfig receiver_clock;
  SatelliteClockConfig satellite_clock;
  AtmosphereModels atmosphere{default_klobuchar(), {}};
  bool apply_ionosphere = true;
  bool apply_troposphere = true;
  std::map<Constellation, int> satellite_counts = {{Constellation::GPS, 31}, {Constellation::GAL, 24}};
  double elevation_mask = 5.0 * 3.14159265358979323846 / 180.0;
  std::uint64_t seed = 1;

  /// Throws InvalidConfig.
  void validate() const;
  std::size_t epoch_count() const;
};

struct TruthRecord {
  GpsTime time;
  EcefVector position = EcefVector::Zero();
  EcefVector velocity = EcefVector::Zero();
};

/// Throws InvalidWaypoints for degenerate paths (fewer than two points, legs shorter than the blend).
std::vector<TruthRecord> generate_trajectory(const ScenarioConfig& config);

/// mt19937_64 with distribution code kept here so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stateful measurement generator: carries ambiguities and lock counters between epochs.
class EpochSynthesizer {
 public:
  EpochSynthesizer(const ScenarioConfig& config, ConstellationElements constellation);

  /// Observations of one truth sample plus the satellite states (at transmission) used for them.
  std::pair<Epoch, SatelliteStateMap> synthesize(const TruthRecord& truth);

  const ConstellationElements& constellation() const noexcept { return constellation_; }

 private:
  struct Track {
    std::int64_t ambiguity = 0;
    int lock_count = 0;
    std::int64_t last_epoch = -2;
  };

  ScenarioConfig config_;
  std::vector<bool> slip_done_;
  ConstellationElements constellation_;
  Rng rng_;
  std::map<SatelliteId, Track> tracks_;
  std::int64_t epoch_index_ = 0;
};

/// Satellite state at the transmission time of a signal received at `time` by `receiver`.
SatelliteState transmit_state(const OrbitElements& elements, const GpsTime& time, const EcefVector& receiver);

struct SimulationResult {
  std::vector<Epoch> epochs;
  std::vector<TruthRecord> truth;
  SatelliteStateTable sat_states;
  ConstellationElements constellation;
};

SimulationResult simulate(const ScenarioConfig& config);

}  // namespace trgnss
