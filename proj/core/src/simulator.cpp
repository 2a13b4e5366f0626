#include "trgnss/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "trgnss/constants.hpp"
#include "trgnss/error.hpp"
#include "trgnss/geodesy.hpp"

namespace trgnss {

namespace {

struct Shell {
  double radius;
  double inclination;
  int planes;
};

Shell shell_of(Constellation c) {
  switch (c) {
    case Constellation::GPS: return {26560.0e3, 55.0 * kDegToRad, 6};
    case Constellation::GLO: return {25510.0e3, 64.8 * kDegToRad, 3};
    case Constellation::GAL: return {29600.0e3, 56.0 * kDegToRad, 3};
    case Constellation::BDS: return {27906.0e3, 55.0 * kDegToRad, 3};
  }
  return {26560.0e3, 55.0 * kDegToRad, 6};
}

Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d r;
  const double c = std::cos(a), s = std::sin(a);
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d r;
  const double c = std::cos(a), s = std::sin(a);
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

/// Integral over [0, tau] of the 2 s cosine blend weight.
double blend_integral(double tau) {
  return tau / 2.0 - std::sin(kPi * tau / 2.0) / kPi;
}

double blend_weight(double tau) { return (1.0 - std::cos(kPi * tau / 2.0)) / 2.0; }

constexpr double kBlendDuration = 2.0;

struct Loop {
  std::vector<Eigen::Vector3d> points;  // closed: segment k runs points[k] -> points[k+1 mod m]
  std::vector<Eigen::Vector3d> velocity;
  std::vector<double> start;            // corner times
  double period = 0.0;
};

Loop build_loop(const ScenarioConfig& config) {
  Loop loop;
  loop.points = config.waypoints;
  if (loop.points.size() >= 2 && (loop.points.front() - loop.points.back()).norm() < 1e-9) loop.points.pop_back();
  if (loop.points.size() < 2) throw Error(ErrorCode::InvalidWaypoints, "need at least two distinct waypoints");
  if (!(config.speed > 0.0)) throw Error(ErrorCode::InvalidWaypoints, "waypoint trajectory needs speed > 0");
  const std::size_t m = loop.points.size();
  double t = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    if (!loop.points[k].allFinite()) throw Error(ErrorCode::InvalidWaypoints, "non-finite waypoint");
    const Eigen::Vector3d d = loop.points[(k + 1) % m] - loop.points[k];
    const double length = d.norm();
    const double duration = length / config.speed;
    if (duration < kBlendDuration) {
      throw Error(ErrorCode::InvalidWaypoints, "waypoint leg " + std::to_string(k) + " is shorter than the turn blend");
    }
    loop.start.push_back(t);
    loop.velocity.push_back(d / duration);
    t += duration;
  }
  loop.period = t;
  return loop;
}

/// Local ENU position and velocity on the closed waypoint loop.
std::pair<Eigen::Vector3d, Eigen::Vector3d> loop_state(const Loop& loop, double t) {
  const std::size_t m = loop.points.size();
  double tm = std::fmod(t, loop.period);
  if (tm < 0.0) tm += loop.period;
  std::size_t seg = m - 1;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    if (tm < loop.start[k + 1]) {
      seg = k;
      break;
    }
  }
  Eigen::Vector3d p = loop.points[seg] + loop.velocity[seg] * (tm - loop.start[seg]);
  Eigen::Vector3d v = loop.velocity[seg];
  // Corner k sits at start[k] (and corner 0 also at the period end), joining segment k-1 to k.
  for (std::size_t k = 0; k <= m; ++k) {
    const std::size_t incoming = (k + m - 1) % m;
    const std::size_t outgoing = k % m;
    const double corner = k == m ? loop.period : loop.start[k];
    const double tau = tm - corner + kBlendDuration / 2.0;
    if (tau <= 0.0 || tau >= kBlendDuration) continue;
    const Eigen::Vector3d dv = loop.velocity[outgoing] - loop.velocity[incoming];
    p += dv * (blend_integral(tau) - std::max(tau - kBlendDuration / 2.0, 0.0));
    v += dv * (blend_weight(tau) - (tau >= kBlendDuration / 2.0 ? 1.0 : 0.0));
  }
  return {p, v};
}

}  // namespace

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(engine_() % span);
}

std::string_view to_string(TrajectoryType t) {
  switch (t) {
    case TrajectoryType::Static: return "static";
    case TrajectoryType::Line: return "line";
    case TrajectoryType::Circle: return "circle";
    case TrajectoryType::Waypoints: return "waypoints";
  }
  return "unknown";
}

std::optional<TrajectoryType> trajectory_type_from_string(std::string_view text) {
  for (auto t : {TrajectoryType::Static, TrajectoryType::Line, TrajectoryType::Circle, TrajectoryType::Waypoints}) {
    if (text == to_string(t)) return t;
  }
  return std::nullopt;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
  if (!(duration > 0.0)) fail("duration must be > 0");
  if (!(rate > 0.0)) fail("rate must be > 0");
  if (!(speed >= 0.0)) fail("speed must be >= 0");
  if (!(noise.pseudorange_sigma >= 0.0 && noise.phase_sigma >= 0.0 && noise.doppler_sigma >= 0.0)) {
    fail("noise sigmas must be >= 0");
  }
  if (trajectory == TrajectoryType::Circle && !(circle_radius > 0.0)) fail("circle radius must be > 0");
  for (const auto& [c, n] : satellite_counts) {
    if (n < 0 || n > 63) fail("satellite count out of range for " + std::string(trgnss::to_string(c)));
  }
  atmosphere.tropo.validate();
}

std::size_t ScenarioConfig::epoch_count() const {
  return static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;
}

double carrier_wavelength(Constellation c, int glonass_channel) {
  switch (c) {
    case Constellation::GPS: return kSpeedOfLight / kFreqGpsL1;
    case Constellation::GAL: return kSpeedOfLight / kFreqGalE1;
    case Constellation::BDS: return kSpeedOfLight / kFreqBdsB1I;
    case Constellation::GLO: return kSpeedOfLight / (kFreqGloG1Base + glonass_channel * kFreqGloG1Step);
  }
  return kSpeedOfLight / kFreqGpsL1;
}

ConstellationElements generate_constellation(std::uint64_t seed, const std::map<Constellation, int>& counts,
                                             const GpsTime& reference_time, const SatelliteClockConfig& clock) {
  ConstellationElements out;
  for (const auto& [system, count] : counts) {
    if (count <= 0) continue;
    Rng rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(index_of(system)) + 1);
    const Shell shell = shell_of(system);
    const double raan0 = rng.uniform(0.0, 2.0 * kPi);
    const double phase0 = rng.uniform(0.0, 2.0 * kPi);
    const int per_plane = (count + shell.planes - 1) / shell.planes;
    for (int k = 0; k < count; ++k) {
      const int plane = k % shell.planes;
      const int slot = k / shell.planes;
      OrbitElements e;
      e.sat = {system, k + 1};
      e.semi_major_axis = shell.radius;
      e.inclination = shell.inclination;
      e.raan = raan0 + 2.0 * kPi * plane / shell.planes;
      e.argument_of_latitude = phase0 + 2.0 * kPi * slot / per_plane + 2.0 * kPi * plane / (shell.planes * per_plane) +
                               rng.uniform(-0.05, 0.05);
      e.reference_time = reference_time;
      e.glonass_channel = system == Constellation::GLO ? (k % 14) - 7 : 0;
      e.clock_bias = clock.bias_sigma * rng.normal();
      e.clock_drift = clock.drift + clock.drift_spread * rng.normal();
      out.emplace(e.sat, e);
    }
  }
  return out;
}

SatelliteState propagate_satellite(const OrbitElements& e, const GpsTime& time) {
  const double dt = time - e.reference_time;
  const double n = std::sqrt(kEarthGm / (e.semi_major_axis * e.semi_major_axis * e.semi_major_axis));
  const double u = e.argument_of_latitude + n * dt;
  const Eigen::Matrix3d orient = rot_z(e.raan) * rot_x(e.inclination);
  const Eigen::Vector3d r_in = orient * Eigen::Vector3d(e.semi_major_axis * std::cos(u), e.semi_major_axis * std::sin(u), 0.0);
  const Eigen::Vector3d v_in =
      orient * Eigen::Vector3d(-e.semi_major_axis * n * std::sin(u), e.semi_major_axis * n * std::cos(u), 0.0);
  const Eigen::Matrix3d to_ecef = rot_z(-kEarthRotationRate * dt);
  const Eigen::Vector3d omega(0.0, 0.0, kEarthRotationRate);

  SatelliteState s;
  s.position = to_ecef * r_in;
  s.velocity = to_ecef * (v_in - omega.cross(r_in));
  s.clock_bias = e.clock_bias + e.clock_drift * dt;
  s.clock_drift = e.clock_drift;
  return s;
}

SatelliteState transmit_state(const OrbitElements& elements, const GpsTime& time, const EcefVector& receiver) {
  double flight = 0.075;
  SatelliteState s;
  for (int i = 0; i < 10; ++i) {
    s = propagate_satellite(elements, time - flight);
    const double next = line_of_sight(receiver, s).range / kSpeedOfLight;
    const bool done = std::abs(next - flight) < 1e-13;
    flight = next;
    if (done) break;
  }
  return propagate_satellite(elements, time - flight);
}

std::vector<TruthRecord> generate_trajectory(const ScenarioConfig& config) {
  const std::size_t n = config.epoch_count();
  const EcefVector origin = geodetic_to_ecef(config.origin);
  const Eigen::Matrix3d enu_to_ecef = enu_rotation(config.origin).transpose();
  std::optional<Loop> loop;
  if (config.trajectory == TrajectoryType::Waypoints) loop = build_loop(config);

  std::vector<TruthRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / config.rate;
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    switch (config.trajectory) {
      case TrajectoryType::Static: break;
      case TrajectoryType::Line: {
        const Eigen::Vector3d dir(std::sin(config.heading), std::cos(config.heading), 0.0);
        v = config.speed * dir;
        p = v * t;
        break;
      }
      case TrajectoryType::Circle: {
        const double w = config.speed / config.circle_radius;
        const double th = w * t;
        p = config.circle_radius * Eigen::Vector3d(std::cos(th) - 1.0, std::sin(th), 0.0);
        v = config.speed * Eigen::Vector3d(-std::sin(th), std::cos(th), 0.0);
        break;
      }
      case TrajectoryType::Waypoints: std::tie(p, v) = loop_state(*loop, t); break;
    }
    out.push_back({config.start_time + t, origin + enu_to_ecef * p, enu_to_ecef * v});
  }
  return out;
}

EpochSynthesizer::EpochSynthesizer(const ScenarioConfig& config, ConstellationElements constellation)
    : config_(config),
      slip_done_(config.cycle_slips.size(), false),
      constellation_(std::move(constellation)),
      rng_(config.seed ^ 0xD1B54A32D192ED03ULL) {}

std::pair<Epoch, SatelliteStateMap> EpochSynthesizer::synthesize(const TruthRecord& truth) {
  Epoch epoch;
  epoch.time = truth.time;
  SatelliteStateMap states;
  const double elapsed = truth.time - config_.start_time;
  const GeodeticPosition geo = ecef_to_geodetic(truth.position);
  const double rx_clock = kSpeedOfLight * (config_.receiver_clock.bias0 + config_.receiver_clock.drift * elapsed);
  const double rx_drift = kSpeedOfLight * config_.receiver_clock.drift;
  const double half_step = 0.5 / config_.rate;

  for (const auto& [sat, elements] : constellation_) {
    const SatelliteState sv = transmit_state(elements, truth.time, truth.position);
    const LineOfSight los = line_of_sight(truth.position, sv);
    const ElevationAzimuth ea = elevation_azimuth(geo, los.sat_position);
    if (ea.elevation <= config_.elevation_mask) continue;

    Track& track = tracks_[sat];
    bool slipped = false;
    for (std::size_t k = 0; k < config_.cycle_slips.size(); ++k) {
      const CycleSlip& s = config_.cycle_slips[k];
      if (!slip_done_[k] && s.sat == sat && elapsed + half_step > s.time) {
        slip_done_[k] = true;
        slipped = true;
      }
    }
    const bool continuing = track.last_epoch == epoch_index_ - 1;
    if (!continuing || slipped) {
      std::int64_t n = rng_.uniform_int(-200000, 200000);
      if (continuing && n == track.ambiguity) ++n;
      track.ambiguity = n;
      track.lock_count = 0;
    } else {
      ++track.lock_count;
    }
    track.last_epoch = epoch_index_;

    const double lambda = carrier_wavelength(sat.constellation, elements.glonass_channel);
    const double scale = 1.0 / std::sin(ea.elevation);
    const PropagationDelays d = propagation_delays(config_.atmosphere, truth.time, geo, ea.elevation, ea.azimuth,
                                                   config_.apply_ionosphere, config_.apply_troposphere);
    double system_offset = 0.0;
    if (auto it = config_.receiver_clock.system_offsets.find(sat.constellation);
        it != config_.receiver_clock.system_offsets.end() && sat.constellation != Constellation::GPS) {
      system_offset = it->second;
    }
    const double clocks = rx_clock + system_offset - kSpeedOfLight * sv.clock_bias;
    const double rate = range_rate(los, truth.position, truth.velocity, sv);

    const double n_code = config_.noise.pseudorange_sigma * scale * rng_.normal();
    const double n_phase = config_.noise.phase_sigma * scale * rng_.normal();
    const double n_doppler = config_.noise.doppler_sigma * scale * rng_.normal();

    Observation obs;
    obs.sat = sat;
    obs.wavelength = lambda;
    obs.pseudorange = los.range + clocks + d.ionosphere + d.troposphere + n_code;
    obs.carrier_phase = (los.range + clocks - d.ionosphere + d.troposphere + n_phase) / lambda +
                        static_cast<double>(track.ambiguity);
    obs.doppler = -(rate + rx_drift - kSpeedOfLight * sv.clock_drift + n_doppler) / lambda;
    obs.lock_count = track.lock_count;
    obs.loss_of_lock = slipped && continuing;
    obs.snr = 30.0 + 18.0 * std::sin(ea.elevation);
    epoch.observations.push_back(obs);
    states.emplace(sat, sv);
  }
  ++epoch_index_;
  epoch.normalize();
  return {std::move(epoch), std::move(states)};
}

SimulationResult simulate(const ScenarioConfig& config) {
  config.validate();
  SimulationResult out;
  out.truth = generate_trajectory(config);
  out.constellation = generate_constellation(config.seed, config.satellite_counts, config.start_time,
                                             config.satellite_clock);
  EpochSynthesizer synth(config, out.constellation);
  out.epochs.reserve(out.truth.size());
  for (const auto& truth : out.truth) {
    auto [epoch, states] = synth.synthesize(truth);
    out.sat_states.insert(epoch.time, std::move(states));
    out.epochs.push_back(std::move(epoch));
  }
  return out;
}

}  // namespace trgnss
