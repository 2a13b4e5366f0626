#pragma once

#include <vector>

#include "trgnss/simulator.hpp"

namespace trgnss::test {

/// Noise-free scenario: no measurement noise, everything else at defaults.
inline ScenarioConfig quiet_scenario(TrajectoryType trajectory = TrajectoryType::Line, double duration = 20.0) {
  ScenarioConfig c;
  c.trajectory = trajectory;
  c.duration = duration;
  c.speed = 2.5;
  c.heading = 0.6;
  c.noise = {0.0, 0.0, 0.0};
  return c;
}

inline std::vector<const SatelliteStateMap*> state_pointers(const SimulationResult& sim) {
  std::vector<const SatelliteStateMap*> out;
  for (const auto& e : sim.epochs) out.push_back(sim.sat_states.find(e.time));
  return out;
}

inline std::vector<EcefVector> truth_positions(const SimulationResult& sim) {
  std::vector<EcefVector> out;
  for (const auto& t : sim.truth) out.push_back(t.position);
  return out;
}

}  // namespace trgnss::test
