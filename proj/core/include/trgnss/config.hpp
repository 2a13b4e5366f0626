#pragma once

#include <iosfwd>
#include <string>

#include "trgnss/pipeline.hpp"
#include "trgnss/simulator.hpp"

namespace trgnss {

/// Scenario and solver settings read from one JSON document with the sections
/// "scenario", "solver", "trrtk", "iono" and "tropo". Every key is optional.
struct AppConfig {
  ScenarioConfig scenario;
  SolverConfig solver;
};

/// Throws InvalidConfig on malformed JSON, unknown keys or out-of-range values.
AppConfig load_config(std::istream& in);
AppConfig load_config_file(const std::string& path);

}  // namespace trgnss
