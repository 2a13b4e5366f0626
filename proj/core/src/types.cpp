#include "trgnss/types.hpp"

#include <algorithm>
#include <cstdio>

#include "trgnss/error.hpp"

namespace trgnss {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::ElevationTooLow: return "ElevationTooLow";
    case ErrorCode::InsufficientSatellites: return "InsufficientSatellites";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularGeometry: return "SingularGeometry";
    case ErrorCode::MissingSatellite: return "MissingSatellite";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::WindowExceeded: return "WindowExceeded";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingVelocity: return "MissingVelocity";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::InvalidWaypoints: return "InvalidWaypoints";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MalformedEpoch: return "MalformedEpoch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

char system_char(Constellation c) noexcept {
  switch (c) {
    case Constellation::GPS: return 'G';
    case Constellation::GLO: return 'R';
    case Constellation::GAL: return 'E';
    case Constellation::BDS: return 'C';
  }
  return '?';
}

std::optional<Constellation> constellation_from_char(char c) noexcept {
  switch (c) {
    case 'G': return Constellation::GPS;
    case 'R': return Constellation::GLO;
    case 'E': return Constellation::GAL;
    case 'C': return Constellation::BDS;
    default: return std::nullopt;
  }
}

std::string_view to_string(Constellation c) noexcept {
  switch (c) {
    case Constellation::GPS: return "GPS";
    case Constellation::GLO: return "GLO";
    case Constellation::GAL: return "GAL";
    case Constellation::BDS: return "BDS";
  }
  return "?";
}

std::string to_string(const SatelliteId& id) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%c%02d", system_char(id.constellation), id.prn);
  return buf;
}

std::optional<SatelliteId> parse_satellite_id(std::string_view text) {
  if (text.size() != 3) return std::nullopt;
  auto sys = constellation_from_char(text[0]);
  if (!sys) return std::nullopt;
  int prn = 0;
  for (char ch : text.substr(1)) {
    if (ch == ' ') ch = '0';
    if (ch < '0' || ch > '9') return std::nullopt;
    prn = prn * 10 + (ch - '0');
  }
  if (prn < 1 || prn > 64) return std::nullopt;
  return SatelliteId{*sys, prn};
}

const Observation* Epoch::find(const SatelliteId& sat) const {
  auto it = std::lower_bound(observations.begin(), observations.end(), sat,
                             [](const Observation& o, const SatelliteId& s) { return o.sat < s; });
  if (it != observations.end() && it->sat == sat) return &*it;
  // Fall back to a scan for epochs that were never normalized.
  for (const auto& obs : observations) {
    if (obs.sat == sat) return &obs;
  }
  return nullptr;
}

void Epoch::normalize() {
  std::sort(observations.begin(), observations.end(),
            [](const Observation& a, const Observation& b) { return a.sat < b.sat; });
  auto dup = std::adjacent_find(observations.begin(), observations.end(),
                                [](const Observation& a, const Observation& b) { return a.sat == b.sat; });
  if (dup != observations.end()) {
    throw Error(ErrorCode::InvalidArgument, "duplicate satellite " + to_string(dup->sat) + " in epoch");
  }
}

void SatelliteStateTable::insert(const GpsTime& time, const SatelliteId& sat, const SatelliteState& state) {
  auto& slot = table_[time.microseconds()];
  slot.first = time;
  slot.second[sat] = state;
}

void SatelliteStateTable::insert(const GpsTime& time, SatelliteStateMap states) {
  auto& slot = table_[time.microseconds()];
  slot.first = time;
  for (auto& [sat, state] : states) slot.second[sat] = state;
}

const SatelliteStateMap* SatelliteStateTable::find(const GpsTime& time) const {
  auto it = table_.find(time.microseconds());
  return it == table_.end() ? nullptr : &it->second.second;
}

const SatelliteStateMap& SatelliteStateTable::at(const GpsTime& time) const {
  const auto* states = find(time);
  if (!states) {
    throw Error(ErrorCode::MissingSatellite, "no satellite states for epoch tow " + std::to_string(time.tow()));
  }
  return *states;
}

}  // namespace trgnss
