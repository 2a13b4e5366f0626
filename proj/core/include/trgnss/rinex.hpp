#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trgnss/error.hpp"
#include "trgnss/types.hpp"

namespace trgnss {

struct RinexHeader {
  double version = 3.04;
  std::string marker_name;
  std::optional<EcefVector> approx_position;
  std::map<Constellation, std::vector<std::string>> observation_codes;
  std::optional<double> interval;
  std::optional<GpsTime> first_observation;
  /// GLONASS frequency channel per slot (prn).
  std::map<int, int> glonass_channels;
};

struct ParseWarning {
  ErrorCode code = ErrorCode::MalformedEpoch;
  int line = 0;  // 1-based line of the offending record
  std::string message;
};

struct RinexObsFile {
  RinexHeader header;
  std::vector<Epoch> epochs;
  std::vector<ParseWarning> warnings;
};

/// RINEX 3.x observation reader for the C1C/L1C/D1C/S1C family of each system (C1I/L1I/... on BeiDou).
/// Throws MalformedHeader when the header is unusable. Malformed epochs are dropped with a warning.
/// Satellites lacking code, phase or Doppler in an epoch are omitted from it.
RinexObsFile parse_rinex_obs(std::istream& in);

/// Writes RINEX 3.04 with F14.3 values. Throws IoFailure on stream errors and InvalidArgument for
/// values that do not fit the field.
void write_rinex_obs(const RinexHeader& header, const std::vector<Epoch>& epochs, std::ostream& out);

/// Header describing `epochs`: codes for every observed system, interval from the first two epochs.
RinexHeader make_rinex_header(const std::vector<Epoch>& epochs, const std::map<int, int>& glonass_channels = {});

/// Observation codes for pseudorange, phase, Doppler and signal strength on the simulated band.
std::vector<std::string> default_observation_codes(Constellation c);

}  // namespace trgnss
