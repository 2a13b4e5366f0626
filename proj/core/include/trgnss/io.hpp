#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trgnss/graph.hpp"
#include "trgnss/types.hpp"

namespace trgnss {

enum class TrajectoryStatus { Initial, Optimized, Truth };

std::string_view to_string(TrajectoryStatus s);
std::optional<TrajectoryStatus> trajectory_status_from_string(std::string_view text);

struct TrajectoryRecord {
  GpsTime time;
  EcefVector position = EcefVector::Zero();
  GeodeticPosition geodetic;
  TrajectoryStatus status = TrajectoryStatus::Optimized;
};

TrajectoryRecord make_trajectory_record(const GpsTime& time, const EcefVector& position, TrajectoryStatus status);

/// Columns: tow,x,y,z,lat_deg,lon_deg,height,status. Positions at 0.1 mm.
void write_trajectory_csv(const std::vector<TrajectoryRecord>& records, std::ostream& out);
/// Throws MalformedEpoch (with the line number) on unreadable rows. Times carry week 0.
std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& in);

/// Columns: week,tow,sat,x,y,z,vx,vy,vz,clock_bias,clock_drift at full double precision.
void write_satellite_states_csv(const SatelliteStateTable& table, std::ostream& out);
SatelliteStateTable read_satellite_states_csv(std::istream& in);

/// Nodes with absolute positions and clocks; edges with type, node indices, measurement and
/// information eigenvalues.
void export_graph_json(const Graph& graph, const std::vector<StateVector>& states, std::ostream& out);

struct GraphSummary {
  std::size_t nodes = 0;
  std::map<std::string, std::size_t> edges_by_type;
  std::size_t priors = 0;
  std::vector<double> trrtk_time_differences;
  double first_tow = 0.0;
  double last_tow = 0.0;
};

/// Reads back an exported graph. Throws MalformedEpoch on unreadable JSON or missing fields.
GraphSummary summarize_graph_json(std::istream& in);

}  // namespace trgnss
