#include "trgnss/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "trgnss/constants.hpp"
#include "trgnss/error.hpp"
#include "trgnss/geodesy.hpp"

namespace trgnss {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_number(const std::string& s, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::MalformedEpoch, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

void check_stream(const std::ostream& out, const char* what) {
  if (!out) throw Error(ErrorCode::IoFailure, std::string("failed writing ") + what);
}

std::vector<double> eigenvalues(const Eigen::Matrix3d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues()(0), eig.eigenvalues()(1), eig.eigenvalues()(2)};
}

std::vector<double> to_array(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

std::string_view to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Initial: return "initial";
    case TrajectoryStatus::Optimized: return "optimized";
    case TrajectoryStatus::Truth: return "truth";
  }
  return "unknown";
}

std::optional<TrajectoryStatus> trajectory_status_from_string(std::string_view text) {
  for (auto s : {TrajectoryStatus::Initial, TrajectoryStatus::Optimized, TrajectoryStatus::Truth}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

TrajectoryRecord make_trajectory_record(const GpsTime& time, const EcefVector& position, TrajectoryStatus status) {
  return {time, position, ecef_to_geodetic(position), status};
}

void write_trajectory_csv(const std::vector<TrajectoryRecord>& records, std::ostream& out) {
  out << "tow,x,y,z,lat_deg,lon_deg,height,status\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.3f,%.4f,%.4f,%.4f,%.10f,%.10f,%.4f,", r.time.tow(), r.position.x(),
                  r.position.y(), r.position.z(), r.geodetic.latitude * kRadToDeg, r.geodetic.longitude * kRadToDeg,
                  r.geodetic.height);
    out << buf << to_string(r.status) << '\n';
  }
  out.flush();
  check_stream(out, "trajectory CSV");
}

std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& in) {
  std::vector<TrajectoryRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("tow,", 0) == 0) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 8) {
      throw Error(ErrorCode::MalformedEpoch, "line " + std::to_string(line_no) + ": expected 8 columns");
    }
    TrajectoryRecord r;
    r.time = GpsTime(0, to_number(cells[0], line_no));
    r.position = EcefVector(to_number(cells[1], line_no), to_number(cells[2], line_no), to_number(cells[3], line_no));
    r.geodetic = {to_number(cells[4], line_no) * kDegToRad, to_number(cells[5], line_no) * kDegToRad,
                  to_number(cells[6], line_no)};
    const auto status = trajectory_status_from_string(cells[7]);
    if (!status) throw Error(ErrorCode::MalformedEpoch, "line " + std::to_string(line_no) + ": unknown status");
    r.status = *status;
    out.push_back(r);
  }
  return out;
}

void write_satellite_states_csv(const SatelliteStateTable& table, std::ostream& out) {
  out << "week,tow,sat,x,y,z,vx,vy,vz,clock_bias,clock_drift\n";
  char buf[512];
  for (const auto& [key, entry] : table.entries()) {
    const auto& [time, states] = entry;
    for (const auto& [sat, s] : states) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", time.week(),
                    time.tow(), to_string(sat).c_str(), s.position.x(), s.position.y(), s.position.z(),
                    s.velocity.x(), s.velocity.y(), s.velocity.z(), s.clock_bias, s.clock_drift);
      out << buf;
    }
  }
  out.flush();
  check_stream(out, "satellite state CSV");
}

SatelliteStateTable read_satellite_states_csv(std::istream& in) {
  SatelliteStateTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("week,", 0) == 0) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 11) {
      throw Error(ErrorCode::MalformedEpoch, "line " + std::to_string(line_no) + ": expected 11 columns");
    }
    const auto sat = parse_satellite_id(cells[2]);
    if (!sat) throw Error(ErrorCode::MalformedEpoch, "line " + std::to_string(line_no) + ": bad satellite id");
    const double week = to_number(cells[0], line_no);
    SatelliteState s;
    s.position = {to_number(cells[3], line_no), to_number(cells[4], line_no), to_number(cells[5], line_no)};
    s.velocity = {to_number(cells[6], line_no), to_number(cells[7], line_no), to_number(cells[8], line_no)};
    s.clock_bias = to_number(cells[9], line_no);
    s.clock_drift = to_number(cells[10], line_no);
    table.insert(GpsTime(static_cast<int>(week), to_number(cells[1], line_no)), *sat, s);
  }
  return table;
}

void export_graph_json(const Graph& graph, const std::vector<StateVector>& states, std::ostream& out) {
  if (states.size() != graph.node_count()) {
    throw Error(ErrorCode::InvalidArgument, "state count does not match graph nodes");
  }
  using nlohmann::json;
  json j;
  j["origin"] = to_array(graph.origin);
  json nodes = json::array();
  for (std::size_t i = 0; i < states.size(); ++i) {
    json clocks;
    for (auto c : kAllConstellations) clocks[std::string(to_string(c))] = states[i].clock_bias(c);
    nodes.push_back({{"index", i},
                     {"tow", graph.node_times[i].tow()},
                     {"week", graph.node_times[i].week()},
                     {"position", to_array(absolute_position(graph, states[i]))},
                     {"clocks", clocks}});
  }
  j["nodes"] = std::move(nodes);

  json edges = json::array();
  for (const auto& f : graph.velocity_factors) {
    edges.push_back({{"type", "velocity"},
                     {"nodes", {f.node_i, f.node_j}},
                     {"measurement", to_array(f.measured_velocity)},
                     {"dt", f.dt},
                     {"information_eigenvalues", eigenvalues(f.information)}});
  }
  for (const auto& f : graph.trrtk_factors) {
    edges.push_back({{"type", "trrtk"},
                     {"nodes", {f.node_past, f.node_current}},
                     {"measurement", to_array(f.baseline)},
                     {"time_difference", f.time_difference},
                     {"ratio", f.ratio},
                     {"information_eigenvalues", eigenvalues(f.information)}});
  }
  for (const auto& f : graph.pseudorange_factors) {
    edges.push_back({{"type", "pseudorange"},
                     {"nodes", {f.node}},
                     {"sat", to_string(f.sat)},
                     {"measurement", f.corrected_measurement},
                     {"elevation_deg", f.elevation * kRadToDeg},
                     {"information_eigenvalues", {f.information}}});
  }
  j["edges"] = std::move(edges);
  json priors = json::array();
  for (const auto& p : graph.priors) {
    priors.push_back({{"node", p.node}, {"dimension", p.dimension}, {"mean", p.mean}, {"information", p.information}});
  }
  j["priors"] = std::move(priors);
  out << j.dump(1) << '\n';
  out.flush();
  check_stream(out, "graph JSON");
}

GraphSummary summarize_graph_json(std::istream& in) {
  using nlohmann::json;
  GraphSummary s;
  try {
    const json j = json::parse(in);
    const auto& nodes = j.at("nodes");
    s.nodes = nodes.size();
    if (!nodes.empty()) {
      s.first_tow = nodes.front().at("tow").get<double>();
      s.last_tow = nodes.back().at("tow").get<double>();
    }
    for (const auto& e : j.at("edges")) {
      const std::string type = e.at("type").get<std::string>();
      ++s.edges_by_type[type];
      if (type == "trrtk") s.trrtk_time_differences.push_back(e.at("time_difference").get<double>());
    }
    if (j.contains("priors")) s.priors = j.at("priors").size();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedEpoch, std::string("graph JSON: ") + e.what());
  }
  return s;
}

}  // namespace trgnss
