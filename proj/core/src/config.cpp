#include "trgnss/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "trgnss/constants.hpp"
#include "trgnss/error.hpp"

namespace trgnss {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& parent, const std::string& name, std::set<std::string> allowed)
      : Section(parent.contains(name) ? &parent.at(name) : nullptr, name, std::move(allowed)) {}

  /// `node` must outlive the section.
  Section(const json* node, const std::string& name, std::set<std::string> allowed) : name_(name), node_(node) {
    if (!node_) return;
    if (!node_->is_object()) fail("must be an object");
    for (const auto& [key, value] : node_->items()) {
      if (!allowed.count(key)) fail("unknown key '" + key + "'");
    }
  }

  template <typename T>
  void get(const std::string& key, T& target) const {
    if (!node_ || !node_->contains(key)) return;
    try {
      target = node_->at(key).get<T>();
    } catch (const json::exception&) {
      fail("key '" + key + "' has the wrong type");
    }
  }

  void get_degrees(const std::string& key, double& radians) const {
    double deg = radians * kRadToDeg;
    get(key, deg);
    radians = deg * kDegToRad;
  }

  const json* raw(const std::string& key) const {
    if (!node_ || !node_->contains(key)) return nullptr;
    return &node_->at(key);
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorCode::InvalidConfig, name_ + ": " + message);
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
};

Constellation system_from_name(const std::string& name, const Section& s) {
  for (auto c : kAllConstellations)
    if (name == to_string(c)) return c;
  s.fail("unknown constellation '" + name + "'");
}

void read_scenario(const json& root, ScenarioConfig& sc) {
  const Section s(root, "scenario",
                  {"start_week", "start_tow", "duration", "rate", "origin", "trajectory", "speed", "heading_deg",
                   "circle_radius", "waypoints", "noise", "cycle_slips", "receiver_clock", "satellite_clock",
                   "satellites", "elevation_mask_deg", "seed", "apply_ionosphere", "apply_troposphere"});
  int week = sc.start_time.week();
  double tow = sc.start_time.tow();
  s.get("start_week", week);
  s.get("start_tow", tow);
  sc.start_time = GpsTime(week, tow);
  s.get("duration", sc.duration);
  s.get("rate", sc.rate);
  s.get("speed", sc.speed);
  s.get_degrees("heading_deg", sc.heading);
  s.get("circle_radius", sc.circle_radius);
  s.get_degrees("elevation_mask_deg", sc.elevation_mask);
  s.get("seed", sc.seed);
  s.get("apply_ionosphere", sc.apply_ionosphere);
  s.get("apply_troposphere", sc.apply_troposphere);

  std::string trajectory(to_string(sc.trajectory));
  s.get("trajectory", trajectory);
  const auto type = trajectory_type_from_string(trajectory);
  if (!type) s.fail("unknown trajectory '" + trajectory + "'");
  sc.trajectory = *type;

  if (const json* raw = s.raw("origin")) {
    const Section o(raw, "origin", {"lat_deg", "lon_deg", "height"});
    o.get_degrees("lat_deg", sc.origin.latitude);
    o.get_degrees("lon_deg", sc.origin.longitude);
    o.get("height", sc.origin.height);
  }
  if (const json* raw = s.raw("waypoints")) {
    std::vector<std::vector<double>> points;
    s.get("waypoints", points);
    sc.waypoints.clear();
    for (const auto& p : points) {
      if (p.size() != 2 && p.size() != 3) s.fail("waypoints need [east, north] or [east, north, up]");
      sc.waypoints.emplace_back(p[0], p[1], p.size() == 3 ? p[2] : 0.0);
    }
    (void)raw;
  }
  if (const json* raw = s.raw("noise")) {
    const Section o(raw, "noise", {"pseudorange_sigma", "phase_sigma", "doppler_sigma"});
    o.get("pseudorange_sigma", sc.noise.pseudorange_sigma);
    o.get("phase_sigma", sc.noise.phase_sigma);
    o.get("doppler_sigma", sc.noise.doppler_sigma);
  }
  if (const json* raw = s.raw("cycle_slips")) {
    if (!raw->is_array()) s.fail("cycle_slips must be an array");
    sc.cycle_slips.clear();
    for (const auto& entry : *raw) {
      const Section o(&entry, "cycle_slips", {"sat", "time"});
      std::string sat;
      CycleSlip slip;
      o.get("sat", sat);
      o.get("time", slip.time);
      const auto id = parse_satellite_id(sat);
      if (!id) o.fail("bad satellite '" + sat + "'");
      slip.sat = *id;
      sc.cycle_slips.push_back(slip);
    }
  }
  if (const json* raw = s.raw("receiver_clock")) {
    const Section o(raw, "receiver_clock", {"bias0", "drift", "system_offsets"});
    o.get("bias0", sc.receiver_clock.bias0);
    o.get("drift", sc.receiver_clock.drift);
    std::map<std::string, double> offsets;
    if (o.raw("system_offsets")) {
      o.get("system_offsets", offsets);
      sc.receiver_clock.system_offsets.clear();
      for (const auto& [name, value] : offsets) sc.receiver_clock.system_offsets[system_from_name(name, o)] = value;
    }
  }
  if (const json* raw = s.raw("satellite_clock")) {
    const Section o(raw, "satellite_clock", {"bias_sigma", "drift", "drift_spread"});
    o.get("bias_sigma", sc.satellite_clock.bias_sigma);
    o.get("drift", sc.satellite_clock.drift);
    o.get("drift_spread", sc.satellite_clock.drift_spread);
  }
  if (s.raw("satellites")) {
    std::map<std::string, int> counts;
    s.get("satellites", counts);
    sc.satellite_counts.clear();
    for (const auto& [name, count] : counts) sc.satellite_counts[system_from_name(name, s)] = count;
  }
}

void read_solver(const json& root, SolverConfig& sv) {
  const Section s(root, "solver",
                  {"elevation_mask_deg", "pseudorange_a", "pseudorange_b", "doppler_sigma", "velocity_sigma_floor",
                   "origin_prior_sigma", "clock_prior_sigma", "max_iterations", "relinearization_threshold",
                   "trrtk_passes", "use_trrtk", "use_pseudorange", "apply_ionosphere", "apply_troposphere",
                   "initial_position"});
  double mask = sv.estimation.elevation_mask;
  s.get_degrees("elevation_mask_deg", mask);
  sv.estimation.elevation_mask = mask;
  sv.graph.elevation_mask = mask;
  s.get("pseudorange_a", sv.estimation.pseudorange_a);
  s.get("pseudorange_b", sv.estimation.pseudorange_b);
  sv.graph.pseudorange_a = sv.estimation.pseudorange_a;
  sv.graph.pseudorange_b = sv.estimation.pseudorange_b;
  s.get("doppler_sigma", sv.estimation.doppler_sigma);
  s.get("velocity_sigma_floor", sv.estimation.velocity_sigma_floor);
  sv.graph.velocity_sigma_floor = sv.estimation.velocity_sigma_floor;
  s.get("origin_prior_sigma", sv.graph.origin_prior_sigma);
  s.get("clock_prior_sigma", sv.graph.clock_prior_sigma);
  s.get("max_iterations", sv.optimizer.max_iterations);
  s.get("relinearization_threshold", sv.optimizer.relinearization_threshold);
  s.get("trrtk_passes", sv.trrtk_passes);
  s.get("use_trrtk", sv.graph.use_trrtk_factors);
  s.get("use_pseudorange", sv.graph.use_pseudorange_factors);
  s.get("apply_ionosphere", sv.graph.apply_ionosphere);
  s.get("apply_troposphere", sv.graph.apply_troposphere);
  if (const json* raw = s.raw("initial_position")) {
    const Section o(raw, "initial_position", {"x", "y", "z", "sigma"});
    KnownPosition k;
    o.get("x", k.position.x());
    o.get("y", k.position.y());
    o.get("z", k.position.z());
    o.get("sigma", k.sigma);
    if (!(k.sigma > 0.0)) o.fail("sigma must be > 0");
    sv.graph.initial_position_prior = k;
  }
  if (!(sv.graph.origin_prior_sigma > 0.0 && sv.graph.clock_prior_sigma > 0.0)) s.fail("prior sigmas must be > 0");
  if (sv.optimizer.max_iterations < 1) s.fail("max_iterations must be >= 1");
  if (sv.trrtk_passes < 1) s.fail("trrtk_passes must be >= 1");
  if (!(sv.estimation.doppler_sigma > 0.0)) s.fail("doppler_sigma must be > 0");
}

void read_trrtk(const json& root, SolverConfig& sv) {
  const Section s(root, "trrtk",
                  {"max_time_difference", "ratio_threshold", "phase_sigma", "code_sigma", "elevation_mask_deg",
                   "epoch_interval", "fix_ambiguities", "model_atmosphere_change", "pair_lattice", "baseline_prior",
                   "baseline_prior_inflation"});
  TrRtkConfig& t = sv.trrtk;
  s.get("max_time_difference", t.max_time_difference);
  s.get("ratio_threshold", t.ratio_threshold);
  s.get("phase_sigma", t.phase_sigma);
  s.get("code_sigma", t.code_sigma);
  s.get_degrees("elevation_mask_deg", t.elevation_mask);
  s.get("epoch_interval", t.epoch_interval);
  s.get("fix_ambiguities", t.fix_ambiguities);
  s.get("model_atmosphere_change", t.model_atmosphere_change);
  s.get("pair_lattice", t.pair_lattice);
  s.get("baseline_prior", sv.use_baseline_prior);
  s.get("baseline_prior_inflation", sv.baseline_prior_inflation);
  if (!(t.max_time_difference > 0.0)) s.fail("max_time_difference must be > 0");
  if (!(t.ratio_threshold >= 1.0)) s.fail("ratio_threshold must be >= 1");
  if (!(t.phase_sigma > 0.0 && t.code_sigma > 0.0)) s.fail("sigmas must be > 0");
}

void read_atmosphere(const json& root, AtmosphereModels& m) {
  const Section iono(root, "iono", {"alpha", "beta"});
  iono.get("alpha", m.iono.alpha);
  iono.get("beta", m.iono.beta);
  const Section tropo(root, "tropo", {"pressure", "temperature", "humidity"});
  tropo.get("pressure", m.tropo.pressure);
  tropo.get("temperature", m.tropo.temperature);
  tropo.get("humidity", m.tropo.humidity);
  m.tropo.validate();
}

}  // namespace

AppConfig load_config(std::istream& in) {
  json root;
  try {
    root = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  for (const auto& [key, value] : root.items()) {
    static const std::set<std::string> kSections = {"scenario", "solver", "trrtk", "iono", "tropo"};
    if (!kSections.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown section '" + key + "'");
  }
  AppConfig cfg;
  read_scenario(root, cfg.scenario);
  read_atmosphere(root, cfg.scenario.atmosphere);
  cfg.solver.atmosphere = cfg.scenario.atmosphere;
  read_solver(root, cfg.solver);
  read_trrtk(root, cfg.solver);
  cfg.scenario.validate();
  return cfg;
}

AppConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path);
  return load_config(in);
}

}  // namespace trgnss
