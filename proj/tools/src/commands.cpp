#include "trgnss_cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "trgnss/config.hpp"
#include "trgnss/error.hpp"
#include "trgnss/io.hpp"
#include "trgnss/metrics.hpp"
#include "trgnss/pipeline.hpp"
#include "trgnss/rinex.hpp"
#include "trgnss/simulator.hpp"

namespace trgnss::cli {

namespace fs = std::filesystem;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader:
    case ErrorCode::MalformedEpoch:
    case ErrorCode::LengthMismatch:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidWaypoints:
      return kExitParse;
    case ErrorCode::NoConvergence: return kExitNoConvergence;
    case ErrorCode::IoFailure: return kExitIo;
    default: return kExitFailure;
  }
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  return out;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create directory " + dir + ": " + ec.message());
}

AppConfig config_or_default(const std::string& path) {
  return path.empty() ? AppConfig{} : load_config_file(path);
}

std::vector<TrajectoryRecord> select(const std::vector<TrajectoryRecord>& rows,
                                     std::initializer_list<TrajectoryStatus> preference) {
  for (auto status : preference) {
    std::vector<TrajectoryRecord> out;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
                 [&](const TrajectoryRecord& r) { return r.status == status; });
    if (!out.empty()) return out;
  }
  return rows;
}

}  // namespace

int cmd_simulate(const std::string& config_path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const AppConfig cfg = config_or_default(config_path);
    const SimulationResult sim = simulate(cfg.scenario);
    make_dir(out_dir);

    std::map<int, int> channels;
    for (const auto& [sat, e] : sim.constellation)
      if (sat.constellation == Constellation::GLO) channels[sat.prn] = e.glonass_channel;
    {
      auto f = open_out(fs::path(out_dir) / "obs.rnx");
      write_rinex_obs(make_rinex_header(sim.epochs, channels), sim.epochs, f);
    }
    {
      std::vector<TrajectoryRecord> truth;
      for (const auto& t : sim.truth) truth.push_back(make_trajectory_record(t.time, t.position, TrajectoryStatus::Truth));
      auto f = open_out(fs::path(out_dir) / "truth.csv");
      write_trajectory_csv(truth, f);
    }
    {
      auto f = open_out(fs::path(out_dir) / "sat_states.csv");
      write_satellite_states_csv(sim.sat_states, f);
    }
    out << "simulated " << sim.epochs.size() << " epochs, " << sim.constellation.size() << " satellites -> "
        << out_dir << '\n';
    return kExitOk;
  });
}

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    AppConfig cfg = config_or_default(opt.config_path);
    if (opt.no_trrtk) cfg.solver.graph.use_trrtk_factors = false;
    if (opt.no_pseudorange) cfg.solver.graph.use_pseudorange_factors = false;

    RinexObsFile obs;
    {
      auto f = open_in(opt.obs_path);
      obs = parse_rinex_obs(f);
    }
    for (const auto& w : obs.warnings) {
      err << "warning: " << opt.obs_path << ":" << w.line << ": " << to_string(w.code) << ": " << w.message << '\n';
    }
    SatelliteStateTable states;
    {
      auto f = open_in(opt.sat_states_path);
      states = read_satellite_states_csv(f);
    }

    const SolveResult res = solve_trajectory(obs.epochs, states, cfg.solver);
    make_dir(opt.out_dir);

    {
      std::vector<TrajectoryRecord> rows;
      for (std::size_t i = 0; i < res.times.size(); ++i)
        rows.push_back(make_trajectory_record(res.times[i], res.initial_positions[i], TrajectoryStatus::Initial));
      for (std::size_t i = 0; i < res.times.size(); ++i)
        rows.push_back(make_trajectory_record(res.times[i], res.optimized_positions[i], TrajectoryStatus::Optimized));
      auto f = open_out(fs::path(opt.out_dir) / "trajectory.csv");
      write_trajectory_csv(rows, f);
    }
    {
      auto f = open_out(fs::path(opt.out_dir) / "graph.json");
      export_graph_json(res.optimization.graph, res.optimization.states, f);
    }

    const Graph& g = res.optimization.graph;
    const OptimizerReport& rep = res.optimization.report;
    std::ostringstream log;
    char buf[256];
    log << "method: " << res.method_label << '\n';
    log << "epochs: " << res.times.size() << '\n';
    log << "factors: velocity " << g.velocity_factors.size() << ", trrtk " << g.trrtk_factors.size()
        << ", pseudorange " << g.pseudorange_factors.size() << ", priors " << g.priors.size() << '\n';
    std::snprintf(buf, sizeof buf, "optimizer: initial_cost %.6g final_cost %.6g iterations %d converged %s\n",
                  rep.initial_cost, rep.final_cost, rep.iterations, rep.converged ? "yes" : "no");
    log << buf;
    log << "optimizer: relinearizations " << rep.relinearizations << " rejected_steps " << rep.rejected_steps << '\n';
    log << "costs:";
    for (double c : rep.costs) {
      std::snprintf(buf, sizeof buf, " %.9g", c);
      log << buf;
    }
    log << '\n';
    const TrRtkStats& st = res.trrtk_stats;
    std::snprintf(buf, sizeof buf,
                  "trrtk: attempted %zu fixed %zu (%.1f%%) float %zu rejected %zu failed %zu\n", st.attempted,
                  st.fixed, 100.0 * st.fix_rate(), st.float_only, st.rejected, st.failed);
    log << buf;
    log << "trrtk histogram (time difference s: attempted fixed)\n";
    for (const auto& [dt, b] : st.histogram) {
      std::snprintf(buf, sizeof buf, "  %4d: %6zu %6zu\n", dt, b.attempted, b.fixed);
      log << buf;
    }
    for (const auto& line : res.log) log << "note: " << line << '\n';
    {
      auto f = open_out(fs::path(opt.out_dir) / "solve.log");
      f << log.str();
      if (!f) throw Error(ErrorCode::IoFailure, "failed writing solve.log");
    }
    out << log.str();
    if (!rep.converged) {
      err << "error: optimizer did not converge within " << rep.iterations << " iterations\n";
      return kExitNoConvergence;
    }
    return kExitOk;
  });
}

int cmd_evaluate(const std::string& est_path, const std::string& truth_path, bool json, const std::string& label,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<TrajectoryRecord> est_rows, truth_rows;
    {
      auto f = open_in(est_path);
      est_rows = read_trajectory_csv(f);
    }
    {
      auto f = open_in(truth_path);
      truth_rows = read_trajectory_csv(f);
    }
    const auto est = select(est_rows, {TrajectoryStatus::Optimized, TrajectoryStatus::Initial});
    const auto truth = select(truth_rows, {TrajectoryStatus::Truth});
    if (est.size() != truth.size()) {
      throw Error(ErrorCode::LengthMismatch, "estimate has " + std::to_string(est.size()) + " epochs, truth has " +
                                                 std::to_string(truth.size()));
    }
    std::vector<EcefVector> a, b;
    for (std::size_t i = 0; i < est.size(); ++i) {
      if (std::abs(est[i].time.tow() - truth[i].time.tow()) > 5e-4) {
        throw Error(ErrorCode::LengthMismatch, "epoch " + std::to_string(i) + " tow differs between files");
      }
      a.push_back(est[i].position);
      b.push_back(truth[i].position);
    }
    const EvaluationReport r = evaluate_trajectory(a, b, label);
    if (json) {
      nlohmann::json j = {{"method_label", r.method_label}, {"rpe_mean", r.rpe_mean},   {"rpe_max", r.rpe_max},
                          {"ape_mean", r.ape_mean},         {"rpe_series", r.rpe_series}, {"ape_series", r.ape_series}};
      out << j.dump(1) << '\n';
    } else {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%-24s %12s %12s %12s\n", "method", "RPE m", "max RPE m", "APE m");
      out << buf;
      std::snprintf(buf, sizeof buf, "%-24s %12.4f %12.4f %12.4f\n", r.method_label.c_str(), r.rpe_mean, r.rpe_max,
                    r.ape_mean);
      out << buf;
    }
    return kExitOk;
  });
}

int cmd_inspect(const std::string& graph_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    GraphSummary s;
    {
      auto f = open_in(graph_path);
      s = summarize_graph_json(f);
    }
    out << "nodes: " << s.nodes << " (tow " << s.first_tow << " .. " << s.last_tow << ")\n";
    for (const auto& [type, count] : s.edges_by_type) out << "edges " << type << ": " << count << '\n';
    out << "priors: " << s.priors << '\n';
    if (!s.trrtk_time_differences.empty()) {
      const auto [lo, hi] = std::minmax_element(s.trrtk_time_differences.begin(), s.trrtk_time_differences.end());
      out << "trrtk time difference: min " << *lo << " s, max " << *hi << " s\n";
      std::map<long, std::size_t> hist;
      for (double dt : s.trrtk_time_differences) ++hist[std::lround(dt)];
      for (const auto& [dt, count] : hist) out << "  " << dt << " s: " << count << '\n';
    }
    return kExitOk;
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-relative RTK factor-graph trajectory estimation"};
  app.require_subcommand(1);

  std::string config, out_dir;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic scenario");
  sim->add_option("--config", config, "Scenario config (JSON)");
  sim->add_option("--out", out_dir, "Output directory")->required();

  SolveOptions solve;
  auto* sol = app.add_subcommand("solve", "Estimate a trajectory from observations");
  sol->add_option("--obs", solve.obs_path, "RINEX 3 observation file")->required();
  sol->add_option("--sat-states", solve.sat_states_path, "Satellite state CSV")->required();
  sol->add_option("--config", solve.config_path, "Solver config (JSON)");
  sol->add_option("--out", solve.out_dir, "Output directory")->required();
  sol->add_flag("--no-trrtk", solve.no_trrtk, "Drop TR-RTK factors");
  sol->add_flag("--no-pseudorange-factors", solve.no_pseudorange, "Drop pseudorange factors");

  std::string est, truth, label = "estimate";
  bool json = false;
  auto* ev = app.add_subcommand("evaluate", "Compare an estimated trajectory with truth");
  ev->add_option("--est", est, "Estimated trajectory CSV")->required();
  ev->add_option("--truth", truth, "Truth trajectory CSV")->required();
  ev->add_option("--label", label, "Method label for the report");
  ev->add_flag("--json", json, "Print JSON instead of a table");

  std::string graph;
  auto* ins = app.add_subcommand("inspect", "Summarize an exported graph");
  ins->add_option("--graph", graph, "Graph JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitParse;
  }

  if (*sim) return cmd_simulate(config, out_dir, out, err);
  if (*sol) return cmd_solve(solve, out, err);
  if (*ev) return cmd_evaluate(est, truth, json, label, out, err);
  return cmd_inspect(graph, out, err);
}

}  // namespace trgnss::cli
