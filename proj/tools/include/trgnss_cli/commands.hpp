#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trgnss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitIo = 4;

struct SolveOptions {
  std::string obs_path;
  std::string sat_states_path;
  std::string config_path;
  std::string out_dir;
  bool no_trrtk = false;
  bool no_pseudorange = false;
};

/// Each command writes human-readable progress to `out`, diagnostics to `err`, and returns an exit code.
int cmd_simulate(const std::string& config_path, const std::string& out_dir, std::ostream& out, std::ostream& err);
int cmd_solve(const SolveOptions& options, std::ostream& out, std::ostream& err);
int cmd_evaluate(const std::string& est_path, const std::string& truth_path, bool json, const std::string& label,
                 std::ostream& out, std::ostream& err);
int cmd_inspect(const std::string& graph_path, std::ostream& out, std::ostream& err);

/// Argument parsing and dispatch.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trgnss::cli
