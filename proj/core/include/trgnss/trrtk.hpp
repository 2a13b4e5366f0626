#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include <Eigen/Core>

#include "trgnss/estimation.hpp"
#include "trgnss/lambda.hpp"
#include "trgnss/types.hpp"

namespace trgnss {

struct TrRtkConfig {
  double max_time_difference = 100.0;  // s
  double ratio_threshold = 3.0;
  double phase_sigma = 0.003;          // m at zenith, per undifferenced phase
  double code_sigma = 0.5;             // m at zenith, per undifferenced pseudorange
  double elevation_mask = 15.0 * 3.14159265358979323846 / 180.0;
  double epoch_interval = 1.0;         // s, nominal spacing used by the lock-continuity check
  bool fix_ambiguities = true;
  bool model_atmosphere_change = true;
  int max_iterations = 10;
  double convergence_threshold = 1e-10;  // m
  /// Time differences attempted for loop closures at every epoch.
  std::vector<double> pair_lattice = {1, 5, 10, 20, 30, 45, 60, 80, 100};
};

/// Carrier phase (and pseudorange) differenced over time for one satellite, in meters.
struct TimeDifference {
  double phase = 0.0;
  double code = 0.0;
  double wavelength = 0.0;
};

using TimeDifferences = std::map<SatelliteId, TimeDifference>;

/// Everything needed to model ranges of one epoch pair. Non-owning.
struct PairGeometry {
  GpsTime past_time;
  GpsTime current_time;
  EcefVector past_position = EcefVector::Zero();     // approximate absolute positions
  EcefVector current_position = EcefVector::Zero();
  const SatelliteStateMap* past_states = nullptr;
  const SatelliteStateMap* current_states = nullptr;
  const AtmosphereModels* models = nullptr;          // null disables the atmosphere-change model
};

struct DoubleDiffEntry {
  SatelliteId sat;
  SatelliteId reference;
  double dd_phase = 0.0;        // m
  double dd_code = 0.0;         // m
  double dd_range_model = 0.0;  // m, DD geometric range change at the linearization baseline
  double dd_phase_atmosphere = 0.0;  // m, modeled DD change of (-I + T)
  double dd_code_atmosphere = 0.0;   // m, modeled DD change of (+I + T)
  double wavelength = 0.0;
  EcefVector los_sat = EcefVector::Zero();  // current-epoch unit vectors
  EcefVector los_reference = EcefVector::Zero();
  SatelliteState sat_past, sat_current, reference_past, reference_current;
  double phase_variance = 0.0;      // time-differenced, this satellite only
  double code_variance = 0.0;
  int group = 0;
};

struct DoubleDiffSet {
  GpsTime past_time;
  GpsTime current_time;
  EcefVector past_position = EcefVector::Zero();
  EcefVector linearization_baseline = EcefVector::Zero();
  std::vector<SatelliteId> references;  // one per (constellation, wavelength) group
  std::vector<double> reference_phase_variance;
  std::vector<double> reference_code_variance;
  std::vector<DoubleDiffEntry> entries;

  /// DD geometric range for every entry at `baseline`, and the Jacobian rows -(L_k - L_l)'.
  void evaluate(const EcefVector& baseline, Eigen::VectorXd& model, Eigen::MatrixXd& jacobian) const;
  /// Single-reference DD covariance (block diagonal over groups).
  Eigen::MatrixXd phase_covariance() const;
  Eigen::MatrixXd code_covariance() const;
};

struct BaselinePrior {
  EcefVector mean = EcefVector::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
};

struct FloatBaseline {
  EcefVector baseline = EcefVector::Zero();
  AmbiguityProblem ambiguity;
  Eigen::MatrixXd joint_covariance;  // [B, N] ordering
  int iterations = 0;
};

enum class TrRtkStatus { Fixed, Float, Rejected };

std::string_view to_string(TrRtkStatus status);

struct TrRtkResult {
  EcefVector baseline = EcefVector::Zero();  // past -> current, m
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  TrRtkStatus status = TrRtkStatus::Rejected;
  double ratio = 1.0;
  double time_difference = 0.0;  // s, current - past
  std::vector<int> dd_ambiguities;
  EcefVector float_baseline = EcefVector::Zero();
  int num_double_differences = 0;
  GpsTime past_time;
  GpsTime current_time;
};

/// Satellites tracked in both epochs with uninterrupted lock in between.
std::set<SatelliteId> detect_cycle_slips(const Epoch& past, const Epoch& current, double epoch_interval = 1.0);

/// Lambda * (phase_current - phase_past) per satellite; satellite clocks are left in.
/// Throws MissingSatellite when a requested satellite is absent from either epoch.
TimeDifferences time_single_difference(const Epoch& past, const Epoch& current,
                                       const std::set<SatelliteId>& sats);

/// Differences against the highest-elevation satellite of each (constellation, wavelength) group.
/// Throws InsufficientSatellites when fewer than 4 double differences result.
DoubleDiffSet form_double_differences(const TimeDifferences& sd, const PairGeometry& geometry,
                                      const TrRtkConfig& config);

/// Weighted least squares for the baseline and real-valued DD ambiguities from one epoch pair.
FloatBaseline solve_float_baseline(const DoubleDiffSet& dd, const TrRtkConfig& config,
                                   const BaselinePrior* prior = nullptr);

/// Full pipeline for one pair: slips, differencing, float solution, LAMBDA, fixed solution.
TrRtkResult estimate_baseline(const Epoch& past, const Epoch& current, const PairGeometry& geometry,
                              const TrRtkConfig& config, const BaselinePrior* prior = nullptr);

}  // namespace trgnss
