#include "trgnss/trrtk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "trgnss/error.hpp"
#include "trgnss/geodesy.hpp"

namespace trgnss {

namespace {

constexpr double kMaxNormalCondition = 1e14;

struct SatGeometry {
  double elevation_past = 0.0;
  double elevation_current = 0.0;
  double phase_atmosphere = 0.0;  // (-I + T)_current - (-I + T)_past
  double code_atmosphere = 0.0;   // (+I + T)_current - (+I + T)_past
};

void check_conditioning(const Eigen::MatrixXd& normal, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxNormalCondition) {
    throw Error(ErrorCode::SingularGeometry, std::string(what) + " normal matrix is singular");
  }
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "double-difference covariance is not positive definite");
  }
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

Eigen::MatrixXd single_reference_covariance(const DoubleDiffSet& dd, bool phase) {
  const auto m = static_cast<Eigen::Index>(dd.entries.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& ei = dd.entries[i];
    const auto& ref_var = phase ? dd.reference_phase_variance : dd.reference_code_variance;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (dd.entries[j].group == ei.group) cov(i, j) = ref_var[ei.group];
    }
    cov(i, i) += phase ? ei.phase_variance : ei.code_variance;
  }
  return cov;
}

}  // namespace

std::string_view to_string(TrRtkStatus status) {
  switch (status) {
    case TrRtkStatus::Fixed: return "Fixed";
    case TrRtkStatus::Float: return "Float";
    case TrRtkStatus::Rejected: return "Rejected";
  }
  return "?";
}

void DoubleDiffSet::evaluate(const EcefVector& baseline, Eigen::VectorXd& model,
                             Eigen::MatrixXd& jacobian) const {
  const auto m = static_cast<Eigen::Index>(entries.size());
  model.resize(m);
  jacobian.resize(m, 3);
  const EcefVector current = past_position + baseline;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& e = entries[i];
    const LineOfSight sat_now = line_of_sight(current, e.sat_current);
    const LineOfSight ref_now = line_of_sight(current, e.reference_current);
    const double sat_then = line_of_sight(past_position, e.sat_past).range;
    const double ref_then = line_of_sight(past_position, e.reference_past).range;
    model(i) = (sat_now.range - sat_then) - (ref_now.range - ref_then);
    jacobian.row(i) = -(sat_now.unit - ref_now.unit).transpose();
  }
}

Eigen::MatrixXd DoubleDiffSet::phase_covariance() const { return single_reference_covariance(*this, true); }
Eigen::MatrixXd DoubleDiffSet::code_covariance() const { return single_reference_covariance(*this, false); }

std::set<SatelliteId> detect_cycle_slips(const Epoch& past, const Epoch& current, double epoch_interval) {
  const bool ordered = !(current.time < past.time);
  const Epoch& early = ordered ? past : current;
  const Epoch& late = ordered ? current : past;
  const double dt = late.time - early.time;
  const long elapsed = epoch_interval > 0.0 ? std::lround(dt / epoch_interval) : 0;

  std::set<SatelliteId> locked;
  for (const auto& obs : late.observations) {
    const Observation* before = early.find(obs.sat);
    if (!before) continue;
    if (elapsed > 0 && obs.loss_of_lock) continue;
    if (obs.lock_count < before->lock_count) continue;
    // A reset-and-regrow between the epochs leaves the counter short of the elapsed epochs.
    if (obs.lock_count - before->lock_count != elapsed) continue;
    locked.insert(obs.sat);
  }
  return locked;
}

TimeDifferences time_single_difference(const Epoch& past, const Epoch& current,
                                       const std::set<SatelliteId>& sats) {
  TimeDifferences out;
  for (const auto& sat : sats) {
    const Observation* a = past.find(sat);
    const Observation* b = current.find(sat);
    if (!a || !b) {
      throw Error(ErrorCode::MissingSatellite, to_string(sat) + " missing from an epoch of the pair");
    }
    TimeDifference td;
    td.wavelength = b->wavelength;
    td.phase = b->wavelength * (b->carrier_phase - a->carrier_phase);
    td.code = b->pseudorange - a->pseudorange;
    out.emplace(sat, td);
  }
  return out;
}

DoubleDiffSet form_double_differences(const TimeDifferences& sd, const PairGeometry& geometry,
                                      const TrRtkConfig& config) {
  if (!geometry.past_states || !geometry.current_states) {
    throw Error(ErrorCode::InvalidArgument, "pair geometry lacks satellite states");
  }
  const GeodeticPosition geo_past = ecef_to_geodetic(geometry.past_position);
  const GeodeticPosition geo_current = ecef_to_geodetic(geometry.current_position);

  // Group key: constellation and wavelength in picometers.
  std::map<std::pair<int, long long>, std::vector<SatelliteId>> groups;
  std::map<SatelliteId, SatGeometry> geo;
  for (const auto& [sat, td] : sd) {
    auto past_it = geometry.past_states->find(sat);
    auto cur_it = geometry.current_states->find(sat);
    if (past_it == geometry.past_states->end() || cur_it == geometry.current_states->end()) continue;
    if (!(td.wavelength > 0.0)) continue;

    const LineOfSight los_past = line_of_sight(geometry.past_position, past_it->second);
    const LineOfSight los_cur = line_of_sight(geometry.current_position, cur_it->second);
    const ElevationAzimuth ea_past = elevation_azimuth(geo_past, los_past.sat_position);
    const ElevationAzimuth ea_cur = elevation_azimuth(geo_current, los_cur.sat_position);
    if (ea_past.elevation < config.elevation_mask || ea_cur.elevation < config.elevation_mask) continue;

    SatGeometry g;
    g.elevation_past = ea_past.elevation;
    g.elevation_current = ea_cur.elevation;
    if (geometry.models && config.model_atmosphere_change) {
      const PropagationDelays then = propagation_delays(*geometry.models, geometry.past_time, geo_past,
                                                        ea_past.elevation, ea_past.azimuth);
      const PropagationDelays now = propagation_delays(*geometry.models, geometry.current_time, geo_current,
                                                       ea_cur.elevation, ea_cur.azimuth);
      g.phase_atmosphere = (-now.ionosphere + now.troposphere) - (-then.ionosphere + then.troposphere);
      g.code_atmosphere = (now.ionosphere + now.troposphere) - (then.ionosphere + then.troposphere);
    }
    geo.emplace(sat, g);
    groups[{index_of(sat.constellation), std::llround(td.wavelength * 1e12)}].push_back(sat);
  }

  auto td_variance = [](double sigma, double el_a, double el_b) {
    const double a = sigma / std::sin(el_a), b = sigma / std::sin(el_b);
    return a * a + b * b;
  };

  DoubleDiffSet dd;
  dd.past_time = geometry.past_time;
  dd.current_time = geometry.current_time;
  dd.past_position = geometry.past_position;
  dd.linearization_baseline = geometry.current_position - geometry.past_position;

  for (const auto& [key, members] : groups) {
    if (members.size() < 2) continue;
    // Members are in SatelliteId order, so ties resolve to the lowest PRN.
    SatelliteId ref = members.front();
    for (const auto& sat : members) {
      if (geo.at(sat).elevation_current > geo.at(ref).elevation_current) ref = sat;
    }
    const int group = static_cast<int>(dd.references.size());
    const SatGeometry& gr = geo.at(ref);
    dd.references.push_back(ref);
    dd.reference_phase_variance.push_back(td_variance(config.phase_sigma, gr.elevation_past, gr.elevation_current));
    dd.reference_code_variance.push_back(td_variance(config.code_sigma, gr.elevation_past, gr.elevation_current));

    for (const auto& sat : members) {
      if (sat == ref) continue;
      const SatGeometry& gs = geo.at(sat);
      DoubleDiffEntry e;
      e.sat = sat;
      e.reference = ref;
      e.group = group;
      e.dd_phase = sd.at(sat).phase - sd.at(ref).phase;
      e.dd_code = sd.at(sat).code - sd.at(ref).code;
      e.dd_phase_atmosphere = gs.phase_atmosphere - gr.phase_atmosphere;
      e.dd_code_atmosphere = gs.code_atmosphere - gr.code_atmosphere;
      e.wavelength = sd.at(sat).wavelength;
      e.sat_past = geometry.past_states->at(sat);
      e.sat_current = geometry.current_states->at(sat);
      e.reference_past = geometry.past_states->at(ref);
      e.reference_current = geometry.current_states->at(ref);
      e.phase_variance = td_variance(config.phase_sigma, gs.elevation_past, gs.elevation_current);
      e.code_variance = td_variance(config.code_sigma, gs.elevation_past, gs.elevation_current);
      dd.entries.push_back(e);
    }
  }

  if (dd.entries.size() < 4) {
    throw Error(ErrorCode::InsufficientSatellites,
                std::to_string(dd.entries.size()) + " double differences (need at least 4)");
  }

  Eigen::VectorXd model;
  Eigen::MatrixXd jac;
  dd.evaluate(dd.linearization_baseline, model, jac);
  for (std::size_t i = 0; i < dd.entries.size(); ++i) {
    dd.entries[i].dd_range_model = model(static_cast<Eigen::Index>(i));
    dd.entries[i].los_sat = line_of_sight(geometry.current_position, dd.entries[i].sat_current).unit;
    dd.entries[i].los_reference = line_of_sight(geometry.current_position, dd.entries[i].reference_current).unit;
  }
  return dd;
}

FloatBaseline solve_float_baseline(const DoubleDiffSet& dd, const TrRtkConfig& config,
                                   const BaselinePrior* prior) {
  const auto m = static_cast<Eigen::Index>(dd.entries.size());
  if (m < 4) {
    throw Error(ErrorCode::InsufficientSatellites, "float baseline needs at least 4 double differences");
  }
  const Eigen::MatrixXd wp = spd_inverse(dd.phase_covariance());
  const Eigen::MatrixXd wc = spd_inverse(dd.code_covariance());
  Eigen::Matrix3d prior_info = Eigen::Matrix3d::Zero();
  if (prior) prior_info = prior->covariance.inverse();

  Eigen::VectorXd lambda(m), phase(m), code(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& e = dd.entries[i];
    lambda(i) = e.wavelength;
    phase(i) = e.dd_phase - e.dd_phase_atmosphere;
    code(i) = e.dd_code - e.dd_code_atmosphere;
  }
  const Eigen::MatrixXd lam_wp = lambda.asDiagonal() * wp;  // diag(lambda) Wp
  const Eigen::MatrixXd nn = lam_wp * lambda.asDiagonal();

  FloatBaseline out;
  EcefVector baseline = dd.linearization_baseline;
  Eigen::VectorXd ambiguities = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd normal(3 + m, 3 + m);
  Eigen::VectorXd model;
  Eigen::MatrixXd jac;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    dd.evaluate(baseline, model, jac);
    const Eigen::VectorXd yp = phase - model;
    const Eigen::VectorXd yc = code - model;
    const Eigen::MatrixXd jt_wp = jac.transpose() * wp;
    const Eigen::MatrixXd jt_wc = jac.transpose() * wc;

    normal.topLeftCorner(3, 3) = jt_wp * jac + jt_wc * jac + prior_info;
    normal.topRightCorner(3, m) = jt_wp * lambda.asDiagonal();
    normal.bottomLeftCorner(m, 3) = normal.topRightCorner(3, m).transpose();
    normal.bottomRightCorner(m, m) = nn;

    Eigen::VectorXd rhs(3 + m);
    rhs.head<3>() = jt_wp * yp + jt_wc * yc;
    if (prior) rhs.head<3>() += prior_info * (prior->mean - baseline);
    rhs.tail(m) = lam_wp * yp;

    if (iter == 0) check_conditioning(normal, "float baseline");
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    const Eigen::VectorXd x = ldlt.solve(rhs);
    baseline += x.head<3>();
    ambiguities = x.tail(m);
    out.iterations = iter + 1;
    if (x.head<3>().norm() < config.convergence_threshold) break;
  }

  // Covariance at the final linearization point.
  dd.evaluate(baseline, model, jac);
  normal.topLeftCorner(3, 3) = jac.transpose() * (wp + wc) * jac + prior_info;
  normal.topRightCorner(3, m) = jac.transpose() * wp * lambda.asDiagonal();
  normal.bottomLeftCorner(m, 3) = normal.topRightCorner(3, m).transpose();
  normal.bottomRightCorner(m, m) = nn;
  const Eigen::MatrixXd cov = normal.ldlt().solve(Eigen::MatrixXd::Identity(3 + m, 3 + m));

  out.baseline = baseline;
  out.joint_covariance = 0.5 * (cov + cov.transpose());
  out.ambiguity.float_values = ambiguities;
  out.ambiguity.covariance = out.joint_covariance.bottomRightCorner(m, m);
  return out;
}

namespace {

// Baseline with the DD ambiguities held at integers.
std::pair<EcefVector, Eigen::Matrix3d> solve_fixed_baseline(const DoubleDiffSet& dd, const TrRtkConfig& config,
                                                           const Eigen::VectorXi& ambiguities,
                                                           const EcefVector& start) {
  const auto m = static_cast<Eigen::Index>(dd.entries.size());
  const Eigen::MatrixXd wp = spd_inverse(dd.phase_covariance());
  const Eigen::MatrixXd wc = spd_inverse(dd.code_covariance());

  Eigen::VectorXd phase(m), code(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& e = dd.entries[i];
    phase(i) = e.dd_phase - e.dd_phase_atmosphere - e.wavelength * ambiguities(i);
    code(i) = e.dd_code - e.dd_code_atmosphere;
  }

  EcefVector baseline = start;
  Eigen::Matrix3d normal = Eigen::Matrix3d::Identity();
  Eigen::VectorXd model;
  Eigen::MatrixXd jac;
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    dd.evaluate(baseline, model, jac);
    const Eigen::MatrixXd jt_wp = jac.transpose() * wp;
    const Eigen::MatrixXd jt_wc = jac.transpose() * wc;
    normal = jt_wp * jac + jt_wc * jac;
    Eigen::Vector3d rhs = jt_wp * (phase - model) + jt_wc * (code - model);
    const Eigen::Vector3d dx = normal.ldlt().solve(rhs);
    baseline += dx;
    if (dx.norm() < config.convergence_threshold) break;
  }
  dd.evaluate(baseline, model, jac);
  normal = jac.transpose() * (wp + wc) * jac;
  Eigen::Matrix3d cov = normal.inverse();
  return {baseline, 0.5 * (cov + cov.transpose())};
}

}  // namespace

TrRtkResult estimate_baseline(const Epoch& past, const Epoch& current, const PairGeometry& geometry,
                              const TrRtkConfig& config, const BaselinePrior* prior) {
  TrRtkResult result;
  result.past_time = past.time;
  result.current_time = current.time;
  result.time_difference = current.time - past.time;
  if (std::abs(result.time_difference) > config.max_time_difference) {
    throw Error(ErrorCode::WindowExceeded, "epoch pair separated by " + std::to_string(result.time_difference) +
                                               " s exceeds the " + std::to_string(config.max_time_difference) +
                                               " s window");
  }

  const std::set<SatelliteId> locked = detect_cycle_slips(past, current, config.epoch_interval);
  const TimeDifferences sd = time_single_difference(past, current, locked);
  const DoubleDiffSet dd = form_double_differences(sd, geometry, config);
  const FloatBaseline fl = solve_float_baseline(dd, config, prior);

  result.num_double_differences = static_cast<int>(dd.entries.size());
  result.float_baseline = fl.baseline;
  result.baseline = fl.baseline;
  result.covariance = fl.joint_covariance.topLeftCorner<3, 3>();

  if (!config.fix_ambiguities) {
    result.status = TrRtkStatus::Float;
    return result;
  }

  const AmbiguityResolution fix = lambda_resolve(fl.ambiguity, config.ratio_threshold);
  result.ratio = fix.ratio;
  result.dd_ambiguities.assign(fix.integers.data(), fix.integers.data() + fix.integers.size());
  if (!fix.accepted) {
    result.status = TrRtkStatus::Rejected;
    return result;
  }

  // The prior only helps the search; the fixed baseline rests on the measurements alone so it stays
  // independent of the velocity factors in the graph.
  auto [baseline, covariance] = solve_fixed_baseline(dd, config, fix.integers, fl.baseline);
  result.baseline = baseline;
  result.covariance = covariance;
  result.status = TrRtkStatus::Fixed;
  return result;
}

}  // namespace trgnss
