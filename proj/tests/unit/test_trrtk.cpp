#include <gtest/gtest.h>

#include <random>

#include <Eigen/Dense>

#include "test_support.hpp"
#include "trgnss/constants.hpp"
#include "trgnss/error.hpp"
#include "trgnss/geodesy.hpp"
#include "trgnss/trrtk.hpp"

using namespace trgnss;

namespace {

struct Pair {
  ScenarioConfig config;
  Epoch past, current;
  SatelliteStateMap past_states, current_states;
  EcefVector p0, p1;
  double dt = 0.0;

  PairGeometry geometry() const {
    PairGeometry g;
    g.past_time = past.time;
    g.current_time = current.time;
    g.past_position = p0;
    g.current_position = p1;
    g.past_states = &past_states;
    g.current_states = &current_states;
    g.models = &config.atmosphere;
    return g;
  }

  TrRtkConfig trrtk() const {
    TrRtkConfig c;
    c.epoch_interval = dt;  // two synthesized epochs, one lock step apart
    return c;
  }
};

// Two back-to-back synthesized epochs at arbitrary positions, `dt` seconds apart.
Pair make_pair(const EcefVector& baseline, double dt, NoiseConfig noise, std::uint64_t seed = 1,
               double tow_offset = 0.0, GeodeticPosition site = {35.68 * kDegToRad, 140.02 * kDegToRad, 35.0}) {
  Pair p;
  p.config.noise = noise;
  // satellite clock drift over per-satellite light-time differences is left in the time
  // differences by design (~1e-5 m at 100 s); the noise-free cases switch it off
  if (noise.pseudorange_sigma == 0.0 && noise.phase_sigma == 0.0) p.config.satellite_clock.drift = 0.0;
  p.config.seed = seed;
  p.config.start_time = p.config.start_time + tow_offset;
  p.dt = dt;
  auto constellation = generate_constellation(seed, p.config.satellite_counts, p.config.start_time,
                                              p.config.satellite_clock);
  EpochSynthesizer synth(p.config, constellation);
  p.p0 = geodetic_to_ecef(site);
  p.p1 = p.p0 + baseline;
  TruthRecord a{p.config.start_time, p.p0, baseline / dt};
  TruthRecord b{p.config.start_time + dt, p.p1, baseline / dt};
  std::tie(p.past, p.past_states) = synth.synthesize(a);
  std::tie(p.current, p.current_states) = synth.synthesize(b);
  return p;
}

const NoiseConfig kQuiet{0.0, 0.0, 0.0};

Observation obs(Constellation c, int prn, double phase, int lock, bool lli = false) {
  Observation o;
  o.sat = {c, prn};
  o.carrier_phase = phase;
  o.pseudorange = 2.2e7;
  o.wavelength = kSpeedOfLight / kFreqGpsL1;
  o.lock_count = lock;
  o.loss_of_lock = lli;
  return o;
}

}  // namespace

TEST(CycleSlips, IdenticalEpochsKeepAll) {
  Epoch e;
  e.time = GpsTime(2300, 0.0);
  e.observations = {obs(Constellation::GPS, 1, 0, 4), obs(Constellation::GPS, 2, 0, 9)};
  EXPECT_EQ(detect_cycle_slips(e, e).size(), 2u);
}

TEST(CycleSlips, LockResetAndFlagExcluded) {
  Epoch a, b;
  a.time = GpsTime(2300, 0.0);
  b.time = GpsTime(2300, 5.0);
  a.observations = {obs(Constellation::GPS, 1, 0, 10), obs(Constellation::GPS, 2, 0, 10),
                    obs(Constellation::GPS, 3, 0, 10), obs(Constellation::GPS, 4, 0, 10)};
  b.observations = {obs(Constellation::GPS, 1, 0, 15), obs(Constellation::GPS, 2, 0, 2),
                    obs(Constellation::GPS, 3, 0, 15, true), obs(Constellation::GPS, 5, 0, 15)};
  const auto locked = detect_cycle_slips(a, b, 1.0);
  EXPECT_EQ(locked, (std::set<SatelliteId>{{Constellation::GPS, 1}}));
}

TEST(CycleSlips, ResetAndRegrowIsCaught) {
  Epoch a, b;
  a.time = GpsTime(2300, 0.0);
  b.time = GpsTime(2300, 20.0);
  a.observations = {obs(Constellation::GPS, 1, 0, 5)};
  b.observations = {obs(Constellation::GPS, 1, 0, 12)};  // would be 25 without a reset
  EXPECT_TRUE(detect_cycle_slips(a, b, 1.0).empty());
}

TEST(CycleSlips, SimulatedSlipExcludedFromStraddlingPairs) {
  ScenarioConfig c = test::quiet_scenario(TrajectoryType::Static, 100.0);
  const auto probe = simulate(c);
  const SatelliteId target = probe.epochs[0].observations[2].sat;
  c.cycle_slips = {{target, 50.0}};
  const auto sim = simulate(c);
  for (int i : {10, 30, 49}) {
    for (int j : {50, 60, 90}) {
      if (!sim.epochs[j].find(target) || !sim.epochs[i].find(target)) continue;
      EXPECT_FALSE(detect_cycle_slips(sim.epochs[i], sim.epochs[j]).count(target)) << i << "-" << j;
    }
  }
  EXPECT_TRUE(detect_cycle_slips(sim.epochs[10], sim.epochs[40]).count(target));
  EXPECT_TRUE(detect_cycle_slips(sim.epochs[55], sim.epochs[90]).count(target));
}

TEST(TimeSingleDifference, PhaseChangeInMeters) {
  Epoch a, b;
  a.observations = {obs(Constellation::GPS, 1, 100.0, 1), obs(Constellation::GPS, 2, 5.0, 1)};
  b.observations = {obs(Constellation::GPS, 1, 100.0, 2), obs(Constellation::GPS, 2, 6.0, 2)};
  const auto sd = time_single_difference(a, b, {{Constellation::GPS, 1}, {Constellation::GPS, 2}});
  EXPECT_EQ(sd.at({Constellation::GPS, 1}).phase, 0.0);
  EXPECT_NEAR(sd.at({Constellation::GPS, 2}).phase, 0.1903, 1e-4);
  try {
    time_single_difference(a, b, {{Constellation::GPS, 9}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingSatellite);
  }
}

TEST(TimeSingleDifference, StaticReceiverSeesSatelliteMotion) {
  ScenarioConfig c = test::quiet_scenario(TrajectoryType::Static, 30.0);
  c.receiver_clock.drift = 0.0;
  c.satellite_clock.drift = 0.0;
  c.satellite_clock.bias_sigma = 0.0;
  c.apply_ionosphere = false;
  c.apply_troposphere = false;
  const auto sim = simulate(c);
  const auto& a = sim.epochs[0];
  const auto& b = sim.epochs[30];
  const auto sd = time_single_difference(a, b, detect_cycle_slips(a, b));
  ASSERT_GE(sd.size(), 6u);
  const EcefVector rx = sim.truth[0].position;
  for (const auto& [sat, td] : sd) {
    const double change = line_of_sight(rx, sim.sat_states.find(b.time)->at(sat)).range -
                          line_of_sight(rx, sim.sat_states.find(a.time)->at(sat)).range;
    EXPECT_NEAR(td.phase, change, 1e-4) << to_string(sat);
  }
}

TEST(DoubleDifferences, ReferenceIsHighestElevationPerGroup) {
  const Pair p = make_pair({1, 2, 3}, 5.0, kQuiet);
  const auto sd = time_single_difference(p.past, p.current, detect_cycle_slips(p.past, p.current, p.dt));
  const auto dd = form_double_differences(sd, p.geometry(), p.trrtk());
  const GeodeticPosition geo = ecef_to_geodetic(p.p1);
  std::map<Constellation, std::pair<double, SatelliteId>> best;
  for (const auto& [sat, td] : sd) {
    const double el = elevation_azimuth(geo, line_of_sight(p.p1, p.current_states.at(sat)).sat_position).elevation;
    if (el < p.trrtk().elevation_mask) continue;
    auto& b = best[sat.constellation];
    if (el > b.first) b = {el, sat};
  }
  ASSERT_EQ(dd.references.size(), best.size());
  for (const auto& ref : dd.references) EXPECT_EQ(best.at(ref.constellation).second, ref);
  for (const auto& e : dd.entries) {
    EXPECT_EQ(e.sat.constellation, e.reference.constellation);
    EXPECT_NE(e.sat, e.reference);
  }
}

TEST(DoubleDifferences, EqualDifferencesGiveZeroAndClocksCancel) {
  const Pair p = make_pair({1, 2, 3}, 5.0, kQuiet);
  auto sd = time_single_difference(p.past, p.current, detect_cycle_slips(p.past, p.current, p.dt));
  auto flat = sd;
  for (auto& [sat, td] : flat) td.phase = 0.37;
  TrRtkConfig cfg = p.trrtk();
  cfg.model_atmosphere_change = false;
  for (const auto& e : form_double_differences(flat, p.geometry(), cfg).entries) EXPECT_EQ(e.dd_phase, 0.0);

  const auto base = form_double_differences(sd, p.geometry(), cfg);
  auto shifted = sd;
  for (auto& [sat, td] : shifted) {
    if (sat.constellation == Constellation::GAL) td.phase += 1234.5;
  }
  const auto moved = form_double_differences(shifted, p.geometry(), cfg);
  ASSERT_EQ(base.entries.size(), moved.entries.size());
  for (std::size_t k = 0; k < base.entries.size(); ++k) {
    EXPECT_NEAR(moved.entries[k].dd_phase, base.entries[k].dd_phase, 1e-7);
  }
}

TEST(DoubleDifferences, NoiseFreeMatchesGeometryAtTruth) {
  const EcefVector b(10, 5, -2);
  const Pair p = make_pair(b, 10.0, kQuiet);
  const auto sd = time_single_difference(p.past, p.current, detect_cycle_slips(p.past, p.current, p.dt));
  const auto dd = form_double_differences(sd, p.geometry(), p.trrtk());
  Eigen::VectorXd model;
  Eigen::MatrixXd jac;
  dd.evaluate(b, model, jac);
  for (std::size_t k = 0; k < dd.entries.size(); ++k) {
    const auto& e = dd.entries[k];
    EXPECT_NEAR(e.dd_phase - e.dd_phase_atmosphere, model(k), 1e-4);
    // the linearized form -(L_k - L_l)' B
    const double first_order = -(e.los_sat - e.los_reference).dot(b);
    EXPECT_NEAR(model(k) - (dd.entries[k].dd_range_model - (-(e.los_sat - e.los_reference)).dot(p.p1 - p.p0)),
                first_order, 1e-3);
  }
}

TEST(DoubleDifferences, TooFewSatellites) {
  Pair p = make_pair({1, 0, 0}, 5.0, kQuiet);
  auto sd = time_single_difference(p.past, p.current, detect_cycle_slips(p.past, p.current, p.dt));
  while (sd.size() > 3) sd.erase(std::prev(sd.end()));
  try {
    form_double_differences(sd, p.geometry(), p.trrtk());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientSatellites);
  }
}

TEST(FloatBaseline, ZeroBaselineNoClockChange) {
  Pair p = make_pair(EcefVector::Zero(), 1.0, kQuiet);
  const auto sd = time_single_difference(p.past, p.current, detect_cycle_slips(p.past, p.current, p.dt));
  const auto dd = form_double_differences(sd, p.geometry(), p.trrtk());
  const auto fl = solve_float_baseline(dd, p.trrtk());
  EXPECT_LT(fl.baseline.norm(), 1e-6);
  const Eigen::VectorXd a = fl.ambiguity.float_values;
  EXPECT_LT((a - a.array().round().matrix()).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(FloatBaseline, NoiseFreeRecoversTruth) {
  const EcefVector b(10, 5, -2);
  Pair p = make_pair(b, 10.0, kQuiet);
  const auto sd = time_single_difference(p.past, p.current, detect_cycle_slips(p.past, p.current, p.dt));
  const auto dd = form_double_differences(sd, p.geometry(), p.trrtk());
  const auto fl = solve_float_baseline(dd, p.trrtk());
  EXPECT_LT((fl.baseline - b).norm(), 1e-6);
}

TEST(FloatBaseline, JointCovarianceSpdOverRandomGeometries) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    GeodeticPosition site{std::asin(0.9 * u(gen)), kPi * u(gen), 100.0};
    const EcefVector b = 30.0 * EcefVector(u(gen), u(gen), u(gen));
    const double dt = 1.0 + 49.0 * (0.5 + 0.5 * u(gen));
    Pair p = make_pair(b, dt, NoiseConfig{}, 100 + k, 3600.0 * k, site);
    const auto sd = time_single_difference(p.past, p.current, detect_cycle_slips(p.past, p.current, p.dt));
    const auto dd = form_double_differences(sd, p.geometry(), p.trrtk());
    const auto fl = solve_float_baseline(dd, p.trrtk());
    EXPECT_LT((fl.joint_covariance - fl.joint_covariance.transpose()).norm(), 1e-9 * fl.joint_covariance.norm());
    Eigen::LLT<Eigen::MatrixXd> llt(fl.joint_covariance);
    EXPECT_EQ(llt.info(), Eigen::Success) << "geometry " << k;
  }
}

TEST(EstimateBaseline, NoisyPairFixesWithDopplerGradePrior) {
  const EcefVector b(10, 5, -2);
  int fixed = 0, within_2cm = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Pair p = make_pair(b, 10.0, NoiseConfig{}, seed);
    BaselinePrior prior{b + EcefVector(0.05, -0.04, 0.06), 0.01 * Eigen::Matrix3d::Identity()};
    const auto r = estimate_baseline(p.past, p.current, p.geometry(), p.trrtk(), &prior);
    if (r.status != TrRtkStatus::Fixed) continue;
    ++fixed;
    const Eigen::Vector3d err = r.baseline - b;
    // chi-square(3) at 99.9%
    EXPECT_LT(err.dot(r.covariance.inverse() * err), 16.27) << "seed " << seed;
    if (err.norm() < 0.02) ++within_2cm;
    EXPECT_GE(r.ratio, p.trrtk().ratio_threshold);
    Eigen::LLT<Eigen::Matrix3d> llt(r.covariance);
    EXPECT_EQ(llt.info(), Eigen::Success);
  }
  EXPECT_GE(fixed, 9);
  EXPECT_GE(within_2cm, 7);
}

TEST(EstimateBaseline, NoiseFreeFixIsExact) {
  for (double dt : {1.0, 20.0, 90.0}) {
    const EcefVector b(3.0 * dt / 10, -1.0, 0.5);
    Pair p = make_pair(b, dt, kQuiet, 4);
    BaselinePrior prior{b + EcefVector(0.1, 0.1, -0.1), 0.04 * Eigen::Matrix3d::Identity()};
    const auto r = estimate_baseline(p.past, p.current, p.geometry(), p.trrtk(), &prior);
    ASSERT_EQ(r.status, TrRtkStatus::Fixed);
    EXPECT_GE(r.num_double_differences, 5);
    EXPECT_LT((r.baseline - b).norm(), 1e-6);
    for (int n : r.dd_ambiguities) EXPECT_EQ(n, 0);
  }
}

TEST(EstimateBaseline, SwappingEpochsNegatesBaseline) {
  const EcefVector b(10, 5, -2);
  Pair p = make_pair(b, 10.0, NoiseConfig{}, 3);
  BaselinePrior prior{b, 0.01 * Eigen::Matrix3d::Identity()};
  const auto fwd = estimate_baseline(p.past, p.current, p.geometry(), p.trrtk(), &prior);
  PairGeometry g = p.geometry();
  std::swap(g.past_time, g.current_time);
  std::swap(g.past_position, g.current_position);
  std::swap(g.past_states, g.current_states);
  BaselinePrior back_prior{-b, prior.covariance};
  const auto rev = estimate_baseline(p.current, p.past, g, p.trrtk(), &back_prior);
  ASSERT_EQ(fwd.status, TrRtkStatus::Fixed);
  ASSERT_EQ(rev.status, TrRtkStatus::Fixed);
  const Eigen::Vector3d sum = fwd.baseline + rev.baseline;
  EXPECT_LT(std::sqrt(sum.dot((fwd.covariance + rev.covariance).inverse() * sum)), 3.0);
  EXPECT_NEAR(rev.time_difference, -fwd.time_difference, 1e-12);
}

TEST(EstimateBaseline, WindowExceeded) {
  Pair p = make_pair({1, 0, 0}, 150.0, kQuiet);
  try {
    estimate_baseline(p.past, p.current, p.geometry(), p.trrtk());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WindowExceeded);
  }
}

TEST(EstimateBaseline, ThreeLockedSatellitesGiveNoEdge) {
  Pair p = make_pair({1, 0, 0}, 5.0, kQuiet);
  // break lock on all but three satellites
  for (std::size_t k = 3; k < p.current.observations.size(); ++k) p.current.observations[k].lock_count = 0;
  try {
    estimate_baseline(p.past, p.current, p.geometry(), p.trrtk());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientSatellites);
  }
}

TEST(EstimateBaseline, FloatOnlyWhenFixingDisabled) {
  Pair p = make_pair({1, 0, 0}, 5.0, kQuiet);
  TrRtkConfig cfg = p.trrtk();
  cfg.fix_ambiguities = false;
  const auto r = estimate_baseline(p.past, p.current, p.geometry(), cfg);
  EXPECT_EQ(r.status, TrRtkStatus::Float);
}

TEST(EstimateBaseline, SlippedSatelliteDroppedStillFixes) {
  const EcefVector b(4, -3, 1);
  Pair p = make_pair(b, 10.0, kQuiet, 6);
  const SatelliteId victim = p.current.observations[1].sat;
  p.current.observations[1].carrier_phase += 17.0;
  p.current.observations[1].lock_count = 0;
  p.current.observations[1].loss_of_lock = true;
  BaselinePrior prior{b, 0.01 * Eigen::Matrix3d::Identity()};
  const auto r = estimate_baseline(p.past, p.current, p.geometry(), p.trrtk(), &prior);
  ASSERT_EQ(r.status, TrRtkStatus::Fixed);
  EXPECT_LT((r.baseline - b).norm(), 1e-6);
  EXPECT_FALSE(detect_cycle_slips(p.past, p.current, p.dt).count(victim));
}
