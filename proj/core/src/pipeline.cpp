#include "trgnss/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trgnss/error.hpp"

namespace trgnss {

namespace {

/// Index of the epoch exactly `dt` seconds before epochs[i], if any.
std::optional<std::size_t> epoch_before(const std::vector<Epoch>& epochs, std::size_t i, double dt) {
  const GpsTime target = epochs[i].time - dt;
  std::size_t lo = 0, hi = i;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (epochs[mid].time - target < -1e-3) lo = mid + 1;
    else hi = mid;
  }
  if (lo < i && std::abs(epochs[lo].time - target) <= 1e-3) return lo;
  return std::nullopt;
}

}  // namespace

std::string method_label(const SolverConfig& config) {
  const bool tr = config.graph.use_trrtk_factors;
  const bool pr = config.graph.use_pseudorange_factors;
  if (tr && pr) return "TR-RTK graph";
  if (!tr && pr) return "w/o TR-RTK";
  if (tr) return "w/o pseudorange";
  return "w/o TR-RTK, w/o pseudorange";
}

std::vector<TrRtkEdge> compute_trrtk_edges(const std::vector<Epoch>& epochs,
                                           const std::vector<const SatelliteStateMap*>& states,
                                           const std::vector<EcefVector>& linearization,
                                           const std::vector<std::optional<VelocitySolution>>& velocities,
                                           const SolverConfig& config, TrRtkStats* stats) {
  std::vector<TrRtkEdge> edges;
  TrRtkStats local;
  TrRtkStats& st = stats ? *stats : local;
  const std::size_t n = epochs.size();

  auto attempt = [&](std::size_t j, std::size_t i, const BaselinePrior* prior) -> const TrRtkResult* {
    PairGeometry geo;
    geo.past_time = epochs[j].time;
    geo.current_time = epochs[i].time;
    geo.past_position = linearization[j];
    geo.current_position = linearization[i];
    geo.past_states = states[j];
    geo.current_states = states[i];
    geo.models = config.trrtk.model_atmosphere_change ? &config.atmosphere : nullptr;

    const int bucket = static_cast<int>(std::lround(epochs[i].time - epochs[j].time));
    ++st.attempted;
    ++st.histogram[bucket].attempted;
    try {
      TrRtkResult r = estimate_baseline(epochs[j], epochs[i], geo, config.trrtk, prior);
      switch (r.status) {
        case TrRtkStatus::Fixed:
          ++st.fixed;
          ++st.histogram[bucket].fixed;
          break;
        case TrRtkStatus::Float: ++st.float_only; break;
        case TrRtkStatus::Rejected: ++st.rejected; break;
      }
      edges.push_back({static_cast<int>(j), static_cast<int>(i), std::move(r)});
      return &edges.back().result;
    } catch (const Error&) {
      ++st.failed;
      return nullptr;
    }
  };

  // Relative-position links known before a pair is attempted: Doppler steps between consecutive
  // epochs and every baseline fixed so far. A pair's prior follows the path of least summed
  // variance (trace) through these links; lattice entries run shortest first.
  struct Link {
    std::size_t from;
    BaselinePrior displacement;
    double cost;
  };
  std::vector<std::vector<Link>> incoming(n);
  auto add_link = [&](std::size_t from, std::size_t to, const BaselinePrior& b) {
    incoming[to].push_back({from, b, b.covariance.trace()});
  };
  // Doppler steps integrate the two end velocities (trapezoid) when both exist.
  const double floor = config.estimation.velocity_sigma_floor;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!velocities[k]) continue;
    const double dt = epochs[k + 1].time - epochs[k].time;
    BaselinePrior p;
    const Eigen::Matrix3d ck = floored_covariance(velocities[k]->covariance, floor);
    if (velocities[k + 1]) {
      const Eigen::Matrix3d c1 = floored_covariance(velocities[k + 1]->covariance, floor);
      p.mean = 0.5 * (velocities[k]->velocity + velocities[k + 1]->velocity) * dt;
      p.covariance = 0.25 * (ck + c1) * dt * dt;
    } else {
      p.mean = linearization[k + 1] - linearization[k];
      p.covariance = ck * dt * dt;
    }
    add_link(k, k + 1, p);
  }

  std::vector<double> best_cost(n);
  std::vector<BaselinePrior> best(n);
  auto path_prior = [&](std::size_t j, std::size_t i) -> std::optional<BaselinePrior> {
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t k = j; k <= i; ++k) best_cost[k] = inf;
    best_cost[j] = 0.0;
    best[j] = BaselinePrior{EcefVector::Zero(), Eigen::Matrix3d::Zero()};
    for (std::size_t k = j + 1; k <= i; ++k) {
      for (const Link& l : incoming[k]) {
        if (l.from < j || best_cost[l.from] == inf) continue;
        const double c = best_cost[l.from] + l.cost;
        if (c < best_cost[k]) {
          best_cost[k] = c;
          best[k] = BaselinePrior{best[l.from].mean + l.displacement.mean,
                                  best[l.from].covariance + l.displacement.covariance};
        }
      }
    }
    if (best_cost[i] == inf) return std::nullopt;
    return best[i];
  };

  std::vector<double> lattice = config.trrtk.pair_lattice;
  std::sort(lattice.begin(), lattice.end());
  lattice.erase(std::unique(lattice.begin(), lattice.end()), lattice.end());

  for (double dt : lattice) {
    if (dt <= 0.0 || dt > config.trrtk.max_time_difference) continue;
    for (std::size_t i = 1; i < n; ++i) {
      const auto j = epoch_before(epochs, i, dt);
      if (!j || !states[*j] || !states[i]) continue;

      std::optional<BaselinePrior> prior;
      if (config.use_baseline_prior) {
        prior = path_prior(*j, i);
        if (prior) prior->covariance *= config.baseline_prior_inflation;
      }
      const TrRtkResult* r = attempt(*j, i, prior ? &*prior : nullptr);
      if (config.chain_prior && r && r->status == TrRtkStatus::Fixed) {
        add_link(*j, i, BaselinePrior{r->baseline, r->covariance});
      }
    }
  }
  return edges;
}

SolveResult solve_trajectory(const std::vector<Epoch>& epochs, const SatelliteStateTable& sat_states,
                             const SolverConfig& config) {
  if (epochs.empty()) throw Error(ErrorCode::EmptyInput, "no epochs to solve");
  const std::size_t n = epochs.size();
  SolveResult out;
  out.method_label = method_label(config);

  std::vector<const SatelliteStateMap*> states(n, nullptr);
  for (std::size_t i = 0; i < n; ++i) {
    out.times.push_back(epochs[i].time);
    states[i] = sat_states.find(epochs[i].time);
    if (!states[i]) {
      throw Error(ErrorCode::MissingSatellite, "no satellite states for epoch " + std::to_string(i));
    }
  }

  // Single point positioning, each epoch starting from the previous fix.
  EstimationConfig est = config.estimation;
  est.apply_ionosphere = config.graph.apply_ionosphere;
  est.apply_troposphere = config.graph.apply_troposphere;
  out.spp.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      out.spp[i] = solve_spp(epochs[i], *states[i], config.atmosphere, est);
      est.initial_position = out.spp[i]->position;
    } catch (const Error& e) {
      out.log.push_back("epoch " + std::to_string(i) + ": SPP failed: " + e.what());
    }
  }
  if (!out.spp[0]) throw Error(ErrorCode::EmptyInput, "no SPP fix at the first epoch");

  out.velocities.resize(n);
  EcefVector last_position = out.spp[0]->position;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.spp[i]) last_position = out.spp[i]->position;
    try {
      out.velocities[i] = solve_doppler_velocity(epochs[i], *states[i], last_position, config.estimation);
    } catch (const Error& e) {
      out.log.push_back("epoch " + std::to_string(i) + ": Doppler velocity failed: " + e.what());
    }
  }

  // Dead reckoning from the first fix; the TR-RTK linearization shifts it onto the SPP mean.
  out.initial_positions.resize(n);
  out.initial_positions[0] = out.spp[0]->position;
  for (std::size_t i = 1; i < n; ++i) {
    const auto& v = out.velocities[i - 1];
    if (!v) throw Error(ErrorCode::MissingVelocity, "no velocity for epoch " + std::to_string(i - 1));
    out.initial_positions[i] = out.initial_positions[i - 1] + v->velocity * (epochs[i].time - epochs[i - 1].time);
  }
  EcefVector shift = EcefVector::Zero();
  int shift_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.spp[i]) continue;
    shift += out.spp[i]->position - out.initial_positions[i];
    ++shift_count;
  }
  shift /= shift_count;
  std::vector<EcefVector> linearization = out.initial_positions;
  for (auto& p : linearization) p += shift;

  GraphInputs in;
  in.epochs = &epochs;
  in.sat_states = &states;
  in.velocities = &out.velocities;
  in.spp = &out.spp;
  in.models = &config.atmosphere;

  const bool use_tr = config.graph.use_trrtk_factors;
  const int passes = use_tr ? std::max(config.trrtk_passes, 1) : 1;
  for (int pass = 0; pass < passes; ++pass) {
    if (use_tr) {
      out.trrtk_stats = {};
      out.trrtk_edges = compute_trrtk_edges(epochs, states, linearization, out.velocities, config, &out.trrtk_stats);
    }
    in.trrtk = &out.trrtk_edges;
    const Graph graph = build_graph(in, config.graph);
    out.optimization = optimize(graph, config.optimizer);
    for (std::size_t i = 0; i < n; ++i) linearization[i] = absolute_position(out.optimization.graph, out.optimization.states[i]);
  }
  out.optimized_positions = linearization;
  return out;
}

}  // namespace trgnss
