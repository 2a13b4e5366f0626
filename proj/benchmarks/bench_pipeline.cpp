#include <benchmark/benchmark.h>

#include "trgnss/optimizer.hpp"
#include "trgnss/pipeline.hpp"
#include "trgnss/simulator.hpp"

namespace {

const trgnss::SimulationResult& default_sim() {
  static const trgnss::SimulationResult sim = trgnss::simulate(trgnss::ScenarioConfig{});
  return sim;
}

const trgnss::AtmosphereModels& sim_models() {
  static const trgnss::AtmosphereModels models = trgnss::ScenarioConfig{}.atmosphere;
  return models;
}

void BM_Simulate(benchmark::State& state) {
  trgnss::ScenarioConfig sc;
  sc.duration = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(trgnss::simulate(sc));
}
BENCHMARK(BM_Simulate)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SolveTrajectory(benchmark::State& state) {
  const auto& sim = default_sim();
  trgnss::SolverConfig cfg;
  cfg.graph.use_trrtk_factors = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(trgnss::solve_trajectory(sim.epochs, sim.sat_states, cfg));
}
BENCHMARK(BM_SolveTrajectory)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_OptimizeGraph(benchmark::State& state) {
  const auto& sim = default_sim();
  const auto solved = trgnss::solve_trajectory(sim.epochs, sim.sat_states, {});
  trgnss::Graph g = solved.optimization.graph;
  g.initial_states = solved.optimization.states;
  for (auto& x : g.initial_states) x.position_offset().array() += 0.5;
  state.counters["factors"] = static_cast<double>(g.factor_count());
  for (auto _ : state) benchmark::DoNotOptimize(trgnss::optimize(g));
}
BENCHMARK(BM_OptimizeGraph)->Unit(benchmark::kMillisecond);

void BM_TrRtkPair(benchmark::State& state) {
  const auto& sim = default_sim();
  const std::size_t dt = static_cast<std::size_t>(state.range(0));
  const auto& past = sim.epochs[0];
  const auto& current = sim.epochs[dt];
  trgnss::PairGeometry geo;
  geo.past_time = past.time;
  geo.current_time = current.time;
  geo.models = &sim_models();
  geo.past_position = sim.truth[0].position;
  geo.current_position = sim.truth[dt].position;
  geo.past_states = &sim.sat_states.at(past.time);
  geo.current_states = &sim.sat_states.at(current.time);
  trgnss::TrRtkConfig cfg;
  trgnss::BaselinePrior prior;
  prior.mean = geo.current_position - geo.past_position;
  prior.covariance = 0.01 * Eigen::Matrix3d::Identity();
  for (auto _ : state) benchmark::DoNotOptimize(trgnss::estimate_baseline(past, current, geo, cfg, &prior));
}
BENCHMARK(BM_TrRtkPair)->Arg(1)->Arg(30)->Arg(100)->Unit(benchmark::kMicrosecond);

}  // namespace
