#include <benchmark/benchmark.h>

#include <sstream>

#include "trgnss/rinex.hpp"
#include "trgnss/simulator.hpp"

namespace {

std::string simulated_file(double duration) {
  trgnss::ScenarioConfig sc;
  sc.duration = duration;
  const auto sim = trgnss::simulate(sc);
  std::ostringstream out;
  trgnss::write_rinex_obs(trgnss::make_rinex_header(sim.epochs), sim.epochs, out);
  return out.str();
}

void BM_ParseRinex(benchmark::State& state) {
  const std::string text = simulated_file(static_cast<double>(state.range(0)));
  for (auto _ : state) {
    std::istringstream in(text);
    benchmark::DoNotOptimize(trgnss::parse_rinex_obs(in));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseRinex)->Arg(10)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_WriteRinex(benchmark::State& state) {
  trgnss::ScenarioConfig sc;
  const auto sim = trgnss::simulate(sc);
  const auto header = trgnss::make_rinex_header(sim.epochs);
  for (auto _ : state) {
    std::ostringstream out;
    trgnss::write_rinex_obs(header, sim.epochs, out);
    benchmark::DoNotOptimize(out.str().size());
  }
}
BENCHMARK(BM_WriteRinex)->Unit(benchmark::kMillisecond);

}  // namespace
