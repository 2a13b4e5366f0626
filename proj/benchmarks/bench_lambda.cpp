#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "trgnss/lambda.hpp"

namespace {

// Correlated float ambiguities shaped like a short-baseline DD set.
std::vector<trgnss::AmbiguityProblem> make_problems(int n, int count) {
  std::mt19937_64 gen(static_cast<std::uint64_t>(n));
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<trgnss::AmbiguityProblem> out;
  for (int k = 0; k < count; ++k) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(gen);
    trgnss::AmbiguityProblem p;
    p.covariance = 0.5 * a * a.transpose() + 1e-3 * Eigen::MatrixXd::Identity(n, n);
    p.float_values = Eigen::VectorXd::NullaryExpr(n, [&] { return 30.0 * g(gen); });
    out.push_back(std::move(p));
  }
  return out;
}

void BM_LambdaResolve(benchmark::State& state) {
  const auto problems = make_problems(static_cast<int>(state.range(0)), 64);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(trgnss::lambda_resolve(problems[k++ % problems.size()], 3.0));
  }
}
BENCHMARK(BM_LambdaResolve)->DenseRange(3, 15, 3);

void BM_LambdaDecorrelation(benchmark::State& state) {
  const auto problems = make_problems(static_cast<int>(state.range(0)), 64);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(trgnss::lambda_decorrelation(problems[k++ % problems.size()].covariance));
  }
}
BENCHMARK(BM_LambdaDecorrelation)->Arg(5)->Arg(10)->Arg(15);

}  // namespace
