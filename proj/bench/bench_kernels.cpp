// Serial reference kernels against their OpenMP counterparts.

#include "uowq/fisher.hpp"
#include "uowq/kl_measure.hpp"
#include "uowq/reference.hpp"
#include "uowq/simulation.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace uowq;

struct SoftmaxFixture {
  ModelFamily family = ModelFamily::softmax_regression(8, 4);
  ParameterVector theta;
  std::vector<Sample> samples;
  DirectionMatrix directions{Eigen::MatrixXd::Random(32, 3)};

  explicit SoftmaxFixture(std::size_t n) : theta(ParameterVector::Constant(32, 0.1)) {
    samples = sample(family, theta, n, 7);
  }
};

TaskEnsemble categorical_ensemble() {
  const ModelFamily family = ModelFamily::categorical(5);
  Eigen::VectorXd p0(4);
  p0 << 0.2, 0.2, 0.2, 0.2;
  const std::vector<SourceSpec> specs{{1.0, 2000, 1}, {2.0, 2000, 2}, {3.0, 2000, 3}};
  return generate_ensemble(family, p0, 2000, specs, 11);
}

void BM_FisherSerial(benchmark::State& state) {
  SoftmaxFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::empirical_fisher(f.family, f.theta, f.samples));
}

void BM_FisherParallel(benchmark::State& state) {
  SoftmaxFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(empirical_fisher(f.family, f.theta, f.samples).dense());
}

void BM_GramSerial(benchmark::State& state) {
  SoftmaxFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::projected_gram(f.family, f.theta, f.samples, f.directions));
}

void BM_GramParallel(benchmark::State& state) {
  SoftmaxFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(projected_gram(f.family, f.theta, f.samples, f.directions));
}

void BM_MonteCarloSerial(benchmark::State& state) {
  const TaskEnsemble e = categorical_ensemble();
  const std::vector<double> w{0.3, 0.2, 0.1};
  const auto n = e.budgets();
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::mc_expected_kl(e, w, n, static_cast<std::size_t>(state.range(0)), 3));
  }
}

void BM_MonteCarloParallel(benchmark::State& state) {
  const TaskEnsemble e = categorical_ensemble();
  const std::vector<double> w{0.3, 0.2, 0.1};
  const auto n = e.budgets();
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc_expected_kl(e, w, n, static_cast<std::size_t>(state.range(0)), 3));
  }
}

}  // namespace

BENCHMARK(BM_FisherSerial)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FisherParallel)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramSerial)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramParallel)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloSerial)->Arg(1000)->Arg(10'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Arg(1000)->Arg(10'000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
