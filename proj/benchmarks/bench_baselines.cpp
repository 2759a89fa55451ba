#include <benchmark/benchmark.h>

#include "bbgan/gmm.hpp"
#include "bbgan/gp.hpp"

namespace {

std::vector<bbgan::Vector> points(std::size_t n, std::size_t d, std::uint64_t seed) {
  bbgan::SeededSampler rng(seed);
  return bbgan::sample_uniform_normalized(d, n, rng);
}

void BM_GmmFit(benchmark::State& state) {
  const auto data = points(1000, 3, 3);
  for (auto _ : state) {
    bbgan::SeededSampler rng(4);
    benchmark::DoNotOptimize(bbgan::fit_gmm(data, static_cast<std::size_t>(state.range(0)), rng).iterations);
  }
}
BENCHMARK(BM_GmmFit)->Arg(1)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_GpFitPredict(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto xs = points(n, 3, 5);
  std::vector<double> ys;
  for (const auto& x : xs) ys.push_back(x[0] * x[0]);
  const auto queries = points(1024, 3, 6);
  for (auto _ : state) {
    const auto gp = bbgan::GpModel::fit(xs, ys);
    benchmark::DoNotOptimize(gp.predict(queries));
  }
}
BENCHMARK(BM_GpFitPredict)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
