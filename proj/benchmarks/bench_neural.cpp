#include <benchmark/benchmark.h>

#include "bbgan/gan.hpp"
#include "bbgan/neural.hpp"

namespace {

void BM_MlpForwardBackward(benchmark::State& state) {
  bbgan::SeededSampler rng(1);
  const std::size_t hidden[] = {64, 64};
  const auto net = bbgan::Mlp::create(8, hidden, static_cast<std::size_t>(state.range(0)), bbgan::Activation::LeakyRelu,
                                      bbgan::Activation::Tanh, rng);
  const Eigen::MatrixXd batch = Eigen::MatrixXd::Random(20, 8);
  bbgan::Mlp::Cache cache;
  for (auto _ : state) {
    const Eigen::MatrixXd out = net.forward(batch, cache);
    benchmark::DoNotOptimize(net.backward(cache, Eigen::MatrixXd::Ones(out.rows(), out.cols())));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(3)->Arg(64);

void BM_GanEpochs(benchmark::State& state) {
  bbgan::SeededSampler rng(2);
  std::vector<bbgan::Vector> data;
  for (int i = 0; i < 100; ++i) data.push_back({rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)});
  bbgan::GanConfig cfg;
  cfg.epochs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bbgan::train_gan(data, cfg).steps);
}
BENCHMARK(BM_GanEpochs)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
