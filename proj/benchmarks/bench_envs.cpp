#include <benchmark/benchmark.h>

#include "bbgan/envs.hpp"
#include "bbgan/spline.hpp"

namespace {

void BM_BuildTrack(benchmark::State& state) {
  const auto anchors = bbgan::SplineTrackEnvironment::default_template(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bbgan::build_track(anchors, 10).length);
}
BENCHMARK(BM_BuildTrack)->Arg(3)->Arg(5);

void BM_PixelEvaluate(benchmark::State& state) {
  const bbgan::PixelClassifierEnvironment env(0.3, {});
  const bbgan::Vector noise(env.pixels(), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(env.evaluate(noise));
}
BENCHMARK(BM_PixelEvaluate);

}  // namespace
