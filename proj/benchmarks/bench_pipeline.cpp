#include <benchmark/benchmark.h>

#include "cip/pipeline.hpp"
#include "cip/synth.hpp"

namespace {

void BM_Window(benchmark::State& state) {
  const auto sr = cip::generate(cip::make_preset("clean6", 7, 100));
  cip::Config c;
  const cip::FeatureCache cache(sr.dataset, c);
  for (int f = 0; f < 100; ++f) cache.frame(f);  // features warm
  for (auto _ : state) benchmark::DoNotOptimize(cip::process_window(sr.dataset, cache, c, 0, 0, 100));
}
BENCHMARK(BM_Window)->Unit(benchmark::kMillisecond);

void BM_Detect(benchmark::State& state) {
  const auto sr = cip::generate(cip::make_preset("clean6", 7, static_cast<int>(state.range(0))));
  cip::Config c;
  for (auto _ : state) benchmark::DoNotOptimize(cip::detect(sr.dataset, c));
}
BENCHMARK(BM_Detect)->Arg(200)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
