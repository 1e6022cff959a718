#include <benchmark/benchmark.h>

#include <random>

#include "cip/flowfeat.hpp"
#include "cip/trajfeat.hpp"

namespace {

cip::FlowRaster noise_flow(int w, int h) {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> d(0.0f, 2.0f);
  cip::FlowRaster r = cip::FlowRaster::zeros(w, h);
  for (auto& x : r.data) x = d(rng);
  return r;
}

cip::RawTrajectory walk(std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.5);
  cip::RawTrajectory t;
  cip::Point2 p{40, 40};
  for (int i = 0; i < cip::kTrajectoryLength; ++i) {
    t.points.push_back(p);
    p.x += d(rng);
    p.y += d(rng);
  }
  return t;
}

void BM_FrameFeature(benchmark::State& state) {
  const auto flow = noise_flow(192, 144);
  const double s = static_cast<double>(state.range(0));
  const cip::BBox box{80, 40, s, 2.4 * s};
  for (auto _ : state) benchmark::DoNotOptimize(cip::frame_feature(flow, box));
}
BENCHMARK(BM_FrameFeature)->Arg(18)->Arg(40);

void BM_PsiFrame(benchmark::State& state) {
  const auto flow = noise_flow(192, 144);
  const auto a = cip::frame_feature(flow, {20, 20, 18, 44});
  const auto b = cip::frame_feature(flow, {100, 60, 18, 44});
  for (auto _ : state) benchmark::DoNotOptimize(cip::psi_frame(a, b));
}
BENCHMARK(BM_PsiFrame);

void BM_Hankelet(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto t = walk(rng);
  for (auto _ : state) benchmark::DoNotOptimize(cip::hankelet(t));
}
BENCHMARK(BM_Hankelet);

void BM_PsiTraj(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<cip::RawTrajectory> a, b;
  for (int i = 0; i < state.range(0); ++i) {
    a.push_back(walk(rng));
    b.push_back(walk(rng));
  }
  const auto fa = cip::traj_feature(a, 0, 100), fb = cip::traj_feature(b, 0, 100);
  for (auto _ : state) benchmark::DoNotOptimize(cip::psi_traj(fa, fb));
}
BENCHMARK(BM_PsiTraj)->Arg(4)->Arg(16);

}  // namespace
