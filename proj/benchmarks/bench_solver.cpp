#include <benchmark/benchmark.h>

#include <random>

#include "cip/crf.hpp"
#include "cip/solver.hpp"

namespace {

// Window-shaped problem with `cands` candidates plus idle on every node.
cip::CrfProblem window_problem(int N, int T, int cands, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cost(0.0, 1.0);
  cip::CrfProblem p;
  p.num_videos = N;
  p.window_length = T;
  p.has_idle = true;
  p.state_counts.assign(static_cast<std::size_t>(N * T), cands + 1);
  auto add = [&](int a, int b, cip::EdgeKind k) {
    cip::CrfEdge e{a, b, k, cands + 1, cands + 1, {}};
    e.costs.assign(static_cast<std::size_t>((cands + 1) * (cands + 1)), 0.0);
    for (int i = 0; i < cands; ++i)
      for (int j = 0; j < cands; ++j) e.cost(i, j) = cost(rng);
    p.edges.push_back(std::move(e));
  };
  for (int n = 0; n < N; ++n)
    for (int t = 0; t < T; ++t)
      for (int r = t + 1; r < T; ++r) add(p.node_index({n, t}), p.node_index({n, r}), cip::EdgeKind::Intra);
  for (int t = 0; t < T; ++t)
    for (int n = 0; n < N; ++n)
      for (int m = n + 1; m < N; ++m) add(p.node_index({n, t}), p.node_index({m, t}), cip::EdgeKind::Inter);
  cip::augment_idle(p);
  return p;
}

void BM_TrwsWindow(benchmark::State& state) {
  const auto p = window_problem(6, static_cast<int>(state.range(0)), 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cip::solve_trws(p));
  state.counters["edges"] = static_cast<double>(p.edges.size());
}
BENCHMARK(BM_TrwsWindow)->Arg(10)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Exhaustive(benchmark::State& state) {
  const auto p = window_problem(2, 3, 3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(cip::solve_exhaustive(p));
}
BENCHMARK(BM_Exhaustive);

}  // namespace
