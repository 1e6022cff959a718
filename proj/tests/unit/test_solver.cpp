#include <doctest.h>

#include <random>

#include "cip/error.hpp"
#include "cip/solver.hpp"
#include "test_support.hpp"

using namespace cip;

namespace {

void check_bound_history(const SolveReport& r) {
  for (std::size_t i = 1; i < r.bound_history.size(); ++i)
    CHECK(r.bound_history[i] >= r.bound_history[i - 1] - 1e-9);
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("exhaustive tie-break and hand-built table") {
    CrfProblem z;
    z.window_length = 3;
    z.state_counts = {2, 3, 2};
    z.edges = {CrfEdge{0, 1, EdgeKind::Intra, 2, 3, std::vector<double>(6, 0.0)},
               CrfEdge{1, 2, EdgeKind::Intra, 3, 2, std::vector<double>(6, 0.0)}};
    const Labeling l = solve_exhaustive(z);
    CHECK(l.states == std::vector<int>{0, 0, 0});
    CHECK(l.energy == 0.0);

    CrfProblem p;
    p.window_length = 2;
    p.state_counts = {2, 2};
    p.edges = {CrfEdge{0, 1, EdgeKind::Intra, 2, 2, {1, 0, 5, 2}}};
    const Labeling h = solve_exhaustive(p);
    CHECK(h.states == std::vector<int>{0, 1});
    CHECK(h.energy == 0.0);
    CHECK(solve_trws(p).labeling.states == std::vector<int>{0, 1});
  }

  TEST_CASE("exhaustive refuses huge spaces") {
    CrfProblem p;
    p.window_length = 7;
    p.state_counts.assign(7, 10);
    for (int i = 0; i + 1 < 7; ++i) p.edges.push_back(CrfEdge{i, i + 1, EdgeKind::Intra, 10, 10, std::vector<double>(100, 0.0)});
    CHECK_THROWS_AS(solve_exhaustive(p), ValidationError);
  }

  TEST_CASE("two-node problem with idle is solved exactly") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
      const CrfProblem p = cip::testing::random_window_problem(rng, 1, 2, 1);
      const SolveReport r = solve_trws(p);
      CHECK(r.labeling.energy == doctest::Approx(solve_exhaustive(p).energy));
      CHECK(r.lower_bound == doctest::Approx(r.labeling.energy).epsilon(1e-9));
    }
  }

  TEST_CASE("chains are exact against dynamic programming") {
    std::mt19937_64 rng(44);
    for (int i = 0; i < 100; ++i) {
      const CrfProblem p = cip::testing::random_chain_problem(rng, 2 + static_cast<int>(rng() % 7), 4);
      const SolveReport r = solve_trws(p);
      const double dp = cip::testing::chain_dp_minimum(p);
      CHECK(r.labeling.energy == doctest::Approx(dp).epsilon(1e-9));
      CHECK(solve_exhaustive(p).energy == doctest::Approx(dp).epsilon(1e-12));
      CHECK(r.lower_bound <= dp + 1e-9);
      check_bound_history(r);
    }
  }

  TEST_CASE("window problems: bound below optimum below primal") {
    std::mt19937_64 rng(45);
    int agree = 0;
    for (int i = 0; i < 100; ++i) {
      const CrfProblem p = cip::testing::random_window_problem(rng, 2, 3, 3);
      const SolveReport r = solve_trws(p);
      const Labeling opt = solve_exhaustive(p);
      CHECK(r.lower_bound <= opt.energy + 1e-9);
      CHECK(opt.energy <= r.labeling.energy + 1e-12);
      CHECK(labeling_energy(p, r.labeling.states) == doctest::Approx(r.labeling.energy).epsilon(1e-12));
      CHECK(r.iterations <= 100);
      check_bound_history(r);
      agree += std::abs(r.labeling.energy - opt.energy) < 1e-9;
    }
    CHECK(agree >= 95);
  }

  TEST_CASE("adding a constant shifts energies but not the argmin") {
    std::mt19937_64 rng(46);
    for (int i = 0; i < 30; ++i) {
      CrfProblem p = cip::testing::random_window_problem(rng, 2, 3, 2);
      const SolveReport r = solve_trws(p);
      CrfProblem q = p;
      const double gamma = 0.37;
      for (auto& e : q.edges)
        for (auto& c : e.costs) c += gamma;
      const SolveReport s = solve_trws(q);
      CHECK(s.labeling.states == r.labeling.states);
      CHECK(s.labeling.energy == doctest::Approx(r.labeling.energy + gamma * static_cast<double>(p.edges.size())));
      CHECK(solve_exhaustive(q).states == solve_exhaustive(p).states);
    }
  }

  TEST_CASE("solver is deterministic") {
    std::mt19937_64 rng(47);
    const CrfProblem p = cip::testing::random_window_problem(rng, 3, 5, 3);
    const SolveReport a = solve_trws(p), b = solve_trws(p);
    CHECK(a.labeling.states == b.labeling.states);
    CHECK(a.lower_bound == b.lower_bound);
    CHECK(a.bound_history == b.bound_history);
  }

  TEST_CASE("bad options and non-finite costs") {
    std::mt19937_64 rng(48);
    CrfProblem p = cip::testing::random_window_problem(rng, 2, 2, 2);
    CHECK_THROWS_AS(solve_trws(p, TrwsOptions{0, 1e-4}), ValidationError);
    CHECK_THROWS_AS(solve_trws(p, TrwsOptions{10, 0.0}), ValidationError);
    p.edges[0].costs[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(solve_trws(p), ValidationError);
  }
}
