#include <doctest.h>

#include <random>

#include "cip/crf.hpp"
#include "cip/error.hpp"
#include "test_support.hpp"

using namespace cip;

namespace {

VideoStream video(int id, int frames, std::vector<std::vector<BBox>> boxes) {
  VideoStream s;
  s.video_id = id;
  s.frame_count = frames;
  s.width = 100;
  s.height = 100;
  s.candidates.resize(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames && f < static_cast<int>(boxes.size()); ++f)
    for (std::size_t i = 0; i < boxes[static_cast<std::size_t>(f)].size(); ++i)
      s.candidates[static_cast<std::size_t>(f)].push_back({static_cast<int>(i), boxes[static_cast<std::size_t>(f)][i]});
  return s;
}

const InterCostFn kConstInter = [](int, int, int, std::span<double> out) {
  for (auto& v : out) v = 0.7;
};

}  // namespace

TEST_SUITE("crf") {
  TEST_CASE("psi_intra examples") {
    const CandidateGeometry a{0.5, 0.5, 0.1, 0.2};
    CHECK(psi_intra(a, a, true) == 0.0);
    CHECK(psi_intra(a, a, false) == 0.0);
    const CandidateGeometry b{0.5, 0.5, 0.4, 0.6};
    const CandidateGeometry far{1.5, 0.5, 0.9, 0.1};
    CHECK(psi_intra(a, far, false) == doctest::Approx(0.5));
    const double size_term = 1.0 - 1.0 / (std::hypot(0.3, 0.4) + 1.0);
    CHECK(psi_intra(a, b, true) - psi_intra(a, b, false) == doctest::Approx(size_term));
  }

  TEST_CASE("edge counts follow the closed form") {
    CHECK(expected_edge_count(2, 3) == 9);
    CHECK(expected_edge_count(6, 100) == 31200);
    for (int N = 1; N <= 4; ++N)
      for (int T = 1; T <= 6; ++T) {
        std::vector<VideoStream> vs;
        for (int n = 0; n < N; ++n) vs.push_back(video(n, T, {}));
        const CrfProblem p = build_window_crf(vs, 0, T, kConstInter);
        CHECK(p.edges.size() == expected_edge_count(N, T));
      }
  }

  TEST_CASE("no candidates gives idle-only 1x1 tables") {
    std::vector<VideoStream> vs{video(0, 3, {}), video(1, 3, {})};
    const CrfProblem p = build_window_crf(vs, 0, 3, kConstInter);
    for (int s : p.state_counts) CHECK(s == 1);
    for (const auto& e : p.edges) {
      CHECK(e.costs.size() == 1);
      CHECK(e.costs[0] == 1.0);
    }
  }

  TEST_CASE("idle entries take the kind mean") {
    // Intra entries: two candidates at frame 0 versus one at frame 1.
    std::vector<VideoStream> vs{video(0, 2, {{BBox{0, 0, 10, 10}, BBox{50, 0, 10, 10}}, {BBox{0, 0, 10, 10}}}),
                                video(1, 2, {{BBox{0, 0, 10, 10}}, {}})};
    const CrfProblem p = build_window_crf(vs, 0, 2, kConstInter);
    const CrfEdge& intra0 = p.edges[0];
    REQUIRE(intra0.kind == EdgeKind::Intra);
    const double mean = (intra0.cost(0, 0) + intra0.cost(1, 0)) / 2.0;
    CHECK(intra0.cost(2, 0) == doctest::Approx(mean));
    CHECK(intra0.cost(0, 1) == doctest::Approx(mean));
    for (const auto& e : p.edges)
      if (e.kind == EdgeKind::Inter)
        for (double c : e.costs) CHECK(c == doctest::Approx(0.7));
  }

  TEST_CASE("augment_idle mean of 0.2 and 0.4") {
    CrfProblem q;
    q.window_length = 4;
    q.has_idle = true;
    q.state_counts = {2, 2, 2, 2};
    q.edges = {CrfEdge{0, 1, EdgeKind::Intra, 2, 2, {0.2, 0, 0, 0}}, CrfEdge{2, 3, EdgeKind::Intra, 2, 2, {0.4, 0, 0, 0}}};
    const IdleEnergies ie = augment_idle(q);
    CHECK(ie.intra == doctest::Approx(0.3));
    CHECK(ie.inter == 1.0);
    CHECK(q.edges[0].cost(1, 1) == doctest::Approx(0.3));
    CHECK(q.edges[1].cost(0, 1) == doctest::Approx(0.3));
    CHECK(q.edges[1].cost(0, 0) == doctest::Approx(0.4));
  }

  TEST_CASE("energy decomposes over edges") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
      const CrfProblem p = cip::testing::random_window_problem(rng, 3, 4, 3);
      std::vector<int> states;
      for (int s : p.state_counts) states.push_back(std::uniform_int_distribution<int>(0, s - 1)(rng));
      double sum = 0.0;
      for (const auto& e : p.edges) sum += e.cost(states[static_cast<std::size_t>(e.a)], states[static_cast<std::size_t>(e.b)]);
      CHECK(labeling_energy(p, states) == doctest::Approx(sum).epsilon(1e-12));
    }
  }

  TEST_CASE("identical candidates give identical labeling energies") {
    const BBox b{10, 10, 10, 20};
    std::vector<VideoStream> vs{video(0, 3, {{b, b}, {b, b}, {b, b}}), video(1, 3, {{b, b}, {b, b}, {b, b}})};
    const CrfProblem p = build_window_crf(vs, 0, 3, kConstInter);
    std::mt19937_64 rng(6);
    const double ref = labeling_energy(p, std::vector<int>(6, 0));
    for (int i = 0; i < 20; ++i) {
      std::vector<int> s;
      for (int k = 0; k < 6; ++k) s.push_back(static_cast<int>(rng() % 2));
      CHECK(labeling_energy(p, s) == doctest::Approx(ref));
    }
  }

  TEST_CASE("json round trip and validation") {
    std::mt19937_64 rng(2);
    const CrfProblem p = cip::testing::random_window_problem(rng, 2, 3, 3);
    const CrfProblem q = problem_from_json(problem_to_json(p));
    REQUIRE(q.edges.size() == p.edges.size());
    CHECK(q.state_counts == p.state_counts);
    for (std::size_t i = 0; i < p.edges.size(); ++i) CHECK(q.edges[i].costs == p.edges[i].costs);
    CrfProblem bad = p;
    bad.edges[0].costs[0] = -1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_THROWS_AS(problem_from_json("{\"nope\": 1}"), ValidationError);
  }

  TEST_CASE("window must fit") {
    std::vector<VideoStream> vs{video(0, 3, {})};
    CHECK_THROWS_AS(build_window_crf(vs, 1, 3, kConstInter), ValidationError);
    CHECK_THROWS_AS(build_window_crf(vs, 0, 0, kConstInter), ValidationError);
  }
}
