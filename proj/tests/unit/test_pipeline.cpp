#include <doctest.h>

#include <algorithm>
#include <random>

#include "cip/error.hpp"
#include "cip/pipeline.hpp"
#include "cip/synth.hpp"
#include "test_support.hpp"

using namespace cip;

namespace {

WindowResult window(int index, int start, int length, int videos, double energy, int tag) {
  WindowResult w;
  w.index = index;
  w.start = start;
  w.length = length;
  w.num_videos = videos;
  w.energy = energy;
  for (int i = 0; i < videos * length; ++i) w.states.push_back({tag, BBox{static_cast<double>(tag), 0, 1, 1}});
  return w;
}

// Brute-force merge oracle.
int best_window(const std::vector<WindowResult>& ws, int f) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(ws.size()); ++i) {
    const auto& w = ws[static_cast<std::size_t>(i)];
    if (f < w.start || f >= w.start + w.length) continue;
    if (best < 0) {
      best = i;
      continue;
    }
    const auto& b = ws[static_cast<std::size_t>(best)];
    if (w.energy < b.energy || (w.energy == b.energy && w.index < b.index)) best = i;
  }
  return best;
}

GroundTruth truth_of(int videos, int frames, std::optional<BBox> box) {
  return GroundTruth(static_cast<std::size_t>(videos), std::vector<std::optional<BBox>>(static_cast<std::size_t>(frames), box));
}

std::vector<Detection> dets_of(int videos, int frames, std::optional<BBox> box) {
  std::vector<Detection> d;
  for (int v = 0; v < videos; ++v)
    for (int f = 0; f < frames; ++f) d.push_back({v, f, box ? std::optional<int>(0) : std::nullopt, box, 0.0});
  return d;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("window starts") {
    CHECK(make_windows(250, 100, 50) == std::vector<int>{0, 50, 100, 150});
    CHECK(make_windows(230, 100, 50) == std::vector<int>{0, 50, 100, 130});
    CHECK(make_windows(100, 100, 50) == std::vector<int>{0});
    CHECK(make_windows(10, 3, 3) == std::vector<int>{0, 3, 6, 7});
    CHECK_THROWS_AS(make_windows(50, 100, 50), ValidationError);
    CHECK_THROWS_AS(make_windows(50, 10, 0), ValidationError);
  }

  TEST_CASE("windows cover every frame") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
      const int total = 1 + static_cast<int>(rng() % 300);
      const int length = 1 + static_cast<int>(rng() % static_cast<unsigned>(total));
      const int stride = 1 + static_cast<int>(rng() % static_cast<unsigned>(length));
      const auto starts = make_windows(total, length, stride);
      std::vector<int> cover(static_cast<std::size_t>(total), 0);
      for (int s : starts) {
        CHECK(s >= 0);
        CHECK(s + length <= total);
        for (int f = s; f < s + length; ++f) ++cover[static_cast<std::size_t>(f)];
      }
      CHECK(std::count(cover.begin(), cover.end(), 0) == 0);
      CHECK(std::is_sorted(starts.begin(), starts.end()));
    }
  }

  TEST_CASE("merge picks lowest energy, ties to lowest index") {
    std::vector<WindowResult> ws{window(0, 0, 4, 2, 5.0, 10), window(1, 2, 4, 2, 3.0, 11)};
    const auto d = merge_windows(ws, 6);
    REQUIRE(d.size() == 12);
    CHECK(d[0].candidate == 10);
    CHECK(d[1].candidate == 10);
    CHECK(d[2].candidate == 11);
    CHECK(d[5].candidate == 11);
    CHECK(d[2].window_energy == 3.0);

    std::vector<WindowResult> tie{window(1, 0, 4, 1, 2.0, 21), window(0, 0, 4, 1, 2.0, 20)};
    for (const auto& x : merge_windows(tie, 4)) CHECK(x.candidate == 20);
  }

  TEST_CASE("merge reports gaps and shape mismatches") {
    std::vector<WindowResult> gap{window(0, 0, 2, 1, 1.0, 0), window(1, 3, 2, 1, 1.0, 1)};
    CHECK_THROWS_AS(merge_windows(gap, 5), ValidationError);
    std::vector<WindowResult> shapes{window(0, 0, 2, 1, 1.0, 0), window(1, 0, 2, 2, 1.0, 1)};
    CHECK_THROWS_AS(merge_windows(shapes, 2), ValidationError);
    CHECK_THROWS_AS(merge_windows(std::span<const WindowResult>{}, 2), ValidationError);
  }

  TEST_CASE("merge fuzz against brute force and order invariance") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 200; ++trial) {
      const int total = 5 + static_cast<int>(rng() % 40);
      const int length = 1 + static_cast<int>(rng() % static_cast<unsigned>(total));
      const int stride = 1 + static_cast<int>(rng() % static_cast<unsigned>(length));
      std::vector<WindowResult> ws;
      int idx = 0;
      for (int s : make_windows(total, length, stride))
        ws.push_back(window(idx, s, length, 2, static_cast<double>(rng() % 4), idx)), ++idx;
      const auto merged = merge_windows(ws, total);
      for (const auto& d : merged) CHECK(d.candidate == best_window(ws, d.frame));
      auto shuffled = ws;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      CHECK(merge_windows(shuffled, total) == merged);
    }
  }

  TEST_CASE("evaluate counts") {
    const BBox b{10, 10, 10, 20};
    const auto gt = truth_of(2, 3, b);
    auto exact = evaluate(dets_of(2, 3, b), gt);
    CHECK(exact.overall.tp == 6);
    CHECK(exact.overall.f_score() == 1.0);

    auto idle = evaluate(dets_of(2, 3, std::nullopt), gt);
    CHECK(idle.overall.fn == 6);
    CHECK(idle.overall.f_score() == 0.0);

    // IoU 0.4: shifted by 4 of 10 px -> 6*20 / (2*200 - 120) = 0.4286 < 0.5.
    const BBox off{14, 10, 10, 20};
    auto miss = evaluate(dets_of(2, 3, off), gt);
    CHECK(miss.overall.tp == 0);
    CHECK(miss.overall.fp == 6);
    CHECK(miss.overall.fn == 6);
    CHECK(evaluate(dets_of(2, 3, off), gt, nullptr, 0.4).overall.tp == 6);

    const auto no_cip = truth_of(1, 2, std::nullopt);
    auto spurious = evaluate(dets_of(1, 2, b), no_cip);
    CHECK(spurious.overall.fp == 2);
    CHECK(spurious.overall.fn == 0);
    CHECK(evaluate(dets_of(1, 2, std::nullopt), no_cip).overall.tp == 0);
  }

  TEST_CASE("evaluate requires full coverage") {
    const BBox b{0, 0, 4, 4};
    auto dets = dets_of(2, 3, b);
    dets.erase(dets.begin() + 4);  // (video 1, frame 1)
    try {
      evaluate(dets, truth_of(2, 3, b));
      FAIL("expected an error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("(video 1, frame 1)") != std::string::npos);
    }
    auto dup = dets_of(1, 2, b);
    dup.push_back(dup.front());
    CHECK_THROWS_AS(evaluate(dup, truth_of(1, 2, b)), ValidationError);
  }

  TEST_CASE("exclude undetectable frames") {
    const BBox b{10, 10, 10, 20};
    VideoStream s;
    s.frame_count = 3;
    s.candidates = {{{0, b}}, {{0, BBox{60, 60, 10, 20}}}, {}};
    GroundTruth gt{{b, b, std::nullopt}};
    const auto dets = dets_of(1, 3, std::nullopt);
    const FilteredEval f = exclude_undetectable(dets, gt, std::span<const VideoStream>(&s, 1));
    CHECK(f.excluded == 1);
    CHECK(f.include[0] == std::vector<bool>{true, false, true});
    CHECK(f.detections.size() == 2);
    const EvalReport r = evaluate(f.detections, gt, &f.include);
    CHECK(r.evaluated_frames == 2);
    CHECK(r.overall.fn == 1);
  }

  TEST_CASE("window CRF structure on a synthetic window") {
    const SynthResult sr = generate(make_preset("tiny", 3));
    Config c;
    c.window_length = 6;
    FeatureCache cache(sr.dataset, c);
    SolveReport rep;
    const WindowResult w = process_window(sr.dataset, cache, c, 0, 4, 6, &rep);
    CHECK(w.states.size() == 12);
    CHECK(w.start == 4);
    CHECK(rep.lower_bound <= rep.labeling.energy + 1e-9);
    CHECK(w.energy == doctest::Approx(rep.labeling.energy));
    CHECK(cache.computed_frames() == 6);
    for (int n = 0; n < 2; ++n)
      for (int t = 0; t < 6; ++t) {
        const auto& a = w.at(n, t);
        CHECK(a.candidate.has_value() == a.box.has_value());
        if (a.candidate) {
          const auto& cands = sr.dataset.videos[static_cast<std::size_t>(n)].candidates[static_cast<std::size_t>(4 + t)];
          CHECK(cands.at(static_cast<std::size_t>(*a.candidate)).box == *a.box);
        }
      }
  }

  TEST_CASE("detect is deterministic and thread-count independent") {
    const SynthResult sr = generate(make_preset("tiny", 5));
    Config c;
    c.window_length = 10;
    c.window_stride = 5;
    c.threads = 1;
    const auto a = detect(sr.dataset, c);
    c.threads = 4;
    const auto b = detect(sr.dataset, c);
    CHECK(a == b);
    CHECK(a.size() == 2 * 30);
    CHECK(evaluate(a, *sr.dataset.ground_truth).overall.f_score() >= 0.9);
  }

  TEST_CASE("single video runs") {
    SynthResult sr = generate(make_preset("tiny", 5));
    sr.dataset.videos.resize(1);
    sr.dataset.ground_truth->resize(1);
    Config c;
    c.window_length = 10;
    c.window_stride = 5;
    const auto d = detect(sr.dataset, c);
    CHECK(d.size() == 30);
    CHECK_NOTHROW(evaluate(d, *sr.dataset.ground_truth));
  }

  TEST_CASE("three views, sixty frames") {
    Scene s = make_preset("clean6", 21, 60);
    s.cameras.resize(3);
    const SynthResult sr = generate(s);
    Config c;
    c.window_length = 30;
    c.window_stride = 15;
    const auto d = detect(sr.dataset, c);
    CHECK(evaluate(d, *sr.dataset.ground_truth).overall.f_score() >= 0.9);
  }
}
