#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cip/error.hpp"
#include "cip/flowfeat.hpp"
#include "test_support.hpp"

using namespace cip;
using cip::testing::constant_flow;
using cip::testing::random_flow;

namespace {

FlowPatch random_patch(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> d(-4.0, 4.0);
  FlowPatch p;
  p.rect = {10, 20, 10 + w, 20 + h};
  for (int i = 0; i < w * h; ++i) {
    p.u.push_back(d(rng));
    p.v.push_back(d(rng));
  }
  return p;
}

FlowPatch mirrored(const FlowPatch& p) {
  FlowPatch m = p;
  const int w = p.width();
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < w; ++x) {
      const auto src = static_cast<std::size_t>(y * w + (w - 1 - x));
      const auto dst = static_cast<std::size_t>(y * w + x);
      m.u[dst] = -p.u[src];
      m.v[dst] = p.v[src];
    }
  return m;
}

FlowPatch uniform_patch(double u, double v) {
  FlowPatch p;
  p.rect = {0, 0, 4, 4};
  p.u.assign(16, u);
  p.v.assign(16, v);
  return p;
}

}  // namespace

TEST_SUITE("flowfeat") {
  TEST_CASE("motion bins fold the horizontal sign") {
    CHECK(motion_bin(1, 0) == MotionBin::East);
    CHECK(motion_bin(-1, 0) == MotionBin::East);
    CHECK(motion_bin(0, -1) == MotionBin::North);
    CHECK(motion_bin(0, 1) == MotionBin::South);
    CHECK(motion_bin(1, -1) == MotionBin::NorthEast);
    CHECK(motion_bin(-1, -1) == MotionBin::NorthEast);
    CHECK(motion_bin(-1, 1) == MotionBin::SouthEast);
  }

  TEST_CASE("hof5 of uniform flows") {
    const auto up = hof5(uniform_patch(0, -2));
    CHECK(up == std::array<double, 5>{0, 0, 1, 0, 0});
    CHECK(hof5(uniform_patch(1, 0)) == std::array<double, 5>{1, 0, 0, 0, 0});
    CHECK(hof5(uniform_patch(-1, 0)) == std::array<double, 5>{1, 0, 0, 0, 0});
    CHECK(hof5(uniform_patch(0, 0)) == std::array<double, 5>{0, 0, 0, 0, 0});
  }

  TEST_CASE("hof5 is mirror invariant but not flip invariant") {
    std::mt19937_64 rng(21);
    int changed = 0;
    for (int i = 0; i < 100; ++i) {
      const FlowPatch p = random_patch(rng, 7, 9);
      const auto a = hof5(p), b = hof5(mirrored(p));
      for (int k = 0; k < 5; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-9));
      FlowPatch f = p;
      for (auto& v : f.v) v = -v;
      const auto c = hof5(f);
      if (std::abs(c[2] - a[2]) > 1e-6 || std::abs(c[4] - a[4]) > 1e-6) ++changed;
    }
    CHECK(changed == 100);
  }

  TEST_CASE("relative flow removes a constant field") {
    const auto r = relative_flow(constant_flow(40, 40, 3.0f, -2.0f), BBox{10, 10, 8, 12});
    for (std::size_t i = 0; i < r.u.size(); ++i) {
      CHECK(r.u[i] == doctest::Approx(0.0));
      CHECK(r.v[i] == doctest::Approx(0.0));
    }
  }

  TEST_CASE("static box in moving ring gives the negated ring flow") {
    FlowRaster f = constant_flow(40, 40, 1.0f, 0.0f);
    for (int y = 10; y < 22; ++y)
      for (int x = 10; x < 18; ++x) f.set(x, y, 0.0f, 0.0f);
    const auto r = relative_flow(f, BBox{10, 10, 8, 12});
    REQUIRE(r.u.size() == 96);
    for (std::size_t i = 0; i < r.u.size(); ++i) {
      CHECK(r.u[i] == doctest::Approx(-1.0));
      CHECK(r.v[i] == doctest::Approx(0.0));
    }
  }

  TEST_CASE("camera term plus blob yields the blob") {
    std::mt19937_64 rng(5);
    const BBox box{12, 8, 10, 14};
    FlowRaster blob = FlowRaster::zeros(48, 40);
    std::uniform_real_distribution<double> d(-2, 2);
    for (int y = 8; y < 22; ++y)
      for (int x = 12; x < 22; ++x) blob.set(x, y, float(d(rng)), float(d(rng)));
    FlowRaster both = blob;
    for (std::size_t i = 0; i < both.data.size(); i += 2) {
      both.data[i] += 2.5f;
      both.data[i + 1] -= 1.25f;
    }
    const auto a = relative_flow(both, box), b = relative_flow(blob, box);
    for (std::size_t i = 0; i < a.u.size(); ++i) {
      CHECK(a.u[i] == doctest::Approx(blob.u(12 + int(i) % 10, 8 + int(i) / 10)).epsilon(1e-6));
      CHECK(a.u[i] == doctest::Approx(b.u[i]).epsilon(1e-6));
      CHECK(a.v[i] == doctest::Approx(b.v[i]).epsilon(1e-6));
    }
  }

  TEST_CASE("empty ring leaves flow unchanged and outside boxes throw") {
    const FlowRaster f = constant_flow(10, 10, 1.0f, 1.0f);
    const auto r = relative_flow(f, BBox{0, 0, 10, 10});
    CHECK(r.u.front() == doctest::Approx(1.0));
    CHECK_THROWS_AS(relative_flow(f, BBox{20, 20, 4, 4}), ValidationError);
  }

  TEST_CASE("pyramid layout") {
    const auto p8 = pyramid_boxes(BBox{0, 0, 4, 8});
    for (int i = 7; i < 15; ++i) CHECK(p8[i].h == 1.0);
    const auto p15 = pyramid_boxes(BBox{3, 5, 6, 15});
    CHECK(p15[0] == BBox{3, 5, 6, 15});
    CHECK(p15[1].h == 8.0);
    CHECK(p15[2].h == 7.0);
    CHECK(p15[2].y == 13.0);
    double y = 5.0, total = 0.0;
    for (int i = 7; i < 15; ++i) {
      CHECK(p15[i].y == y);
      y += p15[i].h;
      total += p15[i].h;
    }
    CHECK(total == 15.0);
  }

  TEST_CASE("frame features: dimensions, zeros and normalization") {
    const auto z = frame_feature(FlowRaster::zeros(30, 30), BBox{5, 5, 8, 16});
    CHECK(z.hof.size() == 75);
    CHECK(z.mag.size() == 60);
    for (double v : z.hof) CHECK(v == 0.0);
    for (double v : z.mag) CHECK(v == 0.0);

    std::mt19937_64 rng(8);
    const auto f = frame_feature(random_flow(rng, 40, 40), BBox{10, 10, 9, 17});
    for (int b = 0; b < 15; ++b) {
      const double s = std::accumulate(f.hof.begin() + 5 * b, f.hof.begin() + 5 * b + 5, 0.0);
      CHECK((std::abs(s - 1.0) < 1e-9 || s == 0.0));
    }
  }

  TEST_CASE("frame features ignore a constant camera term") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 20; ++i) {
      FlowRaster f = random_flow(rng, 50, 50);
      FlowRaster g = f;
      for (std::size_t k = 0; k < g.data.size(); k += 2) {
        g.data[k] += 1.75f;
        g.data[k + 1] += -0.5f;
      }
      const BBox box{18, 14, 10, 20};
      const auto a = frame_feature(f, box), b = frame_feature(g, box);
      for (int k = 0; k < kHofDim; ++k) CHECK(a.hof[k] == doctest::Approx(b.hof[k]).epsilon(1e-5));
      for (int k = 0; k < kMagDim; ++k) CHECK(a.mag[k] == doctest::Approx(b.mag[k]).epsilon(1e-5));
    }
  }

  TEST_CASE("psi_frame values") {
    std::mt19937_64 rng(2);
    FrameFeature a = frame_feature(random_flow(rng, 40, 40), BBox{10, 10, 9, 17});
    CHECK(psi_frame(a, a) == doctest::Approx(0.0));

    FrameFeature p, q;
    for (int k = 0; k < kMagDim; ++k) {
      p.mag[k] = k;
      q.mag[k] = -k;
    }
    CHECK(correlation(p.mag, q.mag) == doctest::Approx(-1.0));
    CHECK(psi_frame(p, q) == doctest::Approx(1.0));

    for (int i = 0; i < 100; ++i) {
      const auto x = frame_feature(random_flow(rng, 30, 30), BBox{8, 6, 8, 16});
      const auto y = frame_feature(random_flow(rng, 30, 30), BBox{8, 6, 8, 16});
      const double v = psi_frame(x, y);
      CHECK(v >= 0.0);
      CHECK(v < 2.0);
      CHECK(v == doctest::Approx(psi_frame(y, x)).epsilon(1e-12));
    }
  }

  TEST_CASE("zero-variance correlation convention") {
    std::array<double, kMagDim> z{}, one{};
    one.fill(1.0);
    CHECK(correlation(z, z) == 1.0);
    CHECK(correlation(z, one) == 0.0);
  }
}
