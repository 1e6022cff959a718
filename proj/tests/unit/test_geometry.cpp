#include <doctest.h>

#include <random>

#include "cip/geometry.hpp"

using namespace cip;

namespace {

// Pixel-counting oracle for integer boxes.
double iou_by_pixels(const BBox& a, const BBox& b) {
  long inter = 0, uni = 0;
  const int x0 = static_cast<int>(std::min(a.x, b.x)), x1 = static_cast<int>(std::max(a.right(), b.right()));
  const int y0 = static_cast<int>(std::min(a.y, b.y)), y1 = static_cast<int>(std::max(a.bottom(), b.bottom()));
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const bool ia = x >= a.x && x < a.right() && y >= a.y && y < a.bottom();
      const bool ib = x >= b.x && x < b.right() && y >= b.y && y < b.bottom();
      inter += ia && ib;
      uni += ia || ib;
    }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("iou of identical and disjoint boxes") {
    const BBox a{3, 4, 10, 20};
    CHECK(iou(a, a) == doctest::Approx(1.0));
    CHECK(iou(a, BBox{100, 100, 5, 5}) == 0.0);
  }

  TEST_CASE("half-shifted square overlaps by a third") {
    CHECK(iou(BBox{0, 0, 10, 10}, BBox{5, 0, 10, 10}) == doctest::Approx(50.0 / 150.0).epsilon(1e-12));
    CHECK(iou_by_pixels(BBox{0, 0, 10, 10}, BBox{5, 0, 10, 10}) == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("iou matches the pixel-counting oracle on random integer boxes") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> pos(0, 30), ext(1, 20);
    for (int i = 0; i < 500; ++i) {
      const BBox a{double(pos(rng)), double(pos(rng)), double(ext(rng)), double(ext(rng))};
      const BBox b{double(pos(rng)), double(pos(rng)), double(ext(rng)), double(ext(rng))};
      const double v = iou(a, b);
      CHECK(v == doctest::Approx(iou_by_pixels(a, b)).epsilon(1e-12));
      CHECK(v == doctest::Approx(iou(b, a)).epsilon(1e-15));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }

  TEST_CASE("pixel rectangles snap and clip") {
    const PixelRect r = to_pixel_rect(BBox{-2.4, 3.6, 10.0, 5.0});
    CHECK(r == PixelRect{-2, 4, 8, 9});
    CHECK(clip(r, 6, 6) == PixelRect{0, 4, 6, 6});
    CHECK(intersect(PixelRect{0, 0, 4, 4}, PixelRect{5, 5, 8, 8}).empty());
  }
}
