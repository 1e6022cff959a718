#pragma once

#include <cstdint>

namespace cip {

/// Axis-aligned box in pixel units, origin top-left, y pointing down.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w > 0.0 && h > 0.0 ? w * h : 0.0; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }

  /// Inclusive on all four edges.
  bool contains(double px, double py) const {
    return px >= x && px <= x + w && py >= y && py <= y + h;
  }

  bool intersects_frame(int width, int height) const {
    return w > 0.0 && h > 0.0 && x < width && y < height && right() > 0.0 && bottom() > 0.0;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Intersection over union; 0 for disjoint or empty boxes.
double iou(const BBox& a, const BBox& b);

/// Half-open integer pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 > x0 ? x1 - x0 : 0; }
  int height() const { return y1 > y0 ? y1 - y0 : 0; }
  bool empty() const { return width() == 0 || height() == 0; }
  std::int64_t pixel_count() const { return static_cast<std::int64_t>(width()) * height(); }
  bool contains(int px, int py) const { return px >= x0 && px < x1 && py >= y0 && py < y1; }

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Snaps box edges to the nearest pixel boundary.
PixelRect to_pixel_rect(const BBox& box);

PixelRect clip(const PixelRect& r, int width, int height);

PixelRect intersect(const PixelRect& a, const PixelRect& b);

}  // namespace cip
