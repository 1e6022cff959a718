#include "cip/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace cip {

double iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  const double inter = ix * iy;
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

PixelRect to_pixel_rect(const BBox& box) {
  auto snap = [](double v) { return static_cast<int>(std::lround(v)); };
  return PixelRect{snap(box.x), snap(box.y), snap(box.x + box.w), snap(box.y + box.h)};
}

PixelRect clip(const PixelRect& r, int width, int height) {
  return PixelRect{std::clamp(r.x0, 0, width), std::clamp(r.y0, 0, height),
                   std::clamp(r.x1, 0, width), std::clamp(r.y1, 0, height)};
}

PixelRect intersect(const PixelRect& a, const PixelRect& b) {
  return PixelRect{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1),
                   std::min(a.y1, b.y1)};
}

}  // namespace cip
