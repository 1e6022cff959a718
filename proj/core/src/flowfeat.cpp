#include "cip/flowfeat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cip/error.hpp"

namespace cip {

MotionBin motion_bin(double u, double v) {
  // Angle above the horizontal in [-pi/2, pi/2]; |u| folds the left half-plane
  // onto the right one.
  const double angle = std::atan2(-v, std::abs(u));
  const double sector = std::floor((angle + std::numbers::pi / 8.0) / (std::numbers::pi / 4.0));
  switch (static_cast<int>(sector)) {
    case 0: return MotionBin::East;
    case 1: return MotionBin::NorthEast;
    case -1: return MotionBin::SouthEast;
    default: return sector > 0 ? MotionBin::North : MotionBin::South;
  }
}

BBox surround_box(const BBox& box) {
  return BBox{box.x - 0.5 * box.w, box.y - 0.5 * box.h, 2.0 * box.w, 2.0 * box.h};
}

FlowPatch relative_flow(const FlowRaster& flow, const BBox& box) {
  const PixelRect inner = clip(to_pixel_rect(box), flow.width, flow.height);
  if (inner.empty()) throw ValidationError("relative_flow: box does not intersect the raster");
  const PixelRect outer = clip(to_pixel_rect(surround_box(box)), flow.width, flow.height);

  double su = 0.0, sv = 0.0;
  std::int64_t ring = 0;
  for (int y = outer.y0; y < outer.y1; ++y)
    for (int x = outer.x0; x < outer.x1; ++x) {
      if (inner.contains(x, y)) continue;
      su += flow.u(x, y);
      sv += flow.v(x, y);
      ++ring;
    }
  const double mu = ring > 0 ? su / static_cast<double>(ring) : 0.0;
  const double mv = ring > 0 ? sv / static_cast<double>(ring) : 0.0;

  FlowPatch patch;
  patch.rect = inner;
  const auto n = static_cast<std::size_t>(inner.pixel_count());
  patch.u.reserve(n);
  patch.v.reserve(n);
  for (int y = inner.y0; y < inner.y1; ++y)
    for (int x = inner.x0; x < inner.x1; ++x) {
      patch.u.push_back(flow.u(x, y) - mu);
      patch.v.push_back(flow.v(x, y) - mv);
    }
  return patch;
}

std::array<BBox, kPyramidBoxes> pyramid_boxes(const BBox& box) {
  std::array<BBox, kPyramidBoxes> out;
  out[0] = box;
  int level_begin = 0;
  int level_size = 1;
  int next = 1;
  for (int scale = 1; scale < 4; ++scale) {
    for (int i = 0; i < level_size; ++i) {
      const BBox& parent = out[static_cast<std::size_t>(level_begin + i)];
      const double upper = std::ceil(parent.h / 2.0);
      out[static_cast<std::size_t>(next++)] = BBox{parent.x, parent.y, parent.w, upper};
      out[static_cast<std::size_t>(next++)] = BBox{parent.x, parent.y + upper, parent.w, parent.h - upper};
    }
    level_begin += level_size;
    level_size *= 2;
  }
  return out;
}

std::array<double, kHofBins> hof5(const FlowPatch& patch, const PixelRect& region) {
  std::array<double, kHofBins> hist{};
  const PixelRect r = intersect(patch.rect, region);
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) {
      const double u = patch.u_at(x, y);
      const double v = patch.v_at(x, y);
      const double mag = std::hypot(u, v);
      if (mag <= 0.0) continue;
      hist[static_cast<std::size_t>(motion_bin(u, v))] += mag;
    }
  double total = 0.0;
  for (double h : hist) total += h;
  if (total > 0.0)
    for (double& h : hist) h /= total;
  return hist;
}

std::array<double, kHofBins> hof5(const FlowPatch& patch) { return hof5(patch, patch.rect); }

namespace {

// mean|u|, mean|v|, std|u|, std|v| (population) over the pixels of `region`.
std::array<double, kMagStats> magnitude_stats(const FlowPatch& patch, const PixelRect& region) {
  const PixelRect r = intersect(patch.rect, region);
  std::array<double, kMagStats> s{};
  if (r.empty()) return s;
  const auto n = static_cast<double>(r.pixel_count());
  double su = 0.0, sv = 0.0;
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) {
      su += std::abs(patch.u_at(x, y));
      sv += std::abs(patch.v_at(x, y));
    }
  const double mu = su / n, mv = sv / n;
  double qu = 0.0, qv = 0.0;
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) {
      const double du = std::abs(patch.u_at(x, y)) - mu;
      const double dv = std::abs(patch.v_at(x, y)) - mv;
      qu += du * du;
      qv += dv * dv;
    }
  s[0] = mu;
  s[1] = mv;
  s[2] = std::sqrt(qu / n);
  s[3] = std::sqrt(qv / n);
  return s;
}

}  // namespace

FrameFeature frame_feature(const FlowRaster& flow, const BBox& box) {
  const FlowPatch patch = relative_flow(flow, box);
  const auto boxes = pyramid_boxes(box);
  FrameFeature f;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    // Degenerate bands (zero rows) map to an empty rect and contribute zeros.
    const PixelRect region = to_pixel_rect(boxes[i]);
    const auto h = hof5(patch, region);
    std::copy(h.begin(), h.end(), f.hof.begin() + static_cast<std::ptrdiff_t>(kHofBins * i));
    const auto m = magnitude_stats(patch, region);
    std::copy(m.begin(), m.end(), f.mag.begin() + static_cast<std::ptrdiff_t>(kMagStats * i));
  }
  return f;
}

double correlation(const std::array<double, kMagDim>& a, const std::array<double, kMagDim>& b) {
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  constexpr double kTiny = 1e-24;
  if (saa <= kTiny || sbb <= kTiny) return a == b ? 1.0 : 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double psi_frame(const FrameFeature& a, const FrameFeature& b) {
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.hof.size(); ++i) l1 += std::abs(a.hof[i] - b.hof[i]);
  return (1.0 - std::exp(-l1)) + 0.5 * (1.0 - correlation(a.mag, b.mag));
}

}  // namespace cip
