#pragma once

// Frame-based motion features of a candidate box: camera-compensated
// ("relative") optical flow, a 5-bin orientation histogram that ignores the
// horizontal direction of motion, and magnitude statistics, each computed on
// a 15-box vertical pyramid.

#include <array>
#include <vector>

#include "cip/dataset.hpp"
#include "cip/geometry.hpp"

namespace cip {

inline constexpr int kHofBins = 5;
inline constexpr int kPyramidBoxes = 15;
inline constexpr int kMagStats = 4;
inline constexpr int kHofDim = kHofBins * kPyramidBoxes;  // 75
inline constexpr int kMagDim = kMagStats * kPyramidBoxes;  // 60

/// Merged direction bins. Horizontal mirror pairs share a bin.
enum class MotionBin : int { East = 0, NorthEast = 1, North = 2, SouthEast = 3, South = 4 };

/// Direction bin of a displacement in image coordinates (v grows downward).
/// The sign of u is discarded, which folds W into E, NW into NE and SW into SE.
MotionBin motion_bin(double u, double v);

/// Flow vectors over the in-frame part of a box, with their pixel origin.
struct FlowPatch {
  PixelRect rect;             // absolute pixel coordinates
  std::vector<double> u, v;   // row-major over rect

  int width() const { return rect.width(); }
  int height() const { return rect.height(); }
  bool empty() const { return rect.empty(); }
  double u_at(int x, int y) const { return u[static_cast<std::size_t>((y - rect.y0) * width() + (x - rect.x0))]; }
  double v_at(int x, int y) const { return v[static_cast<std::size_t>((y - rect.y0) * width() + (x - rect.x0))]; }
};

struct FrameFeature {
  std::array<double, kHofDim> hof{};
  std::array<double, kMagDim> mag{};
};

/// The box grown by 50% of its extent on every side.
BBox surround_box(const BBox& box);

/// Flow inside `box` minus the mean flow of the ring between `box` and
/// surround_box(box), the ring clipped to the raster. An empty ring leaves
/// the flow unchanged. Throws ValidationError if the box misses the raster.
FlowPatch relative_flow(const FlowRaster& flow, const BBox& box);

/// Scale-major, top-to-bottom: 1 + 2 + 4 + 8 boxes. Each split gives the
/// upper band ceil(h / 2) rows.
std::array<BBox, kPyramidBoxes> pyramid_boxes(const BBox& box);

/// Magnitude-weighted histogram over (E, NE, N, SE, S), L1-normalized; all
/// zeros when the patch carries no motion.
std::array<double, kHofBins> hof5(const FlowPatch& patch);

/// hof5 restricted to the pixels of `region` (absolute pixel coordinates).
std::array<double, kHofBins> hof5(const FlowPatch& patch, const PixelRect& region);

FrameFeature frame_feature(const FlowRaster& flow, const BBox& box);

/// Pearson correlation with the convention used by psi_frame for
/// zero-variance inputs: 1 when the vectors are identical, 0 otherwise.
double correlation(const std::array<double, kMagDim>& a, const std::array<double, kMagDim>& b);

/// (1 - exp(-|hof_a - hof_b|_1)) + (1 - corr(mag_a, mag_b)) / 2, in [0, 2).
double psi_frame(const FrameFeature& a, const FrameFeature& b);

}  // namespace cip
