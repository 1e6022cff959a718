#pragma once

// Trajectory-based motion features of a candidate: a greedy IoU tracklet
// seeded at the candidate, the dense trajectories that move with it, their
// Hankelets and a per-frame movement pattern histogram (MPH).

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cip/dataset.hpp"
#include "cip/flowfeat.hpp"

namespace cip {

inline constexpr double kDefaultTrackletIou = 0.3;
inline constexpr int kTrackletLength = 15;
/// A trajectory is foreground when it lies inside the tracklet on at least
/// this many of its frames.
inline constexpr int kForegroundMinFrames = 8;

inline constexpr int kHankelRows = 16;
inline constexpr int kHankelCols = 8;
inline const double kMaxHankeletDist = 2.0 - std::sqrt(2.0);

struct Tracklet {
  int video_id = 0;
  int start_frame = 0;
  int seed_candidate = 0;
  std::vector<BBox> boxes;  // one per frame from start_frame

  int length() const { return static_cast<int>(boxes.size()); }
  std::optional<BBox> box_at(int frame) const;
};

/// Follows the seed forward, each step taking the candidate of the next
/// frame with the highest IoU (lower id on ties), until `max_length` boxes,
/// the end of the stream, or a best IoU below `iou_threshold`.
Tracklet build_tracklet(const VideoStream& stream, int frame, int candidate,
                        double iou_threshold = kDefaultTrackletIou,
                        int max_length = kTrackletLength);

/// Number of frames on which `traj` lies inside (or on the edge of) the
/// tracklet box of the same frame.
int coincident_frames(const RawTrajectory& traj, const Tracklet& tracklet);

std::vector<RawTrajectory> filter_foreground(std::span<const RawTrajectory> trajectories,
                                             const Tracklet& tracklet);

/// Foreground trajectories of `tracklet` among those of `stream` whose span
/// can overlap it.
std::vector<RawTrajectory> foreground_trajectories(const VideoStream& stream,
                                                   const Tracklet& tracklet);

using HankelMatrix = Eigen::Matrix<double, kHankelRows, kHankelCols>;
using HankelGram = Eigen::Matrix<double, kHankelRows, kHankelRows>;

/// Block-Hankel matrix of the trajectory's first-point-relative positions,
/// scaled so that |K K^T|_F = 1. A motionless trajectory yields the zero
/// matrix and is flagged degenerate.
struct Hankelet {
  HankelMatrix matrix = HankelMatrix::Zero();
  HankelGram gram = HankelGram::Zero();  // matrix * matrix^T
  bool degenerate = true;
};

Hankelet hankelet(const RawTrajectory& traj);

/// 2 - |K_a K_a^T + K_b K_b^T|_F, in [0, 2 - sqrt(2)]. A degenerate operand
/// gives the maximum.
double hankelet_dist(const Hankelet& a, const Hankelet& b);

/// Five per-frame histograms over a window, in MotionBin order, jointly
/// L1-normalized.
struct Mph {
  int first_frame = 0;
  int length = 0;
  std::array<std::vector<double>, kHofBins> bins;

  double total() const;
};

/// Each displacement p[f+1] - p[f] with f inside [first_frame,
/// first_frame + length) adds its length to bin (direction, f - first_frame).
Mph mph(std::span<const RawTrajectory> trajectories, int first_frame, int length);

/// (1/5) sum over directions of the L1 histogram difference. Both operands
/// must cover the same window.
double mph_dist(const Mph& a, const Mph& b);

struct TrajFeature {
  std::vector<Hankelet> hankelets;
  Mph mph;
  std::size_t trajectory_count = 0;
};

TrajFeature traj_feature(std::span<const RawTrajectory> foreground, int first_frame, int length);

/// Mean pairwise Hankelet distance; kMaxHankeletDist when either side has none.
double hankelet_term(std::span<const Hankelet> a, std::span<const Hankelet> b);

double psi_traj(const TrajFeature& a, const TrajFeature& b);

}  // namespace cip
