#pragma once

// End-to-end detection: overlapping windows, one CRF per window, per-frame
// merge by lowest window energy, and detection-style evaluation.

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cip/config.hpp"
#include "cip/crf.hpp"
#include "cip/dataset.hpp"
#include "cip/flowfeat.hpp"
#include "cip/solver.hpp"
#include "cip/trajfeat.hpp"

namespace cip {

/// Starts 0, stride, 2 stride, ...; the last window is shifted left to end
/// exactly at `total` and duplicates are dropped.
std::vector<int> make_windows(int total, int length, int stride);

struct FrameAssignment {
  std::optional<int> candidate;  // empty: idle
  std::optional<BBox> box;
};

struct WindowResult {
  int index = 0;
  int start = 0;
  int length = 0;
  int num_videos = 0;
  std::vector<FrameAssignment> states;  // [video * length + t]
  double energy = 0.0;

  const FrameAssignment& at(int video, int t) const {
    return states[static_cast<std::size_t>(video * length + t)];
  }
};

/// For every (video, frame) takes the assignment of the covering window with
/// the lowest energy; ties go to the lowest window index.
std::vector<Detection> merge_windows(std::span<const WindowResult> results, int frame_count);

/// Thread-safe, lazily filled per-frame feature store shared by concurrent
/// window jobs. A frame slot holds, for every candidate, its frame feature and
/// foreground trajectories, and for every video pair the window-independent
/// part of the inter-video cost.
class FeatureCache {
 public:
  struct CandidateEntry {
    FrameFeature frame;
    std::vector<RawTrajectory> foreground;
  };
  struct FrameSlot {
    std::vector<std::vector<CandidateEntry>> videos;  // [video][candidate]
    std::vector<std::vector<double>> pair_tables;     // [pair_index(n, m)] row-major
  };

  FeatureCache(const Dataset& dataset, const Config& config);
  ~FeatureCache();
  FeatureCache(const FeatureCache&) = delete;
  FeatureCache& operator=(const FeatureCache&) = delete;

  const FrameSlot& frame(int f) const;
  std::size_t pair_index(int n, int m) const;
  std::size_t computed_frames() const;

 private:
  FrameSlot compute(int f) const;

  const Dataset& dataset_;
  Config config_;
  struct Slot;
  std::unique_ptr<Slot[]> slots_;
  mutable std::atomic<std::size_t> computed_{0};
};

/// Builds and solves the CRF of one window.
WindowResult process_window(const Dataset& dataset, const FeatureCache& cache, const Config& config,
                            int index, int start, int length, SolveReport* report = nullptr);

/// Full pipeline; deterministic for a given dataset and config. A window
/// longer than the stream is clamped to the stream length.
std::vector<Detection> detect(const Dataset& dataset, const Config& config);

struct EvalCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f_score() const;
  EvalCounts& operator+=(const EvalCounts& o);
};

struct EvalReport {
  std::vector<EvalCounts> per_video;
  EvalCounts overall;
  std::size_t evaluated_frames = 0;
};

/// [video][frame] -> frame takes part in evaluation.
using FrameMask = std::vector<std::vector<bool>>;

/// Per frame: a box with IoU > threshold against the ground truth is a true
/// positive; any other box is a false positive; a ground truth without such a
/// box is a false negative. Detections must cover exactly the evaluated
/// frames (all frames when `include` is null).
EvalReport evaluate(std::span<const Detection> detections, const GroundTruth& gt,
                    const FrameMask* include = nullptr, double iou_threshold = 0.5);

struct FilteredEval {
  std::vector<Detection> detections;
  FrameMask include;
  std::size_t excluded = 0;
};

/// Drops frames whose ground truth overlaps no candidate by more than the
/// threshold.
FilteredEval exclude_undetectable(std::span<const Detection> detections, const GroundTruth& gt,
                                  std::span<const VideoStream> videos, double iou_threshold = 0.5);

std::string format_report(const EvalReport& report);
std::string report_to_json(const EvalReport& report);

}  // namespace cip
