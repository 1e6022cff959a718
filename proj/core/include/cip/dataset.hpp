#pragma once

// On-disk dataset model: synchronized multi-video inputs, ground truth and
// detections.
//
// Layout under a dataset root:
//
//   manifest.json                    {"videos": [{video_id, frame_count, width, height}, ...]}
//   ground_truth.json                [[null | {x,y,w,h}, ...per frame], ...per video]   (optional)
//   video_<k>/candidates.json        [[{id,x,y,w,h}, ...per candidate], ...per frame]
//   video_<k>/trajectories.json      [{start_frame, points: [[x,y] x 15]}, ...]
//   video_<k>/flow/<frame:06d>.flo2  "CIP2" | u32 width | u32 height | f32 (u,v) x width*height
//
// All integers and floats in .flo2 are little-endian. Pixel coordinates use a
// top-left origin with y pointing down. The raster stored for frame t is the
// motion from t to t+1; the last frame carries an all-zero raster.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cip/geometry.hpp"

namespace cip {

inline constexpr int kTrajectoryLength = 15;

struct Candidate {
  int id = 0;
  BBox box;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Dense per-pixel motion field, row-major, interleaved (u, v) in pixels/frame.
struct FlowRaster {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  static FlowRaster zeros(int width, int height);

  std::size_t index(int x, int y) const {
    return 2 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x));
  }
  float u(int x, int y) const { return data[index(x, y)]; }
  float v(int x, int y) const { return data[index(x, y) + 1]; }
  void set(int x, int y, float u, float v) {
    data[index(x, y)] = u;
    data[index(x, y) + 1] = v;
  }

  friend bool operator==(const FlowRaster&, const FlowRaster&) = default;
};

struct RawTrajectory {
  int start_frame = 0;
  std::vector<Point2> points;

  int last_frame() const { return start_frame + static_cast<int>(points.size()) - 1; }
  friend bool operator==(const RawTrajectory&, const RawTrajectory&) = default;
};

struct VideoStream {
  int video_id = 0;
  int frame_count = 0;
  int width = 0;
  int height = 0;
  std::vector<std::vector<Candidate>> candidates;  // [frame][candidate]
  std::vector<RawTrajectory> trajectories;         // sorted by start_frame

  /// Trajectories whose start frame lies in [first, last].
  std::span<const RawTrajectory> trajectories_starting_in(int first, int last) const;

  friend bool operator==(const VideoStream&, const VideoStream&) = default;
};

/// [video][frame] -> box of the true co-interest person, or nullopt when it is
/// not visible in that frame.
using GroundTruth = std::vector<std::vector<std::optional<BBox>>>;

/// Supplies flow rasters on demand. Implementations must be safe to call
/// concurrently.
class FlowSource {
 public:
  virtual ~FlowSource() = default;
  virtual FlowRaster load(int video, int frame) const = 0;
};

/// Reads `video_<k>/flow/<frame>.flo2` below a dataset root.
class DiskFlowSource final : public FlowSource {
 public:
  explicit DiskFlowSource(std::filesystem::path root);
  FlowRaster load(int video, int frame) const override;

 private:
  std::filesystem::path root_;
};

/// Holds every raster in memory; [video][frame].
class MemoryFlowSource final : public FlowSource {
 public:
  explicit MemoryFlowSource(std::vector<std::vector<FlowRaster>> rasters);
  FlowRaster load(int video, int frame) const override;

 private:
  std::vector<std::vector<FlowRaster>> rasters_;
};

struct Dataset {
  std::vector<VideoStream> videos;
  std::shared_ptr<const FlowSource> flow;
  std::optional<GroundTruth> ground_truth;
  std::size_t dropped_trajectories = 0;  // load-time warnings

  int frame_count() const { return videos.empty() ? 0 : videos.front().frame_count; }
  FlowRaster load_flow(int video, int frame) const;
};

/// One emitted per-frame decision. `candidate` and `box` are both empty for
/// the idle state.
struct Detection {
  int video_id = 0;
  int frame = 0;
  std::optional<int> candidate;
  std::optional<BBox> box;
  double window_energy = 0.0;

  bool idle() const { return !candidate.has_value(); }
  friend bool operator==(const Detection&, const Detection&) = default;
};

std::filesystem::path video_dir(const std::filesystem::path& root, int video);
std::filesystem::path flow_path(const std::filesystem::path& root, int video, int frame);

FlowRaster read_flo2(const std::filesystem::path& path);
void write_flo2(const std::filesystem::path& path, const FlowRaster& raster);

/// Loads and validates a dataset. Throws ValidationError for contract
/// violations (unsynchronized videos, malformed rasters, bad candidate ids)
/// and IoError for unreadable files. Trajectories that are not exactly
/// kTrajectoryLength points long are dropped and counted.
Dataset load_dataset(const std::filesystem::path& root);

/// Writes every artifact of `dataset`, including one raster per frame pulled
/// from its flow source.
void write_dataset(const Dataset& dataset, const std::filesystem::path& root);

GroundTruth load_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);

/// Sorted (video-major, frame-minor) serialization. Duplicate (video, frame)
/// pairs are rejected.
void write_detections(std::vector<Detection> detections, const std::filesystem::path& path);
std::string detections_to_json(std::vector<Detection> detections);
std::vector<Detection> load_detections(const std::filesystem::path& path);

}  // namespace cip
