#pragma once

// Synthetic multi-view scenes with known ground truth.
//
// Actors follow scripted piecewise-constant 3D velocities. Each camera sees a
// subset of the actors at scripted screen anchors and projects their motion
// orthographically: a lateral velocity appears as cos(yaw) * lateral pixels
// per frame, vertical motion keeps its sign in every view, and depth motion
// only rescales the box. Camera ego-motion adds a constant flow field and
// shifts every box. A camera may track the current co-interest person (CIP)
// so that it stays at its anchor. Inside each true box the flow carries the
// actor's projected velocity; the lower half adds a vertical, per-actor
// oscillating limb texture. The scene carries no appearance information.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cip/dataset.hpp"

namespace cip {

/// World velocity in units (= pixels at scale 1) per frame. Vertical is
/// positive upward; depth is positive away from every camera.
struct VelocitySegment {
  int start = 0;
  double lateral = 0.0;
  double vertical = 0.0;
  double depth = 0.0;
};

struct MotionScript {
  std::vector<VelocitySegment> segments;  // sorted by start, first at frame 0
  double limb_amplitude = 1.0;            // pixels/frame
  double limb_frequency = 0.1;            // cycles/frame
  double limb_phase = 0.0;                // cycles
};

/// Actor `actor` appears with its box center at (x * width, y * height) when
/// the enclosing layout block starts; `scale` multiplies the box size.
struct Placement {
  int actor = 0;
  double x = 0.5;
  double y = 0.5;
  double scale = 1.0;
};

/// Camera re-orientation: the set of visible actors and their anchors from
/// `start` until the next block. Accumulated pan restarts at every block.
struct LayoutBlock {
  int start = 0;
  std::vector<Placement> placements;
};

/// Constant image-wide ego-motion flow from `start` on.
struct EgoSegment {
  int start = 0;
  double du = 0.0;
  double dv = 0.0;
};

struct CameraScript {
  double yaw = 0.0;    // radians
  int wearer = -1;     // actor wearing the camera, -1 for a bystander
  bool track_cip = false;
  std::vector<EgoSegment> ego;
  std::vector<LayoutBlock> layout;
};

struct CipSegment {
  int start = 0;
  int actor = 0;
};

struct NoiseSpec {
  double miss_rate = 0.0;  // probability of dropping a true box
  double fp_rate = 0.0;    // expected spurious boxes per frame
  double jitter = 0.0;     // pixel std of box perturbation
  std::uint64_t seed = 0;
};

struct Scene {
  std::string name;
  int frames = 0;
  int width = 192;
  int height = 144;
  double box_width = 18.0;
  double box_height = 44.0;
  int trajectory_stride = 2;        // spawn trajectories every n frames
  int trajectories_per_actor = 2;   // per spawn and visible actor
  int background_trajectories = 1;  // per spawn
  std::vector<MotionScript> actors;
  std::vector<CameraScript> cameras;
  std::vector<CipSegment> cip;
  NoiseSpec noise;

  void validate() const;
  int cip_at(int frame) const;
};

struct SynthResult {
  Dataset dataset;  // flow rendered on demand; ground_truth always set
  std::vector<std::string> warnings;
};

/// Deterministic in the scene (including noise.seed).
SynthResult generate(const Scene& scene);

/// Projected in-box motion of `actor` in `camera` during frame t, without
/// ego-motion, limb texture or noise: (cos(yaw) * lateral, -vertical).
Point2 projected_velocity(const Scene& scene, int camera, int actor, int frame);

/// Uniform in-box flow (ego-motion plus projected velocity) painted for the
/// actor in camera at frame t, or nullopt when the actor is not placed there.
std::optional<Point2> painted_body_flow(const Scene& scene, int camera, int actor, int frame);

struct PresetInfo {
  std::string name;
  std::string description;
  int default_frames = 0;
  std::function<Scene(std::uint64_t seed, int frames)> make;
};

/// `clean6`, `egoview`, `noisy`, `tiny`.
const std::vector<PresetInfo>& scenario_presets();

/// frames <= 0 selects the preset default.
Scene make_preset(const std::string& name, std::uint64_t seed, int frames = 0);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);
Scene load_scene(const std::filesystem::path& path);

}  // namespace cip
