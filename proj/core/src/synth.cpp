#include "cip/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cip/error.hpp"

namespace cip {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class Seg>
const Seg* active_segment(const std::vector<Seg>& segs, int t) {
  const Seg* cur = nullptr;
  for (const auto& s : segs) {
    if (s.start > t) break;
    cur = &s;
  }
  return cur;
}

template <class Seg>
int active_index(const std::vector<Seg>& segs, int t) {
  int idx = -1;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].start > t) break;
    idx = static_cast<int>(i);
  }
  return idx;
}

struct Vec3 {
  double lat = 0.0, vert = 0.0, depth = 0.0;
};

double limb_flow(const MotionScript& m, int t, double rel_y) {
  if (rel_y < 0.5) return 0.0;
  return m.limb_amplitude *
         std::sin(kTwoPi * (m.limb_frequency * t + m.limb_phase) + kTwoPi * (rel_y - 0.5));
}

// Precomputed kinematics shared by painting, trajectories and boxes.
class Kinematics {
 public:
  explicit Kinematics(const Scene& s) : scene_(s) {
    const auto T = static_cast<std::size_t>(s.frames);
    vel_.assign(s.actors.size(), std::vector<Vec3>(T));
    disp_.assign(s.actors.size(), std::vector<Vec3>(T + 1));
    for (std::size_t a = 0; a < s.actors.size(); ++a) {
      for (int t = 0; t < s.frames; ++t) {
        const auto* seg = active_segment(s.actors[a].segments, t);
        Vec3 v;
        if (seg) v = {seg->lateral, seg->vertical, seg->depth};
        vel_[a][static_cast<std::size_t>(t)] = v;
        const Vec3& d = disp_[a][static_cast<std::size_t>(t)];
        disp_[a][static_cast<std::size_t>(t) + 1] = {d.lat + v.lat, d.vert + v.vert, d.depth + v.depth};
      }
    }
    cams_.resize(s.cameras.size());
    for (std::size_t c = 0; c < s.cameras.size(); ++c) build_camera(static_cast<int>(c));
  }

  const Vec3& vel(int a, int t) const { return vel_[static_cast<std::size_t>(a)][static_cast<std::size_t>(t)]; }
  const Vec3& disp(int a, int t) const { return disp_[static_cast<std::size_t>(a)][static_cast<std::size_t>(t)]; }

  Point2 projected(int c, int a, int t) const {
    const Vec3& v = vel(a, t);
    return {std::cos(scene_.cameras[static_cast<std::size_t>(c)].yaw) * v.lat, -v.vert};
  }

  // Image-wide ego flow of camera c during frame t.
  Point2 ego(int c, int t) const { return cams_[static_cast<std::size_t>(c)].ego[static_cast<std::size_t>(t)]; }

  const LayoutBlock* block(int c, int t) const {
    return active_segment(scene_.cameras[static_cast<std::size_t>(c)].layout, t);
  }

  // Last frame (inclusive) of the layout block active at t.
  int block_end(int c, int t) const {
    const auto& layout = scene_.cameras[static_cast<std::size_t>(c)].layout;
    const int i = active_index(layout, t);
    if (i < 0) return t;
    if (static_cast<std::size_t>(i) + 1 < layout.size()) return layout[static_cast<std::size_t>(i) + 1].start - 1;
    return scene_.frames - 1;
  }

  const Placement* placement(int c, int a, int t) const {
    const auto* b = block(c, t);
    if (!b) return nullptr;
    for (const auto& p : b->placements)
      if (p.actor == a) return &p;
    return nullptr;
  }

  // Continuous box of actor a in camera c at frame t.
  std::optional<BBox> exact_box(int c, int a, int t) const {
    const auto* b = block(c, t);
    const Placement* p = placement(c, a, t);
    if (!b || !p) return std::nullopt;
    const auto& cam = scene_.cameras[static_cast<std::size_t>(c)];
    const Point2 pan = cams_[static_cast<std::size_t>(c)].pan[static_cast<std::size_t>(t)];
    const Vec3& d0 = disp(a, b->start);
    const Vec3& d1 = disp(a, t);
    const double cx = p->x * scene_.width + pan.x + std::cos(cam.yaw) * (d1.lat - d0.lat);
    const double cy = p->y * scene_.height + pan.y - (d1.vert - d0.vert);
    const double g = std::clamp(1.0 - 0.01 * (d1.depth - d0.depth), 0.6, 1.4);
    const double w = scene_.box_width * p->scale * g;
    const double h = scene_.box_height * p->scale * g;
    return BBox{cx - 0.5 * w, cy - 0.5 * h, w, h};
  }

  // Pixel-aligned box used for candidates, ground truth and painting.
  std::optional<BBox> box(int c, int a, int t) const {
    auto e = exact_box(c, a, t);
    if (!e) return std::nullopt;
    const double w = std::max(2.0, std::round(e->w));
    const double h = std::max(2.0, std::round(e->h));
    return BBox{std::round(e->x), std::round(e->y), w, h};
  }

  bool visible(const BBox& b) const {
    const PixelRect r = clip(to_pixel_rect(b), scene_.width, scene_.height);
    return static_cast<double>(r.pixel_count()) >= 0.5 * b.area();
  }

 private:
  struct CameraState {
    std::vector<Point2> ego;  // per frame
    std::vector<Point2> pan;  // accumulated since the block start
  };

  void build_camera(int c) {
    const auto& cam = scene_.cameras[static_cast<std::size_t>(c)];
    auto& st = cams_[static_cast<std::size_t>(c)];
    const auto T = static_cast<std::size_t>(scene_.frames);
    st.ego.assign(T, {});
    st.pan.assign(T, {});
    for (int t = 0; t < scene_.frames; ++t) {
      Point2 e;
      if (const auto* seg = active_segment(cam.ego, t)) e = {seg->du, seg->dv};
      const int cip = scene_.cip_at(t);
      if (cam.track_cip && cip >= 0 && placement(c, cip, t)) {
        const Point2 p = projected(c, cip, t);
        e.x -= p.x;
        e.y -= p.y;
      }
      st.ego[static_cast<std::size_t>(t)] = e;
    }
    for (int t = 0; t < scene_.frames; ++t) {
      const auto* b = block(c, t);
      if (!b || b->start == t || t == 0) continue;
      const Point2 prev = st.pan[static_cast<std::size_t>(t) - 1];
      const Point2 e = st.ego[static_cast<std::size_t>(t) - 1];
      st.pan[static_cast<std::size_t>(t)] = {prev.x + e.x, prev.y + e.y};
    }
  }

  const Scene& scene_;
  std::vector<std::vector<Vec3>> vel_;
  std::vector<std::vector<Vec3>> disp_;
  std::vector<CameraState> cams_;
};

struct PaintItem {
  PixelRect rect;  // clipped
  double y0 = 0.0;
  double h = 1.0;
  float u = 0.0f, v = 0.0f;
  double amp = 0.0, freq = 0.0, phase = 0.0;
};

struct FramePaint {
  float du = 0.0f, dv = 0.0f;
  std::vector<PaintItem> items;  // painted in order
};

class SynthFlowSource final : public FlowSource {
 public:
  SynthFlowSource(int width, int height, int frames, std::vector<std::vector<FramePaint>> paint)
      : width_(width), height_(height), frames_(frames), paint_(std::move(paint)) {}

  FlowRaster load(int video, int frame) const override {
    if (video < 0 || static_cast<std::size_t>(video) >= paint_.size() || frame < 0 || frame >= frames_)
      throw ValidationError("synthetic flow: no raster for video " + std::to_string(video) + " frame " +
                            std::to_string(frame));
    FlowRaster r = FlowRaster::zeros(width_, height_);
    if (frame == frames_ - 1) return r;
    const FramePaint& fp = paint_[static_cast<std::size_t>(video)][static_cast<std::size_t>(frame)];
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x) r.set(x, y, fp.du, fp.dv);
    for (const auto& it : fp.items) {
      for (int y = it.rect.y0; y < it.rect.y1; ++y) {
        const double rel = (y + 0.5 - it.y0) / it.h;
        double limb = 0.0;
        if (rel >= 0.5)
          limb = it.amp * std::sin(kTwoPi * (it.freq * frame + it.phase) + kTwoPi * (rel - 0.5));
        const auto v = static_cast<float>(it.v + limb);
        for (int x = it.rect.x0; x < it.rect.x1; ++x) r.set(x, y, it.u, v);
      }
    }
    return r;
  }

 private:
  int width_, height_, frames_;
  std::vector<std::vector<FramePaint>> paint_;
};

// Placements painted far to near.
std::vector<Placement> draw_order(const LayoutBlock& b) {
  std::vector<Placement> out = b.placements;
  std::stable_sort(out.begin(), out.end(), [](const Placement& x, const Placement& y) {
    if (x.scale != y.scale) return x.scale < y.scale;
    return x.actor < y.actor;
  });
  return out;
}

}  // namespace

int Scene::cip_at(int frame) const {
  const auto* s = active_segment(cip, frame);
  return s ? s->actor : -1;
}

void Scene::validate() const {
  if (actors.empty()) throw ValidationError("scene: at least one actor required");
  if (cameras.size() < 2) throw ValidationError("scene: at least two cameras required");
  if (frames < 1) throw ValidationError("scene: frames must be positive");
  if (width < 8 || height < 8) throw ValidationError("scene: frame dimensions too small");
  if (!(box_width > 0.0 && box_height > 0.0)) throw ValidationError("scene: box size must be positive");
  if (trajectory_stride < 1) throw ValidationError("scene: trajectory_stride must be positive");
  if (trajectories_per_actor < 0 || background_trajectories < 0)
    throw ValidationError("scene: trajectory counts must be >= 0");
  for (double r : {noise.miss_rate, noise.fp_rate})
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("scene: noise rates must lie in [0, 1]");
  if (!(noise.jitter >= 0.0)) throw ValidationError("scene: jitter must be >= 0");

  const int A = static_cast<int>(actors.size());
  auto check_starts = [&](auto const& segs, const std::string& what) {
    if (segs.empty()) return;
    if (segs.front().start != 0) throw ValidationError("scene: " + what + " must start at frame 0");
    for (std::size_t i = 1; i < segs.size(); ++i)
      if (segs[i].start <= segs[i - 1].start) throw ValidationError("scene: " + what + " starts must increase");
  };
  for (const auto& a : actors) {
    if (a.segments.empty()) throw ValidationError("scene: actor without motion segments");
    check_starts(a.segments, "motion segments");
    if (!(a.limb_amplitude >= 0.0)) throw ValidationError("scene: limb amplitude must be >= 0");
  }
  if (cip.empty()) throw ValidationError("scene: no co-interest person schedule");
  check_starts(cip, "cip segments");
  for (const auto& s : cip)
    if (s.actor < 0 || s.actor >= A) throw ValidationError("scene: cip actor out of range");
  for (const auto& c : cameras) {
    if (c.wearer < -1 || c.wearer >= A) throw ValidationError("scene: wearer out of range");
    check_starts(c.ego, "ego segments");
    check_starts(c.layout, "layout blocks");
    for (const auto& b : c.layout)
      for (const auto& p : b.placements) {
        if (p.actor < 0 || p.actor >= A) throw ValidationError("scene: placement actor out of range");
        if (p.actor == c.wearer) throw ValidationError("scene: a camera cannot see its wearer");
        if (!(p.scale > 0.0)) throw ValidationError("scene: placement scale must be positive");
      }
  }
}

Point2 projected_velocity(const Scene& scene, int camera, int actor, int frame) {
  const auto* seg = active_segment(scene.actors.at(static_cast<std::size_t>(actor)).segments, frame);
  if (!seg) return {};
  return {std::cos(scene.cameras.at(static_cast<std::size_t>(camera)).yaw) * seg->lateral, -seg->vertical};
}

std::optional<Point2> painted_body_flow(const Scene& scene, int camera, int actor, int frame) {
  scene.validate();
  const Kinematics k(scene);
  if (!k.placement(camera, actor, frame)) return std::nullopt;
  const Point2 e = k.ego(camera, frame);
  const Point2 p = k.projected(camera, actor, frame);
  return Point2{e.x + p.x, e.y + p.y};
}

SynthResult generate(const Scene& scene) {
  scene.validate();
  const Kinematics k(scene);
  const int N = static_cast<int>(scene.cameras.size());
  const int T = scene.frames;
  const int A = static_cast<int>(scene.actors.size());

  std::mt19937_64 traj_rng(scene.noise.seed);
  std::mt19937_64 noise_rng(scene.noise.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::poisson_distribution<int> fp_count(scene.noise.fp_rate > 0.0 ? scene.noise.fp_rate : 1.0);

  SynthResult out;
  Dataset& ds = out.dataset;
  GroundTruth gt(static_cast<std::size_t>(N), std::vector<std::optional<BBox>>(static_cast<std::size_t>(T)));
  std::vector<std::vector<FramePaint>> paint(static_cast<std::size_t>(N),
                                             std::vector<FramePaint>(static_cast<std::size_t>(T)));
  std::vector<bool> ever_visible(static_cast<std::size_t>(A), false);

  for (int c = 0; c < N; ++c) {
    VideoStream vs;
    vs.video_id = c;
    vs.frame_count = T;
    vs.width = scene.width;
    vs.height = scene.height;
    vs.candidates.resize(static_cast<std::size_t>(T));

    for (int t = 0; t < T; ++t) {
      const LayoutBlock* blk = k.block(c, t);
      FramePaint& fp = paint[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)];
      const Point2 e = k.ego(c, t);
      fp.du = static_cast<float>(e.x);
      fp.dv = static_cast<float>(e.y);

      std::vector<BBox> boxes;
      if (blk) {
        for (const auto& p : draw_order(*blk)) {
          const auto b = k.box(c, p.actor, t);
          const PixelRect r = clip(to_pixel_rect(*b), scene.width, scene.height);
          if (!r.empty()) {
            const Point2 pr = k.projected(c, p.actor, t);
            const auto& m = scene.actors[static_cast<std::size_t>(p.actor)];
            fp.items.push_back({r, b->y, b->h, static_cast<float>(e.x + pr.x), static_cast<float>(e.y + pr.y),
                                m.limb_amplitude, m.limb_frequency, m.limb_phase});
          }
        }
        for (const auto& p : blk->placements) {
          const auto b = k.box(c, p.actor, t);
          if (!k.visible(*b)) continue;
          ever_visible[static_cast<std::size_t>(p.actor)] = true;
          if (p.actor == scene.cip_at(t)) gt[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)] = *b;
          if (scene.noise.miss_rate > 0.0 && unit(noise_rng) < scene.noise.miss_rate) continue;
          BBox nb = *b;
          if (scene.noise.jitter > 0.0) {
            nb.x = std::round(nb.x + scene.noise.jitter * gauss(noise_rng));
            nb.y = std::round(nb.y + scene.noise.jitter * gauss(noise_rng));
            nb.w = std::max(2.0, std::round(nb.w + scene.noise.jitter * gauss(noise_rng)));
            nb.h = std::max(2.0, std::round(nb.h + scene.noise.jitter * gauss(noise_rng)));
            if (!nb.intersects_frame(scene.width, scene.height)) nb = *b;
          }
          boxes.push_back(nb);
        }
      }
      if (scene.noise.fp_rate > 0.0) {
        const int extra = fp_count(noise_rng);
        for (int i = 0; i < extra; ++i) {
          const double w = std::round(scene.box_width * (0.8 + 0.4 * unit(noise_rng)));
          const double h = std::round(scene.box_height * (0.8 + 0.4 * unit(noise_rng)));
          const double x = std::round(unit(noise_rng) * std::max(1.0, scene.width - w));
          const double y = std::round(unit(noise_rng) * std::max(1.0, scene.height - h));
          boxes.push_back({x, y, w, h});
        }
      }
      std::stable_sort(boxes.begin(), boxes.end(), [](const BBox& a, const BBox& b) {
        return std::tie(a.x, a.y, a.w, a.h) < std::tie(b.x, b.y, b.w, b.h);
      });
      auto& cands = vs.candidates[static_cast<std::size_t>(t)];
      for (std::size_t i = 0; i < boxes.size(); ++i) cands.push_back({static_cast<int>(i), boxes[i]});
    }

    // Trajectories follow the painted flow of their actor (or the background).
    for (int t0 = 0; t0 + kTrajectoryLength <= T; t0 += scene.trajectory_stride) {
      const LayoutBlock* blk = k.block(c, t0);
      if (blk && k.block_end(c, t0) >= t0 + kTrajectoryLength - 1) {
        for (const auto& p : blk->placements) {
          const auto b = k.box(c, p.actor, t0);
          if (!k.visible(*b)) continue;
          const auto& m = scene.actors[static_cast<std::size_t>(p.actor)];
          for (int i = 0; i < scene.trajectories_per_actor; ++i) {
            const double rx = 0.2 + 0.6 * unit(traj_rng);
            const double ry = 0.1 + 0.8 * unit(traj_rng);
            RawTrajectory tr;
            tr.start_frame = t0;
            Point2 q{b->x + rx * b->w, b->y + ry * b->h};
            for (int s = 0; s < kTrajectoryLength; ++s) {
              tr.points.push_back(q);
              const int f = t0 + s;
              const Point2 e = k.ego(c, f);
              const Point2 pr = k.projected(c, p.actor, f);
              q.x += e.x + pr.x;
              q.y += e.y + pr.y + limb_flow(m, f, ry);
            }
            vs.trajectories.push_back(std::move(tr));
          }
        }
      }
      for (int i = 0; i < scene.background_trajectories; ++i) {
        RawTrajectory tr;
        tr.start_frame = t0;
        Point2 q{unit(traj_rng) * scene.width, unit(traj_rng) * scene.height};
        for (int s = 0; s < kTrajectoryLength; ++s) {
          tr.points.push_back(q);
          const Point2 e = k.ego(c, t0 + s);
          q.x += e.x;
          q.y += e.y;
        }
        vs.trajectories.push_back(std::move(tr));
      }
    }
    ds.videos.push_back(std::move(vs));
  }

  for (int a = 0; a < A; ++a)
    if (!ever_visible[static_cast<std::size_t>(a)])
      out.warnings.push_back("actor " + std::to_string(a) + " is never visible in any camera");

  ds.flow = std::make_shared<SynthFlowSource>(scene.width, scene.height, T, std::move(paint));
  ds.ground_truth = std::move(gt);
  return out;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

MotionScript random_motion(Rng& rng, int frames) {
  MotionScript m;
  Vec3 d;
  for (int t = 0; t < frames;) {
    const int len = uniform_int(rng, 10, 30);
    VelocitySegment s;
    s.start = t;
    if (uniform(rng, 0.0, 1.0) >= 0.2) {
      s.lateral = std::clamp((uniform(rng, -20.0, 20.0) - d.lat) / len, -2.5, 2.5);
      s.vertical = std::clamp((uniform(rng, -6.0, 6.0) - d.vert) / len, -1.0, 1.0);
      s.depth = std::clamp((uniform(rng, -15.0, 15.0) - d.depth) / len, -1.0, 1.0);
    }
    d.lat += s.lateral * len;
    d.vert += s.vertical * len;
    d.depth += s.depth * len;
    m.segments.push_back(s);
    t += len;
  }
  m.limb_amplitude = uniform(rng, 0.6, 1.4);
  m.limb_frequency = uniform(rng, 0.04, 0.15);
  m.limb_phase = uniform(rng, 0.0, 1.0);
  return m;
}

// Small mean-reverting head motion.
void jitter_ego(Rng& rng, std::vector<EgoSegment>& ego, int first, int last) {
  Point2 pan;
  for (int t = first; t <= last;) {
    const int len = std::min(uniform_int(rng, 10, 30), last - t + 1);
    EgoSegment s;
    s.start = t;
    s.du = std::clamp((uniform(rng, -8.0, 8.0) - pan.x) / len, -0.5, 0.5);
    s.dv = std::clamp((uniform(rng, -3.0, 3.0) - pan.y) / len, -0.2, 0.2);
    pan.x += s.du * len;
    pan.y += s.dv * len;
    ego.push_back(s);
    t += len;
  }
}

// Fast one-directional turn of a head-mounted camera with vertical shake.
void sweep_ego(Rng& rng, std::vector<EgoSegment>& ego, int first, int last, double dir) {
  double pan_y = 0.0;
  for (int t = first; t <= last;) {
    const int len = std::min(uniform_int(rng, 2, 5), last - t + 1);
    EgoSegment s;
    s.start = t;
    s.du = dir * uniform(rng, 12.0, 18.0);
    s.dv = std::clamp((uniform(rng, -15.0, 15.0) - pan_y) / len, -4.0, 4.0);
    pan_y += s.dv * len;
    ego.push_back(s);
    t += len;
  }
}

struct SceneShape {
  std::string name;
  int frames = 0;
  int cameras = 0;
  int actors = 0;
  int cip_period = 0;
  bool worn = false;  // camera k is worn by actor k
  double others_visible = 0.5;
};

Scene build_scene(const SceneShape& sh, std::uint64_t seed) {
  Rng rng(seed);
  Scene s;
  s.name = sh.name;
  s.frames = sh.frames;
  for (int a = 0; a < sh.actors; ++a) s.actors.push_back(random_motion(rng, sh.frames));
  for (int t = 0, i = 0; t < sh.frames; t += sh.cip_period, ++i) s.cip.push_back({t, i % sh.actors});

  // shown[seg][camera][actor] for observer views. A bystander never appears in
  // every observer view of a segment.
  std::vector<std::vector<std::vector<bool>>> shown(s.cip.size());
  for (std::size_t seg = 0; seg < s.cip.size(); ++seg) {
    const int cip = s.cip[seg].actor;
    auto& vis = shown[seg];
    vis.assign(static_cast<std::size_t>(sh.cameras), std::vector<bool>(static_cast<std::size_t>(sh.actors), false));
    std::vector<int> observers;
    for (int c = 0; c < sh.cameras; ++c)
      if (!(sh.worn && c == cip)) observers.push_back(c);
    for (int a = 0; a < sh.actors; ++a) {
      if (a == cip) continue;
      std::size_t count = 0;
      for (int c : observers) {
        const bool on = c != (sh.worn ? a : -1) && uniform(rng, 0.0, 1.0) < sh.others_visible;
        vis[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)] = on;
        count += on;
      }
      if (!observers.empty() && count == observers.size()) {
        const int drop = observers[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(observers.size()) - 1))];
        vis[static_cast<std::size_t>(drop)][static_cast<std::size_t>(a)] = false;
      }
    }
  }

  for (int c = 0; c < sh.cameras; ++c) {
    CameraScript cam;
    cam.yaw = kTwoPi * (c + uniform(rng, 0.1, 0.4)) / sh.cameras;
    cam.wearer = sh.worn && c < sh.actors ? c : -1;
    cam.track_cip = true;
    for (std::size_t seg = 0; seg < s.cip.size(); ++seg) {
      const int first = s.cip[seg].start;
      const int last = seg + 1 < s.cip.size() ? s.cip[seg + 1].start - 1 : sh.frames - 1;
      const int cip = s.cip[seg].actor;
      if (cip == cam.wearer) {
        // The wearer keeps turning: short blocks in which other actors sweep through the view.
        std::vector<int> others;
        for (int a = 0; a < sh.actors; ++a)
          if (a != cam.wearer) others.push_back(a);
        for (int t = first; t <= last;) {
          const int len = std::min(uniform_int(rng, 12, 20), last - t + 1);
          const double dir = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
          LayoutBlock sweep;
          sweep.start = t;
          std::shuffle(others.begin(), others.end(), rng);
          const int shown = std::min<int>(uniform_int(rng, 1, 2), static_cast<int>(others.size()));
          for (int i = 0; i < shown; ++i) {
            const double x = dir > 0 ? uniform(rng, -0.05, 0.25) - 0.3 * i : uniform(rng, 0.75, 1.05) + 0.3 * i;
            sweep.placements.push_back({others[static_cast<std::size_t>(i)], x, uniform(rng, 0.45, 0.65),
                                        uniform(rng, 0.9, 1.3)});
          }
          sweep_ego(rng, cam.ego, t, t + len - 1, dir);
          cam.layout.push_back(std::move(sweep));
          t += len;
        }
      } else {
        jitter_ego(rng, cam.ego, first, last);
        LayoutBlock blk;
        blk.start = first;
        blk.placements.push_back({cip, 0.5 + uniform(rng, -0.04, 0.04), 0.55, uniform(rng, 0.95, 1.1)});
        std::array<double, 4> slots{0.14, 0.3, 0.7, 0.86};
        std::shuffle(slots.begin(), slots.end(), rng);
        std::size_t next = 0;
        for (int a = 0; a < sh.actors && next < slots.size(); ++a) {
          if (!shown[seg][static_cast<std::size_t>(c)][static_cast<std::size_t>(a)]) continue;
          blk.placements.push_back({a, slots[next++] + uniform(rng, -0.03, 0.03), uniform(rng, 0.5, 0.6),
                                    uniform(rng, 0.8, 1.0)});
        }
        cam.layout.push_back(std::move(blk));
      }
    }
    s.cameras.push_back(std::move(cam));
  }
  s.noise.seed = seed;
  return s;
}

std::vector<PresetInfo> make_catalog() {
  std::vector<PresetInfo> v;
  v.push_back({"clean6", "6 views, 6 actors, CIP rotates every 200 frames, no noise", 1200,
               [](std::uint64_t seed, int frames) {
                 return build_scene({"clean6", frames, 6, 6, 200, false, 0.5}, seed);
               }});
  v.push_back({"egoview", "4 views worn by 4 actors; the CIP's own camera is included", 400,
               [](std::uint64_t seed, int frames) {
                 return build_scene({"egoview", frames, 4, 4, 200, true, 0.5}, seed);
               }});
  v.push_back({"noisy", "clean6 with miss 0.1, fp 0.1, jitter 2px", 1200, [](std::uint64_t seed, int frames) {
                 Scene s = build_scene({"noisy", frames, 6, 6, 200, false, 0.5}, seed);
                 s.noise.miss_rate = 0.1;
                 s.noise.fp_rate = 0.1;
                 s.noise.jitter = 2.0;
                 return s;
               }});
  v.push_back({"tiny", "2 views, 2 actors, 30 frames", 30, [](std::uint64_t seed, int frames) {
                 return build_scene({"tiny", frames, 2, 2, frames, false, 0.5}, seed);
               }});
  return v;
}

}  // namespace

const std::vector<PresetInfo>& scenario_presets() {
  static const std::vector<PresetInfo> catalog = make_catalog();
  return catalog;
}

Scene make_preset(const std::string& name, std::uint64_t seed, int frames) {
  for (const auto& p : scenario_presets())
    if (p.name == name) return p.make(seed, frames > 0 ? frames : p.default_frames);
  throw ValidationError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Scene documents

namespace {

template <class T>
T req(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("scene: missing '") + key + "'");
  return j.at(key).get<T>();
}

template <class T>
T opt(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::string scene_to_json(const Scene& s) {
  json j;
  j["name"] = s.name;
  j["frames"] = s.frames;
  j["width"] = s.width;
  j["height"] = s.height;
  j["box_width"] = s.box_width;
  j["box_height"] = s.box_height;
  j["trajectory_stride"] = s.trajectory_stride;
  j["trajectories_per_actor"] = s.trajectories_per_actor;
  j["background_trajectories"] = s.background_trajectories;
  j["actors"] = json::array();
  for (const auto& a : s.actors) {
    json ja{{"limb_amplitude", a.limb_amplitude},
            {"limb_frequency", a.limb_frequency},
            {"limb_phase", a.limb_phase},
            {"segments", json::array()}};
    for (const auto& seg : a.segments)
      ja["segments"].push_back(
          {{"start", seg.start}, {"lateral", seg.lateral}, {"vertical", seg.vertical}, {"depth", seg.depth}});
    j["actors"].push_back(std::move(ja));
  }
  j["cameras"] = json::array();
  for (const auto& c : s.cameras) {
    json jc{{"yaw", c.yaw}, {"wearer", c.wearer}, {"track_cip", c.track_cip},
            {"ego", json::array()}, {"layout", json::array()}};
    for (const auto& e : c.ego) jc["ego"].push_back({{"start", e.start}, {"du", e.du}, {"dv", e.dv}});
    for (const auto& b : c.layout) {
      json jb{{"start", b.start}, {"placements", json::array()}};
      for (const auto& p : b.placements)
        jb["placements"].push_back({{"actor", p.actor}, {"x", p.x}, {"y", p.y}, {"scale", p.scale}});
      jc["layout"].push_back(std::move(jb));
    }
    j["cameras"].push_back(std::move(jc));
  }
  j["cip"] = json::array();
  for (const auto& c : s.cip) j["cip"].push_back({{"start", c.start}, {"actor", c.actor}});
  j["noise"] = {{"miss_rate", s.noise.miss_rate},
                {"fp_rate", s.noise.fp_rate},
                {"jitter", s.noise.jitter},
                {"seed", s.noise.seed}};
  return j.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scene: ") + e.what());
  }
  Scene s;
  try {
    s.name = opt<std::string>(j, "name", "");
    s.frames = req<int>(j, "frames");
    s.width = opt<int>(j, "width", s.width);
    s.height = opt<int>(j, "height", s.height);
    s.box_width = opt<double>(j, "box_width", s.box_width);
    s.box_height = opt<double>(j, "box_height", s.box_height);
    s.trajectory_stride = opt<int>(j, "trajectory_stride", s.trajectory_stride);
    s.trajectories_per_actor = opt<int>(j, "trajectories_per_actor", s.trajectories_per_actor);
    s.background_trajectories = opt<int>(j, "background_trajectories", s.background_trajectories);
    for (const auto& ja : req<json>(j, "actors")) {
      MotionScript m;
      m.limb_amplitude = opt<double>(ja, "limb_amplitude", m.limb_amplitude);
      m.limb_frequency = opt<double>(ja, "limb_frequency", m.limb_frequency);
      m.limb_phase = opt<double>(ja, "limb_phase", m.limb_phase);
      for (const auto& js : req<json>(ja, "segments"))
        m.segments.push_back({req<int>(js, "start"), opt<double>(js, "lateral", 0.0),
                              opt<double>(js, "vertical", 0.0), opt<double>(js, "depth", 0.0)});
      s.actors.push_back(std::move(m));
    }
    for (const auto& jc : req<json>(j, "cameras")) {
      CameraScript c;
      c.yaw = opt<double>(jc, "yaw", 0.0);
      c.wearer = opt<int>(jc, "wearer", -1);
      c.track_cip = opt<bool>(jc, "track_cip", false);
      for (const auto& je : opt<json>(jc, "ego", json::array()))
        c.ego.push_back({req<int>(je, "start"), opt<double>(je, "du", 0.0), opt<double>(je, "dv", 0.0)});
      for (const auto& jb : req<json>(jc, "layout")) {
        LayoutBlock b;
        b.start = req<int>(jb, "start");
        for (const auto& jp : req<json>(jb, "placements"))
          b.placements.push_back({req<int>(jp, "actor"), req<double>(jp, "x"), req<double>(jp, "y"),
                                  opt<double>(jp, "scale", 1.0)});
        c.layout.push_back(std::move(b));
      }
      s.cameras.push_back(std::move(c));
    }
    for (const auto& jc : req<json>(j, "cip")) s.cip.push_back({req<int>(jc, "start"), req<int>(jc, "actor")});
    if (j.contains("noise")) {
      const json& n = j["noise"];
      s.noise.miss_rate = opt<double>(n, "miss_rate", 0.0);
      s.noise.fp_rate = opt<double>(n, "fp_rate", 0.0);
      s.noise.jitter = opt<double>(n, "jitter", 0.0);
      s.noise.seed = opt<std::uint64_t>(n, "seed", 0);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scene: ") + e.what());
  }
  s.validate();
  return s;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return scene_from_json(ss.str());
}

}  // namespace cip
