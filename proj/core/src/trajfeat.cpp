#include "cip/trajfeat.hpp"

#include <algorithm>

#include "cip/error.hpp"

namespace cip {

std::optional<BBox> Tracklet::box_at(int frame) const {
  const int k = frame - start_frame;
  if (k < 0 || k >= length()) return std::nullopt;
  return boxes[static_cast<std::size_t>(k)];
}

Tracklet build_tracklet(const VideoStream& stream, int frame, int candidate, double iou_threshold,
                        int max_length) {
  const auto& seeds = stream.candidates.at(static_cast<std::size_t>(frame));
  if (candidate < 0 || candidate >= static_cast<int>(seeds.size()))
    throw ValidationError("build_tracklet: no candidate " + std::to_string(candidate) +
                          " on frame " + std::to_string(frame));
  Tracklet t;
  t.video_id = stream.video_id;
  t.start_frame = frame;
  t.seed_candidate = candidate;
  t.boxes.push_back(seeds[static_cast<std::size_t>(candidate)].box);
  for (int f = frame + 1; f < stream.frame_count && t.length() < max_length; ++f) {
    const BBox& last = t.boxes.back();
    double best = -1.0;
    const Candidate* pick = nullptr;
    for (const auto& c : stream.candidates[static_cast<std::size_t>(f)]) {
      const double o = iou(last, c.box);
      if (o > best) {  // candidates are id-ordered, so ties keep the lower id
        best = o;
        pick = &c;
      }
    }
    if (pick == nullptr || best < iou_threshold) break;
    t.boxes.push_back(pick->box);
  }
  return t;
}

int coincident_frames(const RawTrajectory& traj, const Tracklet& tracklet) {
  int count = 0;
  for (std::size_t k = 0; k < traj.points.size(); ++k) {
    const auto box = tracklet.box_at(traj.start_frame + static_cast<int>(k));
    if (box && box->contains(traj.points[k].x, traj.points[k].y)) ++count;
  }
  return count;
}

std::vector<RawTrajectory> filter_foreground(std::span<const RawTrajectory> trajectories,
                                             const Tracklet& tracklet) {
  std::vector<RawTrajectory> out;
  for (const auto& t : trajectories)
    if (coincident_frames(t, tracklet) >= kForegroundMinFrames) out.push_back(t);
  return out;
}

std::vector<RawTrajectory> foreground_trajectories(const VideoStream& stream,
                                                   const Tracklet& tracklet) {
  const int first = tracklet.start_frame - (kTrajectoryLength - 1);
  const int last = tracklet.start_frame + tracklet.length() - 1;
  return filter_foreground(stream.trajectories_starting_in(first, last), tracklet);
}

Hankelet hankelet(const RawTrajectory& traj) {
  if (traj.points.size() != static_cast<std::size_t>(kTrajectoryLength))
    throw ValidationError("hankelet: trajectory must have exactly " +
                          std::to_string(kTrajectoryLength) + " points");
  const Point2 origin = traj.points.front();
  Hankelet k;
  for (int i = 0; i < kHankelCols; ++i)
    for (int j = 0; j < kHankelCols; ++j) {
      const Point2& p = traj.points[static_cast<std::size_t>(i + j)];
      k.matrix(2 * i, j) = p.x - origin.x;
      k.matrix(2 * i + 1, j) = p.y - origin.y;
    }
  const HankelGram gram = k.matrix * k.matrix.transpose();
  const double norm = gram.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    k.matrix.setZero();
    return k;
  }
  k.matrix /= std::sqrt(norm);
  k.gram = k.matrix * k.matrix.transpose();
  k.degenerate = false;
  return k;
}

double hankelet_dist(const Hankelet& a, const Hankelet& b) {
  if (a.degenerate || b.degenerate) return kMaxHankeletDist;
  // |Ga + Gb|_F^2 = |Ga|^2 + |Gb|^2 + 2 <Ga, Gb>; the summation order keeps
  // the result exactly symmetric in (a, b).
  const double cross = a.gram.cwiseProduct(b.gram).sum();
  const double sq = a.gram.squaredNorm() + b.gram.squaredNorm() + 2.0 * cross;
  return std::clamp(2.0 - std::sqrt(std::max(sq, 0.0)), 0.0, kMaxHankeletDist);
}

double Mph::total() const {
  double s = 0.0;
  for (const auto& h : bins)
    for (double v : h) s += v;
  return s;
}

Mph mph(std::span<const RawTrajectory> trajectories, int first_frame, int length) {
  Mph m;
  m.first_frame = first_frame;
  m.length = length;
  for (auto& h : m.bins) h.assign(static_cast<std::size_t>(std::max(length, 0)), 0.0);
  for (const auto& t : trajectories) {
    for (std::size_t k = 0; k + 1 < t.points.size(); ++k) {
      const int f = t.start_frame + static_cast<int>(k);
      if (f < first_frame || f >= first_frame + length) continue;
      const double du = t.points[k + 1].x - t.points[k].x;
      const double dv = t.points[k + 1].y - t.points[k].y;
      const double mag = std::hypot(du, dv);
      if (mag <= 0.0) continue;
      m.bins[static_cast<std::size_t>(motion_bin(du, dv))][static_cast<std::size_t>(f - first_frame)] += mag;
    }
  }
  const double total = m.total();
  if (total > 0.0)
    for (auto& h : m.bins)
      for (double& v : h) v /= total;
  return m;
}

double mph_dist(const Mph& a, const Mph& b) {
  if (a.first_frame != b.first_frame || a.length != b.length)
    throw ValidationError("mph_dist: histograms cover different windows");
  double s = 0.0;
  for (std::size_t d = 0; d < a.bins.size(); ++d)
    for (std::size_t i = 0; i < a.bins[d].size(); ++i) s += std::abs(a.bins[d][i] - b.bins[d][i]);
  return s / static_cast<double>(kHofBins);
}

TrajFeature traj_feature(std::span<const RawTrajectory> foreground, int first_frame, int length) {
  TrajFeature f;
  f.trajectory_count = foreground.size();
  f.hankelets.reserve(foreground.size());
  for (const auto& t : foreground) f.hankelets.push_back(hankelet(t));
  f.mph = mph(foreground, first_frame, length);
  return f;
}

double hankelet_term(std::span<const Hankelet> a, std::span<const Hankelet> b) {
  if (a.empty() || b.empty()) return kMaxHankeletDist;
  double s = 0.0;
  for (const auto& ka : a)
    for (const auto& kb : b) s += hankelet_dist(ka, kb);
  return s / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

double psi_traj(const TrajFeature& a, const TrajFeature& b) {
  return hankelet_term(a.hankelets, b.hankelets) + mph_dist(a.mph, b.mph);
}

}  // namespace cip
