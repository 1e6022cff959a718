#include "cip/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "cip/error.hpp"

namespace cip {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kFlowMagic = {'C', 'I', 'P', '2'};
constexpr std::size_t kFlowHeaderBytes = 12;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

double finite_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ValidationError(where + ": missing numeric field '" + key + "'");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ValidationError(where + ": non-finite '" + key + "'");
  return v;
}

BBox box_from_json(const json& j, const std::string& where) {
  return BBox{finite_number(j, "x", where), finite_number(j, "y", where),
              finite_number(j, "w", where), finite_number(j, "h", where)};
}

json box_to_json(const BBox& b) { return json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}; }

std::string where(int video, int frame) {
  return "video " + std::to_string(video) + " frame " + std::to_string(frame);
}

void check_flow_header(const fs::path& path, int width, int height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<unsigned char, kFlowHeaderBytes> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in.gcount() != static_cast<std::streamsize>(header.size()) ||
      !std::equal(kFlowMagic.begin(), kFlowMagic.end(), header.begin(),
                  [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; }))
    throw ValidationError(path.string() + ": not a .flo2 raster");
  const auto w = get_u32(header.data() + 4);
  const auto h = get_u32(header.data() + 8);
  if (w != static_cast<std::uint32_t>(width) || h != static_cast<std::uint32_t>(height))
    throw ValidationError(path.string() + ": raster is " + std::to_string(w) + "x" +
                          std::to_string(h) + ", expected " + std::to_string(width) + "x" +
                          std::to_string(height));
  const auto expected = kFlowHeaderBytes + static_cast<std::uintmax_t>(w) * h * 8;
  if (fs::file_size(path) != expected)
    throw ValidationError(path.string() + ": raster payload size mismatch");
}

std::vector<std::vector<Candidate>> parse_candidates(const json& j, int video, int frame_count,
                                                     int width, int height) {
  if (!j.is_array() || static_cast<int>(j.size()) != frame_count)
    throw ValidationError("video " + std::to_string(video) +
                          ": candidates.json must list exactly frame_count frames");
  std::vector<std::vector<Candidate>> out(static_cast<std::size_t>(frame_count));
  for (int f = 0; f < frame_count; ++f) {
    const auto& frame = j[static_cast<std::size_t>(f)];
    if (!frame.is_array()) throw ValidationError(where(video, f) + ": expected an array");
    auto& dst = out[static_cast<std::size_t>(f)];
    for (const auto& c : frame) {
      if (!c.contains("id") || !c.at("id").is_number_integer())
        throw ValidationError(where(video, f) + ": candidate without integer id");
      Candidate cand{c.at("id").get<int>(), box_from_json(c, where(video, f))};
      if (!(cand.box.w > 0.0 && cand.box.h > 0.0))
        throw ValidationError(where(video, f) + ": candidate with non-positive extent");
      if (!cand.box.intersects_frame(width, height))
        throw ValidationError(where(video, f) + ": candidate outside the frame");
      dst.push_back(cand);
    }
    std::sort(dst.begin(), dst.end(),
              [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < dst.size(); ++i)
      if (dst[i].id != static_cast<int>(i))
        throw ValidationError(where(video, f) + ": candidate ids must be contiguous from 0");
  }
  return out;
}

std::vector<RawTrajectory> parse_trajectories(const json& j, int video, std::size_t& dropped) {
  if (!j.is_array())
    throw ValidationError("video " + std::to_string(video) + ": trajectories.json must be an array");
  std::vector<RawTrajectory> out;
  out.reserve(j.size());
  for (const auto& t : j) {
    if (!t.contains("start_frame") || !t.contains("points") || !t.at("points").is_array())
      throw ValidationError("video " + std::to_string(video) + ": malformed trajectory record");
    RawTrajectory traj;
    traj.start_frame = t.at("start_frame").get<int>();
    for (const auto& p : t.at("points")) {
      if (!p.is_array() || p.size() != 2)
        throw ValidationError("video " + std::to_string(video) + ": trajectory point must be [x, y]");
      const double x = p[0].get<double>();
      const double y = p[1].get<double>();
      if (!std::isfinite(x) || !std::isfinite(y))
        throw ValidationError("video " + std::to_string(video) + ": non-finite trajectory point");
      traj.points.push_back({x, y});
    }
    if (traj.points.size() != static_cast<std::size_t>(kTrajectoryLength)) {
      ++dropped;
      continue;
    }
    out.push_back(std::move(traj));
  }
  std::stable_sort(out.begin(), out.end(), [](const RawTrajectory& a, const RawTrajectory& b) {
    return a.start_frame < b.start_frame;
  });
  return out;
}

}  // namespace

FlowRaster FlowRaster::zeros(int width, int height) {
  FlowRaster r;
  r.width = width;
  r.height = height;
  r.data.assign(2 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0f);
  return r;
}

std::span<const RawTrajectory> VideoStream::trajectories_starting_in(int first, int last) const {
  auto lo = std::lower_bound(trajectories.begin(), trajectories.end(), first,
                             [](const RawTrajectory& t, int f) { return t.start_frame < f; });
  auto hi = std::upper_bound(lo, trajectories.end(), last,
                             [](int f, const RawTrajectory& t) { return f < t.start_frame; });
  return {lo, hi};
}

DiskFlowSource::DiskFlowSource(fs::path root) : root_(std::move(root)) {}

FlowRaster DiskFlowSource::load(int video, int frame) const {
  return read_flo2(flow_path(root_, video, frame));
}

MemoryFlowSource::MemoryFlowSource(std::vector<std::vector<FlowRaster>> rasters)
    : rasters_(std::move(rasters)) {}

FlowRaster MemoryFlowSource::load(int video, int frame) const {
  return rasters_.at(static_cast<std::size_t>(video)).at(static_cast<std::size_t>(frame));
}

FlowRaster Dataset::load_flow(int video, int frame) const {
  if (!flow) throw ValidationError("dataset has no flow source");
  return flow->load(video, frame);
}

fs::path video_dir(const fs::path& root, int video) {
  return root / ("video_" + std::to_string(video));
}

fs::path flow_path(const fs::path& root, int video, int frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.flo2", frame);
  return video_dir(root, video) / "flow" / name;
}

FlowRaster read_flo2(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kFlowHeaderBytes || !std::equal(kFlowMagic.begin(), kFlowMagic.end(), bytes.begin()))
    throw ValidationError(path.string() + ": not a .flo2 raster");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto w = get_u32(p + 4);
  const auto h = get_u32(p + 8);
  const std::size_t values = 2 * static_cast<std::size_t>(w) * h;
  if (bytes.size() != kFlowHeaderBytes + 4 * values)
    throw ValidationError(path.string() + ": raster payload size mismatch");
  FlowRaster r;
  r.width = static_cast<int>(w);
  r.height = static_cast<int>(h);
  r.data.resize(values);
  for (std::size_t i = 0; i < values; ++i) {
    const float v = std::bit_cast<float>(get_u32(p + kFlowHeaderBytes + 4 * i));
    if (!std::isfinite(v)) throw ValidationError(path.string() + ": non-finite flow value");
    r.data[i] = v;
  }
  return r;
}

void write_flo2(const fs::path& path, const FlowRaster& raster) {
  if (raster.data.size() != 2 * static_cast<std::size_t>(raster.width) * raster.height)
    throw ValidationError("flow raster data does not match its dimensions");
  std::string out;
  out.reserve(kFlowHeaderBytes + 4 * raster.data.size());
  out.append(kFlowMagic.begin(), kFlowMagic.end());
  put_u32(out, static_cast<std::uint32_t>(raster.width));
  put_u32(out, static_cast<std::uint32_t>(raster.height));
  for (float v : raster.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  write_text(path, out);
}

Dataset load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("dataset directory not found: " + root.string());
  const auto manifest_path = root / "manifest.json";
  if (!fs::exists(manifest_path))
    throw ValidationError("missing manifest: " + manifest_path.string());
  const json manifest = read_json(manifest_path);
  if (!manifest.contains("videos") || !manifest.at("videos").is_array() || manifest.at("videos").empty())
    throw ValidationError("manifest.json must list at least one video");

  Dataset ds;
  std::set<int> seen_ids;
  for (const auto& entry : manifest.at("videos")) {
    VideoStream s;
    try {
      s.video_id = entry.at("video_id").get<int>();
      s.frame_count = entry.at("frame_count").get<int>();
      s.width = entry.at("width").get<int>();
      s.height = entry.at("height").get<int>();
    } catch (const json::exception& e) {
      throw ValidationError(std::string("manifest.json: malformed video entry: ") + e.what());
    }
    if (s.frame_count <= 0 || s.width <= 0 || s.height <= 0)
      throw ValidationError("video " + std::to_string(s.video_id) + ": non-positive dimensions");
    if (!seen_ids.insert(s.video_id).second)
      throw ValidationError("manifest.json: duplicate video_id " + std::to_string(s.video_id));
    ds.videos.push_back(std::move(s));
  }
  std::sort(ds.videos.begin(), ds.videos.end(),
            [](const VideoStream& a, const VideoStream& b) { return a.video_id < b.video_id; });
  for (std::size_t i = 0; i < ds.videos.size(); ++i)
    if (ds.videos[i].video_id != static_cast<int>(i))
      throw ValidationError("manifest.json: video ids must be contiguous from 0");

  const int frame_count = ds.videos.front().frame_count;
  for (const auto& s : ds.videos)
    if (s.frame_count != frame_count)
      throw ValidationError("video " + std::to_string(s.video_id) + " has " +
                            std::to_string(s.frame_count) + " frames, expected " +
                            std::to_string(frame_count) + " (videos must be synchronized)");

  for (auto& s : ds.videos) {
    const auto dir = video_dir(root, s.video_id);
    s.candidates = parse_candidates(read_json(dir / "candidates.json"), s.video_id, s.frame_count,
                                    s.width, s.height);
    s.trajectories = parse_trajectories(read_json(dir / "trajectories.json"), s.video_id,
                                        ds.dropped_trajectories);
    for (int f = 0; f < s.frame_count; ++f) {
      const auto p = flow_path(root, s.video_id, f);
      if (!fs::exists(p)) throw IoError("missing flow raster " + p.string());
      check_flow_header(p, s.width, s.height);
    }
  }

  const auto gt_path = root / "ground_truth.json";
  if (fs::exists(gt_path)) {
    GroundTruth gt = load_ground_truth(gt_path);
    if (gt.size() != ds.videos.size())
      throw ValidationError("ground_truth.json: expected one array per video");
    for (std::size_t v = 0; v < gt.size(); ++v) {
      if (static_cast<int>(gt[v].size()) != frame_count)
        throw ValidationError("ground_truth.json: video " + std::to_string(v) +
                              " does not list every frame");
      for (std::size_t f = 0; f < gt[v].size(); ++f)
        if (gt[v][f] && !gt[v][f]->intersects_frame(ds.videos[v].width, ds.videos[v].height))
          throw ValidationError("ground_truth.json: " +
                                where(static_cast<int>(v), static_cast<int>(f)) +
                                " box outside the frame");
    }
    ds.ground_truth = std::move(gt);
  }

  ds.flow = std::make_shared<DiskFlowSource>(root);
  return ds;
}

void write_dataset(const Dataset& ds, const fs::path& root) {
  fs::create_directories(root);
  json videos = json::array();
  for (const auto& s : ds.videos)
    videos.push_back({{"video_id", s.video_id},
                      {"frame_count", s.frame_count},
                      {"width", s.width},
                      {"height", s.height}});
  write_text(root / "manifest.json", json{{"videos", videos}}.dump(2) + "\n");

  for (const auto& s : ds.videos) {
    const auto dir = video_dir(root, s.video_id);
    json cands = json::array();
    for (const auto& frame : s.candidates) {
      json fr = json::array();
      for (const auto& c : frame) {
        json jc = box_to_json(c.box);
        jc["id"] = c.id;
        fr.push_back(std::move(jc));
      }
      cands.push_back(std::move(fr));
    }
    write_text(dir / "candidates.json", cands.dump() + "\n");

    json trajs = json::array();
    for (const auto& t : s.trajectories) {
      json pts = json::array();
      for (const auto& p : t.points) pts.push_back({p.x, p.y});
      trajs.push_back({{"start_frame", t.start_frame}, {"points", std::move(pts)}});
    }
    write_text(dir / "trajectories.json", trajs.dump() + "\n");

    for (int f = 0; f < s.frame_count; ++f) write_flo2(flow_path(root, s.video_id, f), ds.load_flow(s.video_id, f));
  }

  if (ds.ground_truth) write_ground_truth(*ds.ground_truth, root / "ground_truth.json");
}

GroundTruth load_ground_truth(const fs::path& path) {
  const json j = read_json(path);
  if (!j.is_array()) throw ValidationError(path.string() + ": expected an array per video");
  GroundTruth gt;
  for (std::size_t v = 0; v < j.size(); ++v) {
    if (!j[v].is_array()) throw ValidationError(path.string() + ": expected an array per video");
    auto& frames = gt.emplace_back();
    for (std::size_t f = 0; f < j[v].size(); ++f) {
      const auto& e = j[v][f];
      if (e.is_null()) {
        frames.emplace_back();
        continue;
      }
      const BBox b = box_from_json(e, where(static_cast<int>(v), static_cast<int>(f)));
      if (!(b.w > 0.0 && b.h > 0.0))
        throw ValidationError(path.string() + ": non-positive ground-truth extent");
      frames.emplace_back(b);
    }
  }
  return gt;
}

void write_ground_truth(const GroundTruth& gt, const fs::path& path) {
  json j = json::array();
  for (const auto& video : gt) {
    json frames = json::array();
    for (const auto& b : video) frames.push_back(b ? box_to_json(*b) : json(nullptr));
    j.push_back(std::move(frames));
  }
  write_text(path, j.dump() + "\n");
}

std::string detections_to_json(std::vector<Detection> detections) {
  std::sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
    return std::pair(a.video_id, a.frame) < std::pair(b.video_id, b.frame);
  });
  for (std::size_t i = 1; i < detections.size(); ++i)
    if (detections[i].video_id == detections[i - 1].video_id &&
        detections[i].frame == detections[i - 1].frame)
      throw ValidationError("duplicate detection for " +
                            where(detections[i].video_id, detections[i].frame));
  json out = json::array();
  for (const auto& d : detections) {
    if (d.candidate.has_value() != d.box.has_value())
      throw ValidationError(where(d.video_id, d.frame) + ": candidate state requires a box");
    json rec{{"video_id", d.video_id}, {"frame", d.frame}};
    if (d.candidate) {
      rec["state"] = *d.candidate;
      rec["box"] = box_to_json(*d.box);
    } else {
      rec["state"] = "idle";
    }
    rec["window_energy"] = d.window_energy;
    out.push_back(std::move(rec));
  }
  return out.dump(2) + "\n";
}

void write_detections(std::vector<Detection> detections, const fs::path& path) {
  write_text(path, detections_to_json(std::move(detections)));
}

std::vector<Detection> load_detections(const fs::path& path) {
  const json j = read_json(path);
  if (!j.is_array()) throw ValidationError(path.string() + ": expected an array of detections");
  std::vector<Detection> out;
  out.reserve(j.size());
  for (const auto& rec : j) {
    Detection d;
    try {
      d.video_id = rec.at("video_id").get<int>();
      d.frame = rec.at("frame").get<int>();
      d.window_energy = rec.at("window_energy").get<double>();
      const auto& state = rec.at("state");
      if (state.is_string()) {
        if (state.get<std::string>() != "idle")
          throw ValidationError(path.string() + ": unknown state '" + state.get<std::string>() + "'");
        if (rec.contains("box") && !rec.at("box").is_null())
          throw ValidationError(path.string() + ": idle detection must not carry a box");
      } else {
        d.candidate = state.get<int>();
        d.box = box_from_json(rec.at("box"), where(d.video_id, d.frame));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ": malformed detection record: " + e.what());
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace cip
