#include "cip/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cip/error.hpp"

namespace cip {

namespace {

std::string where(int video, int frame) {
  return "(video " + std::to_string(video) + ", frame " + std::to_string(frame) + ")";
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<int> make_windows(int total, int length, int stride) {
  if (length < 1 || stride < 1) throw ValidationError("make_windows: length and stride must be >= 1");
  if (length > total)
    throw ValidationError("make_windows: window length " + std::to_string(length) +
                          " exceeds stream length " + std::to_string(total));
  if (stride > length) throw ValidationError("make_windows: stride must not exceed the window length");
  std::vector<int> starts;
  for (int s = 0;; s += stride) {
    const int clamped = std::min(s, total - length);
    if (starts.empty() || starts.back() != clamped) starts.push_back(clamped);
    if (s + length >= total) break;
  }
  return starts;
}

std::vector<Detection> merge_windows(std::span<const WindowResult> results, int frame_count) {
  if (results.empty()) throw ValidationError("merge_windows: no window results");
  const int num_videos = results.front().num_videos;
  for (const auto& r : results)
    if (r.num_videos != num_videos || r.states.size() != static_cast<std::size_t>(r.num_videos * r.length))
      throw ValidationError("merge_windows: inconsistent window result shapes");

  // Best covering window per frame: (energy, index) lexicographic minimum.
  std::vector<const WindowResult*> best(static_cast<std::size_t>(frame_count), nullptr);
  for (const auto& r : results)
    for (int t = 0; t < r.length; ++t) {
      const int f = r.start + t;
      if (f < 0 || f >= frame_count) throw ValidationError("merge_windows: window outside the stream");
      auto& b = best[static_cast<std::size_t>(f)];
      if (b == nullptr || r.energy < b->energy || (r.energy == b->energy && r.index < b->index)) b = &r;
    }

  std::vector<Detection> out;
  out.reserve(static_cast<std::size_t>(num_videos * frame_count));
  for (int n = 0; n < num_videos; ++n)
    for (int f = 0; f < frame_count; ++f) {
      const WindowResult* w = best[static_cast<std::size_t>(f)];
      if (w == nullptr) throw ValidationError("merge_windows: frame " + std::to_string(f) + " is not covered");
      const FrameAssignment& a = w->at(n, f - w->start);
      out.push_back(Detection{n, f, a.candidate, a.box, w->energy});
    }
  return out;
}

struct FeatureCache::Slot {
  std::once_flag once;
  FrameSlot value;
};


FeatureCache::FeatureCache(const Dataset& dataset, const Config& config)
    : dataset_(dataset), config_(config),
      slots_(std::make_unique<Slot[]>(static_cast<std::size_t>(dataset.frame_count()))) {}

FeatureCache::~FeatureCache() = default;

std::size_t FeatureCache::pair_index(int n, int m) const {
  const auto N = static_cast<std::size_t>(dataset_.videos.size());
  const auto a = static_cast<std::size_t>(n), b = static_cast<std::size_t>(m);
  // Row-major index into the strict upper triangle.
  return a * N - a * (a + 1) / 2 + (b - a - 1);
}

std::size_t FeatureCache::computed_frames() const { return computed_.load(); }

const FeatureCache::FrameSlot& FeatureCache::frame(int f) const {
  if (f < 0 || f >= dataset_.frame_count()) throw ValidationError("FeatureCache: frame out of range");
  Slot& slot = slots_[static_cast<std::size_t>(f)];
  std::call_once(slot.once, [&] {
    slot.value = compute(f);
    ++computed_;
  });
  return slot.value;
}

FeatureCache::FrameSlot FeatureCache::compute(int f) const {
  const int N = static_cast<int>(dataset_.videos.size());
  FrameSlot slot;
  slot.videos.resize(static_cast<std::size_t>(N));
  std::vector<std::vector<std::vector<Hankelet>>> hankelets(static_cast<std::size_t>(N));

  for (int n = 0; n < N; ++n) {
    const auto& stream = dataset_.videos[static_cast<std::size_t>(n)];
    const auto& cands = stream.candidates[static_cast<std::size_t>(f)];
    if (cands.empty()) continue;
    const FlowRaster flow = dataset_.load_flow(n, f);
    auto& entries = slot.videos[static_cast<std::size_t>(n)];
    auto& hk = hankelets[static_cast<std::size_t>(n)];
    entries.reserve(cands.size());
    hk.reserve(cands.size());
    for (const auto& c : cands) {
      CandidateEntry e;
      e.frame = frame_feature(flow, c.box);
      const Tracklet tracklet = build_tracklet(stream, f, c.id, config_.tracklet_iou);
      e.foreground = foreground_trajectories(stream, tracklet);
      auto& h = hk.emplace_back();
      h.reserve(e.foreground.size());
      for (const auto& t : e.foreground) h.push_back(hankelet(t));
      entries.push_back(std::move(e));
    }
  }

  slot.pair_tables.resize(static_cast<std::size_t>(N * (N - 1) / 2));
  for (int n = 0; n < N; ++n)
    for (int m = n + 1; m < N; ++m) {
      const auto& ea = slot.videos[static_cast<std::size_t>(n)];
      const auto& eb = slot.videos[static_cast<std::size_t>(m)];
      auto& table = slot.pair_tables[pair_index(n, m)];
      table.resize(ea.size() * eb.size());
      for (std::size_t i = 0; i < ea.size(); ++i)
        for (std::size_t j = 0; j < eb.size(); ++j)
          table[i * eb.size() + j] =
              config_.w_frame * psi_frame(ea[i].frame, eb[j].frame) +
              config_.w_traj * hankelet_term(hankelets[static_cast<std::size_t>(n)][i],
                                             hankelets[static_cast<std::size_t>(m)][j]);
    }
  return slot;
}

WindowResult process_window(const Dataset& dataset, const FeatureCache& cache, const Config& config,
                            int index, int start, int length, SolveReport* report_out) {
  const int N = static_cast<int>(dataset.videos.size());

  // Movement pattern histograms depend on the window interval.
  std::vector<std::vector<Mph>> mphs(static_cast<std::size_t>(N * length));
  for (int t = 0; t < length; ++t) {
    const auto& slot = cache.frame(start + t);
    for (int n = 0; n < N; ++n) {
      auto& dst = mphs[static_cast<std::size_t>(n * length + t)];
      for (const auto& e : slot.videos[static_cast<std::size_t>(n)])
        dst.push_back(mph(e.foreground, start, length));
    }
  }

  const InterCostFn inter = [&](int n, int m, int f, std::span<double> out) {
    const auto& slot = cache.frame(f);
    const auto& table = slot.pair_tables[cache.pair_index(n, m)];
    const auto& ma = mphs[static_cast<std::size_t>(n * length + (f - start))];
    const auto& mb = mphs[static_cast<std::size_t>(m * length + (f - start))];
    for (std::size_t i = 0; i < ma.size(); ++i)
      for (std::size_t j = 0; j < mb.size(); ++j)
        out[i * mb.size() + j] = table[i * mb.size() + j] + config.w_traj * mph_dist(ma[i], mb[j]);
  };

  const CrfProblem problem = build_window_crf(dataset.videos, start, length, inter,
                                              EnergyWeights{config.w_intra, config.w_frame, config.w_traj});
  SolveReport report = solve_trws(problem, TrwsOptions{config.trws_max_iters, config.trws_epsilon});

  WindowResult r;
  r.index = index;
  r.start = start;
  r.length = length;
  r.num_videos = N;
  r.energy = report.labeling.energy;
  r.states.resize(static_cast<std::size_t>(N * length));
  for (int n = 0; n < N; ++n)
    for (int t = 0; t < length; ++t) {
      const int node = problem.node_index({n, t});
      const int s = report.labeling.states[static_cast<std::size_t>(node)];
      if (s == problem.idle_state(node)) continue;
      const auto& c = dataset.videos[static_cast<std::size_t>(n)]
                          .candidates[static_cast<std::size_t>(start + t)][static_cast<std::size_t>(s)];
      r.states[static_cast<std::size_t>(n * length + t)] = FrameAssignment{c.id, c.box};
    }
  if (report_out) *report_out = std::move(report);
  return r;
}

std::vector<Detection> detect(const Dataset& dataset, const Config& config) {
  config.validate();
  if (dataset.videos.empty()) throw ValidationError("detect: dataset has no videos");
  const int total = dataset.frame_count();
  const int length = std::min(config.window_length, total);
  const int stride = std::min(config.window_stride, length);
  const auto starts = make_windows(total, length, stride);

  FeatureCache cache(dataset, config);
  std::vector<WindowResult> results(starts.size());
  parallel_for(starts.size(), config.threads, [&](std::size_t k) {
    results[k] = process_window(dataset, cache, config, static_cast<int>(k), starts[k], length);
  });
  return merge_windows(results, total);
}

double EvalCounts::precision() const {
  return tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
}

double EvalCounts::recall() const {
  return tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
}

double EvalCounts::f_score() const {
  const double p = precision(), r = recall();
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

EvalCounts& EvalCounts::operator+=(const EvalCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

EvalReport evaluate(std::span<const Detection> detections, const GroundTruth& gt, const FrameMask* include,
                    double iou_threshold) {
  const auto included = [&](std::size_t v, std::size_t f) {
    return include == nullptr || (v < include->size() && f < (*include)[v].size() && (*include)[v][f]);
  };

  std::vector<std::vector<const Detection*>> seen(gt.size());
  for (std::size_t v = 0; v < gt.size(); ++v) seen[v].assign(gt[v].size(), nullptr);
  for (const auto& d : detections) {
    if (d.video_id < 0 || static_cast<std::size_t>(d.video_id) >= gt.size() || d.frame < 0 ||
        static_cast<std::size_t>(d.frame) >= gt[static_cast<std::size_t>(d.video_id)].size())
      throw ValidationError("detection " + where(d.video_id, d.frame) + " lies outside the ground truth");
    const auto v = static_cast<std::size_t>(d.video_id), f = static_cast<std::size_t>(d.frame);
    if (!included(v, f)) throw ValidationError("detection " + where(d.video_id, d.frame) + " is on an excluded frame");
    if (seen[v][f] != nullptr) throw ValidationError("duplicate detection " + where(d.video_id, d.frame));
    if (d.candidate.has_value() != d.box.has_value())
      throw ValidationError("detection " + where(d.video_id, d.frame) + " has a candidate without a box");
    seen[v][f] = &d;
  }

  EvalReport report;
  report.per_video.resize(gt.size());
  for (std::size_t v = 0; v < gt.size(); ++v)
    for (std::size_t f = 0; f < gt[v].size(); ++f) {
      if (!included(v, f)) continue;
      const Detection* d = seen[v][f];
      if (d == nullptr)
        throw ValidationError("detections do not cover " + where(static_cast<int>(v), static_cast<int>(f)));
      ++report.evaluated_frames;
      auto& c = report.per_video[v];
      const auto& truth = gt[v][f];
      if (d->box) {
        if (truth && iou(*d->box, *truth) > iou_threshold) {
          ++c.tp;
        } else {
          ++c.fp;
          if (truth) ++c.fn;
        }
      } else if (truth) {
        ++c.fn;
      }
    }
  for (const auto& c : report.per_video) report.overall += c;
  return report;
}

FilteredEval exclude_undetectable(std::span<const Detection> detections, const GroundTruth& gt,
                                  std::span<const VideoStream> videos, double iou_threshold) {
  if (videos.size() != gt.size()) throw ValidationError("exclude_undetectable: video count mismatch");
  FilteredEval out;
  out.include.resize(gt.size());
  for (std::size_t v = 0; v < gt.size(); ++v) {
    out.include[v].assign(gt[v].size(), true);
    for (std::size_t f = 0; f < gt[v].size(); ++f) {
      if (!gt[v][f]) continue;
      const auto& cands = videos[v].candidates.at(f);
      const bool detectable = std::any_of(cands.begin(), cands.end(), [&](const Candidate& c) {
        return iou(c.box, *gt[v][f]) > iou_threshold;
      });
      if (!detectable) {
        out.include[v][f] = false;
        ++out.excluded;
      }
    }
  }
  for (const auto& d : detections) {
    const auto v = static_cast<std::size_t>(d.video_id), f = static_cast<std::size_t>(d.frame);
    if (v < out.include.size() && f < out.include[v].size() && !out.include[v][f]) continue;
    out.detections.push_back(d);
  }
  return out;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "video  precision  recall    f_score   tp      fp      fn\n";
  auto line = [&](const std::string& name, const EvalCounts& c) {
    os << std::left << std::setw(7) << name << std::setw(11) << c.precision() << std::setw(10)
       << c.recall() << std::setw(10) << c.f_score() << std::setw(8) << c.tp << std::setw(8) << c.fp
       << c.fn << "\n";
  };
  for (std::size_t v = 0; v < report.per_video.size(); ++v) line(std::to_string(v), report.per_video[v]);
  line("all", report.overall);
  os << "evaluated frames: " << report.evaluated_frames << "\n";
  return os.str();
}

std::string report_to_json(const EvalReport& report) {
  using nlohmann::json;
  auto counts = [](const EvalCounts& c) {
    return json{{"tp", c.tp},
                {"fp", c.fp},
                {"fn", c.fn},
                {"precision", c.precision()},
                {"recall", c.recall()},
                {"f_score", c.f_score()}};
  };
  json per = json::array();
  for (const auto& c : report.per_video) per.push_back(counts(c));
  json j{{"per_video", per}, {"overall", counts(report.overall)}, {"evaluated_frames", report.evaluated_frames}};
  return j.dump(2) + "\n";
}

}  // namespace cip
