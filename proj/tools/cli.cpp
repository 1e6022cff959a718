#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cip/config.hpp"
#include "cip/crf.hpp"
#include "cip/dataset.hpp"
#include "cip/error.hpp"
#include "cip/flowfeat.hpp"
#include "cip/pipeline.hpp"
#include "cip/solver.hpp"
#include "cip/synth.hpp"
#include "cip/trajfeat.hpp"

namespace cip::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

struct SynthArgs {
  std::string preset;
  std::string scene;
  std::string out;
  std::uint64_t seed = 0;
  int frames = 0;
};

struct ConfigArgs {
  std::string file;
  std::optional<int> window_length;
  std::optional<int> window_stride;
  std::optional<int> threads;
};

struct DetectArgs {
  std::string data;
  std::string out = "detections.json";
  std::string overlay;
};

struct EvalArgs {
  std::string data;
  std::string detections;
  std::string out;
  bool exclude = false;
};

struct SolveArgs {
  std::string problem;
  std::string out;
  std::optional<int> max_iters;
  std::optional<double> epsilon;
};

struct FeaturesArgs {
  std::string data;
  int video = 0;
  int frame = 0;
};

void add_config_options(CLI::App* app, ConfigArgs& c) {
  app->add_option("--config", c.file, "JSON config file");
  app->add_option("--window-length", c.window_length, "Override window_length");
  app->add_option("--window-stride", c.window_stride, "Override window_stride");
  app->add_option("--threads", c.threads, "Worker threads (0: all cores)");
}

Config resolve_config(const ConfigArgs& a) {
  Config c = a.file.empty() ? Config{} : load_config(a.file);
  if (a.window_length) c.window_length = *a.window_length;
  if (a.window_stride) c.window_stride = *a.window_stride;
  if (a.threads) c.threads = *a.threads;
  c.validate();
  return c;
}

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  if (a.preset.empty() == a.scene.empty()) throw ValidationError("synth: give exactly one of --preset or --scene");
  Scene scene;
  if (!a.preset.empty()) {
    scene = make_preset(a.preset, a.seed, a.frames);
  } else {
    scene = load_scene(a.scene);
    scene.noise.seed = a.seed;
    if (a.frames > 0) throw ValidationError("synth: --frames only applies to presets");
  }
  SynthResult r = generate(scene);
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  write_dataset(r.dataset, a.out);
  write_text(fs::path(a.out) / "scene.json", scene_to_json(scene));
  out << "wrote " << r.dataset.videos.size() << " videos x " << scene.frames << " frames to " << a.out << "\n";
  return kExitOk;
}

int cmd_detect(const DetectArgs& a, const ConfigArgs& ca, std::ostream& out) {
  const Config config = resolve_config(ca);
  const Dataset ds = load_dataset(a.data);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Detection> dets = detect(ds, config);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!a.overlay.empty()) {
    std::ostringstream ov;
    ov << "# video frame state x y w h\n";
    for (const auto& d : dets) {
      ov << d.video_id << ' ' << d.frame << ' ';
      if (d.idle()) {
        ov << "idle\n";
      } else {
        ov << *d.candidate << ' ' << d.box->x << ' ' << d.box->y << ' ' << d.box->w << ' ' << d.box->h << '\n';
      }
    }
    write_text(a.overlay, ov.str());
  }

  std::size_t idle = 0;
  for (const auto& d : dets) idle += d.idle() ? 1 : 0;
  write_detections(std::move(dets), a.out);
  out << "detections: " << ds.videos.size() * static_cast<std::size_t>(ds.frame_count()) << " (" << idle
      << " idle) in " << std::fixed << std::setprecision(2) << secs << " s -> " << a.out << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, const ConfigArgs& ca, std::ostream& out) {
  const Config config = resolve_config(ca);
  const Dataset ds = load_dataset(a.data);
  if (!ds.ground_truth) throw ValidationError("eval: dataset has no ground_truth.json");
  const auto dets = load_detections(a.detections);
  const EvalReport plain = evaluate(dets, *ds.ground_truth, nullptr, config.eval_iou);

  json doc = json::parse(report_to_json(plain));
  out << format_report(plain);
  if (a.exclude) {
    const FilteredEval f = exclude_undetectable(dets, *ds.ground_truth, ds.videos, config.eval_iou);
    const EvalReport after = evaluate(f.detections, *ds.ground_truth, &f.include, config.eval_iou);
    out << "excluding " << f.excluded << " undetectable frames:\n" << format_report(after);
    doc = json{{"before", doc}, {"after", json::parse(report_to_json(after))}, {"excluded_frames", f.excluded}};
  }
  const fs::path report_path =
      a.out.empty() ? fs::path(a.detections).replace_extension(".eval.json") : fs::path(a.out);
  write_text(report_path, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const CrfProblem p = problem_from_json(read_text(a.problem));
  TrwsOptions opt;
  if (a.max_iters) opt.max_iters = *a.max_iters;
  if (a.epsilon) opt.epsilon = *a.epsilon;
  const SolveReport r = solve_trws(p, opt);
  json j{{"energy", r.labeling.energy},
         {"lower_bound", r.lower_bound},
         {"iterations", r.iterations},
         {"converged", r.converged},
         {"wall_time", r.wall_time},
         {"states", r.labeling.states},
         {"bound_history", r.bound_history}};
  out << std::setprecision(10) << "energy " << r.labeling.energy << "\nlower_bound " << r.lower_bound
      << "\niterations " << r.iterations << "\nconverged " << (r.converged ? "yes" : "no") << "\n";
  if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_features(const FeaturesArgs& a, const ConfigArgs& ca, std::ostream& out) {
  const Config config = resolve_config(ca);
  const Dataset ds = load_dataset(a.data);
  if (a.video < 0 || a.video >= static_cast<int>(ds.videos.size()))
    throw ValidationError("features: no video " + std::to_string(a.video));
  if (a.frame < 0 || a.frame >= ds.frame_count())
    throw ValidationError("features: no frame " + std::to_string(a.frame));
  const auto& stream = ds.videos[static_cast<std::size_t>(a.video)];
  const FlowRaster flow = ds.load_flow(a.video, a.frame);

  json arr = json::array();
  for (const auto& c : stream.candidates[static_cast<std::size_t>(a.frame)]) {
    const FrameFeature f = frame_feature(flow, c.box);
    const Tracklet tr = build_tracklet(stream, a.frame, c.id, config.tracklet_iou);
    const auto fg = foreground_trajectories(stream, tr);
    arr.push_back({{"candidate", c.id},
                   {"box", {c.box.x, c.box.y, c.box.w, c.box.h}},
                   {"hof", f.hof},
                   {"mag", f.mag},
                   {"tracklet_length", tr.length()},
                   {"foreground_trajectories", fg.size()}});
  }
  out << json{{"video", a.video}, {"frame", a.frame}, {"candidates", arr}}.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Co-interest person detection across synchronized videos", "cip"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--preset", sa.preset, "Preset scene name");
  synth->add_option("--scene", sa.scene, "Scene JSON file");
  synth->add_option("--out", sa.out, "Output dataset directory")->required();
  synth->add_option("--seed", sa.seed, "Random seed");
  synth->add_option("--frames", sa.frames, "Override the preset length");

  ConfigArgs dc;
  DetectArgs da;
  auto* det = app.add_subcommand("detect", "Detect the co-interest person");
  det->add_option("--data", da.data, "Dataset directory")->required();
  det->add_option("--out", da.out, "Detections JSON");
  det->add_option("--dump-overlay-boxes", da.overlay, "Write per-frame boxes as text");
  add_config_options(det, dc);

  ConfigArgs ec;
  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Score detections against ground truth");
  ev->add_option("--data", ea.data, "Dataset directory")->required();
  ev->add_option("--detections", ea.detections, "Detections JSON")->required();
  ev->add_option("--out", ea.out, "Report JSON (default: <detections>.eval.json)");
  ev->add_flag("--exclude-undetectable", ea.exclude, "Also score without undetectable frames");
  add_config_options(ev, ec);

  SolveArgs so;
  auto* sol = app.add_subcommand("solve", "Run TRW-S on a serialized CRF");
  sol->add_option("--problem", so.problem, "Problem JSON")->required();
  sol->add_option("--out", so.out, "Report JSON");
  sol->add_option("--max-iters", so.max_iters, "Iteration limit");
  sol->add_option("--epsilon", so.epsilon, "Convergence threshold");

  ConfigArgs fc;
  FeaturesArgs fa;
  auto* feat = app.add_subcommand("features", "Dump candidate features of one frame");
  feat->add_option("--data", fa.data, "Dataset directory")->required();
  feat->add_option("--video", fa.video, "Video index")->required();
  feat->add_option("--frame", fa.frame, "Frame index")->required();
  add_config_options(feat, fc);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitValidation;
  }

  try {
    if (synth->parsed()) return cmd_synth(sa, out, err);
    if (det->parsed()) return cmd_detect(da, dc, out);
    if (ev->parsed()) return cmd_eval(ea, ec, out);
    if (sol->parsed()) return cmd_solve(so, out);
    if (feat->parsed()) return cmd_features(fa, fc, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace cip::cli
