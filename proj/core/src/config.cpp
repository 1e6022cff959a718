#include "cip/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cip/error.hpp"

namespace cip {

using nlohmann::json;

void Config::validate() const {
  if (config_version != kConfigVersion)
    throw ValidationError("unsupported config_version " + std::to_string(config_version));
  if (window_length < 1) throw ValidationError("window_length must be positive");
  if (window_stride < 1) throw ValidationError("window_stride must be positive");
  if (trws_max_iters < 1) throw ValidationError("trws_max_iters must be positive");
  if (!(trws_epsilon > 0.0)) throw ValidationError("trws_epsilon must be positive");
  if (!(tracklet_iou > 0.0 && tracklet_iou <= 1.0)) throw ValidationError("tracklet_iou must lie in (0, 1]");
  if (!(eval_iou > 0.0 && eval_iou < 1.0)) throw ValidationError("eval_iou must lie in (0, 1)");
  for (double w : {w_intra, w_frame, w_traj})
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("energy weights must be finite and >= 0");
  if (threads < 0) throw ValidationError("threads must be >= 0");
}

std::string config_to_json(const Config& c) {
  json j{{"config_version", c.config_version},
         {"window_length", c.window_length},
         {"window_stride", c.window_stride},
         {"trws_max_iters", c.trws_max_iters},
         {"trws_epsilon", c.trws_epsilon},
         {"tracklet_iou", c.tracklet_iou},
         {"w_intra", c.w_intra},
         {"w_frame", c.w_frame},
         {"w_traj", c.w_traj},
         {"eval_iou", c.eval_iou},
         {"threads", c.threads}};
  return j.dump(2) + "\n";
}

Config config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  if (!j.contains("config_version")) throw ValidationError("config: missing config_version");

  Config c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "config_version") c.config_version = value.get<int>();
      else if (key == "window_length") c.window_length = value.get<int>();
      else if (key == "window_stride") c.window_stride = value.get<int>();
      else if (key == "trws_max_iters") c.trws_max_iters = value.get<int>();
      else if (key == "trws_epsilon") c.trws_epsilon = value.get<double>();
      else if (key == "tracklet_iou") c.tracklet_iou = value.get<double>();
      else if (key == "w_intra") c.w_intra = value.get<double>();
      else if (key == "w_frame") c.w_frame = value.get<double>();
      else if (key == "w_traj") c.w_traj = value.get<double>();
      else if (key == "eval_iou") c.eval_iou = value.get<double>();
      else if (key == "threads") c.threads = value.get<int>();
      else throw ValidationError("config: unknown key '" + key + "'");
    }
  } catch (const json::type_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const Config& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << config_to_json(config);
}

}  // namespace cip
