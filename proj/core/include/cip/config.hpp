#pragma once

#include <filesystem>
#include <string>

namespace cip {

inline constexpr int kConfigVersion = 1;

/// Run parameters shared by `detect` and `eval`. Serialized as a flat JSON
/// object whose keys are exactly the member names below; unknown keys are
/// rejected.
struct Config {
  int config_version = kConfigVersion;
  int window_length = 100;
  int window_stride = 50;
  int trws_max_iters = 100;
  double trws_epsilon = 1e-4;
  double tracklet_iou = 0.3;
  double w_intra = 1.0;
  double w_frame = 1.0;
  double w_traj = 1.0;
  double eval_iou = 0.5;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
  friend bool operator==(const Config&, const Config&) = default;
};

std::string config_to_json(const Config& config);
Config config_from_json(const std::string& text);
Config load_config(const std::filesystem::path& path);
void save_config(const Config& config, const std::filesystem::path& path);

}  // namespace cip
