#pragma once

// Pairwise CRF over one sliding window. Every frame of every video is a node;
// its states are the frame's candidates in id order followed by one idle
// state. There are no unary terms. Edges connect every pair of frames within
// a video (intra) and every pair of videos at the same frame (inter).

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cip/dataset.hpp"

namespace cip {

enum class EdgeKind { Intra, Inter };

struct NodeId {
  int video = 0;
  int t = 0;  // offset inside the window
  friend bool operator==(const NodeId&, const NodeId&) = default;
};

struct CrfEdge {
  int a = 0;  // a < b
  int b = 0;
  EdgeKind kind = EdgeKind::Intra;
  int rows = 0;  // state count of a
  int cols = 0;  // state count of b
  std::vector<double> costs;  // rows x cols, row-major

  double cost(int sa, int sb) const { return costs[static_cast<std::size_t>(sa * cols + sb)]; }
  double& cost(int sa, int sb) { return costs[static_cast<std::size_t>(sa * cols + sb)]; }
};

struct CrfProblem {
  int num_videos = 0;     // 0 for problems not built from a window
  int window_length = 0;
  bool has_idle = false;  // last state of every node is idle
  std::vector<int> state_counts;
  std::vector<CrfEdge> edges;

  int node_count() const { return static_cast<int>(state_counts.size()); }
  int node_index(NodeId n) const { return n.video * window_length + n.t; }
  NodeId node_id(int index) const { return {index / window_length, index % window_length}; }
  int idle_state(int node) const { return state_counts[static_cast<std::size_t>(node)] - 1; }

  /// Throws ValidationError unless every table is finite, non-negative and
  /// sized to its endpoints, and edges are unique with a < b.
  void validate() const;
};

struct Labeling {
  std::vector<int> states;
  double energy = 0.0;
};

double labeling_energy(const CrfProblem& problem, std::span<const int> states);

/// N * C(T, 2) + T * C(N, 2).
std::size_t expected_edge_count(int num_videos, int window_length);

/// Box center and size divided by the frame dimensions.
struct CandidateGeometry {
  double cx = 0.0;
  double cy = 0.0;
  double sw = 0.0;
  double sh = 0.0;
};

CandidateGeometry normalized_geometry(const BBox& box, int width, int height);

/// 1 - 1/(|c_a - c_b| + 1) + [adjacent] (1 - 1/(|s_a - s_b| + 1)).
double psi_intra(const CandidateGeometry& a, const CandidateGeometry& b, bool adjacent);

struct EnergyWeights {
  double intra = 1.0;
  double frame = 1.0;
  double traj = 1.0;
};

/// Fills `out` (row-major, candidates of video_a x candidates of video_b on
/// absolute frame `frame`) with the inter-video cost.
using InterCostFn = std::function<void(int video_a, int video_b, int frame, std::span<double> out)>;

/// Builds the window [start, start + length) with candidate-pair costs and
/// idle entries filled by augment_idle. Intra costs are scaled by
/// weights.intra; `inter_cost` is expected to apply the inter-video weights.
CrfProblem build_window_crf(std::span<const VideoStream> videos, int start, int length,
                            const InterCostFn& inter_cost, const EnergyWeights& weights = {});

struct IdleEnergies {
  double intra = 1.0;
  double inter = 1.0;
  std::size_t intra_pairs = 0;
  std::size_t inter_pairs = 0;
};

/// Sets every entry touching an idle state to the mean candidate-candidate
/// entry over all edges of the same kind (1 when there are none).
IdleEnergies augment_idle(CrfProblem& problem);

std::string problem_to_json(const CrfProblem& problem);
CrfProblem problem_from_json(const std::string& text);

}  // namespace cip
