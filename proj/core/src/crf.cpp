#include "cip/crf.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include <json.hpp>

#include "cip/error.hpp"

namespace cip {

using nlohmann::json;

void CrfProblem::validate() const {
  for (std::size_t i = 0; i < state_counts.size(); ++i)
    if (state_counts[i] < 1)
      throw ValidationError("node " + std::to_string(i) + " has no states");
  if (num_videos > 0 && num_videos * window_length != node_count())
    throw ValidationError("node count does not match num_videos x window_length");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    if (e.a < 0 || e.b >= node_count() || e.a >= e.b)
      throw ValidationError("edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) +
                            ") must satisfy 0 <= a < b < node_count");
    if (!seen.emplace(e.a, e.b).second)
      throw ValidationError("duplicate edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) + ")");
    if (e.rows != state_counts[static_cast<std::size_t>(e.a)] ||
        e.cols != state_counts[static_cast<std::size_t>(e.b)] ||
        e.costs.size() != static_cast<std::size_t>(e.rows) * static_cast<std::size_t>(e.cols))
      throw ValidationError("edge table size does not match its endpoints");
    for (double c : e.costs)
      if (!std::isfinite(c) || c < 0.0)
        throw ValidationError("edge costs must be finite and non-negative");
  }
}

double labeling_energy(const CrfProblem& problem, std::span<const int> states) {
  if (states.size() != problem.state_counts.size())
    throw ValidationError("labeling size does not match the problem");
  double e = 0.0;
  for (const auto& edge : problem.edges)
    e += edge.cost(states[static_cast<std::size_t>(edge.a)], states[static_cast<std::size_t>(edge.b)]);
  return e;
}

std::size_t expected_edge_count(int num_videos, int window_length) {
  const auto n = static_cast<std::size_t>(num_videos);
  const auto t = static_cast<std::size_t>(window_length);
  return n * (t * (t - 1) / 2) + t * (n * (n - 1) / 2);
}

CandidateGeometry normalized_geometry(const BBox& box, int width, int height) {
  const double w = width, h = height;
  return {box.center_x() / w, box.center_y() / h, box.w / w, box.h / h};
}

double psi_intra(const CandidateGeometry& a, const CandidateGeometry& b, bool adjacent) {
  const double dc = std::hypot(a.cx - b.cx, a.cy - b.cy);
  double e = 1.0 - 1.0 / (dc + 1.0);
  if (adjacent) {
    const double ds = std::hypot(a.sw - b.sw, a.sh - b.sh);
    e += 1.0 - 1.0 / (ds + 1.0);
  }
  return e;
}

CrfProblem build_window_crf(std::span<const VideoStream> videos, int start, int length,
                            const InterCostFn& inter_cost, const EnergyWeights& weights) {
  if (length < 1 || videos.empty()) throw ValidationError("build_window_crf: empty window");
  for (const auto& v : videos)
    if (start < 0 || start + length > v.frame_count)
      throw ValidationError("build_window_crf: window exceeds video " + std::to_string(v.video_id));

  CrfProblem p;
  p.num_videos = static_cast<int>(videos.size());
  p.window_length = length;
  p.has_idle = true;
  p.state_counts.resize(static_cast<std::size_t>(p.num_videos * length));

  // Per-node candidate geometry, normalized by the video's frame size.
  std::vector<std::vector<CandidateGeometry>> geom(p.state_counts.size());
  for (int n = 0; n < p.num_videos; ++n) {
    const auto& v = videos[static_cast<std::size_t>(n)];
    for (int t = 0; t < length; ++t) {
      const int node = p.node_index({n, t});
      const auto& cands = v.candidates[static_cast<std::size_t>(start + t)];
      auto& g = geom[static_cast<std::size_t>(node)];
      g.reserve(cands.size());
      for (const auto& c : cands) g.push_back(normalized_geometry(c.box, v.width, v.height));
      p.state_counts[static_cast<std::size_t>(node)] = static_cast<int>(cands.size()) + 1;
    }
  }

  p.edges.reserve(expected_edge_count(p.num_videos, length));
  auto new_edge = [&](int a, int b, EdgeKind kind) -> CrfEdge& {
    CrfEdge& e = p.edges.emplace_back();
    e.a = a;
    e.b = b;
    e.kind = kind;
    e.rows = p.state_counts[static_cast<std::size_t>(a)];
    e.cols = p.state_counts[static_cast<std::size_t>(b)];
    e.costs.assign(static_cast<std::size_t>(e.rows) * static_cast<std::size_t>(e.cols), 0.0);
    return e;
  };

  for (int n = 0; n < p.num_videos; ++n)
    for (int t = 0; t < length; ++t)
      for (int r = t + 1; r < length; ++r) {
        const int a = p.node_index({n, t});
        const int b = p.node_index({n, r});
        CrfEdge& e = new_edge(a, b, EdgeKind::Intra);
        const auto& ga = geom[static_cast<std::size_t>(a)];
        const auto& gb = geom[static_cast<std::size_t>(b)];
        const bool adjacent = r - t == 1;
        for (std::size_t i = 0; i < ga.size(); ++i)
          for (std::size_t j = 0; j < gb.size(); ++j)
            e.cost(static_cast<int>(i), static_cast<int>(j)) = weights.intra * psi_intra(ga[i], gb[j], adjacent);
      }

  std::vector<double> table;
  for (int t = 0; t < length; ++t)
    for (int n = 0; n < p.num_videos; ++n)
      for (int m = n + 1; m < p.num_videos; ++m) {
        const int a = p.node_index({n, t});
        const int b = p.node_index({m, t});
        CrfEdge& e = new_edge(a, b, EdgeKind::Inter);
        const int ca = e.rows - 1, cb = e.cols - 1;
        if (ca == 0 || cb == 0) continue;
        table.assign(static_cast<std::size_t>(ca) * static_cast<std::size_t>(cb), 0.0);
        inter_cost(n, m, start + t, table);
        for (int i = 0; i < ca; ++i)
          for (int j = 0; j < cb; ++j) e.cost(i, j) = table[static_cast<std::size_t>(i * cb + j)];
      }

  augment_idle(p);
  return p;
}

IdleEnergies augment_idle(CrfProblem& p) {
  if (!p.has_idle) throw ValidationError("augment_idle: problem has no idle states");
  double sum_intra = 0.0, sum_inter = 0.0;
  IdleEnergies out;
  for (const auto& e : p.edges) {
    double s = 0.0;
    for (int i = 0; i + 1 < e.rows; ++i)
      for (int j = 0; j + 1 < e.cols; ++j) s += e.cost(i, j);
    const auto pairs = static_cast<std::size_t>(e.rows - 1) * static_cast<std::size_t>(e.cols - 1);
    if (e.kind == EdgeKind::Intra) {
      sum_intra += s;
      out.intra_pairs += pairs;
    } else {
      sum_inter += s;
      out.inter_pairs += pairs;
    }
  }
  out.intra = out.intra_pairs > 0 ? sum_intra / static_cast<double>(out.intra_pairs) : 1.0;
  out.inter = out.inter_pairs > 0 ? sum_inter / static_cast<double>(out.inter_pairs) : 1.0;

  for (auto& e : p.edges) {
    const double mu = e.kind == EdgeKind::Intra ? out.intra : out.inter;
    for (int i = 0; i < e.rows; ++i) e.cost(i, e.cols - 1) = mu;
    for (int j = 0; j < e.cols; ++j) e.cost(e.rows - 1, j) = mu;
  }
  return out;
}

std::string problem_to_json(const CrfProblem& p) {
  json edges = json::array();
  for (const auto& e : p.edges) {
    json rows = json::array();
    for (int i = 0; i < e.rows; ++i) {
      json row = json::array();
      for (int j = 0; j < e.cols; ++j) row.push_back(e.cost(i, j));
      rows.push_back(std::move(row));
    }
    edges.push_back({{"a", e.a},
                     {"b", e.b},
                     {"kind", e.kind == EdgeKind::Intra ? "intra" : "inter"},
                     {"costs", std::move(rows)}});
  }
  json j{{"num_videos", p.num_videos},
         {"window_length", p.window_length},
         {"has_idle", p.has_idle},
         {"nodes", p.node_count()},
         {"state_counts", p.state_counts},
         {"edges", std::move(edges)}};
  return j.dump() + "\n";
}

CrfProblem problem_from_json(const std::string& text) {
  CrfProblem p;
  try {
    const json j = json::parse(text);
    p.num_videos = j.value("num_videos", 0);
    p.window_length = j.value("window_length", 0);
    p.has_idle = j.value("has_idle", false);
    p.state_counts = j.at("state_counts").get<std::vector<int>>();
    if (j.contains("nodes") && j.at("nodes").get<int>() != p.node_count())
      throw ValidationError("'nodes' does not match the length of 'state_counts'");
    for (const auto& je : j.at("edges")) {
      CrfEdge e;
      e.a = je.at("a").get<int>();
      e.b = je.at("b").get<int>();
      const std::string kind = je.value("kind", "intra");
      if (kind != "intra" && kind != "inter") throw ValidationError("unknown edge kind '" + kind + "'");
      e.kind = kind == "intra" ? EdgeKind::Intra : EdgeKind::Inter;
      const auto rows = je.at("costs").get<std::vector<std::vector<double>>>();
      e.rows = static_cast<int>(rows.size());
      e.cols = rows.empty() ? 0 : static_cast<int>(rows.front().size());
      for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != e.cols) throw ValidationError("ragged cost table");
        e.costs.insert(e.costs.end(), r.begin(), r.end());
      }
      if (e.a > e.b) {  // store with a < b, transposing the table
        CrfEdge t;
        t.a = e.b;
        t.b = e.a;
        t.kind = e.kind;
        t.rows = e.cols;
        t.cols = e.rows;
        t.costs.resize(e.costs.size());
        for (int i = 0; i < e.rows; ++i)
          for (int k = 0; k < e.cols; ++k) t.cost(k, i) = e.cost(i, k);
        e = std::move(t);
      }
      p.edges.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed CRF problem: ") + e.what());
  }
  p.validate();
  return p;
}

}  // namespace cip
