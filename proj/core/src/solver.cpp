#include "cip/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "cip/error.hpp"

namespace cip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A monotonic chain: nodes[k] -- edges[k] -- nodes[k + 1], node indices increasing.
struct Chain {
  std::vector<int> nodes;
  std::vector<int> edges;
};

class TrwsState {
 public:
  explicit TrwsState(const CrfProblem& p) : p_(p) {
    const auto n = static_cast<std::size_t>(p.node_count());
    in_.resize(n);
    out_.resize(n);
    for (int e = 0; e < static_cast<int>(p.edges.size()); ++e) {
      const auto& edge = p.edges[static_cast<std::size_t>(e)];
      out_[static_cast<std::size_t>(edge.a)].push_back(e);
      in_[static_cast<std::size_t>(edge.b)].push_back(e);
    }
    weight_.resize(n);
    chains_per_node_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      chains_per_node_[i] = std::max<std::size_t>({in_[i].size(), out_[i].size(), 1});
      weight_[i] = 1.0 / static_cast<double>(chains_per_node_[i]);
    }
    fwd_.resize(p.edges.size());
    bwd_.resize(p.edges.size());
    for (std::size_t e = 0; e < p.edges.size(); ++e) {
      fwd_[e].assign(static_cast<std::size_t>(p.edges[e].cols), 0.0);
      bwd_[e].assign(static_cast<std::size_t>(p.edges[e].rows), 0.0);
    }
    std::size_t max_states = 1;
    for (int s : p.state_counts) max_states = std::max(max_states, static_cast<std::size_t>(s));
    belief_.resize(max_states);
    scratch_.resize(max_states);
    build_chains();
  }

  void forward_pass() {
    for (int i = 0; i < p_.node_count(); ++i) {
      accumulate_belief(i);
      const double w = weight_[static_cast<std::size_t>(i)];
      for (int e : out_[static_cast<std::size_t>(i)]) {
        const auto& edge = p_.edges[static_cast<std::size_t>(e)];
        auto& msg = fwd_[static_cast<std::size_t>(e)];
        const auto& rev = bwd_[static_cast<std::size_t>(e)];
        for (int xa = 0; xa < edge.rows; ++xa)
          scratch_[static_cast<std::size_t>(xa)] = w * belief_[static_cast<std::size_t>(xa)] - rev[static_cast<std::size_t>(xa)];
        for (int xb = 0; xb < edge.cols; ++xb) {
          double best = kInf;
          for (int xa = 0; xa < edge.rows; ++xa)
            best = std::min(best, scratch_[static_cast<std::size_t>(xa)] + edge.cost(xa, xb));
          msg[static_cast<std::size_t>(xb)] = best;
        }
        normalize(msg);
      }
    }
  }

  void backward_pass() {
    for (int i = p_.node_count() - 1; i >= 0; --i) {
      accumulate_belief(i);
      const double w = weight_[static_cast<std::size_t>(i)];
      for (int e : in_[static_cast<std::size_t>(i)]) {
        const auto& edge = p_.edges[static_cast<std::size_t>(e)];
        auto& msg = bwd_[static_cast<std::size_t>(e)];
        const auto& rev = fwd_[static_cast<std::size_t>(e)];
        for (int xb = 0; xb < edge.cols; ++xb)
          scratch_[static_cast<std::size_t>(xb)] = w * belief_[static_cast<std::size_t>(xb)] - rev[static_cast<std::size_t>(xb)];
        for (int xa = 0; xa < edge.rows; ++xa) {
          double best = kInf;
          for (int xb = 0; xb < edge.cols; ++xb)
            best = std::min(best, scratch_[static_cast<std::size_t>(xb)] + edge.cost(xa, xb));
          msg[static_cast<std::size_t>(xa)] = best;
        }
        normalize(msg);
      }
    }
  }

  // Sum over chains of the exact chain minimum under the current
  // reparametrization; each node's reparametrized unary is split evenly over
  // the chains through it.
  double lower_bound() {
    const auto n = static_cast<std::size_t>(p_.node_count());
    std::vector<std::vector<double>> unary(n);
    for (std::size_t i = 0; i < n; ++i) {
      accumulate_belief(static_cast<int>(i));
      const int k = p_.state_counts[i];
      unary[i].assign(belief_.begin(), belief_.begin() + k);
      for (double& v : unary[i]) v *= weight_[i];
    }
    double bound = 0.0;
    std::vector<double> dp, next;
    for (const auto& c : chains_) {
      dp = unary[static_cast<std::size_t>(c.nodes.front())];
      for (std::size_t k = 0; k < c.edges.size(); ++k) {
        const auto e = static_cast<std::size_t>(c.edges[k]);
        const auto& edge = p_.edges[e];
        const auto& u = unary[static_cast<std::size_t>(c.nodes[k + 1])];
        next.assign(static_cast<std::size_t>(edge.cols), kInf);
        for (int xa = 0; xa < edge.rows; ++xa) {
          const double base = dp[static_cast<std::size_t>(xa)] - bwd_[e][static_cast<std::size_t>(xa)];
          for (int xb = 0; xb < edge.cols; ++xb) {
            const double v = base + edge.cost(xa, xb) - fwd_[e][static_cast<std::size_t>(xb)];
            next[static_cast<std::size_t>(xb)] = std::min(next[static_cast<std::size_t>(xb)], v);
          }
        }
        for (std::size_t xb = 0; xb < next.size(); ++xb) next[xb] += u[xb];
        dp.swap(next);
      }
      bound += *std::min_element(dp.begin(), dp.end());
    }
    return bound;
  }

  // Visit nodes in order; each picks the state minimizing its true pairwise
  // cost to already-labeled neighbors plus incoming messages from later ones.
  std::vector<int> extract_labeling() const {
    std::vector<int> x(static_cast<std::size_t>(p_.node_count()), 0);
    std::vector<double> cost;
    for (int i = 0; i < p_.node_count(); ++i) {
      cost.assign(static_cast<std::size_t>(p_.state_counts[static_cast<std::size_t>(i)]), 0.0);
      for (int e : in_[static_cast<std::size_t>(i)]) {
        const auto& edge = p_.edges[static_cast<std::size_t>(e)];
        const int xa = x[static_cast<std::size_t>(edge.a)];
        for (int xb = 0; xb < edge.cols; ++xb) cost[static_cast<std::size_t>(xb)] += edge.cost(xa, xb);
      }
      for (int e : out_[static_cast<std::size_t>(i)]) {
        const auto& msg = bwd_[static_cast<std::size_t>(e)];
        for (std::size_t xa = 0; xa < cost.size(); ++xa) cost[xa] += msg[xa];
      }
      // min_element returns the first minimum: lowest state index on ties.
      x[static_cast<std::size_t>(i)] = static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin());
    }
    return x;
  }

 private:
  void accumulate_belief(int i) {
    const auto k = static_cast<std::size_t>(p_.state_counts[static_cast<std::size_t>(i)]);
    std::fill(belief_.begin(), belief_.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
    for (int e : in_[static_cast<std::size_t>(i)]) {
      const auto& m = fwd_[static_cast<std::size_t>(e)];
      for (std::size_t s = 0; s < k; ++s) belief_[s] += m[s];
    }
    for (int e : out_[static_cast<std::size_t>(i)]) {
      const auto& m = bwd_[static_cast<std::size_t>(e)];
      for (std::size_t s = 0; s < k; ++s) belief_[s] += m[s];
    }
  }

  static void normalize(std::vector<double>& msg) {
    const double lo = *std::min_element(msg.begin(), msg.end());
    for (double& v : msg) v -= lo;
  }

  // Pair each chain arriving at a node with one of its outgoing edges; extra
  // outgoing edges open new chains. Node i then lies on max(in, out) chains.
  void build_chains() {
    std::vector<int> chain_of_edge(p_.edges.size(), -1);
    for (int i = 0; i < p_.node_count(); ++i) {
      const auto& ins = in_[static_cast<std::size_t>(i)];
      const auto& outs = out_[static_cast<std::size_t>(i)];
      for (int e : ins) chains_[static_cast<std::size_t>(chain_of_edge[static_cast<std::size_t>(e)])].nodes.push_back(i);
      for (std::size_t k = 0; k < outs.size(); ++k) {
        int c;
        if (k < ins.size()) {
          c = chain_of_edge[static_cast<std::size_t>(ins[k])];
        } else {
          c = static_cast<int>(chains_.size());
          chains_.push_back(Chain{{i}, {}});
        }
        chains_[static_cast<std::size_t>(c)].edges.push_back(outs[k]);
        chain_of_edge[static_cast<std::size_t>(outs[k])] = c;
      }
      if (ins.empty() && outs.empty()) chains_.push_back(Chain{{i}, {}});
    }
  }

  const CrfProblem& p_;
  std::vector<std::vector<int>> in_, out_;  // edge ids with b == i / a == i
  std::vector<double> weight_;
  std::vector<std::size_t> chains_per_node_;
  std::vector<std::vector<double>> fwd_;  // message a -> b, indexed by b's state
  std::vector<std::vector<double>> bwd_;  // message b -> a, indexed by a's state
  std::vector<double> belief_, scratch_;
  std::vector<Chain> chains_;
};

void check_finite(const CrfProblem& problem) {
  if (static_cast<int>(problem.state_counts.size()) == 0)
    throw ValidationError("CRF problem has no nodes");
  for (int s : problem.state_counts)
    if (s < 1) throw ValidationError("CRF node without states");
  for (const auto& e : problem.edges) {
    if (e.a < 0 || e.b >= problem.node_count() || e.a >= e.b)
      throw ValidationError("CRF edge endpoints must satisfy 0 <= a < b < node_count");
    if (e.rows != problem.state_counts[static_cast<std::size_t>(e.a)] ||
        e.cols != problem.state_counts[static_cast<std::size_t>(e.b)] ||
        e.costs.size() != static_cast<std::size_t>(e.rows) * static_cast<std::size_t>(e.cols))
      throw ValidationError("CRF edge table does not match its endpoints");
    for (double c : e.costs)
      if (!std::isfinite(c)) throw ValidationError("non-finite cost in CRF edge table");
  }
}

}  // namespace

SolveReport solve_trws(const CrfProblem& problem, const TrwsOptions& options) {
  if (options.max_iters < 1) throw ValidationError("solve_trws: max_iters must be >= 1");
  if (!(options.epsilon > 0.0)) throw ValidationError("solve_trws: epsilon must be > 0");
  check_finite(problem);

  const auto t0 = std::chrono::steady_clock::now();
  TrwsState state(problem);
  SolveReport report;
  report.labeling.energy = kInf;

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    state.forward_pass();
    state.backward_pass();
    const double bound = state.lower_bound();
    report.bound_history.push_back(bound);
    report.iterations = iter;

    auto x = state.extract_labeling();
    const double energy = labeling_energy(problem, x);
    if (energy < report.labeling.energy) {
      report.labeling.states = std::move(x);
      report.labeling.energy = energy;
    }

    const double prev = iter > 1 ? report.lower_bound : -kInf;
    report.lower_bound = iter > 1 ? std::max(report.lower_bound, bound) : bound;
    if (report.labeling.energy - report.lower_bound <= 1e-9 * std::max(1.0, std::abs(report.labeling.energy))) {
      report.converged = true;
      break;
    }
    if (iter > 1 && bound - prev < options.epsilon) {
      report.converged = true;
      break;
    }
  }

  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

Labeling solve_exhaustive(const CrfProblem& problem) {
  check_finite(problem);
  double product = 1.0;
  for (int s : problem.state_counts) product *= s;
  if (product > kMaxExhaustiveStates) {
    std::ostringstream msg;
    msg << "solve_exhaustive: state space has " << product << " labelings (limit "
        << kMaxExhaustiveStates << ")";
    throw ValidationError(msg.str());
  }
  const auto n = problem.state_counts.size();
  std::vector<int> x(n, 0);
  Labeling best;
  best.energy = kInf;
  while (true) {
    const double e = labeling_energy(problem, x);
    if (e < best.energy) {
      best.energy = e;
      best.states = x;
    }
    // Odometer with the last node fastest: lexicographic order.
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++x[k] < problem.state_counts[k]) break;
      x[k] = 0;
      if (k == 0) return best;
    }
    if (n == 0) return best;
  }
}

}  // namespace cip
