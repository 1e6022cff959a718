#pragma once

#include <vector>

#include "cip/crf.hpp"

namespace cip {

struct TrwsOptions {
  int max_iters = 100;
  double epsilon = 1e-4;  // stop when the bound improves by less than this
};

struct SolveReport {
  Labeling labeling;
  double lower_bound = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;             // seconds
  std::vector<double> bound_history;  // one entry per iteration
};

/// Sequential tree-reweighted message passing (TRW-S) in node-index order.
///
/// Edges are covered by monotonic chains; a node on n chains receives weight
/// 1/n. Each iteration runs a forward and a backward pass, then evaluates the
/// chain-decomposition lower bound and a primal labeling by sequential
/// conditioned argmin (lowest state index on ties). The best labeling seen is
/// returned. Throws ValidationError on non-finite costs or bad options.
SolveReport solve_trws(const CrfProblem& problem, const TrwsOptions& options = {});

inline constexpr double kMaxExhaustiveStates = 1e6;

/// Exact minimum by enumeration in lexicographic order of the state vector
/// (the first minimum wins). Throws ValidationError when the product of state
/// counts exceeds kMaxExhaustiveStates.
Labeling solve_exhaustive(const CrfProblem& problem);

}  // namespace cip
