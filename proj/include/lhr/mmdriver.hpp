#pragma once

#include "lhr/admm.hpp"

#include <string>
#include <vector>

namespace lhr {

/// Outcome of a full solve, with per-outer-iteration diagnostics.
struct RecoveryResult {
  Matrix a;
  Matrix e;
  int outerIterations = 0;
  /// Log-sum objective of (A^(t), E^(t)) for t = 1..outerIterations.
  std::vector<double> objectiveTrace;
  /// weight_delta(W^(t), W^(t+1)) for each outer iteration.
  std::vector<double> weightDeltaTrace;
  std::vector<int> innerIterationCounts;
  std::vector<InnerStatus> innerStatuses;
  /// Inner residual trace of every outer iteration.
  std::vector<std::vector<double>> innerResidualTraces;
  std::vector<double> wallTimePerOuter;
  bool converged = false;
  bool diverged = false;
  /// Outer iterations t >= 2 whose objective exceeded the previous one by
  /// more than the configured slack.
  std::vector<int> monotoneViolations;
  /// Outer iterations whose inner solve ended above the previous iterate in
  /// the surrogate and was replaced by that iterate.
  std::vector<int> rejectedSteps;
  int rankOfA = 0;
  long cardOfE = 0;
  /// Resolved configuration the solve actually ran with.
  SolverConfig config;
  Program program = Program::Rpca;
};

/// Log-sum heuristic recovery of P = A + E by majorization-minimization.
RecoveryResult lhr_solve_rpca(const Matrix &p, const SolverConfig &cfg);

/// Log-sum heuristic low-rank representation P = P A + E.
RecoveryResult lhr_solve_lrr(const Matrix &p, const SolverConfig &cfg);

/// l1-heuristic baseline: one inner solve with identity spectral weights and
/// unit error weights.
RecoveryResult pcp_solve(const Matrix &p, const SolverConfig &cfg);

/// Plain LRR baseline (identity spectral weights, unit error weights).
RecoveryResult lrr_baseline_solve(const Matrix &p, const SolverConfig &cfg);

} // namespace lhr
