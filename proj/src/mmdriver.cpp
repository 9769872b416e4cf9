#include "lhr/mmdriver.hpp"

#include <chrono>

namespace lhr {

namespace {

using Clock = std::chrono::steady_clock;

WeightSet first_weights(const Matrix &p, const SolverConfig &cfg,
                        Program program) {
  return program == Program::Rpca
             ? initial_weights(p.rows(), p.cols(), *cfg.delta1, *cfg.delta2)
             : initial_weights_lrr(p.rows(), p.cols(), *cfg.delta1,
                                   *cfg.delta2);
}

InnerResult solve_surrogate(const Matrix &p, const WeightSet &w,
                            const SolverConfig &cfg, const InnerState *warm,
                            Program program) {
  return program == Program::Rpca ? rpca_inner_solve(p, w, cfg, warm)
                                  : lrr_inner_solve(p, w, cfg, warm);
}

double objective_of(const Matrix &a, const Matrix &e, const SolverConfig &cfg,
                    Program program) {
  return program == Program::Rpca
             ? lhr_objective(a, e, *cfg.lambda, *cfg.delta1, *cfg.delta2)
             : lrr_objective(a, e, *cfg.lambda, *cfg.delta1, *cfg.delta2);
}

void finish(RecoveryResult &r) {
  r.rankOfA = numerical_rank(r.a);
  r.cardOfE = cardinality(r.e);
}

RecoveryResult mm_solve(const Matrix &p, const SolverConfig &raw,
                        Program program) {
  RecoveryResult r;
  r.program = program;
  r.config = resolve_config(raw, p, program);
  const SolverConfig &cfg = r.config;
  const double d1 = *cfg.delta1;
  const double d2 = *cfg.delta2;

  WeightSet w = first_weights(p, cfg, program);
  InnerState warm;
  bool have_warm = false;

  for (int t = 1; t <= cfg.outerMaxIters; ++t) {
    const auto start = Clock::now();
    InnerResult inner =
        solve_surrogate(p, w, cfg, have_warm ? &warm : nullptr, program);

    // The previous iterate is feasible for this surrogate. An inexact inner
    // solve that ends above it is discarded, which leaves the weights (and so
    // the iterate) unchanged and ends the loop.
    if (have_warm && inner.status != InnerStatus::Diverged &&
        surrogate_objective(inner.a, inner.e, w, *cfg.lambda) >
            surrogate_objective(warm.a, warm.e, w, *cfg.lambda)) {
      r.rejectedSteps.push_back(t);
      inner.a = warm.a;
      inner.e = warm.e;
    }

    const double objective = objective_of(inner.a, inner.e, cfg, program);
    if (!r.objectiveTrace.empty() &&
        objective > r.objectiveTrace.back() + cfg.monotoneSlack)
      r.monotoneViolations.push_back(t);

    WeightSet next = reweight(inner.a, inner.e, d1, d2);
    const double delta = weight_delta(w, next, cfg.stopScope);

    r.objectiveTrace.push_back(objective);
    r.weightDeltaTrace.push_back(delta);
    r.innerIterationCounts.push_back(inner.iterations);
    r.innerStatuses.push_back(inner.status);
    r.innerResidualTraces.push_back(std::move(inner.residualTrace));
    r.outerIterations = t;
    r.a = inner.a;
    r.e = inner.e;
    r.wallTimePerOuter.push_back(
        std::chrono::duration<double>(Clock::now() - start).count());

    if (inner.status == InnerStatus::Diverged) {
      r.diverged = true;
      break;
    }
    if (delta < cfg.outerTol) {
      r.converged = true;
      break;
    }
    warm.a = std::move(inner.a);
    warm.e = std::move(inner.e);
    have_warm = true;
    w = std::move(next);
  }
  finish(r);
  return r;
}

RecoveryResult single_solve(const Matrix &p, const SolverConfig &raw,
                            Program program) {
  RecoveryResult r;
  r.program = program;
  r.config = resolve_config(raw, p, program, SolveKind::Baseline);
  const SolverConfig &cfg = r.config;

  WeightSet w = first_weights(p, cfg, program);
  w.wE.setOnes();

  const auto start = Clock::now();
  InnerResult inner = solve_surrogate(p, w, cfg, nullptr, program);
  r.objectiveTrace.push_back(
      objective_of(inner.a, inner.e, cfg, program));
  r.weightDeltaTrace.push_back(0.0);
  r.innerIterationCounts.push_back(inner.iterations);
  r.innerStatuses.push_back(inner.status);
  r.innerResidualTraces.push_back(std::move(inner.residualTrace));
  r.wallTimePerOuter.push_back(
      std::chrono::duration<double>(Clock::now() - start).count());
  r.outerIterations = 1;
  r.converged = inner.status == InnerStatus::Converged;
  r.diverged = inner.status == InnerStatus::Diverged;
  r.a = std::move(inner.a);
  r.e = std::move(inner.e);
  finish(r);
  return r;
}

} // namespace

RecoveryResult lhr_solve_rpca(const Matrix &p, const SolverConfig &cfg) {
  return mm_solve(p, cfg, Program::Rpca);
}

RecoveryResult lhr_solve_lrr(const Matrix &p, const SolverConfig &cfg) {
  return mm_solve(p, cfg, Program::Lrr);
}

RecoveryResult pcp_solve(const Matrix &p, const SolverConfig &cfg) {
  return single_solve(p, cfg, Program::Rpca);
}

RecoveryResult lrr_baseline_solve(const Matrix &p, const SolverConfig &cfg) {
  return single_solve(p, cfg, Program::Lrr);
}

} // namespace lhr
