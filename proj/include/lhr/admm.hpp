#pragma once

#include "lhr/matcore.hpp"
#include "lhr/weights.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lhr {

/// Gradient step used by the A-update: either derived from the Lipschitz
/// bound of the quadratic A-objective or fixed by the caller.
struct GammaPolicy {
  enum class Mode { Auto, Fixed };
  Mode mode = Mode::Auto;
  double value = 0.0;

  static GammaPolicy automatic() { return {}; }
  static GammaPolicy fixed(double v) { return {Mode::Fixed, v}; }
};

/// How the inner loop minimizes the quadratic A-subproblem: one gradient step
/// of size gamma, or its closed-form minimizer in the eigenbases of the
/// spectral weights.
enum class AStep { Gradient, Exact };

/// Which constraint the inner solver enforces.
enum class Program { Rpca, Lrr };

/// Solver tunables. Unset optionals are filled from the data by
/// resolve_config(): lambda = 2/sqrt(max(m,n)) for reweighted RPCA,
/// 1/sqrt(max(m,n)) for the single-solve RPCA baseline and 0.4 for LRR;
/// delta1 = 0.1 * mean|P|, delta2 = 5e-4 * sigma_1(P), mu0 = 1.25 / sigma_1(P).
struct SolverConfig {
  std::optional<double> lambda;
  std::optional<double> delta1;
  std::optional<double> delta2;
  std::optional<double> mu0;
  double rho = 1.1;
  /// mu stops growing at muMaxFactor * mu0.
  double muMaxFactor = 1e7;
  GammaPolicy gamma;
  AStep aStep = AStep::Exact;
  double innerTol = 1e-7;
  int innerMaxIters = 500;
  double outerTol = 1e-5;
  int outerMaxIters = 10;
  /// Reuse the previous outer iterate as the inner starting point. When
  /// false every inner solve starts from A = E = 0.
  bool warmStart = true;
  WeightDeltaScope stopScope = WeightDeltaScope::All;
  /// Allowed increase of the log-sum objective between outer iterations.
  double monotoneSlack = 1e-9;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

inline constexpr double kDelta1Scale = 0.1;
inline constexpr double kDelta2Scale = 5e-4;
inline constexpr double kReweightedLambdaScale = 2.0;

/// Reweighted solves and single convex baselines differ in the RPCA lambda.
enum class SolveKind { Reweighted, Baseline };

/// Copy of cfg with every optional field filled in for observation p.
SolverConfig resolve_config(const SolverConfig &cfg, const Matrix &p,
                            Program program,
                            SolveKind kind = SolveKind::Reweighted);

/// Iterates and multipliers of the inner ADM loop. For RPCA every matrix is
/// m x n; for LRR a, j, c2 are n x n while e, c1 are m x n.
struct InnerState {
  Matrix a, e, j, c1, c2;
  double mu = 0.0;
  int iteration = 0;
};

enum class InnerStatus { Converged, MaxIterations, Diverged };

struct InnerResult {
  Matrix a;
  Matrix e;
  InnerState state;
  /// max(||h1||_F, ||h2||_F) / ||P||_F after each sweep.
  std::vector<double> residualTrace;
  InnerStatus status = InnerStatus::MaxIterations;
  int iterations = 0;
};

std::string to_string(InnerStatus s);

/// Step gamma = 1 / (L + 1e-12) for the A-update. Without operator_norm_p the
/// RPCA bound L = 2 (1 + |wY|^2 |wZ|^2) is used; with it the LRR bound
/// L = 2 (|P|^2 + |wY|^2 |wZ|^2). |.| is the spectral norm.
double step_size(const WeightSet &w, const GammaPolicy &policy,
                 std::optional<double> operator_norm_p = std::nullopt);

/// Approximately minimizes ||wY A wZ||_* + lambda ||wE .* E||_1 subject to
/// P = A + E. cfg must be resolved. Converged once max(|h1|, |h2|) / |P| and
/// |h2| / max(1, |J|) are both below innerTol (Frobenius norms).
InnerResult rpca_inner_solve(const Matrix &p, const WeightSet &w,
                             const SolverConfig &cfg,
                             const InnerState *warm = nullptr);

/// Approximately minimizes ||wY A wZ||_* + lambda ||wE .* E||_1 subject to
/// P = P A + E. cfg must be resolved.
InnerResult lrr_inner_solve(const Matrix &p, const WeightSet &w,
                            const SolverConfig &cfg,
                            const InnerState *warm = nullptr);

/// ||wY a wZ||_* + lambda * ||wE .* e||_1
double surrogate_objective(const Matrix &a, const Matrix &e,
                           const WeightSet &w, double lambda);

} // namespace lhr
