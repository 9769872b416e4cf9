#include "lhr/admm.hpp"

#include "lhr/kernels.hpp"
#include "lhr/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lhr {

void SolverConfig::validate() const {
  auto positive = [](const std::optional<double> &v, const char *name) {
    if (v && !(*v > 0.0 && std::isfinite(*v)))
      throw InvalidArgument(std::string(name) + " must be positive");
  };
  positive(lambda, "lambda");
  positive(delta1, "delta1");
  positive(delta2, "delta2");
  positive(mu0, "mu0");
  if (!(rho > 1.0))
    throw InvalidArgument("rho must be greater than 1");
  if (!(muMaxFactor >= 1.0))
    throw InvalidArgument("muMaxFactor must be at least 1");
  if (gamma.mode == GammaPolicy::Mode::Fixed && !(gamma.value > 0.0))
    throw InvalidArgument("fixed gamma must be positive");
  if (!(innerTol > 0.0) || !(outerTol > 0.0))
    throw InvalidArgument("tolerances must be positive");
  if (innerMaxIters < 1 || outerMaxIters < 1)
    throw InvalidArgument("iteration caps must be at least 1");
  if (!(monotoneSlack >= 0.0))
    throw InvalidArgument("monotoneSlack must be non-negative");
}

SolverConfig resolve_config(const SolverConfig &cfg, const Matrix &p,
                            Program program, SolveKind kind) {
  cfg.validate();
  require_finite(p, "resolve_config");
  SolverConfig out = cfg;
  const double sigma1 = spectral_norm(p);
  const double mean_abs = p.size() > 0 ? p.cwiseAbs().mean() : 0.0;
  // A zero observation has no scale; fall back to unit regularizers.
  const double spec_scale = sigma1 > 0.0 ? sigma1 : 1.0;
  const double entry_scale = mean_abs > 0.0 ? mean_abs : 1.0;
  if (!out.lambda) {
    const double base =
        1.0 / std::sqrt(static_cast<double>(std::max(p.rows(), p.cols())));
    if (program == Program::Lrr)
      out.lambda = 0.4;
    else
      out.lambda =
          kind == SolveKind::Reweighted ? kReweightedLambdaScale * base : base;
  }
  if (!out.delta1)
    out.delta1 = kDelta1Scale * entry_scale;
  if (!out.delta2)
    out.delta2 = kDelta2Scale * spec_scale;
  if (!out.mu0)
    out.mu0 = 1.25 / spec_scale;
  return out;
}

std::string to_string(InnerStatus s) {
  switch (s) {
  case InnerStatus::Converged:
    return "converged";
  case InnerStatus::MaxIterations:
    return "max_iterations";
  case InnerStatus::Diverged:
    return "diverged";
  }
  return "unknown";
}

double step_size(const WeightSet &w, const GammaPolicy &policy,
                 std::optional<double> operator_norm_p) {
  if (policy.mode == GammaPolicy::Mode::Fixed)
    return policy.value;
  const double sy = spectral_norm(w.wY);
  const double sz = spectral_norm(w.wZ);
  const double coupling = sy * sy * sz * sz;
  const double lipschitz =
      operator_norm_p
          ? 2.0 * (*operator_norm_p * *operator_norm_p + coupling)
          : 2.0 * (1.0 + coupling);
  return 1.0 / (lipschitz + 1e-12);
}

double surrogate_objective(const Matrix &a, const Matrix &e,
                           const WeightSet &w, double lambda) {
  return nuclear_norm(w.wY * a * w.wZ) + lambda * kernels::weighted_l1(w.wE, e);
}

namespace {

// Both programs share the sweep; they differ only in how A enters the data
// constraint: RPCA uses P = A + E, LRR uses P = P A + E.
class Constraint {
public:
  Constraint(const Matrix &p, Program program) : p_(p), program_(program) {}

  Matrix fit(const Matrix &a) const {
    return program_ == Program::Rpca ? a : Matrix(p_ * a);
  }
  Matrix adjoint(const Matrix &r) const {
    return program_ == Program::Rpca ? r : Matrix(p_.transpose() * r);
  }
  Eigen::Index rep_rows() const {
    return program_ == Program::Rpca ? p_.rows() : p_.cols();
  }

private:
  const Matrix &p_;
  Program program_;
};

// wY * x * wZ, skipping the products for identity weights (exact either way).
class Sandwich {
public:
  explicit Sandwich(const WeightSet &w)
      : w_(w), identity_(w.wY.isIdentity(0.0) && w.wZ.isIdentity(0.0)) {}

  Matrix operator()(const Matrix &x) const {
    if (identity_)
      return x;
    return w_.wY * x * w_.wZ;
  }
  bool identity() const { return identity_; }

private:
  const WeightSet &w_;
  bool identity_;
};

// Minimizes ||r1 - fit(A)||_F^2 + ||r2 - wY A wZ||_F^2 over A, where
// r1 = P - E + C1/mu and r2 = J + C2/mu.
//
// Exact mode solves the normal equations fit^T fit(A) + wY^2 A wZ^2 = rhs.
// For RPCA this is diagonal in the eigenbases of wY and wZ. For LRR the
// substitution A' = wY A gives S A' + A' wZ^2 = wY^-1 rhs with
// S = wY^-1 P^T P wY^-1, diagonal in the eigenbases of S and wZ.
class AUpdate {
public:
  AUpdate(const Matrix &p, const WeightSet &w, const Constraint &constraint,
          const Sandwich &sandwich, Program program, const SolverConfig &cfg)
      : constraint_(constraint), sandwich_(sandwich), program_(program),
        mode_(cfg.aStep) {
    if (mode_ == AStep::Gradient) {
      const std::optional<double> opnorm =
          program == Program::Lrr ? std::optional<double>(spectral_norm(p))
                                  : std::nullopt;
      gamma_ = step_size(w, cfg.gamma, opnorm);
      return;
    }
    if (program == Program::Rpca && sandwich.identity())
      return;
    Eigen::SelfAdjointEigenSolver<Matrix> ez(w.wZ);
    right_ = ez.eigenvectors();
    const Vector z2 = ez.eigenvalues().array().square();
    Vector left_diag;
    if (program == Program::Rpca) {
      Eigen::SelfAdjointEigenSolver<Matrix> ey(w.wY);
      left_ = ey.eigenvectors();
      left_t_ = left_.transpose();
      left_diag = ey.eigenvalues().array().square();
      denom_ = (left_diag * z2.transpose()).array() + 1.0;
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> ey(w.wY);
      const Matrix wy_inv = ey.eigenvectors() *
                            ey.eigenvalues().cwiseInverse().asDiagonal() *
                            ey.eigenvectors().transpose();
      Matrix s = wy_inv * (p.transpose() * p) * wy_inv;
      s = 0.5 * (s + s.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(s);
      left_ = wy_inv * es.eigenvectors();
      left_t_ = es.eigenvectors().transpose() * wy_inv;
      left_diag = es.eigenvalues().cwiseMax(0.0);
      denom_ = left_diag.replicate(1, z2.size()).array() +
               z2.transpose().replicate(left_diag.size(), 1).array();
    }
  }

  void apply(Matrix &a, const Matrix &r1, const Matrix &r2) const {
    if (mode_ == AStep::Gradient) {
      a += gamma_ * (constraint_.adjoint(r1 - constraint_.fit(a)) +
                     sandwich_(r2 - sandwich_(a)));
      return;
    }
    const Matrix rhs = constraint_.adjoint(r1) + sandwich_(r2);
    if (program_ == Program::Rpca && sandwich_.identity()) {
      a = 0.5 * rhs;
      return;
    }
    const Matrix rotated =
        ((left_t_ * rhs * right_).array() / denom_.array()).matrix();
    a = left_ * rotated * right_.transpose();
  }

private:
  const Constraint &constraint_;
  const Sandwich &sandwich_;
  Program program_;
  AStep mode_;
  double gamma_ = 0.0;
  Matrix left_, left_t_, right_;
  Eigen::ArrayXXd denom_;
};

InnerResult inner_solve(const Matrix &p, const WeightSet &w,
                        const SolverConfig &cfg, const InnerState *warm,
                        Program program) {
  if (!cfg.lambda || !cfg.mu0)
    throw InvalidArgument("inner solver needs a resolved SolverConfig");
  require_finite(p, "inner_solve");
  require_same_shape(w.wE, p, "inner_solve(wE)");
  const Constraint constraint(p, program);
  const Eigen::Index rep = constraint.rep_rows();
  if (w.wY.rows() != rep || w.wY.cols() != rep || w.wZ.rows() != p.cols() ||
      w.wZ.cols() != p.cols())
    throw InvalidArgument("inner_solve: spectral weight shapes do not match");

  const double lambda = *cfg.lambda;
  const double normP = p.norm();
  const double scale = normP > 0.0 ? normP : 1.0;
  const double mu_max = *cfg.mu0 * cfg.muMaxFactor;
  const Sandwich sandwich(w);
  const AUpdate a_update(p, w, constraint, sandwich, program, cfg);

  InnerState s;
  if (warm && cfg.warmStart) {
    s.a = warm->a;
    s.e = warm->e;
  } else {
    s.a = Matrix::Zero(rep, p.cols());
    s.e = Matrix::Zero(p.rows(), p.cols());
  }
  s.c1 = Matrix::Zero(p.rows(), p.cols());
  s.c2 = Matrix::Zero(rep, p.cols());
  s.mu = *cfg.mu0;

  InnerResult result;
  double best_stat = std::numeric_limits<double>::infinity();
  Matrix best_a = s.a, best_e = s.e;

  Matrix fitted = constraint.fit(s.a);
  Matrix weighted = sandwich(s.a);
  for (int k = 1; k <= cfg.innerMaxIters; ++k) {
    const double inv_mu = 1.0 / s.mu;

    Matrix e_arg = p - fitted + inv_mu * s.c1;
    kernels::shrink(e_arg, w.wE, lambda, inv_mu, s.e);

    s.j = svt(weighted - inv_mu * s.c2, inv_mu);

    a_update.apply(s.a, p - s.e + inv_mu * s.c1, s.j + inv_mu * s.c2);

    fitted = constraint.fit(s.a);
    weighted = sandwich(s.a);
    const Matrix r1 = p - fitted - s.e;
    const Matrix r2 = s.j - weighted;
    s.c1 += s.mu * r1;
    s.c2 += s.mu * r2;
    s.mu = std::min(cfg.rho * s.mu, mu_max);
    s.iteration = k;

    const double stat = std::max(r1.norm(), r2.norm()) / scale;
    // The splitting residual must also be small relative to J itself, which
    // can be much smaller than P when the errors are large.
    const double split = r2.norm() / std::max(1.0, s.j.norm());
    result.residualTrace.push_back(stat);
    result.iterations = k;

    if (!std::isfinite(stat) ||
        (std::isfinite(best_stat) && stat > 1e3 * best_stat)) {
      result.status = InnerStatus::Diverged;
      break;
    }
    if (stat < best_stat) {
      best_stat = stat;
      best_a = s.a;
      best_e = s.e;
    }
    if (stat < cfg.innerTol && split <= cfg.innerTol) {
      result.status = InnerStatus::Converged;
      break;
    }
  }

  if (result.status == InnerStatus::Converged) {
    result.a = s.a;
    result.e = s.e;
  } else {
    result.a = std::move(best_a);
    result.e = std::move(best_e);
  }
  result.state = std::move(s);
  return result;
}

} // namespace

InnerResult rpca_inner_solve(const Matrix &p, const WeightSet &w,
                             const SolverConfig &cfg,
                             const InnerState *warm) {
  return inner_solve(p, w, cfg, warm, Program::Rpca);
}

InnerResult lrr_inner_solve(const Matrix &p, const WeightSet &w,
                            const SolverConfig &cfg, const InnerState *warm) {
  return inner_solve(p, w, cfg, warm, Program::Lrr);
}

} // namespace lhr
