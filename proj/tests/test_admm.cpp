#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lhr/admm.hpp"
#include "lhr/synthbench.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace lhr;
using lhr::testing::random_matrix;

namespace {

SolverConfig resolved(const Matrix &p, Program program,
                      SolveKind kind = SolveKind::Baseline) {
  return resolve_config(SolverConfig{}, p, program, kind);
}

WeightSet identity_weights(Eigen::Index rows, Eigen::Index cols, double we,
                           Eigen::Index rep) {
  WeightSet w;
  w.wY = Matrix::Identity(rep, rep);
  w.wZ = Matrix::Identity(cols, cols);
  w.wE = Matrix::Constant(rows, cols, we);
  w.delta1 = 1.0;
  w.delta2 = 1.0;
  return w;
}

// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
Matrix random_spd(Eigen::Index n, double lo, double hi, std::mt19937_64 &rng) {
  const Matrix q = lhr::testing::random_orthogonal(n, rng);
  std::uniform_real_distribution<double> u(lo, hi);
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d(i) = u(rng);
  Matrix m = q * d.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

} // namespace

TEST_CASE("resolve_config fills data-scaled defaults") {
  std::mt19937_64 rng(1);
  const Matrix p = random_matrix(30, 50, rng, 2.0);
  const double sigma1 = spectral_norm(p);
  const double mean_abs = p.cwiseAbs().mean();

  const SolverConfig base = resolved(p, Program::Rpca, SolveKind::Baseline);
  CHECK(*base.lambda == doctest::Approx(1.0 / std::sqrt(50.0)));
  CHECK(*base.delta1 == doctest::Approx(kDelta1Scale * mean_abs));
  CHECK(*base.delta2 == doctest::Approx(kDelta2Scale * sigma1));
  CHECK(*base.mu0 == doctest::Approx(1.25 / sigma1));

  const SolverConfig rw = resolved(p, Program::Rpca, SolveKind::Reweighted);
  CHECK(*rw.lambda ==
        doctest::Approx(kReweightedLambdaScale / std::sqrt(50.0)));
  CHECK(*resolved(p, Program::Lrr).lambda == 0.4);

  SolverConfig explicit_cfg;
  explicit_cfg.lambda = 0.7;
  explicit_cfg.delta1 = 0.2;
  explicit_cfg.delta2 = 0.3;
  explicit_cfg.mu0 = 0.4;
  const SolverConfig kept = resolve_config(explicit_cfg, p, Program::Rpca);
  CHECK(*kept.lambda == 0.7);
  CHECK(*kept.delta1 == 0.2);
  CHECK(*kept.delta2 == 0.3);
  CHECK(*kept.mu0 == 0.4);

  // A zero observation still gets positive regularizers.
  const SolverConfig zero = resolved(Matrix::Zero(3, 3), Program::Rpca);
  CHECK(*zero.delta1 > 0.0);
  CHECK(*zero.delta2 > 0.0);
  CHECK(*zero.mu0 > 0.0);
}

TEST_CASE("SolverConfig validation") {
  SolverConfig ok;
  CHECK_NOTHROW(ok.validate());
  auto rejects = [](auto mutate) {
    SolverConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
  };
  rejects([](SolverConfig &c) { c.lambda = 0.0; });
  rejects([](SolverConfig &c) { c.delta1 = -1.0; });
  rejects([](SolverConfig &c) { c.delta2 = 0.0; });
  rejects([](SolverConfig &c) { c.mu0 = 0.0; });
  rejects([](SolverConfig &c) { c.rho = 1.0; });
  rejects([](SolverConfig &c) { c.innerTol = 0.0; });
  rejects([](SolverConfig &c) { c.innerMaxIters = 0; });
  rejects([](SolverConfig &c) { c.outerTol = -1e-5; });
  rejects([](SolverConfig &c) { c.outerMaxIters = 0; });
  rejects([](SolverConfig &c) { c.gamma = GammaPolicy::fixed(0.0); });
}

TEST_CASE("step_size examples") {
  WeightSet w = identity_weights(3, 3, 1.0, 3);
  CHECK(step_size(w, GammaPolicy::automatic()) ==
        doctest::Approx(1.0 / (4.0 + 1e-12)));
  w.wY *= 0.5;
  w.wZ *= 0.5;
  CHECK(step_size(w, GammaPolicy::automatic()) ==
        doctest::Approx(1.0 / (2.125 + 1e-12)));
  CHECK(step_size(w, GammaPolicy::fixed(0.01)) == 0.01);
  // LRR bound with |P| = 2 and identity weights: L = 2 (4 + 1).
  const WeightSet id = identity_weights(3, 3, 1.0, 3);
  CHECK(step_size(id, GammaPolicy::automatic(), 2.0) ==
        doctest::Approx(1.0 / 10.0));
}

TEST_CASE("a gradient step with the automatic size never increases the "
          "A-step objective") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng() % 4);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 4);
    WeightSet w;
    w.wY = random_spd(m, 0.1, 3.0, rng);
    w.wZ = random_spd(n, 0.1, 3.0, rng);
    const bool lrr = trial % 2 == 1;
    const Matrix p = random_matrix(m, n, rng);
    if (lrr)
      w.wY = random_spd(n, 0.1, 3.0, rng);
    const Eigen::Index rep = lrr ? n : m;
    const Matrix r1 = random_matrix(m, n, rng);
    const Matrix r2 = random_matrix(rep, n, rng);
    const Matrix a = random_matrix(rep, n, rng, 3.0);
    auto fit = [&](const Matrix &x) { return lrr ? Matrix(p * x) : x; };
    auto f = [&](const Matrix &x) {
      return (r1 - fit(x)).squaredNorm() + (r2 - w.wY * x * w.wZ).squaredNorm();
    };
    const double gamma =
        lrr ? step_size(w, GammaPolicy::automatic(), spectral_norm(p))
            : step_size(w, GammaPolicy::automatic());
    const Matrix g1 = r1 - fit(a);
    const Matrix grad =
        (lrr ? Matrix(p.transpose() * g1) : g1) +
        w.wY * (r2 - w.wY * a * w.wZ) * w.wZ;
    CHECK(f(a + gamma * grad) <= f(a) * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("rpca_inner_solve: zero observation is a fixed point") {
  const Matrix p = Matrix::Zero(4, 5);
  SolverConfig cfg = resolved(p, Program::Rpca);
  const InnerResult r =
      rpca_inner_solve(p, identity_weights(4, 5, 1.0, 4), cfg);
  CHECK(r.iterations == 1);
  CHECK(r.status == InnerStatus::Converged);
  CHECK(r.a.isZero(0.0));
  CHECK(r.e.isZero(0.0));
}

TEST_CASE("rpca_inner_solve with identity weights recovers an easy instance") {
  const PlantedInstance inst = make_instance_with_rank(200, 200, 5, 0.05, 11);
  SolverConfig cfg = resolved(inst.p, Program::Rpca);
  CHECK(*cfg.lambda == doctest::Approx(1.0 / std::sqrt(200.0)));
  const InnerResult r =
      rpca_inner_solve(inst.p, identity_weights(200, 200, 1.0, 200), cfg);
  CHECK(r.status == InnerStatus::Converged);
  CHECK(relative_error(r.a, inst.aStar) <= 1e-3);
  CHECK((inst.p - r.a - r.e).norm() / inst.p.norm() <= cfg.innerTol);
  // Splitting consistency.
  CHECK((r.state.j - r.a).norm() / std::max(1.0, r.state.j.norm()) <=
        cfg.innerTol);
}

TEST_CASE("rpca_inner_solve objective agrees with a long-horizon run") {
  std::mt19937_64 rng(3);
  const PlantedInstance inst = make_instance_with_rank(20, 20, 2, 0.1, 3);
  WeightSet w;
  w.wY = random_spd(20, 0.5, 2.0, rng);
  w.wZ = random_spd(20, 0.5, 2.0, rng);
  w.wE = (random_matrix(20, 20, rng).cwiseAbs().array() + 0.2).matrix();
  w.delta1 = w.delta2 = 1.0;
  for (AStep step : {AStep::Exact, AStep::Gradient}) {
    SolverConfig cfg = resolved(inst.p, Program::Rpca);
    cfg.aStep = step;
    cfg.rho = 1.05;
    cfg.innerMaxIters = 500;
    cfg.innerTol = 1e-8;
    const InnerResult shortrun = rpca_inner_solve(inst.p, w, cfg);
    SolverConfig longcfg = cfg;
    longcfg.innerMaxIters = 5000;
    longcfg.innerTol = 1e-13;
    longcfg.rho = 1.01;
    const InnerResult longrun = rpca_inner_solve(inst.p, w, longcfg);
    const double f_short =
        surrogate_objective(shortrun.a, shortrun.e, w, *cfg.lambda);
    const double f_long =
        surrogate_objective(longrun.a, longrun.e, w, *cfg.lambda);
    CAPTURE(to_string(shortrun.status));
    CHECK(std::abs(f_short - f_long) <= 1e-3 * std::abs(f_long));
  }
}

TEST_CASE("constant error weights are absorbed into lambda exactly") {
  const PlantedInstance inst = make_instance_with_rank(30, 30, 3, 0.1, 4);
  SolverConfig cfg = resolved(inst.p, Program::Rpca);
  const double c = 0.37;
  const InnerResult weighted =
      rpca_inner_solve(inst.p, identity_weights(30, 30, c, 30), cfg);
  SolverConfig absorbed = cfg;
  absorbed.lambda = *cfg.lambda * c;
  const InnerResult plain =
      rpca_inner_solve(inst.p, identity_weights(30, 30, 1.0, 30), absorbed);
  CHECK(weighted.a == plain.a);
  CHECK(weighted.e == plain.e);
  CHECK(weighted.residualTrace == plain.residualTrace);
}

TEST_CASE("inner solves are deterministic") {
  const PlantedInstance inst = make_instance_with_rank(40, 30, 4, 0.1, 5);
  std::mt19937_64 rng(5);
  WeightSet w;
  w.wY = random_spd(40, 0.5, 2.0, rng);
  w.wZ = random_spd(30, 0.5, 2.0, rng);
  w.wE = (random_matrix(40, 30, rng).cwiseAbs().array() + 0.2).matrix();
  const SolverConfig cfg = resolved(inst.p, Program::Rpca);
  const InnerResult a = rpca_inner_solve(inst.p, w, cfg);
  const InnerResult b = rpca_inner_solve(inst.p, w, cfg);
  CHECK(a.a == b.a);
  CHECK(a.e == b.e);
  CHECK(a.residualTrace == b.residualTrace);
}

TEST_CASE("inner solves reject mismatched weights and unresolved configs") {
  const Matrix p = Matrix::Ones(3, 4);
  const SolverConfig cfg = resolved(p, Program::Rpca);
  CHECK_THROWS_AS(rpca_inner_solve(p, identity_weights(3, 4, 1.0, 4), cfg),
                  InvalidArgument);
  CHECK_THROWS_AS(rpca_inner_solve(p, identity_weights(4, 4, 1.0, 3), cfg),
                  InvalidArgument);
  CHECK_THROWS_AS(
      rpca_inner_solve(p, identity_weights(3, 4, 1.0, 3), SolverConfig{}),
      InvalidArgument);
  Matrix bad = p;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(rpca_inner_solve(bad, identity_weights(3, 4, 1.0, 3), cfg),
                  InvalidArgument);
}

TEST_CASE("lrr_inner_solve: independent subspaces give a block-diagonal "
          "representation") {
  std::mt19937_64 rng(6);
  // Three orthogonal 2-dimensional subspaces of R^12, 6 samples each.
  const Matrix q = lhr::testing::random_orthogonal(12, rng);
  Matrix p(12, 18);
  for (int s = 0; s < 3; ++s)
    p.middleCols(6 * s, 6) =
        q.middleCols(2 * s, 2) * random_matrix(2, 6, rng);
  SolverConfig cfg = resolved(p, Program::Lrr);
  WeightSet w = identity_weights(12, 18, 1.0, 18);
  const InnerResult r = lrr_inner_solve(p, w, cfg);
  double off = 0.0;
  for (int i = 0; i < 18; ++i)
    for (int j = 0; j < 18; ++j)
      if (i / 6 != j / 6)
        off += std::abs(r.a(i, j));
  CHECK(off <= 1e-3 * r.a.cwiseAbs().sum());
}

TEST_CASE("lrr_inner_solve: repeated column is self-represented") {
  std::mt19937_64 rng(7);
  const Matrix col = random_matrix(6, 1, rng);
  const Matrix p = col.replicate(1, 5);
  const SolverConfig cfg = resolved(p, Program::Lrr);
  const InnerResult r =
      lrr_inner_solve(p, identity_weights(6, 5, 1.0, 5), cfg);
  CHECK(r.e.norm() <= 1e-6 * p.norm());
  CHECK((p * r.a - p).norm() <= 1e-6 * p.norm());
}

TEST_CASE("lrr_inner_solve is feasible at termination") {
  std::mt19937_64 rng(8);
  const Matrix p = random_matrix(15, 30, rng);
  for (AStep step : {AStep::Exact, AStep::Gradient}) {
    SolverConfig cfg = resolved(p, Program::Lrr);
    cfg.aStep = step;
    cfg.innerMaxIters = 3000;
    const InnerResult r =
        lrr_inner_solve(p, identity_weights(15, 30, 1.0, 30), cfg);
    CHECK(r.status == InnerStatus::Converged);
    CHECK(r.a.rows() == 30);
    CHECK(r.a.cols() == 30);
    CHECK(r.state.c2.rows() == 30);
    CHECK(r.state.c1.rows() == 15);
    CHECK((p - p * r.a - r.e).norm() / p.norm() <= cfg.innerTol);
  }
}
