#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lhr/weights.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

using namespace lhr;
using lhr::testing::random_matrix;

namespace {

// Checks the WeightSet invariants. The eigenvalue floor depends on the matrix
// that generated the spectral weights; initial weights have none and only
// need to be positive definite.
void check_invariants(const WeightSet &w, const Matrix *generator) {
  CHECK((w.wY - w.wY.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((w.wZ - w.wZ.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  double floor = 0.0;
  if (generator)
    floor = 1.0 / std::sqrt(singular_values(*generator).maxCoeff() + w.delta2);
  Eigen::SelfAdjointEigenSolver<Matrix> ey(w.wY), ez(w.wZ);
  CHECK(ey.eigenvalues().minCoeff() > 0.0);
  CHECK(ez.eigenvalues().minCoeff() > 0.0);
  CHECK(ey.eigenvalues().minCoeff() >= floor * (1.0 - 1e-10));
  CHECK(ez.eigenvalues().minCoeff() >= floor * (1.0 - 1e-10));
  CHECK(w.wE.minCoeff() > 0.0);
  CHECK(w.wE.maxCoeff() <= 1.0 / w.delta1);
}

} // namespace

TEST_CASE("error_weights examples") {
  CHECK(error_weights(Matrix::Zero(2, 3), 0.1).isApprox(
      Matrix::Constant(2, 3, 10.0)));
  CHECK(error_weights(Matrix::Constant(1, 1, 0.9), 0.1)(0, 0) ==
        doctest::Approx(1.0));
  std::mt19937_64 rng(1);
  const Matrix e = random_matrix(7, 5, rng, 3.0);
  const Matrix w = error_weights(e, 0.25);
  for (Eigen::Index j = 0; j < e.cols(); ++j)
    for (Eigen::Index i = 0; i < e.rows(); ++i)
      CHECK(w(i, j) == 1.0 / (std::abs(e(i, j)) + 0.25));
  CHECK_THROWS_AS(error_weights(e, 0.0), InvalidArgument);
  CHECK_THROWS_AS(error_weights(e, -1.0), InvalidArgument);
}

TEST_CASE("error_weights is antitone in the magnitude") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int trial = 0; trial < 500; ++trial) {
    Matrix e(1, 2);
    e << u(rng), u(rng);
    const Matrix w = error_weights(e, 0.3);
    if (std::abs(e(0, 0)) < std::abs(e(0, 1)))
      CHECK(w(0, 0) > w(0, 1));
    else if (std::abs(e(0, 0)) > std::abs(e(0, 1)))
      CHECK(w(0, 0) < w(0, 1));
  }
}

TEST_CASE("spectral_weights examples") {
  auto [wy0, wz0] = spectral_weights(Matrix::Zero(2, 2), 4.0);
  CHECK(wy0.isApprox(0.5 * Matrix::Identity(2, 2)));
  CHECK(wz0.isApprox(0.5 * Matrix::Identity(2, 2)));

  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 3.0;
  auto [wy, wz] = spectral_weights(a, 1.0);
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 0.5;
  expected(1, 1) = 1.0;
  CHECK((wy - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((wz - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(spectral_weights(a, 0.0), InvalidArgument);
}

TEST_CASE("spectral weights are the inverse square root of the shifted Gram") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_matrix(5, 4, rng);
    const double d2 = 0.05 + 0.5 * (trial % 5);
    auto [wy, wz] = spectral_weights(a, d2);
    // U S U^T and V S V^T from Eigen's Jacobi SVD with full bases.
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vector sy = Vector::Zero(5), sz = Vector::Zero(4);
    sy.head(svd.singularValues().size()) = svd.singularValues();
    sz.head(svd.singularValues().size()) = svd.singularValues();
    const Matrix usu =
        svd.matrixU() * sy.asDiagonal() * svd.matrixU().transpose();
    const Matrix vsv =
        svd.matrixV() * sz.asDiagonal() * svd.matrixV().transpose();
    const Matrix iy = wy * wy * (usu + d2 * Matrix::Identity(5, 5));
    const Matrix iz = wz * wz * (vsv + d2 * Matrix::Identity(4, 4));
    CHECK((iy - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((iz - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((wy - oracle::inverse_sqrt_spd(usu + d2 * Matrix::Identity(5, 5)))
              .cwiseAbs()
              .maxCoeff() <= 1e-8);
  }
}

TEST_CASE("weighted matrix keeps the singular basis of its generator") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(6, 4, rng);
    const double d2 = 0.3;
    auto [wy, wz] = spectral_weights(a, d2);
    Vector got = singular_values(wy * a * wz);
    Vector sigma = singular_values(a);
    Vector expected = sigma.array() / (sigma.array() + d2);
    std::sort(got.data(), got.data() + got.size(), std::greater<>());
    std::sort(expected.data(), expected.data() + expected.size(),
              std::greater<>());
    CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("reweight and initial_weights satisfy the WeightSet invariants") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(6, 8, rng, 2.0);
    const Matrix e = random_matrix(6, 8, rng, 10.0);
    check_invariants(reweight(a, e, 0.2, 0.01), &a);
  }
  const WeightSet w0 = initial_weights(3, 5, 1.0, 0.5);
  CHECK(w0.wY.isIdentity(0.0));
  CHECK(w0.wZ.isIdentity(0.0));
  CHECK(w0.wY.rows() == 3);
  CHECK(w0.wZ.rows() == 5);
  CHECK(w0.wE.isApprox(Matrix::Constant(3, 5, 0.5)));
  check_invariants(w0, nullptr);

  const WeightSet l0 = initial_weights_lrr(3, 5, 1.0, 0.5);
  CHECK(l0.wY.rows() == 5);
  CHECK(l0.wZ.rows() == 5);
  CHECK(l0.wE.rows() == 3);
}

TEST_CASE("initial error weights equal the weight block on an all-ones error") {
  const WeightSet w0 = initial_weights(4, 3, 0.7, 0.2);
  const WeightSet step = reweight(Matrix::Zero(4, 3), Matrix::Ones(4, 3), 0.7,
                                  0.2);
  CHECK(w0.wE == step.wE);
}

TEST_CASE("weight_delta examples") {
  std::mt19937_64 rng(6);
  WeightSet w = reweight(random_matrix(4, 3, rng), random_matrix(4, 3, rng),
                         0.5, 0.5);
  CHECK(weight_delta(w, w) == 0.0);

  WeightSet doubled = w;
  doubled.wY *= 2.0;
  doubled.wZ *= 2.0;
  doubled.wE *= 2.0;
  CHECK(weight_delta(w, doubled) == doctest::Approx(1.0));
}

TEST_CASE("weight_delta matches a hand-stacked vector") {
  std::mt19937_64 rng(7);
  const WeightSet a = reweight(random_matrix(4, 3, rng),
                               random_matrix(4, 3, rng), 0.5, 0.5);
  const WeightSet b = reweight(random_matrix(4, 3, rng),
                               random_matrix(4, 3, rng), 0.5, 0.5);
  auto stack = [](const WeightSet &w) {
    std::vector<double> v;
    for (const Matrix *m : {&w.wY, &w.wZ, &w.wE})
      for (Eigen::Index i = 0; i < m->rows(); ++i)
        for (Eigen::Index j = 0; j < m->cols(); ++j)
          v.push_back((*m)(i, j));
    return v;
  };
  const auto va = stack(a), vb = stack(b);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    num += (vb[i] - va[i]) * (vb[i] - va[i]);
    den += va[i] * va[i];
  }
  CHECK(weight_delta(a, b) == doctest::Approx(std::sqrt(num / den)));

  const double e_only = (b.wE - a.wE).norm() / a.wE.norm();
  CHECK(weight_delta(a, b, WeightDeltaScope::ErrorOnly) ==
        doctest::Approx(e_only));

  WeightSet bad = b;
  bad.wE = Matrix::Ones(2, 2);
  CHECK_THROWS_AS(weight_delta(a, bad), InvalidArgument);
}
