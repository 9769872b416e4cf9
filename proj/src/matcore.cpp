#include "lhr/matcore.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>

namespace lhr {

namespace {

// dgesdd overwrites its input, so the matrix is taken by value.
void gesdd(Matrix work, char jobz, Matrix &u, Vector &s, Matrix &vt) {
  const lapack_int m = static_cast<lapack_int>(work.rows());
  const lapack_int n = static_cast<lapack_int>(work.cols());
  const lapack_int k = std::min(m, n);
  s.resize(k);
  if (jobz == 'A') {
    u.resize(m, m);
    vt.resize(n, n);
  } else {
    u.resize(m, k);
    vt.resize(k, n);
  }
  if (k == 0) {
    u.setIdentity();
    vt.setIdentity();
    return;
  }
  const lapack_int info = LAPACKE_dgesdd(
      LAPACK_COL_MAJOR, jobz, m, n, work.data(), m, s.data(), u.data(),
      static_cast<lapack_int>(u.rows()), vt.data(),
      static_cast<lapack_int>(vt.rows()));
  if (info > 0)
    throw SvdFailure("dgesdd did not converge (info=" + std::to_string(info) +
                     ")");
  if (info < 0)
    throw SvdFailure("dgesdd rejected argument " + std::to_string(-info));
}

} // namespace

Matrix SvdFactors::reconstruct() const {
  const Eigen::Index k = values.size();
  return left.leftCols(k) * values.asDiagonal() * right.leftCols(k).transpose();
}

SvdFactors svd_full(const Matrix &m) {
  require_finite(m, "svd_full");
  SvdFactors f;
  Matrix vt;
  gesdd(m, 'A', f.left, f.values, vt);
  f.right = vt.transpose();
  return f;
}

ThinSvd svd_thin(const Matrix &m) {
  require_finite(m, "svd_thin");
  ThinSvd f;
  Matrix vt;
  gesdd(m, 'S', f.left, f.values, vt);
  f.right = vt.transpose();
  return f;
}

Vector singular_values(const Matrix &m) {
  require_finite(m, "singular_values");
  Matrix u, vt;
  Vector s;
  gesdd(m, 'N', u, s, vt);
  return s;
}

double nuclear_norm(const Matrix &m) { return singular_values(m).sum(); }

double l1_norm(const Matrix &m) { return m.cwiseAbs().sum(); }

double fro_norm(const Matrix &m) { return m.norm(); }

double spectral_norm(const Matrix &m) {
  if (m.size() == 0)
    return 0.0;
  return singular_values(m)(0);
}

double logsum_norm(const Matrix &m, double delta) {
  if (!(delta > 0.0))
    throw InvalidArgument("logsum_norm: delta must be positive");
  return (m.array().abs() + delta).log().sum();
}

double lhr_objective(const Matrix &a, const Matrix &e, double lambda,
                     double delta1, double delta2) {
  require_same_shape(a, e, "lhr_objective");
  if (!(delta1 > 0.0) || !(delta2 > 0.0))
    throw InvalidArgument("lhr_objective: deltas must be positive");
  const Vector s = singular_values(a);
  return (s.array() + delta2).log().sum() + lambda * logsum_norm(e, delta1);
}

double lrr_objective(const Matrix &a, const Matrix &e, double lambda,
                     double delta1, double delta2) {
  if (a.rows() != a.cols() || a.cols() != e.cols())
    throw InvalidArgument("lrr_objective: a must be n x n with n = cols(e)");
  if (!(delta1 > 0.0) || !(delta2 > 0.0))
    throw InvalidArgument("lrr_objective: deltas must be positive");
  const Vector s = singular_values(a);
  return (s.array() + delta2).log().sum() + lambda * logsum_norm(e, delta1);
}

bool all_finite(const Matrix &m) { return m.allFinite(); }

void require_finite(const Matrix &m, const char *what) {
  if (!m.allFinite())
    throw InvalidArgument(std::string(what) + ": matrix has non-finite entries");
}

void require_same_shape(const Matrix &a, const Matrix &b, const char *what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument(std::string(what) + ": shape mismatch " +
                          std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
}

int numerical_rank(const Matrix &m, double rel_tol) {
  const Vector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0)
    return 0;
  const double cut = rel_tol * s(0);
  return static_cast<int>((s.array() > cut).count());
}

long cardinality(const Matrix &m, double rel_tol) {
  if (m.size() == 0)
    return 0;
  const double peak = m.cwiseAbs().maxCoeff();
  if (peak == 0.0)
    return 0;
  return static_cast<long>((m.array().abs() > rel_tol * peak).count());
}

} // namespace lhr
