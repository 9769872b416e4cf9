#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lhr {

/// Dense real matrix used for observations, iterates, multipliers and weights.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Bad input: shape mismatch, non-positive regularizer, non-finite entries.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The LAPACK SVD driver did not converge.
class SvdFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSvdReconstructionTol = 1e-10;

/// Full singular value decomposition m = left * diag(values) * right^T, with
/// left m x m and right n x n orthogonal and values non-increasing.
struct SvdFactors {
  Matrix left;
  Vector values;
  Matrix right;

  /// left * Sigma * right^T with Sigma the padded rectangular diagonal.
  Matrix reconstruct() const;
};

/// Economy factors: left m x k, right n x k, k = min(m, n).
struct ThinSvd {
  Matrix left;
  Vector values;
  Matrix right;
};

SvdFactors svd_full(const Matrix &m);
ThinSvd svd_thin(const Matrix &m);
Vector singular_values(const Matrix &m);

double nuclear_norm(const Matrix &m);
double l1_norm(const Matrix &m);
double fro_norm(const Matrix &m);
/// Largest singular value.
double spectral_norm(const Matrix &m);

/// sum_ij log(|m_ij| + delta). Throws InvalidArgument for delta <= 0.
double logsum_norm(const Matrix &m, double delta);

/// Log-sum objective of a (low-rank part) and e (sparse part):
///   sum_i log(sigma_i(a) + delta2) + lambda * sum_ij log(|e_ij| + delta1).
/// Additive constants of the majorized form are dropped; only differences
/// between iterates are meaningful.
double lhr_objective(const Matrix &a, const Matrix &e, double lambda,
                     double delta1, double delta2);

/// Same sum for the self-representation program, where a is n x n and e is
/// m x n.
double lrr_objective(const Matrix &a, const Matrix &e, double lambda,
                     double delta1, double delta2);

bool all_finite(const Matrix &m);
void require_finite(const Matrix &m, const char *what);
void require_same_shape(const Matrix &a, const Matrix &b, const char *what);

/// Number of singular values above rel_tol * sigma_1.
int numerical_rank(const Matrix &m, double rel_tol = 1e-6);
/// Number of entries with |m_ij| above rel_tol * max|m|.
long cardinality(const Matrix &m, double rel_tol = 1e-6);

} // namespace lhr
