#include "lhr/prox.hpp"

#include "lhr/kernels.hpp"

#include <cmath>

namespace lhr {

double soft_threshold(double y, double alpha) {
  const double mag = std::abs(y) - alpha;
  return mag > 0.0 ? std::copysign(mag, y) : 0.0;
}

Matrix shrink_matrix(const Matrix &m, const Matrix &alphas) {
  require_same_shape(m, alphas, "shrink_matrix");
  if (alphas.size() > 0 && alphas.minCoeff() < 0.0)
    throw InvalidArgument("shrink_matrix: negative threshold");
  Matrix out;
  kernels::shrink(m, alphas, 1.0, 1.0, out);
  return out;
}

Matrix svt(const Matrix &m, double alpha, int &rank_out) {
  if (alpha < 0.0)
    throw InvalidArgument("svt: negative threshold");
  const ThinSvd f = svd_thin(m);
  Eigen::Index keep = 0;
  while (keep < f.values.size() && f.values(keep) > alpha)
    ++keep;
  rank_out = static_cast<int>(keep);
  if (keep == 0)
    return Matrix::Zero(m.rows(), m.cols());
  const Vector shrunk = f.values.head(keep).array() - alpha;
  return f.left.leftCols(keep) * shrunk.asDiagonal() *
         f.right.leftCols(keep).transpose();
}

Matrix svt(const Matrix &m, double alpha) {
  int rank = 0;
  return svt(m, alpha, rank);
}

} // namespace lhr
