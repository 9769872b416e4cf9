#include "lhr/weights.hpp"

#include "lhr/kernels.hpp"

#include <cmath>
#include <limits>
#include <tuple>

namespace lhr {

namespace {

void require_positive(double v, const char *what) {
  if (!(v > 0.0))
    throw InvalidArgument(std::string(what) + " must be positive");
}

Matrix inverse_sqrt_shifted(const Matrix &basis, const Vector &values,
                            double delta) {
  const Eigen::Index dim = basis.cols();
  Vector scale = Vector::Constant(dim, 1.0 / std::sqrt(delta));
  for (Eigen::Index i = 0; i < values.size() && i < dim; ++i)
    scale(i) = 1.0 / std::sqrt(values(i) + delta);
  Matrix w = basis * scale.asDiagonal() * basis.transpose();
  // Symmetrize away the rounding of the triple product.
  return 0.5 * (w + w.transpose());
}

} // namespace

Matrix error_weights(const Matrix &e, double delta1) {
  require_positive(delta1, "delta1");
  Matrix w;
  kernels::inverse_abs_plus(e, delta1, w);
  return w;
}

std::pair<Matrix, Matrix> spectral_weights(const Matrix &a, double delta2) {
  require_positive(delta2, "delta2");
  const SvdFactors f = svd_full(a);
  return {inverse_sqrt_shifted(f.left, f.values, delta2),
          inverse_sqrt_shifted(f.right, f.values, delta2)};
}

WeightSet reweight(const Matrix &a, const Matrix &e, double delta1,
                   double delta2) {
  WeightSet w;
  std::tie(w.wY, w.wZ) = spectral_weights(a, delta2);
  w.wE = error_weights(e, delta1);
  w.delta1 = delta1;
  w.delta2 = delta2;
  return w;
}

WeightSet initial_weights(Eigen::Index rows, Eigen::Index cols, double delta1,
                          double delta2) {
  require_positive(delta1, "delta1");
  require_positive(delta2, "delta2");
  WeightSet w;
  w.wY = Matrix::Identity(rows, rows);
  w.wZ = Matrix::Identity(cols, cols);
  w.wE = error_weights(Matrix::Ones(rows, cols), delta1);
  w.delta1 = delta1;
  w.delta2 = delta2;
  return w;
}

WeightSet initial_weights_lrr(Eigen::Index rows, Eigen::Index cols,
                              double delta1, double delta2) {
  WeightSet w = initial_weights(rows, cols, delta1, delta2);
  w.wY = Matrix::Identity(cols, cols);
  return w;
}

double weight_delta(const WeightSet &prev, const WeightSet &next,
                    WeightDeltaScope scope) {
  require_same_shape(prev.wE, next.wE, "weight_delta(wE)");
  double diff = (next.wE - prev.wE).squaredNorm();
  double base = prev.wE.squaredNorm();
  if (scope == WeightDeltaScope::All) {
    require_same_shape(prev.wY, next.wY, "weight_delta(wY)");
    require_same_shape(prev.wZ, next.wZ, "weight_delta(wZ)");
    diff += (next.wY - prev.wY).squaredNorm() +
            (next.wZ - prev.wZ).squaredNorm();
    base += prev.wY.squaredNorm() + prev.wZ.squaredNorm();
  }
  if (base == 0.0)
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(diff / base);
}

} // namespace lhr
