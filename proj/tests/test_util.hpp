#pragma once

#include "lhr/matcore.hpp"

#include <random>

namespace lhr::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols,
                            std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, j) = normal(rng);
  return m;
}

inline Matrix random_orthogonal(Eigen::Index n, std::mt19937_64 &rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
  return qr.householderQ();
}

} // namespace lhr::testing
