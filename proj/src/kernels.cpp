#include "lhr/kernels.hpp"

#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lhr::kernels {

namespace {

inline double shrink_one(double y, double t) {
  const double mag = std::abs(y) - t;
  return mag > 0.0 ? std::copysign(mag, y) : 0.0;
}

// Reductions sum each column in storage order, then sum the column totals in
// column order, so the result does not depend on the thread count.
template <class ColumnSum>
double column_ordered_sum(Eigen::Index cols, ColumnSum column_sum,
                          bool parallel) {
  std::vector<double> partial(static_cast<std::size_t>(cols), 0.0);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < cols; ++j)
      partial[static_cast<std::size_t>(j)] = column_sum(j);
  } else {
    for (Eigen::Index j = 0; j < cols; ++j)
      partial[static_cast<std::size_t>(j)] = column_sum(j);
  }
  double total = 0.0;
  for (double p : partial)
    total += p;
  return total;
}

} // namespace

void shrink(const Matrix &y, const Matrix &w, double lambda, double scale,
            Matrix &out) {
  out.resize(y.rows(), y.cols());
  const Eigen::Index n = y.size();
  const double *py = y.data();
  const double *pw = w.data();
  double *po = out.data();
#pragma omp parallel for simd schedule(static)
  for (Eigen::Index i = 0; i < n; ++i)
    po[i] = shrink_one(py[i], (lambda * pw[i]) * scale);
}

void inverse_abs_plus(const Matrix &e, double delta, Matrix &out) {
  out.resize(e.rows(), e.cols());
  const Eigen::Index n = e.size();
  const double *pe = e.data();
  double *po = out.data();
#pragma omp parallel for simd schedule(static)
  for (Eigen::Index i = 0; i < n; ++i)
    po[i] = 1.0 / (std::abs(pe[i]) + delta);
}

double logsum(const Matrix &m, double delta) {
  return column_ordered_sum(
      m.cols(),
      [&](Eigen::Index j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
          s += std::log(std::abs(m(i, j)) + delta);
        return s;
      },
      true);
}

double weighted_l1(const Matrix &w, const Matrix &e) {
  return column_ordered_sum(
      e.cols(),
      [&](Eigen::Index j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < e.rows(); ++i)
          s += w(i, j) * std::abs(e(i, j));
        return s;
      },
      true);
}

namespace serial {

void shrink(const Matrix &y, const Matrix &w, double lambda, double scale,
            Matrix &out) {
  out.resize(y.rows(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      out(i, j) = shrink_one(y(i, j), (lambda * w(i, j)) * scale);
}

void inverse_abs_plus(const Matrix &e, double delta, Matrix &out) {
  out.resize(e.rows(), e.cols());
  for (Eigen::Index j = 0; j < e.cols(); ++j)
    for (Eigen::Index i = 0; i < e.rows(); ++i)
      out(i, j) = 1.0 / (std::abs(e(i, j)) + delta);
}

double logsum(const Matrix &m, double delta) {
  return column_ordered_sum(
      m.cols(),
      [&](Eigen::Index j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
          s += std::log(std::abs(m(i, j)) + delta);
        return s;
      },
      false);
}

double weighted_l1(const Matrix &w, const Matrix &e) {
  return column_ordered_sum(
      e.cols(),
      [&](Eigen::Index j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < e.rows(); ++i)
          s += w(i, j) * std::abs(e(i, j));
        return s;
      },
      false);
}

} // namespace serial

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

} // namespace lhr::kernels
