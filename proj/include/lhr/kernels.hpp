#pragma once

// Elementwise kernels on the hot path of the inner solver. Each kernel has an
// OpenMP version (namespace lhr::kernels) and a plain-loop version
// (namespace lhr::kernels::serial) kept as the reference for tests and the
// benchmark target. Both must produce bit-identical results.

#include "lhr/matcore.hpp"

namespace lhr::kernels {

/// out_ij = sgn(y_ij) * max(|y_ij| - (lambda * w_ij) * scale, 0)
void shrink(const Matrix &y, const Matrix &w, double lambda, double scale,
            Matrix &out);

/// out_ij = 1 / (|e_ij| + delta)
void inverse_abs_plus(const Matrix &e, double delta, Matrix &out);

/// sum_ij log(|m_ij| + delta), accumulated in a fixed order per column block.
double logsum(const Matrix &m, double delta);

/// sum_ij w_ij * |e_ij|
double weighted_l1(const Matrix &w, const Matrix &e);

namespace serial {
void shrink(const Matrix &y, const Matrix &w, double lambda, double scale,
            Matrix &out);
void inverse_abs_plus(const Matrix &e, double delta, Matrix &out);
double logsum(const Matrix &m, double delta);
double weighted_l1(const Matrix &w, const Matrix &e);
} // namespace serial

/// Threads used by the OpenMP kernels (1 when built without OpenMP).
int max_threads();

} // namespace lhr::kernels
