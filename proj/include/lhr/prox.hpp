#pragma once

#include "lhr/matcore.hpp"

namespace lhr {

/// sgn(y) * max(|y| - alpha, 0), the minimizer of alpha|x| + (x - y)^2 / 2.
double soft_threshold(double y, double alpha);

/// Elementwise soft-thresholding with per-entry thresholds.
/// Throws InvalidArgument on shape mismatch or a negative threshold.
Matrix shrink_matrix(const Matrix &m, const Matrix &alphas);

/// Singular value thresholding U * s_alpha(Sigma) * V^T, the minimizer of
/// alpha ||X||_* + ||X - m||_F^2 / 2. Singular values equal to alpha map to 0.
Matrix svt(const Matrix &m, double alpha);

/// svt that also reports how many singular values survived the threshold.
Matrix svt(const Matrix &m, double alpha, int &rank_out);

} // namespace lhr
