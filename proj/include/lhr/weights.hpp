#pragma once

#include "lhr/matcore.hpp"

#include <utility>

namespace lhr {

/// Weights of one convex surrogate: the low-rank term is ||wY * A * wZ||_*,
/// the sparse term is lambda * ||wE .* E||_1.
struct WeightSet {
  Matrix wY; ///< symmetric positive definite, rows(A) x rows(A)
  Matrix wZ; ///< symmetric positive definite, cols(A) x cols(A)
  Matrix wE; ///< entrywise in (0, 1/delta1]
  double delta1 = 0.0;
  double delta2 = 0.0;
};

/// (|e_ij| + delta1)^-1 entrywise.
Matrix error_weights(const Matrix &e, double delta1);

/// (U S U^T + delta2 I)^-1/2 and (V S V^T + delta2 I)^-1/2 from the full SVD
/// of a; the orthogonal complement of the singular basis gets delta2^-1/2.
std::pair<Matrix, Matrix> spectral_weights(const Matrix &a, double delta2);

/// Reweighting from the previous iterate (a, e).
WeightSet reweight(const Matrix &a, const Matrix &e, double delta1,
                   double delta2);

/// First-iteration weights for P = A + E with P rows x cols: identity spectral
/// weights and wE computed from an all-ones previous error.
WeightSet initial_weights(Eigen::Index rows, Eigen::Index cols, double delta1,
                          double delta2);

/// Same for P = P A + E: A is cols x cols, E is rows x cols.
WeightSet initial_weights_lrr(Eigen::Index rows, Eigen::Index cols,
                              double delta1, double delta2);

enum class WeightDeltaScope { All, ErrorOnly };

/// ||next - prev||_F / ||prev||_F over the stacked (wY, wZ, wE) entries.
double weight_delta(const WeightSet &prev, const WeightSet &next,
                    WeightDeltaScope scope = WeightDeltaScope::All);

} // namespace lhr
