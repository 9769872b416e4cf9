#pragma once

#include "lhr/admm.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lhr {

/// Samples are the columns of `points`. `labels` is empty when unknown.
struct LabeledDataset {
  Matrix points;
  std::vector<int> labels;
  int k = 0;
};

struct SpectralAssignment {
  std::vector<int> labels;
  /// Zero-degree nodes; they carry no affinity and are attached to the
  /// largest cluster found among the connected nodes.
  std::vector<int> isolated;
};

struct ClusterResult {
  std::vector<int> assignments;
  std::optional<double> errorRate;
  Matrix affinity;
  std::vector<int> isolated;
};

/// (|a| + |a^T|) / 2 with the diagonal zeroed.
Matrix affinity_from_representation(const Matrix &a);

/// Normalized-cut embedding (bottom-k eigenvectors of I - D^-1/2 W D^-1/2,
/// rows scaled to unit length) followed by k-means with 20 seeded restarts.
SpectralAssignment spectral_cluster(const Matrix &affinity, int k,
                                    std::uint64_t seed);

inline constexpr int kKMeansRestarts = 20;

/// Lloyd's k-means on the rows of `x` with k-means++ seeding; returns the
/// labels of the restart with the smallest inertia.
std::vector<int> kmeans(const Matrix &x, int k, int restarts,
                        std::uint64_t seed);

/// 1 - best matched fraction over relabelings of `assignments`. Exhaustive
/// over permutations for k <= 8, Hungarian assignment above.
double clustering_error(const std::vector<int> &assignments,
                        const std::vector<int> &labels, int k);

/// Maximum-weight perfect matching on a square score matrix; result[i] is the
/// column matched to row i.
std::vector<int> hungarian_max(const Matrix &score);

struct NormalizedSeries {
  Matrix values;
  /// Entries whose window had zero spread; they are set to 0.
  long flagged = 0;
};

/// Per column: (p(t) - mean) / std over rows [t - alpha, t], truncated at the
/// first row, population std. With drop_prefix the first alpha rows (whose
/// windows are short) are removed from the output.
NormalizedSeries normalize_series(const Matrix &prices, int alpha,
                                  bool drop_prefix = false);

inline constexpr int kDefaultWindow = 20;
inline constexpr int kDefaultPcaDims = 5;

/// Subtracts the mean column and projects onto the top `dims` left singular
/// vectors. Output is dims x cols.
Matrix pca_reduce(const Matrix &points, int dims = kDefaultPcaDims);

/// Price table: rows are dates, columns are assets.
struct StockTable {
  std::vector<std::string> assets;
  std::vector<std::string> dates;
  Matrix prices;
};

/// Header "date,<asset>,<asset>,...", then one row per YYYY-MM-DD date.
/// Throws ParseError with line/column on malformed or missing cells.
StockTable read_stock_csv(std::istream &in);
StockTable read_stock_csv(const std::string &path);

/// One column per sample; optional trailing integer label column when
/// `with_labels` is set. Rows of the file are samples.
LabeledDataset read_points_csv(std::istream &in, bool with_labels, int k);

/// `subspaces` random subspaces of dimension `dim` in R^ambient with
/// `per_subspace` unit-norm samples each; a `corruption` fraction of entries
/// gets additive Gaussian noise of standard deviation `noise_scale`, by
/// default 1/sqrt(ambient), the RMS of a unit-norm sample's entries.
LabeledDataset planted_subspaces(int subspaces, int dim, int ambient,
                                 int per_subspace, double corruption,
                                 std::uint64_t seed,
                                 std::optional<double> noise_scale = {});

struct ClusterPipelineOptions {
  int k = 0;
  /// false runs the identity-weight baseline instead of the reweighted solve.
  bool reweighted = true;
  SolverConfig config;
  std::uint64_t seed = 0;
};

/// Representation solve, affinity, spectral clustering, and the error rate
/// when the dataset has labels.
ClusterResult cluster_points(const LabeledDataset &data,
                             const ClusterPipelineOptions &opts);

} // namespace lhr
