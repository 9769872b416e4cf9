#pragma once

#include "lhr/admm.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lhr {

/// Observation p = aStar + eStar with known ground truth.
struct PlantedInstance {
  Matrix p;
  Matrix aStar;
  Matrix eStar;
  int rank = 0;
  double rankRate = 0.0;
  double errorRate = 0.0;
  std::uint64_t seed = 0;
};

/// X * Y^T with X rows x rank and Y cols x rank standard normal.
Matrix gen_low_rank(Eigen::Index rows, Eigen::Index cols, int rank,
                    std::uint64_t seed);

/// floor(rate * rows * cols) entries, positions uniform without replacement,
/// values uniform on [-100, 100]; zero elsewhere.
Matrix gen_sparse_errors(Eigen::Index rows, Eigen::Index cols,
                         double error_rate, std::uint64_t seed);

/// Number of corrupted entries for a given rate.
long error_count(Eigen::Index rows, Eigen::Index cols, double error_rate);

/// Rank for a rank rate: round(rate * max(rows, cols)) capped at min(rows, cols).
int rank_for_rate(Eigen::Index rows, Eigen::Index cols, double rank_rate);

PlantedInstance make_instance(Eigen::Index rows, Eigen::Index cols,
                              double rank_rate, double error_rate,
                              std::uint64_t seed);

/// Same, with an explicit rank instead of a rank rate.
PlantedInstance make_instance_with_rank(Eigen::Index rows, Eigen::Index cols,
                                        int rank, double error_rate,
                                        std::uint64_t seed);

/// ||a - aStar||_F / ||aStar||_F; 0 when both are zero, +inf when only aStar is.
double relative_error(const Matrix &a, const Matrix &a_star);

/// Deterministic child seed for a (parent, i, j, k) tuple.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t i,
                          std::uint64_t j = 0, std::uint64_t k = 0);

enum class Method { Lhr, Pcp };

std::string to_string(Method m);
Method method_from_string(const std::string &s);

inline constexpr double kFeasibleError = 0.01;

struct PhaseCell {
  double eta = 0.0;
  double xi = 0.0;
  double medianRelError = 0.0;
  bool feasible = false;
  int trials = 0;
  std::vector<double> trialErrors;
};

/// Feasibility map over (rank rate, error rate); cells are row-major in
/// (eta index, xi index).
struct PhaseGrid {
  std::vector<double> etaValues;
  std::vector<double> xiValues;
  std::vector<PhaseCell> cells;
  Method method = Method::Lhr;

  const PhaseCell &at(std::size_t eta_index, std::size_t xi_index) const {
    return cells[eta_index * xiValues.size() + xi_index];
  }
  int feasible_count() const;
};

struct PhaseScanOptions {
  Eigen::Index rows = 100;
  Eigen::Index cols = 100;
  double etaStep = 0.1;
  double xiStep = 0.1;
  int trials = 5;
  Method method = Method::Lhr;
  SolverConfig config;
  std::uint64_t seed = 0;
  /// Cells run concurrently on this many threads; 1 runs them in order.
  int workers = 1;
};

/// Runs `trials` planted instances per cell through the chosen solver and
/// marks a cell feasible when its median relative error is at most 1%.
/// Solver failures count as trials with infinite error.
PhaseGrid phase_scan(const PhaseScanOptions &opts);

/// Grid values 0, step, 2 step, ..., 1. Throws unless step divides [0, 1].
std::vector<double> grid_values(double step);

inline constexpr int kPhaseGridFormatVersion = 1;

/// "# phase-grid v1 method=<m>" then "eta,xi,median_rel_error,feasible" and
/// one row per cell.
void write_phase_grid_csv(std::ostream &out, const PhaseGrid &grid);
PhaseGrid read_phase_grid_csv(std::istream &in);

/// Median with +inf entries sorted last; empty input gives +inf.
double median(std::vector<double> values);

} // namespace lhr
