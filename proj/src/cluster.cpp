#include "lhr/cluster.hpp"

#include "lhr/matrix_io.hpp"
#include "lhr/mmdriver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

namespace lhr {

Matrix affinity_from_representation(const Matrix &a) {
  if (a.rows() != a.cols())
    throw InvalidArgument("affinity_from_representation: matrix must be square");
  require_finite(a, "affinity_from_representation");
  Matrix m = 0.5 * (a.cwiseAbs() + a.transpose().cwiseAbs());
  m.diagonal().setZero();
  return m;
}

namespace {

double squared_distance(const Matrix &x, Eigen::Index row, const Matrix &c,
                        Eigen::Index center) {
  return (x.row(row) - c.row(center)).squaredNorm();
}

struct KMeansRun {
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

KMeansRun kmeans_once(const Matrix &x, int k, std::mt19937_64 &rng) {
  const Eigen::Index n = x.rows();
  Matrix centers(k, x.cols());

  // k-means++ seeding.
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = x.row(pick(rng));
  std::vector<double> nearest(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    nearest[static_cast<std::size_t>(i)] = squared_distance(x, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    Eigen::Index chosen = pick(rng);
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest[static_cast<std::size_t>(i)];
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.row(c) = x.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i)
      nearest[static_cast<std::size_t>(i)] =
          std::min(nearest[static_cast<std::size_t>(i)],
                   squared_distance(x, i, centers, c));
  }

  KMeansRun run;
  run.labels.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(x, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(x, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      inertia += best_d;
      if (run.labels[static_cast<std::size_t>(i)] != best) {
        run.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    run.inertia = inertia;
    if (!changed)
      break;
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = run.labels[static_cast<std::size_t>(i)];
      sums.row(c) += x.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    // An emptied cluster keeps its old center.
  }
  return run;
}

} // namespace

std::vector<int> kmeans(const Matrix &x, int k, int restarts,
                        std::uint64_t seed) {
  if (k < 1 || k > x.rows())
    throw InvalidArgument("kmeans: k must lie in [1, number of points]");
  if (restarts < 1)
    throw InvalidArgument("kmeans: restarts must be at least 1");
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 0x6b6du};
  std::mt19937_64 rng(seq);
  KMeansRun best;
  for (int r = 0; r < restarts; ++r) {
    KMeansRun run = kmeans_once(x, k, rng);
    if (run.inertia < best.inertia)
      best = std::move(run);
  }
  return best.labels;
}

SpectralAssignment spectral_cluster(const Matrix &affinity, int k,
                                    std::uint64_t seed) {
  const Eigen::Index n = affinity.rows();
  if (affinity.cols() != n)
    throw InvalidArgument("spectral_cluster: affinity must be square");
  require_finite(affinity, "spectral_cluster");
  if ((affinity.array() < 0.0).any())
    throw InvalidArgument("spectral_cluster: affinity must be non-negative");
  if (k < 1 || k > n)
    throw InvalidArgument("spectral_cluster: k must lie in [1, n]");

  SpectralAssignment out;
  out.labels.assign(static_cast<std::size_t>(n), 0);
  const Vector degree = affinity.rowwise().sum();
  std::vector<Eigen::Index> connected;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (degree(i) > 0.0)
      connected.push_back(i);
    else
      out.isolated.push_back(static_cast<int>(i));
  }
  if (k == 1)
    return out;
  const auto m = static_cast<Eigen::Index>(connected.size());
  if (m < k)
    throw InvalidArgument(
        "spectral_cluster: fewer connected nodes than clusters");

  Matrix lap(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) {
      const Eigen::Index i = connected[static_cast<std::size_t>(a)];
      const Eigen::Index j = connected[static_cast<std::size_t>(b)];
      lap(a, b) = (a == b ? 1.0 : 0.0) -
                  affinity(i, j) / std::sqrt(degree(i) * degree(j));
    }
  lap = 0.5 * (lap + lap.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(lap);
  if (es.info() != Eigen::Success)
    throw SvdFailure("spectral_cluster: eigen-decomposition failed");
  Matrix embed = es.eigenvectors().leftCols(k);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double norm = embed.row(r).norm();
    if (norm > 0.0)
      embed.row(r) /= norm;
  }
  const std::vector<int> labels = kmeans(embed, k, kKMeansRestarts, seed);

  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (Eigen::Index a = 0; a < m; ++a) {
    const int c = labels[static_cast<std::size_t>(a)];
    out.labels[static_cast<std::size_t>(connected[static_cast<std::size_t>(a)])] =
        c;
    ++sizes[static_cast<std::size_t>(c)];
  }
  const int largest = static_cast<int>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (int i : out.isolated)
    out.labels[static_cast<std::size_t>(i)] = largest;
  return out;
}

std::vector<int> hungarian_max(const Matrix &score) {
  const Eigen::Index n = score.rows();
  if (score.cols() != n)
    throw InvalidArgument("hungarian_max: score matrix must be square");
  // Shortest augmenting path formulation on cost = max - score, 1-based.
  const double top = n > 0 ? score.maxCoeff() : 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  const auto N = static_cast<std::size_t>(n);
  std::vector<double> u(N + 1, 0.0), v(N + 1, 0.0);
  std::vector<std::size_t> p(N + 1, 0), way(N + 1, 0);
  for (std::size_t i = 1; i <= N; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(N + 1, inf);
    std::vector<char> used(N + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= N; ++j) {
        if (used[j])
          continue;
        const double cost =
            top - score(static_cast<Eigen::Index>(i0 - 1),
                        static_cast<Eigen::Index>(j - 1));
        const double cur = cost - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= N; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> match(N, 0);
  for (std::size_t j = 1; j <= N; ++j)
    if (p[j] != 0)
      match[p[j] - 1] = static_cast<int>(j - 1);
  return match;
}

double clustering_error(const std::vector<int> &assignments,
                        const std::vector<int> &labels, int k) {
  if (assignments.size() != labels.size())
    throw InvalidArgument("clustering_error: length mismatch");
  if (k < 1)
    throw InvalidArgument("clustering_error: k must be at least 1");
  if (assignments.empty())
    return 0.0;
  Matrix confusion = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int a = assignments[i], l = labels[i];
    if (a < 0 || a >= k || l < 0 || l >= k)
      throw InvalidArgument("clustering_error: label outside [0, k)");
    confusion(a, l) += 1.0;
  }
  double matched = 0.0;
  if (k <= 8) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double total = 0.0;
      for (int c = 0; c < k; ++c)
        total += confusion(c, perm[static_cast<std::size_t>(c)]);
      matched = std::max(matched, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const std::vector<int> match = hungarian_max(confusion);
    for (int c = 0; c < k; ++c)
      matched += confusion(c, match[static_cast<std::size_t>(c)]);
  }
  return 1.0 - matched / static_cast<double>(labels.size());
}

NormalizedSeries normalize_series(const Matrix &prices, int alpha,
                                  bool drop_prefix) {
  if (alpha < 1)
    throw InvalidArgument("normalize_series: window must be at least 1");
  require_finite(prices, "normalize_series");
  const Eigen::Index rows = prices.rows();
  const Eigen::Index skip = drop_prefix ? std::min<Eigen::Index>(alpha, rows) : 0;
  NormalizedSeries out;
  out.values = Matrix::Zero(rows - skip, prices.cols());
  for (Eigen::Index j = 0; j < prices.cols(); ++j) {
    for (Eigen::Index t = skip; t < rows; ++t) {
      const Eigen::Index start = std::max<Eigen::Index>(0, t - alpha);
      const Eigen::Index len = t - start + 1;
      const auto window = prices.col(j).segment(start, len);
      const double mean = window.mean();
      const double var = (window.array() - mean).square().sum() /
                         static_cast<double>(len);
      const double sd = std::sqrt(var);
      if (sd > 0.0) {
        out.values(t - skip, j) = (prices(t, j) - mean) / sd;
      } else {
        ++out.flagged;
      }
    }
  }
  return out;
}

Matrix pca_reduce(const Matrix &points, int dims) {
  if (dims < 1 || dims > std::min(points.rows(), points.cols()))
    throw InvalidArgument("pca_reduce: dims must lie in [1, min(rows, cols)]");
  const Vector mean = points.rowwise().mean();
  const Matrix centered = points.colwise() - mean;
  const ThinSvd f = svd_thin(centered);
  return f.left.leftCols(dims).transpose() * centered;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(
        start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos)
      return cells;
    start = comma + 1;
  }
}

std::string where(std::size_t line, std::size_t col) {
  return " at line " + std::to_string(line) + ", column " +
         std::to_string(col);
}

double parse_number(std::string_view cell, std::size_t line, std::size_t col,
                    const char *what) {
  double value = 0.0;
  const char *end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty())
    throw ParseError(std::string(what) + ": missing value" + where(line, col));
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw ParseError(std::string(what) + ": bad value '" + std::string(cell) +
                     "'" + where(line, col));
  return value;
}

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9')
      return false;
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

} // namespace

StockTable read_stock_csv(std::istream &in) {
  StockTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty())
      continue;
    const auto cells = split(view);
    if (!have_header) {
      if (cells.size() < 2)
        throw ParseError("stock-csv: header needs a date column and at least "
                         "one asset" + where(line_no, 1));
      for (std::size_t c = 1; c < cells.size(); ++c) {
        if (cells[c].empty())
          throw ParseError("stock-csv: empty asset name" +
                           where(line_no, c + 1));
        table.assets.emplace_back(cells[c]);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != table.assets.size() + 1)
      throw ParseError("stock-csv: expected " +
                       std::to_string(table.assets.size() + 1) +
                       " cells, found " + std::to_string(cells.size()) +
                       where(line_no, std::min(cells.size(),
                                               table.assets.size() + 1)));
    if (!is_iso_date(cells[0]))
      throw ParseError("stock-csv: bad date '" + std::string(cells[0]) + "'" +
                       where(line_no, 1));
    table.dates.emplace_back(cells[0]);
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c)
      row.push_back(parse_number(cells[c], line_no, c + 1, "stock-csv"));
    rows.push_back(std::move(row));
  }
  if (!have_header)
    throw ParseError("stock-csv: empty input");
  if (rows.empty())
    throw ParseError("stock-csv: no price rows");
  table.prices.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.assets.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      table.prices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return table;
}

StockTable read_stock_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open " + path);
  return read_stock_csv(in);
}

LabeledDataset read_points_csv(std::istream &in, bool with_labels, int k) {
  std::vector<std::vector<double>> samples;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty())
      continue;
    const auto cells = split(view);
    if (width == 0)
      width = cells.size();
    if (cells.size() != width)
      throw ParseError("points-csv: expected " + std::to_string(width) +
                       " cells, found " + std::to_string(cells.size()) +
                       where(line_no, 1));
    const std::size_t features = with_labels ? width - 1 : width;
    if (features == 0)
      throw ParseError("points-csv: no feature columns" + where(line_no, 1));
    std::vector<double> sample;
    for (std::size_t c = 0; c < features; ++c)
      sample.push_back(parse_number(cells[c], line_no, c + 1, "points-csv"));
    if (with_labels) {
      const double l = parse_number(cells.back(), line_no, width, "points-csv");
      if (l != std::floor(l) || l < 0 || l >= k)
        throw ParseError("points-csv: label must be an integer in [0, k)" +
                         where(line_no, width));
      labels.push_back(static_cast<int>(l));
    }
    samples.push_back(std::move(sample));
  }
  if (samples.empty())
    throw ParseError("points-csv: no samples");
  LabeledDataset data;
  data.k = k;
  data.labels = std::move(labels);
  const auto dim = static_cast<Eigen::Index>(samples.front().size());
  data.points.resize(dim, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t s = 0; s < samples.size(); ++s)
    for (Eigen::Index d = 0; d < dim; ++d)
      data.points(d, static_cast<Eigen::Index>(s)) =
          samples[s][static_cast<std::size_t>(d)];
  return data;
}

LabeledDataset planted_subspaces(int subspaces, int dim, int ambient,
                                 int per_subspace, double corruption,
                                 std::uint64_t seed,
                                 std::optional<double> noise_scale) {
  if (subspaces < 1 || dim < 1 || per_subspace < 1 || dim > ambient)
    throw InvalidArgument("planted_subspaces: bad shape");
  if (!(corruption >= 0.0 && corruption <= 1.0))
    throw InvalidArgument("planted_subspaces: corruption must lie in [0, 1]");
  const double sigma =
      noise_scale ? *noise_scale : 1.0 / std::sqrt(static_cast<double>(ambient));
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidArgument("planted_subspaces: noise scale must be finite and >= 0");
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 0x5b5bu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i)
        m(i, j) = normal(rng);
    return m;
  };

  LabeledDataset data;
  data.k = subspaces;
  const Eigen::Index n = static_cast<Eigen::Index>(subspaces) * per_subspace;
  data.points.resize(ambient, n);
  for (int s = 0; s < subspaces; ++s) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(ambient, dim));
    const Matrix basis = Matrix(qr.householderQ()).leftCols(dim);
    Matrix block = basis * gaussian(dim, per_subspace);
    block.colwise().normalize();
    data.points.middleCols(static_cast<Eigen::Index>(s) * per_subspace,
                           per_subspace) = block;
    for (int i = 0; i < per_subspace; ++i)
      data.labels.push_back(s);
  }

  const long total = static_cast<long>(data.points.size());
  const long corrupt =
      static_cast<long>(std::floor(corruption * static_cast<double>(total) + 1e-9));
  std::vector<long> index(static_cast<std::size_t>(total));
  std::iota(index.begin(), index.end(), 0L);
  for (long i = 0; i < corrupt; ++i) {
    std::uniform_int_distribution<long> pick(i, total - 1);
    std::swap(index[static_cast<std::size_t>(i)],
              index[static_cast<std::size_t>(pick(rng))]);
    data.points.data()[index[static_cast<std::size_t>(i)]] +=
        sigma * normal(rng);
  }
  return data;
}

ClusterResult cluster_points(const LabeledDataset &data,
                             const ClusterPipelineOptions &opts) {
  if (opts.k < 1 || opts.k > data.points.cols())
    throw InvalidArgument("cluster_points: k must lie in [1, samples]");
  if (!data.labels.empty() &&
      data.labels.size() != static_cast<std::size_t>(data.points.cols()))
    throw InvalidArgument("cluster_points: one label per sample required");
  const RecoveryResult rep = opts.reweighted
                                 ? lhr_solve_lrr(data.points, opts.config)
                                 : lrr_baseline_solve(data.points, opts.config);
  ClusterResult out;
  out.affinity = affinity_from_representation(rep.a);
  SpectralAssignment sa = spectral_cluster(out.affinity, opts.k, opts.seed);
  out.assignments = std::move(sa.labels);
  out.isolated = std::move(sa.isolated);
  if (!data.labels.empty())
    out.errorRate = clustering_error(out.assignments, data.labels, opts.k);
  return out;
}

} // namespace lhr
