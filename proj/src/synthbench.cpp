#include "lhr/synthbench.hpp"

#include "lhr/matrix_io.hpp"
#include "lhr/mmdriver.hpp"

#include <algorithm>
#include <charconv>
#include <system_error>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace lhr {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

Matrix gen_low_rank(Eigen::Index rows, Eigen::Index cols, int rank,
                    std::uint64_t seed) {
  if (rank < 0 || rank > std::min(rows, cols))
    throw InvalidArgument("gen_low_rank: rank must lie in [0, min(rows, cols)]");
  auto engine = make_engine(seed, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(rows, rank), y(cols, rank);
  for (Eigen::Index j = 0; j < rank; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      x(i, j) = normal(engine);
  for (Eigen::Index j = 0; j < rank; ++j)
    for (Eigen::Index i = 0; i < cols; ++i)
      y(i, j) = normal(engine);
  if (rank == 0)
    return Matrix::Zero(rows, cols);
  return x * y.transpose();
}

long error_count(Eigen::Index rows, Eigen::Index cols, double error_rate) {
  if (!(error_rate >= 0.0 && error_rate <= 1.0))
    throw InvalidArgument("error rate must lie in [0, 1]");
  const double exact = error_rate * static_cast<double>(rows * cols);
  // Absorb representation error such as 0.3 * 100 = 29.999999999999996.
  return static_cast<long>(std::floor(exact + 1e-9));
}

Matrix gen_sparse_errors(Eigen::Index rows, Eigen::Index cols,
                         double error_rate, std::uint64_t seed) {
  const long count = error_count(rows, cols, error_rate);
  const long total = static_cast<long>(rows * cols);
  auto engine = make_engine(seed, 2);
  std::vector<long> positions(static_cast<std::size_t>(total));
  std::iota(positions.begin(), positions.end(), 0L);
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (long i = 0; i < count; ++i) {
    std::uniform_int_distribution<long> pick(i, total - 1);
    std::swap(positions[static_cast<std::size_t>(i)],
              positions[static_cast<std::size_t>(pick(engine))]);
  }
  std::uniform_real_distribution<double> value(-100.0, 100.0);
  Matrix e = Matrix::Zero(rows, cols);
  for (long i = 0; i < count; ++i) {
    double v = 0.0;
    while (v == 0.0)
      v = value(engine);
    e.data()[positions[static_cast<std::size_t>(i)]] = v;
  }
  return e;
}

int rank_for_rate(Eigen::Index rows, Eigen::Index cols, double rank_rate) {
  if (!(rank_rate >= 0.0 && rank_rate <= 1.0))
    throw InvalidArgument("rank rate must lie in [0, 1]");
  const long r = std::lround(rank_rate * static_cast<double>(std::max(rows, cols)));
  return static_cast<int>(std::min<long>(r, std::min(rows, cols)));
}

PlantedInstance make_instance_with_rank(Eigen::Index rows, Eigen::Index cols,
                                        int rank, double error_rate,
                                        std::uint64_t seed) {
  PlantedInstance inst;
  inst.aStar = gen_low_rank(rows, cols, rank, seed);
  inst.eStar = gen_sparse_errors(rows, cols, error_rate, seed);
  inst.p = inst.aStar + inst.eStar;
  inst.rank = rank;
  inst.rankRate =
      static_cast<double>(rank) / static_cast<double>(std::max(rows, cols));
  inst.errorRate = error_rate;
  inst.seed = seed;
  return inst;
}

PlantedInstance make_instance(Eigen::Index rows, Eigen::Index cols,
                              double rank_rate, double error_rate,
                              std::uint64_t seed) {
  PlantedInstance inst = make_instance_with_rank(
      rows, cols, rank_for_rate(rows, cols, rank_rate), error_rate, seed);
  inst.rankRate = rank_rate;
  return inst;
}

double relative_error(const Matrix &a, const Matrix &a_star) {
  require_same_shape(a, a_star, "relative_error");
  const double base = a_star.norm();
  const double diff = (a - a_star).norm();
  if (base == 0.0)
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / base;
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t i,
                          std::uint64_t j, std::uint64_t k) {
  std::uint64_t h = splitmix(parent);
  h = splitmix(h ^ i);
  h = splitmix(h ^ (j + 0x51ed27ULL));
  h = splitmix(h ^ (k + 0x2545f491ULL));
  return h;
}

std::string to_string(Method m) { return m == Method::Lhr ? "lhr" : "pcp"; }

Method method_from_string(const std::string &s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "lhr")
    return Method::Lhr;
  if (lower == "pcp")
    return Method::Pcp;
  throw InvalidArgument("unknown method '" + s + "'");
}

int PhaseGrid::feasible_count() const {
  return static_cast<int>(std::count_if(
      cells.begin(), cells.end(), [](const PhaseCell &c) { return c.feasible; }));
}

std::vector<double> grid_values(double step) {
  if (!(step > 0.0 && step <= 1.0))
    throw InvalidArgument("grid step must lie in (0, 1]");
  const double count = 1.0 / step;
  const long n = std::lround(count);
  if (std::abs(count - static_cast<double>(n)) > 1e-9)
    throw InvalidArgument("grid step must divide [0, 1]");
  std::vector<double> values;
  for (long i = 0; i <= n; ++i)
    values.push_back(static_cast<double>(i) / static_cast<double>(n));
  return values;
}

double median(std::vector<double> values) {
  if (values.empty())
    return std::numeric_limits<double>::infinity();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1)
    return values[n / 2];
  const double lo = values[n / 2 - 1], hi = values[n / 2];
  if (std::isinf(hi))
    return hi;
  return 0.5 * (lo + hi);
}

namespace {

double run_trial(const PhaseScanOptions &opts, double eta, double xi,
                 std::uint64_t seed) {
  try {
    const PlantedInstance inst =
        make_instance(opts.rows, opts.cols, eta, xi, seed);
    const RecoveryResult r = opts.method == Method::Lhr
                                 ? lhr_solve_rpca(inst.p, opts.config)
                                 : pcp_solve(inst.p, opts.config);
    if (r.diverged)
      return std::numeric_limits<double>::infinity();
    return relative_error(r.a, inst.aStar);
  } catch (const std::exception &) {
    return std::numeric_limits<double>::infinity();
  }
}

} // namespace

PhaseGrid phase_scan(const PhaseScanOptions &opts) {
  if (opts.trials < 1)
    throw InvalidArgument("phase_scan: trials must be at least 1");
  if (opts.workers < 1)
    throw InvalidArgument("phase_scan: workers must be at least 1");
  if (opts.rows < 1 || opts.cols < 1)
    throw InvalidArgument("phase_scan: matrix size must be positive");
  opts.config.validate();

  PhaseGrid grid;
  grid.method = opts.method;
  grid.etaValues = grid_values(opts.etaStep);
  grid.xiValues = grid_values(opts.xiStep);
  const std::size_t nx = grid.xiValues.size();
  const std::size_t ncells = grid.etaValues.size() * nx;
  grid.cells.resize(ncells);

  const long total = static_cast<long>(ncells);
#pragma omp parallel for schedule(dynamic, 1) num_threads(opts.workers)       \
    if (opts.workers > 1)
  for (long idx = 0; idx < total; ++idx) {
    const std::size_t ie = static_cast<std::size_t>(idx) / nx;
    const std::size_t ix = static_cast<std::size_t>(idx) % nx;
    PhaseCell cell;
    cell.eta = grid.etaValues[ie];
    cell.xi = grid.xiValues[ix];
    cell.trials = opts.trials;
    for (int t = 0; t < opts.trials; ++t)
      cell.trialErrors.push_back(run_trial(
          opts, cell.eta, cell.xi,
          derive_seed(opts.seed, ie, ix, static_cast<std::uint64_t>(t))));
    cell.medianRelError = median(cell.trialErrors);
    cell.feasible = cell.medianRelError <= kFeasibleError;
    grid.cells[static_cast<std::size_t>(idx)] = std::move(cell);
  }
  return grid;
}

void write_phase_grid_csv(std::ostream &out, const PhaseGrid &grid) {
  out << "# phase-grid v" << kPhaseGridFormatVersion
      << " method=" << to_string(grid.method) << '\n';
  out << "eta,xi,median_rel_error,feasible\n";
  for (const PhaseCell &c : grid.cells) {
    out << c.eta << ',' << c.xi << ',';
    if (std::isinf(c.medianRelError))
      out << "inf";
    else {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, c.medianRelError,
                                     std::chars_format::general, 17);
      out.write(buf, ptr - buf);
    }
    out << ',' << (c.feasible ? 1 : 0) << '\n';
  }
}

PhaseGrid read_phase_grid_csv(std::istream &in) {
  PhaseGrid grid;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# phase-grid v1", 0) != 0)
    throw ParseError("phase grid: missing or unsupported version line");
  const auto tag = line.find("method=");
  if (tag == std::string::npos)
    throw ParseError("phase grid: missing method tag");
  grid.method = method_from_string(line.substr(tag + 7));
  if (!std::getline(in, line) || line != "eta,xi,median_rel_error,feasible")
    throw ParseError("phase grid: bad header");
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    std::istringstream ss(line);
    std::string eta, xi, err, feasible;
    if (!std::getline(ss, eta, ',') || !std::getline(ss, xi, ',') ||
        !std::getline(ss, err, ',') || !std::getline(ss, feasible))
      throw ParseError("phase grid: malformed line " + std::to_string(lineno));
    auto number = [&](const std::string &cell) {
      double v = 0.0;
      const char *end = cell.data() + cell.size();
      const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (ec != std::errc() || ptr != end)
        throw ParseError("phase grid: bad number '" + cell + "' on line " +
                         std::to_string(lineno));
      return v;
    };
    if (feasible != "0" && feasible != "1")
      throw ParseError("phase grid: feasible flag must be 0 or 1 on line " +
                       std::to_string(lineno));
    PhaseCell c;
    c.eta = number(eta);
    c.xi = number(xi);
    c.medianRelError =
        err == "inf" ? std::numeric_limits<double>::infinity() : number(err);
    c.feasible = feasible == "1";
    grid.cells.push_back(c);
    if (std::find(grid.etaValues.begin(), grid.etaValues.end(), c.eta) ==
        grid.etaValues.end())
      grid.etaValues.push_back(c.eta);
    if (std::find(grid.xiValues.begin(), grid.xiValues.end(), c.xi) ==
        grid.xiValues.end())
      grid.xiValues.push_back(c.xi);
  }
  return grid;
}

} // namespace lhr
