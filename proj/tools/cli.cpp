#include "cli.hpp"

#include "lhr/cluster.hpp"
#include "lhr/matrix_io.hpp"
#include "lhr/mmdriver.hpp"
#include "lhr/report.hpp"
#include "lhr/synthbench.hpp"

#include "CLI11.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace lhr::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string &bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char *hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

/// Bad flags, unreadable inputs, failed validation: exit code 1.
struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string matrix_text(const Matrix &m) {
  std::ostringstream ss;
  write_matrix_csv(ss, m);
  return ss.str();
}

// Outputs are held in memory until the command has finished; commit() then
// writes them as temporaries and renames them, so a failure leaves nothing
// behind in the output directory.
class OutputSet {
public:
  void add(const std::string &name, std::string content) {
    files_.emplace_back(name, std::move(content));
  }

  Json digests() const {
    Json list = Json::array();
    for (const auto &[name, content] : files_)
      list.push_back({{"path", name}, {"sha256", sha256_hex(content)}});
    return list;
  }

  void commit(const fs::path &dir) const {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
      throw Failure("cannot create output directory " + dir.string());
    std::vector<fs::path> written;
    try {
      for (const auto &[name, content] : files_) {
        const fs::path tmp = dir / (name + ".partial");
        std::ofstream out(tmp, std::ios::binary);
        written.push_back(tmp);
        out << content;
        out.close();
        if (!out)
          throw Failure("cannot write " + tmp.string());
      }
      for (const auto &[name, content] : files_)
        fs::rename(dir / (name + ".partial"), dir / name);
    } catch (...) {
      for (const auto &p : written)
        fs::remove(p, ec);
      throw;
    }
  }

private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Input {
  std::string path;
  std::string bytes;
};

Input load_input(const std::string &path) { return {path, read_file(path)}; }

Json input_digests(const std::vector<Input> &inputs) {
  Json list = Json::array();
  for (const Input &in : inputs) {
    std::error_code ec;
    const fs::path abs = fs::absolute(in.path, ec);
    list.push_back({{"path", ec ? in.path : abs.string()},
                    {"sha256", sha256_hex(in.bytes)}});
  }
  return list;
}

Matrix parse_matrix(const Input &in) {
  std::istringstream ss(in.bytes);
  try {
    return read_matrix_csv(ss);
  } catch (const ParseError &e) {
    throw Failure(in.path + ": " + e.what());
  }
}

// Flags shared by every solver-backed command.
struct SolverFlags {
  std::optional<double> lambda, delta1, delta2, mu0, rho, gamma, outerTol,
      innerTol;
  std::optional<int> outerMax, innerMax;
  std::string aStep;

  void attach(CLI::App *app) {
    app->add_option("--lambda", lambda, "sparse-term weight");
    app->add_option("--delta1", delta1, "log-sum offset for the error term");
    app->add_option("--delta2", delta2, "log-sum offset for singular values");
    app->add_option("--mu0", mu0, "initial penalty");
    app->add_option("--rho", rho, "penalty growth factor (> 1)");
    app->add_option("--gamma", gamma,
                    "fixed A-step size; selects the gradient A-step");
    app->add_option("--a-step", aStep, "A-update: exact or gradient")
        ->check(CLI::IsMember({"exact", "gradient"}));
    app->add_option("--outer-tol", outerTol, "outer stopping tolerance");
    app->add_option("--outer-max", outerMax, "outer iteration cap");
    app->add_option("--inner-tol", innerTol, "inner stopping tolerance");
    app->add_option("--inner-max", innerMax, "inner iteration cap");
  }

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.lambda = lambda;
    cfg.delta1 = delta1;
    cfg.delta2 = delta2;
    cfg.mu0 = mu0;
    if (rho)
      cfg.rho = *rho;
    if (gamma) {
      cfg.gamma = GammaPolicy::fixed(*gamma);
      cfg.aStep = AStep::Gradient;
    }
    if (aStep == "gradient")
      cfg.aStep = AStep::Gradient;
    else if (aStep == "exact")
      cfg.aStep = AStep::Exact;
    if (outerTol)
      cfg.outerTol = *outerTol;
    if (innerTol)
      cfg.innerTol = *innerTol;
    if (outerMax)
      cfg.outerMaxIters = *outerMax;
    if (innerMax)
      cfg.innerMaxIters = *innerMax;
    cfg.validate();
    return cfg;
  }
};

struct Common {
  std::string outDir;
  std::uint64_t seed = 0;

  void attach(CLI::App *app, bool seed_option = true) {
    app->add_option("--out-dir", outDir, "directory for all outputs")
        ->required();
    if (seed_option)
      app->add_option("--seed", seed, "random seed");
  }
};

// Everything a command produced, plus what the manifest needs to know.
struct Run {
  OutputSet outputs;
  std::vector<Input> inputs;
  Json config = nullptr;
  int exitCode = kOk;
  std::string summary;
};

void finish(const std::string &command, const std::vector<std::string> &args,
            const Common &common, Run &run, double seconds) {
  Json manifest;
  manifest["schema_version"] = kResultSchemaVersion;
  manifest["command"] = command;
  manifest["library_version"] = kLibraryVersion;
  // Arguments without --out-dir, so the run can be replayed elsewhere.
  Json argv = Json::array();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out-dir") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out-dir=", 0) == 0)
      continue;
    argv.push_back(args[i]);
  }
  manifest["arguments"] = argv;
  manifest["seed"] = common.seed;
  manifest["config"] = run.config;
  manifest["inputs"] = input_digests(run.inputs);
  manifest["outputs"] = run.outputs.digests();
  manifest["wall_time_seconds"] = seconds;
  run.outputs.add("manifest.json", manifest.dump(2) + "\n");
  run.outputs.commit(common.outDir);
}

// --- recover --------------------------------------------------------------

struct RecoverArgs {
  std::string input, truth, method = "lhr";
  SolverFlags solver;
  Common common;
};

Run do_recover(const RecoverArgs &a) {
  Run run;
  run.inputs.push_back(load_input(a.input));
  const Matrix p = parse_matrix(run.inputs.back());
  std::optional<Matrix> truth;
  if (!a.truth.empty()) {
    run.inputs.push_back(load_input(a.truth));
    truth = parse_matrix(run.inputs.back());
    if (truth->rows() != p.rows() || truth->cols() != p.cols())
      throw Failure("--truth shape does not match --input");
  }
  const SolverConfig cfg = a.solver.config();
  const RecoveryResult r =
      a.method == "pcp" ? pcp_solve(p, cfg) : lhr_solve_rpca(p, cfg);
  Json result = result_to_json(r);
  result["method"] = a.method;
  if (truth)
    result["rel_error"] = relative_error(r.a, *truth);
  run.config = config_to_json(r.config);
  run.outputs.add("A.csv", matrix_text(r.a));
  run.outputs.add("E.csv", matrix_text(r.e));
  run.outputs.add("result.json", result.dump(2) + "\n");
  run.exitCode = r.converged ? kOk : kNotConverged;
  std::ostringstream msg;
  msg << a.method << ": " << (r.converged ? "converged" : "not converged")
      << " after " << r.outerIterations << " outer iteration(s), rank "
      << r.rankOfA << ", card " << r.cardOfE;
  if (truth)
    msg << ", rel_error " << relative_error(r.a, *truth);
  run.summary = msg.str();
  return run;
}

// --- lrr ------------------------------------------------------------------

struct LrrArgs {
  std::string input, method = "lhr";
  SolverFlags solver;
  Common common;
};

Run do_lrr(const LrrArgs &a) {
  Run run;
  run.inputs.push_back(load_input(a.input));
  const Matrix p = parse_matrix(run.inputs.back());
  const SolverConfig cfg = a.solver.config();
  const RecoveryResult r =
      a.method == "lrr" ? lrr_baseline_solve(p, cfg) : lhr_solve_lrr(p, cfg);
  Json result = result_to_json(r);
  result["method"] = a.method;
  const double norm = p.norm();
  const double residual = (p - p * r.a - r.e).norm() / (norm > 0 ? norm : 1.0);
  result["residual"] = residual;
  run.config = config_to_json(r.config);
  run.outputs.add("A.csv", matrix_text(r.a));
  run.outputs.add("E.csv", matrix_text(r.e));
  run.outputs.add("result.json", result.dump(2) + "\n");
  run.exitCode = r.converged ? kOk : kNotConverged;
  std::ostringstream msg;
  msg << a.method << ": " << (r.converged ? "converged" : "not converged")
      << ", rank " << r.rankOfA << ", residual " << residual;
  run.summary = msg.str();
  return run;
}

// --- phase ----------------------------------------------------------------

struct PhaseArgs {
  std::string method = "both";
  int size = 100;
  double etaStep = 0.1, xiStep = 0.1;
  int trials = 5;
  std::optional<int> workers;
  SolverFlags solver;
  Common common;
};

int resolve_workers(const std::optional<int> &flag) {
  if (flag)
    return *flag;
  if (const char *env = std::getenv("LHR_NUM_WORKERS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw Failure("LHR_NUM_WORKERS must be a positive integer");
    return static_cast<int>(v);
  }
  return 1;
}

Run do_phase(const PhaseArgs &a) {
  if (!(a.etaStep > 0.0) || !(a.xiStep > 0.0))
    throw Failure("--eta-step and --xi-step must be positive");
  if (a.size < 1 || a.trials < 1)
    throw Failure("--size and --trials must be at least 1");
  const int workers = resolve_workers(a.workers);
  if (workers < 1)
    throw Failure("--workers must be at least 1");
  // Validate the grid before any work is done.
  grid_values(a.etaStep);
  grid_values(a.xiStep);

  Run run;
  PhaseScanOptions opts;
  opts.rows = opts.cols = a.size;
  opts.etaStep = a.etaStep;
  opts.xiStep = a.xiStep;
  opts.trials = a.trials;
  opts.config = a.solver.config();
  opts.seed = a.common.seed;
  opts.workers = workers;
  run.config = config_to_json(opts.config);

  std::vector<Method> methods;
  if (a.method == "lhr" || a.method == "both")
    methods.push_back(Method::Lhr);
  if (a.method == "pcp" || a.method == "both")
    methods.push_back(Method::Pcp);
  Json grids = Json::object();
  std::ostringstream msg;
  for (Method m : methods) {
    opts.method = m;
    const PhaseGrid grid = phase_scan(opts);
    std::ostringstream csv;
    write_phase_grid_csv(csv, grid);
    run.outputs.add("phase_" + to_string(m) + ".csv", csv.str());
    grids[to_string(m)] = phase_grid_to_json(grid);
    msg << to_string(m) << ": " << grid.feasible_count() << " feasible of "
        << grid.cells.size() << " cells\n";
  }
  run.outputs.add("phase.json", grids.dump(2) + "\n");
  run.summary = msg.str();
  if (!run.summary.empty())
    run.summary.pop_back();
  return run;
}

// --- synth ----------------------------------------------------------------

struct SynthArgs {
  int rows = 0, cols = 0, rank = 0;
  double errorRate = 0.0;
  Common common;
};

Run do_synth(const SynthArgs &a) {
  if (a.rows < 1 || a.cols < 1)
    throw Failure("--rows and --cols must be at least 1");
  Run run;
  const PlantedInstance inst =
      make_instance_with_rank(a.rows, a.cols, a.rank, a.errorRate, a.common.seed);
  run.outputs.add("P.csv", matrix_text(inst.p));
  run.outputs.add("Astar.csv", matrix_text(inst.aStar));
  run.outputs.add("Estar.csv", matrix_text(inst.eStar));
  std::ostringstream msg;
  msg << "synth: " << a.rows << "x" << a.cols << ", rank " << inst.rank
      << ", " << cardinality(inst.eStar) << " corrupted entries";
  run.summary = msg.str();
  return run;
}

// --- subspaces ------------------------------------------------------------

struct SubspaceArgs {
  int subspaces = 5, dim = 5, ambient = 50, perSubspace = 20;
  double corruption = 0.1;
  std::optional<double> noise;
  Common common;
};

Run do_subspaces(const SubspaceArgs &a) {
  Run run;
  const LabeledDataset d =
      planted_subspaces(a.subspaces, a.dim, a.ambient, a.perSubspace,
                        a.corruption, a.common.seed, a.noise);
  // One sample per row, label last.
  Matrix rows(d.points.cols(), d.points.rows() + 1);
  rows.leftCols(d.points.rows()) = d.points.transpose();
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    rows(i, d.points.rows()) = d.labels[static_cast<std::size_t>(i)];
  run.outputs.add("points.csv", matrix_text(rows));
  run.summary = "subspaces: " + std::to_string(d.points.cols()) +
                " samples in R^" + std::to_string(d.points.rows());
  return run;
}

// --- cluster --------------------------------------------------------------

struct ClusterArgs {
  std::string input, labels, method = "lhr";
  int k = 0;
  int window = kDefaultWindow;
  std::optional<int> dims;
  bool noNormalize = false, labeled = false, dropPrefix = false;
  SolverFlags solver;
  Common common;
};

std::vector<int> read_label_file(const Input &in, int k) {
  std::vector<int> labels;
  std::istringstream ss(in.bytes);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    char *end = nullptr;
    const long v = std::strtol(line.c_str(), &end, 10);
    if (end == line.c_str() || *end != '\0' || v < 0 || v >= k)
      throw Failure(in.path + ": label must be an integer in [0, k) at line " +
                    std::to_string(line_no));
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

Run do_cluster(const ClusterArgs &a) {
  if (a.k < 1)
    throw Failure("--k must be at least 1");
  Run run;
  run.inputs.push_back(load_input(a.input));
  LabeledDataset data;
  std::ostringstream msg;
  try {
    std::istringstream ss(run.inputs.back().bytes);
    if (a.noNormalize) {
      data = read_points_csv(ss, a.labeled, a.k);
    } else {
      const StockTable table = read_stock_csv(ss);
      const NormalizedSeries norm =
          normalize_series(table.prices, a.window, a.dropPrefix);
      data.points = norm.values;
      if (norm.flagged > 0)
        msg << "cluster: " << norm.flagged
            << " constant-window entries set to 0\n";
    }
  } catch (const ParseError &e) {
    throw Failure(a.input + ": " + e.what());
  }
  data.k = a.k;
  if (!a.labels.empty()) {
    run.inputs.push_back(load_input(a.labels));
    data.labels = read_label_file(run.inputs.back(), a.k);
  }
  if (!data.labels.empty() &&
      data.labels.size() != static_cast<std::size_t>(data.points.cols()))
    throw Failure("label count does not match the number of samples");

  const int dims = a.dims ? *a.dims : (a.noNormalize ? 0 : kDefaultPcaDims);
  if (dims > 0)
    data.points = pca_reduce(data.points, dims);

  ClusterPipelineOptions opts;
  opts.k = a.k;
  opts.reweighted = a.method == "lhr";
  opts.config = a.solver.config();
  opts.seed = a.common.seed;
  const ClusterResult cr = cluster_points(data, opts);
  run.config = config_to_json(opts.config);

  std::ostringstream assign;
  assign << "sample,cluster\n";
  for (std::size_t i = 0; i < cr.assignments.size(); ++i)
    assign << i << ',' << cr.assignments[i] << '\n';
  run.outputs.add("assignments.csv", assign.str());
  Json result;
  result["method"] = a.method;
  result["k"] = a.k;
  result["samples"] = cr.assignments.size();
  result["pca_dims"] = dims;
  result["error_rate"] = cr.errorRate ? Json(*cr.errorRate) : Json(nullptr);
  result["isolated_nodes"] = cr.isolated;
  run.outputs.add("result.json", result.dump(2) + "\n");
  msg << "cluster: " << cr.assignments.size() << " samples into " << a.k
      << " clusters";
  if (cr.errorRate)
    msg << ", error " << *cr.errorRate;
  run.summary = msg.str();
  return run;
}

void add_method(CLI::App *app, std::string &target,
                std::vector<std::string> choices, const char *help) {
  app->add_option("--method", target, help)
      ->check(CLI::IsMember(std::move(choices)));
}

int dispatch(const std::vector<std::string> &args, std::ostream &out,
             std::ostream &err, int depth);

struct ReplayArgs {
  std::string manifest, outDir;
};

int do_replay(const ReplayArgs &a, std::ostream &out, std::ostream &err,
              int depth) {
  if (depth > 0)
    throw Failure("a replay manifest cannot itself be a replay");
  Json m;
  try {
    m = Json::parse(read_file(a.manifest));
  } catch (const Json::parse_error &e) {
    throw Failure(a.manifest + ": " + e.what());
  }
  if (!m.contains("arguments") || !m.at("arguments").is_array())
    throw Failure(a.manifest + ": missing arguments");
  for (const Json &in : m.value("inputs", Json::array())) {
    const std::string path = in.at("path").get<std::string>();
    if (sha256_hex(read_file(path)) != in.at("sha256").get<std::string>())
      throw Failure("input " + path + " changed since the manifest was written");
  }
  std::vector<std::string> argv;
  for (const Json &s : m.at("arguments"))
    argv.push_back(s.get<std::string>());
  argv.push_back("--out-dir");
  argv.push_back(a.outDir);
  return dispatch(argv, out, err, depth + 1);
}

int dispatch(const std::vector<std::string> &args, std::ostream &out,
             std::ostream &err, int depth) {
  CLI::App app{"Low-rank plus sparse recovery by log-sum heuristics", "lhr"};
  app.require_subcommand(1);

  RecoverArgs recover;
  auto *rec = app.add_subcommand("recover", "recover P = A + E");
  rec->add_option("--input", recover.input, "observation matrix-csv")
      ->required();
  rec->add_option("--truth", recover.truth,
                  "ground-truth low-rank matrix-csv for scoring");
  add_method(rec, recover.method, {"lhr", "pcp"}, "lhr or pcp");
  recover.solver.attach(rec);
  recover.common.attach(rec);

  LrrArgs lrr;
  auto *lr = app.add_subcommand("lrr", "self-representation P = P A + E");
  lr->add_option("--input", lrr.input, "data matrix-csv, samples as columns")
      ->required();
  add_method(lr, lrr.method, {"lhr", "lrr"}, "lhr or lrr (identity weights)");
  lrr.solver.attach(lr);
  lrr.common.attach(lr);

  PhaseArgs phase;
  auto *ph = app.add_subcommand("phase", "feasible-region scan");
  add_method(ph, phase.method, {"lhr", "pcp", "both"}, "lhr, pcp or both");
  ph->add_option("--size", phase.size, "matrix side length");
  ph->add_option("--eta-step", phase.etaStep, "rank-rate step");
  ph->add_option("--xi-step", phase.xiStep, "error-rate step");
  ph->add_option("--trials", phase.trials, "instances per cell");
  ph->add_option("--workers", phase.workers,
                 "cell-level threads (default $LHR_NUM_WORKERS or 1)");
  phase.solver.attach(ph);
  phase.common.attach(ph);

  SynthArgs synth;
  auto *sy = app.add_subcommand("synth", "planted low-rank plus sparse instance");
  sy->add_option("--rows", synth.rows)->required();
  sy->add_option("--cols", synth.cols)->required();
  sy->add_option("--rank", synth.rank)->required();
  sy->add_option("--error-rate", synth.errorRate)->required();
  synth.common.attach(sy);

  SubspaceArgs sub;
  auto *ss = app.add_subcommand("subspaces", "planted union-of-subspaces points");
  ss->add_option("--subspaces", sub.subspaces);
  ss->add_option("--dim", sub.dim);
  ss->add_option("--ambient", sub.ambient);
  ss->add_option("--per-subspace", sub.perSubspace);
  ss->add_option("--corruption", sub.corruption, "fraction of corrupted entries");
  ss->add_option("--noise", sub.noise, "std of the corruption (default 1/sqrt(ambient))");
  sub.common.attach(ss);

  ClusterArgs cluster;
  auto *cl = app.add_subcommand("cluster", "subspace clustering");
  cl->add_option("--input", cluster.input,
                 "stock CSV, or points CSV with --no-normalize")
      ->required();
  cl->add_option("--k", cluster.k, "number of clusters")->required();
  cl->add_option("--window", cluster.window, "normalization window");
  cl->add_option("--dims", cluster.dims,
                 "PCA dimensions (default 5 for stock input, none for points; "
                 "0 disables)");
  cl->add_flag("--no-normalize", cluster.noNormalize,
               "input is a points CSV (one sample per row)");
  cl->add_flag("--labeled", cluster.labeled,
               "points CSV carries an integer label in its last column");
  cl->add_flag("--drop-prefix", cluster.dropPrefix,
               "drop the rows whose window is truncated");
  cl->add_option("--labels", cluster.labels, "file with one label per sample");
  add_method(cl, cluster.method, {"lhr", "lrr"}, "lhr or lrr (identity weights)");
  cluster.solver.attach(cl);
  cluster.common.attach(cl);

  ReplayArgs replay;
  auto *rp = app.add_subcommand("replay", "re-run a command from its manifest");
  rp->add_option("--manifest", replay.manifest)->required();
  rp->add_option("--out-dir", replay.outDir)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kFailure;
  }

  const auto start = std::chrono::steady_clock::now();
  auto seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  };
  auto complete = [&](const std::string &name, const Common &common,
                      Run run) {
    finish(name, args, common, run, seconds());
    if (!run.summary.empty())
      out << run.summary << '\n';
    return run.exitCode;
  };

  if (*rec)
    return complete("recover", recover.common, do_recover(recover));
  if (*lr)
    return complete("lrr", lrr.common, do_lrr(lrr));
  if (*ph)
    return complete("phase", phase.common, do_phase(phase));
  if (*sy)
    return complete("synth", synth.common, do_synth(synth));
  if (*ss)
    return complete("subspaces", sub.common, do_subspaces(sub));
  if (*cl)
    return complete("cluster", cluster.common, do_cluster(cluster));
  return do_replay(replay, out, err, depth);
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
  try {
    return dispatch(args, out, err, 0);
  } catch (const std::exception &e) {
    err << "lhr: " << e.what() << '\n';
    return kFailure;
  }
}

} // namespace lhr::cli
