#include "lhr/report.hpp"

#include <cmath>

namespace lhr {

std::string to_string(Program p) { return p == Program::Rpca ? "rpca" : "lrr"; }

std::string to_string(AStep s) {
  return s == AStep::Exact ? "exact" : "gradient";
}

std::string to_string(WeightDeltaScope s) {
  return s == WeightDeltaScope::All ? "all" : "error_only";
}

namespace {

Json optional_value(const std::optional<double> &v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> optional_from(const Json &j, const char *key) {
  if (!j.contains(key) || j.at(key).is_null())
    return std::nullopt;
  return j.at(key).get<double>();
}

template <class T> void read_if(const Json &j, const char *key, T &out) {
  if (j.contains(key))
    out = j.at(key).get<T>();
}

} // namespace

Json config_to_json(const SolverConfig &cfg) {
  Json j;
  j["lambda"] = optional_value(cfg.lambda);
  j["delta1"] = optional_value(cfg.delta1);
  j["delta2"] = optional_value(cfg.delta2);
  j["mu0"] = optional_value(cfg.mu0);
  j["rho"] = cfg.rho;
  j["mu_max_factor"] = cfg.muMaxFactor;
  j["gamma"] = cfg.gamma.mode == GammaPolicy::Mode::Fixed
                   ? Json(cfg.gamma.value)
                   : Json("auto");
  j["a_step"] = to_string(cfg.aStep);
  j["inner_tol"] = cfg.innerTol;
  j["inner_max_iters"] = cfg.innerMaxIters;
  j["outer_tol"] = cfg.outerTol;
  j["outer_max_iters"] = cfg.outerMaxIters;
  j["warm_start"] = cfg.warmStart;
  j["stop_scope"] = to_string(cfg.stopScope);
  j["monotone_slack"] = cfg.monotoneSlack;
  return j;
}

SolverConfig config_from_json(const Json &j) {
  if (!j.is_object())
    throw InvalidArgument("solver config must be a JSON object");
  SolverConfig cfg;
  cfg.lambda = optional_from(j, "lambda");
  cfg.delta1 = optional_from(j, "delta1");
  cfg.delta2 = optional_from(j, "delta2");
  cfg.mu0 = optional_from(j, "mu0");
  read_if(j, "rho", cfg.rho);
  read_if(j, "mu_max_factor", cfg.muMaxFactor);
  if (j.contains("gamma")) {
    const Json &g = j.at("gamma");
    cfg.gamma = g.is_number() ? GammaPolicy::fixed(g.get<double>())
                              : GammaPolicy::automatic();
  }
  if (j.contains("a_step")) {
    const auto s = j.at("a_step").get<std::string>();
    if (s != "exact" && s != "gradient")
      throw InvalidArgument("a_step must be exact or gradient");
    cfg.aStep = s == "exact" ? AStep::Exact : AStep::Gradient;
  }
  read_if(j, "inner_tol", cfg.innerTol);
  read_if(j, "inner_max_iters", cfg.innerMaxIters);
  read_if(j, "outer_tol", cfg.outerTol);
  read_if(j, "outer_max_iters", cfg.outerMaxIters);
  read_if(j, "warm_start", cfg.warmStart);
  if (j.contains("stop_scope")) {
    const auto s = j.at("stop_scope").get<std::string>();
    if (s != "all" && s != "error_only")
      throw InvalidArgument("stop_scope must be all or error_only");
    cfg.stopScope =
        s == "all" ? WeightDeltaScope::All : WeightDeltaScope::ErrorOnly;
  }
  read_if(j, "monotone_slack", cfg.monotoneSlack);
  cfg.validate();
  return cfg;
}

Json result_to_json(const RecoveryResult &r, bool inner_traces) {
  Json j;
  j["schema_version"] = kResultSchemaVersion;
  j["program"] = to_string(r.program);
  j["config"] = config_to_json(r.config);
  j["converged"] = r.converged;
  j["diverged"] = r.diverged;
  j["outer_iterations"] = r.outerIterations;
  j["rank_of_a"] = r.rankOfA;
  j["card_of_e"] = r.cardOfE;
  j["objective_trace"] = r.objectiveTrace;
  j["weight_delta_trace"] = r.weightDeltaTrace;
  j["inner_iteration_counts"] = r.innerIterationCounts;
  Json statuses = Json::array();
  for (InnerStatus s : r.innerStatuses)
    statuses.push_back(to_string(s));
  j["inner_statuses"] = statuses;
  j["monotone_violations"] = r.monotoneViolations;
  j["rejected_steps"] = r.rejectedSteps;
  j["wall_time_per_outer"] = r.wallTimePerOuter;
  if (inner_traces)
    j["inner_residual_traces"] = r.innerResidualTraces;
  return j;
}

Json phase_grid_to_json(const PhaseGrid &grid) {
  Json j;
  j["format_version"] = kPhaseGridFormatVersion;
  j["method"] = to_string(grid.method);
  j["eta_values"] = grid.etaValues;
  j["xi_values"] = grid.xiValues;
  j["feasible_count"] = grid.feasible_count();
  Json cells = Json::array();
  for (const PhaseCell &c : grid.cells) {
    Json cell;
    cell["eta"] = c.eta;
    cell["xi"] = c.xi;
    // +inf (failed trials) is not representable in JSON.
    cell["median_rel_error"] = std::isfinite(c.medianRelError)
                                   ? Json(c.medianRelError)
                                   : Json(nullptr);
    cell["feasible"] = c.feasible;
    cell["trials"] = c.trials;
    cells.push_back(cell);
  }
  j["cells"] = cells;
  return j;
}

} // namespace lhr
