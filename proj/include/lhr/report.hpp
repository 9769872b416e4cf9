#pragma once

#include "lhr/cluster.hpp"
#include "lhr/mmdriver.hpp"
#include "lhr/synthbench.hpp"

#include "json.hpp"

#include <string>

namespace lhr {

using Json = nlohmann::ordered_json;

inline constexpr const char *kLibraryVersion = "0.1.0";
inline constexpr int kResultSchemaVersion = 1;

std::string to_string(Program p);
std::string to_string(AStep s);
std::string to_string(WeightDeltaScope s);

/// Every field, with unset optionals written as null.
Json config_to_json(const SolverConfig &cfg);
/// Inverse of config_to_json; missing keys keep their defaults.
SolverConfig config_from_json(const Json &j);

/// Result summary and all per-iteration traces. Inner residual traces are
/// included only on request since they dominate the size.
Json result_to_json(const RecoveryResult &r, bool inner_traces = false);

Json phase_grid_to_json(const PhaseGrid &grid);

} // namespace lhr
