#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "varq/power.hpp"
#include "varq/simulator.hpp"

namespace varq {

std::string artifact_version();

struct RunDiagnostics {
  std::size_t degenerate_batches = 0;
  std::size_t not_reached = 0;
  std::size_t undefined_efficiency = 0;
  bool operator==(const RunDiagnostics&) const = default;
};

/// Everything needed to replay a run. Timestamps and diagnostics are
/// outputs; the rest are inputs.
struct RunManifest {
  std::string command = "sweep";
  ExperimentConfig config;
  SweepSpec sweep;
  Interpolation interpolation = Interpolation::FirstCrossing;
  std::vector<double> target_powers{0.5, 0.6, 0.7, 0.8, 0.9};
  std::string artifact_version = varq::artifact_version();
  std::string started;
  std::string finished;
  RunDiagnostics diagnostics;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunManifest& manifest);

/// Accepts either a bare manifest object or any document carrying one under
/// "manifest" (such as sweep.json). Missing fields keep their defaults;
/// unknown metric/mode names throw ValidationError.
RunManifest manifest_from_json(const nlohmann::json& j);

std::string utc_timestamp();

}  // namespace varq
