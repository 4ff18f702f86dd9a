#pragma once

// Implementations behind the `varq` subcommands. The executable only parses
// flags and maps exceptions to exit codes.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "varq/manifest.hpp"
#include "varq/metrics.hpp"
#include "varq/power.hpp"

namespace varq {

enum class ExitCode : int { Ok = 0, Parse = 2, Validation = 3, Dependency = 4, Runtime = 5 };

// ---- audit -----------------------------------------------------------------

struct AuditOptions {
  double alpha = 0.1;
  double ci_level = 0.9;
  MetricSidedness sidedness;
};

struct MetricAudit {
  MetricKind metric = MetricKind::Fpr;
  std::optional<double> estimate;          // nullopt when the statistic itself is undefined
  std::optional<MetricReport<double>> report;  // nullopt when no z-test can be formed
  std::string unavailable;                 // reason, empty when report is present
};

struct AuditReport {
  std::size_t n = 0;
  std::size_t experiments = 0;  // distinct experiment ids
  AuditOptions options;
  std::vector<MetricAudit> metrics;
};

AuditReport audit_batch(const TStatBatch<double>& batch, const AuditOptions& options);
AuditReport cmd_audit(const std::filesystem::path& input, const AuditOptions& options);

nlohmann::json to_json(const AuditReport& report);
std::string render_text(const AuditReport& report);

// ---- sweep -----------------------------------------------------------------

inline const std::vector<std::string> kPowerHeader{"theta", "metric", "n", "power", "trials"};
inline const std::vector<std::string> kComplexityHeader{"metric", "theta", "target_power", "n_required"};
inline const std::vector<std::string> kEfficiencyHeader{"metric_1", "metric_2", "theta", "target_power", "e12"};

struct SweepOutputs {
  RunManifest manifest;  // with timestamps and diagnostics filled in
  SweepResult sweep;
  std::vector<SampleComplexityResult> complexity;
  std::vector<EfficiencyEntry> efficiency;
};

/// Runs the sweep described by `manifest` and writes power.csv,
/// complexity.csv, efficiency.csv, sweep.json and manifest.json to out_dir.
SweepOutputs cmd_sweep(RunManifest manifest, const std::filesystem::path& out_dir, unsigned workers);

/// CSV bodies (no manifest block) exactly as written by cmd_sweep.
std::string power_csv_body(const SweepResult& sweep);
std::string complexity_csv_body(const std::vector<SampleComplexityResult>& table);
std::string efficiency_csv_body(const std::vector<EfficiencyEntry>& table);

// ---- plotdata --------------------------------------------------------------

struct PlotDataSummary {
  std::vector<std::filesystem::path> figure1_files;  // CSV, one per theta
  std::vector<std::filesystem::path> figure2_files;  // CSV, one per theta
  std::vector<std::filesystem::path> svg_files;
  std::size_t omitted_undefined = 0;
};

/// Reads power.csv and efficiency.csv from sweep_dir and writes per-theta
/// series: figure1_theta_<theta>.csv (metric,power,n) and
/// figure2_theta_<theta>.csv (metric_1,metric_2,target_power,e12), plus SVG
/// renderings of both.
PlotDataSummary cmd_plotdata(const std::filesystem::path& sweep_dir, const std::filesystem::path& out_dir);

// ---- simulate --------------------------------------------------------------

/// Simulates config.n_tests noisy t-statistics (stream (seed, 0)) and writes
/// them as a TStatFile with the manifest in the comment block. Returns the
/// in-memory batch.
TStatBatch<double> cmd_simulate(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out, unsigned workers,
                                std::string* rendered = nullptr);

}  // namespace varq
