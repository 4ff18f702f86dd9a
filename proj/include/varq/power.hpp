#pragma once

// Monte Carlo power of the variance-quality metrics under lognormal variance
// noise, inversion of power curves into sample complexities, and pairwise
// relative efficiency e12 = N2 / N1.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "varq/metrics.hpp"
#include "varq/simulator.hpp"

namespace varq {

struct PowerPoint {
  double theta = 0.0;
  std::size_t n_tests = 0;
  double power = 0.0;
  std::size_t trials = 0;
  std::size_t rejections = 0;
  // Batches whose report could not be formed (zero standard error); counted
  // as non-rejections.
  std::size_t degenerate = 0;
  MetricKind metric = MetricKind::Fpr;

  bool operator==(const PowerPoint&) const = default;
};

struct PowerCurve {
  double theta = 0.0;
  MetricKind metric = MetricKind::Fpr;
  std::vector<PowerPoint> points;  // strictly increasing n_tests

  bool operator==(const PowerCurve&) const = default;
};

enum class Interpolation { FirstCrossing, Isotonic };

std::string to_string(Interpolation mode);
Interpolation parse_interpolation(const std::string& name);

struct SampleComplexityResult {
  MetricKind metric = MetricKind::Fpr;
  double theta = 0.0;
  double target_power = 0.0;
  std::optional<double> n_required;  // nullopt: NOT_REACHED
  bool interpolated = false;
};

struct EfficiencyEntry {
  MetricKind metric_1 = MetricKind::Fpr;
  MetricKind metric_2 = MetricKind::Fpr;
  double theta = 0.0;
  double target_power = 0.0;
  std::optional<double> e12;  // nullopt: UNDEFINED
};

/// Stream id of one trial in sweep cell (theta_index, n_index).
constexpr std::uint64_t trial_stream_id(std::uint64_t theta_index, std::uint64_t n_index,
                                        std::uint64_t trial) {
  return (theta_index << 48) | (n_index << 32) | trial;
}

/// Runs `trials` batches of n_tests A/A tests at noise theta and evaluates
/// every metric in `metrics` on the same batches. Trial k of the cell reads
/// stream trial_stream_id(theta_index, n_index, k).
std::vector<PowerPoint> estimate_power_paired(double theta, std::size_t n_tests, std::size_t trials,
                                              std::span<const MetricKind> metrics,
                                              const ExperimentConfig& base, std::uint64_t seed,
                                              unsigned workers = 1, std::uint64_t theta_index = 0,
                                              std::uint64_t n_index = 0);

PowerPoint estimate_power(double theta, std::size_t n_tests, std::size_t trials, MetricKind metric,
                          const ExperimentConfig& base, std::uint64_t seed, unsigned workers = 1);

/// Pool-adjacent-violators fit (equal weights) giving the closest
/// nondecreasing sequence in least squares.
std::vector<double> isotonic_fit(std::span<const double> values);

SampleComplexityResult sample_complexity(const PowerCurve& curve, double target_power,
                                         Interpolation mode = Interpolation::FirstCrossing);

EfficiencyEntry relative_efficiency(const PowerCurve& curve_1, const PowerCurve& curve_2,
                                    double target_power,
                                    Interpolation mode = Interpolation::FirstCrossing);

/// `count` integers from lo to hi, geometric spacing, rounded to nearest.
std::vector<std::size_t> log_spaced_grid(std::size_t lo, std::size_t hi, std::size_t count);

struct SweepSpec {
  std::vector<double> thetas{0.1, 0.2, 0.3, 0.4};
  std::vector<std::size_t> n_grid = log_spaced_grid(100, 10000, 30);
  std::size_t trials = 500;
  std::vector<MetricKind> metrics{MetricKind::Fpr, MetricKind::AvgT2, MetricKind::Kurtosis};

  void validate() const;
  bool operator==(const SweepSpec&) const = default;
};

struct SweepResult {
  std::vector<PowerCurve> curves;  // theta-major, then metric in SweepSpec order
  std::size_t degenerate_batches = 0;
};

/// Full (theta, n, metric) cross product. Results are bit-identical for any
/// worker count.
SweepResult run_sweep(const SweepSpec& spec, const ExperimentConfig& base, std::uint64_t seed,
                      unsigned workers = 1);

std::vector<SampleComplexityResult> complexity_table(std::span<const PowerCurve> curves,
                                                     std::span<const double> target_powers,
                                                     Interpolation mode);

/// e12 for every ordered pair of distinct metrics sharing a theta.
std::vector<EfficiencyEntry> efficiency_table(std::span<const PowerCurve> curves,
                                              std::span<const double> target_powers,
                                              Interpolation mode);

}  // namespace varq
