#pragma once

// A/A-test simulation with multiplicative lognormal noise on the variance
// estimates.
//
// Randomness layout: a batch is driven by one RandomStream. Test j reads a
// fixed, j-determined window of words starting at the stream's position, so
// any partition of tests over workers yields the same batch.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>

#include "varq/metrics.hpp"
#include "varq/random.hpp"

namespace varq {

struct SourceDistribution {
  enum class Kind { Uniform, Normal };

  Kind kind = Kind::Uniform;
  double a = 5.0;  // lo for Uniform, mean for Normal
  double b = 6.0;  // hi for Uniform, sd for Normal

  static SourceDistribution uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static SourceDistribution normal(double mean, double sd) { return {Kind::Normal, mean, sd}; }

  void validate() const;

  // Number of stream words consumed by fill() for `count` values.
  std::uint64_t words_needed(std::size_t count) const;

  // Fills `out` sequentially from `stream`.
  void fill(Eigen::Ref<Eigen::ArrayXd> out, RandomStream& stream) const;

  bool operator==(const SourceDistribution&) const = default;
};

/// Lognormal(-theta^2/2, theta) multiplicative noise; E[xi] = 1 for every theta.
struct NoiseSpec {
  double theta = 0.0;

  void validate() const;

  // xi = exp(-theta^2/2 + theta*z); exactly 1 when theta == 0.
  double xi_from_normal(double z) const;

  bool operator==(const NoiseSpec&) const = default;
};

enum class SimulationMode { FullSample, FastPath };

std::string to_string(SimulationMode mode);
SimulationMode parse_simulation_mode(const std::string& name);

/// Per-metric sidedness of the z-tests.
struct MetricSidedness {
  Sidedness fpr = Sidedness::TwoSided;
  Sidedness avg_t2 = Sidedness::TwoSided;
  Sidedness kurtosis = Sidedness::TwoSided;

  Sidedness of(MetricKind kind) const;
  bool operator==(const MetricSidedness&) const = default;
};

struct ExperimentConfig {
  std::size_t group_size = 1000;
  SourceDistribution source = SourceDistribution::uniform(5.0, 6.0);
  NoiseSpec noise;
  std::size_t n_tests = 1;
  double alpha = 0.1;
  double ci_level = 0.9;
  MetricSidedness sidedness;
  SimulationMode mode = SimulationMode::FullSample;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// count draws of xi from `stream`, two per normal pair.
Eigen::ArrayXd sample_lognormal_noise(const NoiseSpec& noise, std::size_t count, RandomStream& stream);

/// Full-fidelity batch: per test, S control and S test samples, Welch t, then
/// t / sqrt(xi).
TStatBatch<double> run_aa_batch_full(const ExperimentConfig& config, const RandomStream& stream,
                                     unsigned workers = 1);

/// Analytic shortcut: t_j ~ N(0, 1) directly, then t_j / sqrt(xi_j).
TStatBatch<double> run_aa_batch_fast(const ExperimentConfig& config, const RandomStream& stream,
                                     unsigned workers = 1);

/// Dispatches on config.mode.
TStatBatch<double> run_aa_batch(const ExperimentConfig& config, const RandomStream& stream,
                                unsigned workers = 1);

}  // namespace varq
