#include "varq/simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "varq/errors.hpp"
#include "varq/parallel.hpp"

namespace varq {

namespace {

constexpr std::size_t kTestsPerChunk = 512;

template <typename PerChunk>
void for_each_chunk(std::size_t n_tests, unsigned workers, PerChunk&& per_chunk) {
  const std::size_t chunks = (n_tests + kTestsPerChunk - 1) / kTestsPerChunk;
  detail::parallel_for_each_index(chunks, workers, [&](std::size_t c) {
    const std::size_t begin = c * kTestsPerChunk;
    per_chunk(begin, std::min(n_tests, begin + kTestsPerChunk));
  });
}

}  // namespace

void SourceDistribution::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("source distribution parameters must be finite");
  }
  if (kind == Kind::Uniform && !(a < b)) {
    throw std::invalid_argument("uniform source needs lo < hi");
  }
  if (kind == Kind::Normal && !(b > 0)) {
    throw std::invalid_argument("normal source needs sd > 0");
  }
}

std::uint64_t SourceDistribution::words_needed(std::size_t count) const {
  return kind == Kind::Uniform ? count : 2 * ((count + 1) / 2);
}

void SourceDistribution::fill(Eigen::Ref<Eigen::ArrayXd> out, RandomStream& stream) const {
  const Eigen::Index n = out.size();
  if (kind == Kind::Uniform) {
    const double width = b - a;
    for (Eigen::Index i = 0; i < n; ++i) out[i] = a + width * stream.uniform();
    return;
  }
  for (Eigen::Index i = 0; i < n; i += 2) {
    const auto [z1, z2] = stream.normal_pair();
    out[i] = a + b * z1;
    if (i + 1 < n) out[i + 1] = a + b * z2;
  }
}

void NoiseSpec::validate() const {
  if (!std::isfinite(theta) || theta < 0) {
    throw std::invalid_argument("noise theta must be finite and >= 0");
  }
}

double NoiseSpec::xi_from_normal(double z) const {
  if (theta == 0.0) return 1.0;
  return std::exp(-0.5 * theta * theta + theta * z);
}

std::string to_string(SimulationMode mode) {
  return mode == SimulationMode::FullSample ? "full" : "fast";
}

SimulationMode parse_simulation_mode(const std::string& name) {
  if (name == "full") return SimulationMode::FullSample;
  if (name == "fast") return SimulationMode::FastPath;
  throw std::invalid_argument("unknown simulation mode: " + name);
}

Sidedness MetricSidedness::of(MetricKind kind) const {
  switch (kind) {
    case MetricKind::Fpr: return fpr;
    case MetricKind::AvgT2: return avg_t2;
    case MetricKind::Kurtosis: return kurtosis;
  }
  return Sidedness::TwoSided;
}

void ExperimentConfig::validate() const {
  if (group_size < 2) throw std::invalid_argument("group size must be >= 2");
  if (n_tests < 1) throw std::invalid_argument("n_tests must be >= 1");
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(ci_level > 0 && ci_level < 1)) throw std::invalid_argument("ci_level must lie in (0, 1)");
  source.validate();
  noise.validate();
}

Eigen::ArrayXd sample_lognormal_noise(const NoiseSpec& noise, std::size_t count, RandomStream& stream) {
  noise.validate();
  Eigen::ArrayXd xi(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; i += 2) {
    const auto [z1, z2] = stream.normal_pair();
    xi[static_cast<Eigen::Index>(i)] = noise.xi_from_normal(z1);
    if (i + 1 < count) xi[static_cast<Eigen::Index>(i + 1)] = noise.xi_from_normal(z2);
  }
  return xi;
}

TStatBatch<double> run_aa_batch_full(const ExperimentConfig& config, const RandomStream& stream,
                                     unsigned workers) {
  if (config.mode != SimulationMode::FullSample) {
    throw ContractViolation("run_aa_batch_full called with a fast-path config");
  }
  config.validate();
  const auto group = static_cast<Eigen::Index>(config.group_size);
  // Both groups are drawn contiguously, followed by one normal pair for xi.
  const std::uint64_t stride = config.source.words_needed(2 * config.group_size) + 2;
  const std::uint64_t origin = stream.position();

  TStatBatch<double> batch(static_cast<Eigen::Index>(config.n_tests));
  for_each_chunk(config.n_tests, workers, [&](std::size_t begin, std::size_t end) {
    RandomStream local(stream.seed(), stream.stream_id());
    Eigen::ArrayXd samples(2 * group);
    for (std::size_t j = begin; j < end; ++j) {
      local.seek(origin + j * stride);
      config.source.fill(samples, local);
      const double t = welch_t(samples.head(group), samples.tail(group));
      const double xi = config.noise.xi_from_normal(local.normal_pair().first);
      batch[static_cast<Eigen::Index>(j)] = apply_variance_noise(t, xi);
    }
  });
  return batch;
}

TStatBatch<double> run_aa_batch_fast(const ExperimentConfig& config, const RandomStream& stream,
                                     unsigned workers) {
  if (config.mode != SimulationMode::FastPath) {
    throw ContractViolation("run_aa_batch_fast called with a full-sample config");
  }
  config.validate();
  const std::uint64_t origin = stream.position();

  TStatBatch<double> batch(static_cast<Eigen::Index>(config.n_tests));
  for_each_chunk(config.n_tests, workers, [&](std::size_t begin, std::size_t end) {
    RandomStream local(stream.seed(), stream.stream_id(), origin + 2 * begin);
    for (std::size_t j = begin; j < end; ++j) {
      const auto [z, noise_z] = local.normal_pair();
      batch[static_cast<Eigen::Index>(j)] = apply_variance_noise(z, config.noise.xi_from_normal(noise_z));
    }
  });
  return batch;
}

TStatBatch<double> run_aa_batch(const ExperimentConfig& config, const RandomStream& stream,
                                unsigned workers) {
  return config.mode == SimulationMode::FullSample ? run_aa_batch_full(config, stream, workers)
                                                   : run_aa_batch_fast(config, stream, workers);
}

}  // namespace varq
