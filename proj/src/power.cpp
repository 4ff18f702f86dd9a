#include "varq/power.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "varq/errors.hpp"
#include "varq/parallel.hpp"

namespace varq {

std::string to_string(Interpolation mode) {
  return mode == Interpolation::FirstCrossing ? "first-crossing" : "isotonic";
}

Interpolation parse_interpolation(const std::string& name) {
  if (name == "first-crossing") return Interpolation::FirstCrossing;
  if (name == "isotonic") return Interpolation::Isotonic;
  throw std::invalid_argument("unknown interpolation mode: " + name);
}

std::vector<PowerPoint> estimate_power_paired(double theta, std::size_t n_tests, std::size_t trials,
                                              std::span<const MetricKind> metrics,
                                              const ExperimentConfig& base, std::uint64_t seed,
                                              unsigned workers, std::uint64_t theta_index,
                                              std::uint64_t n_index) {
  if (trials < 1) throw std::invalid_argument("estimate_power: trials must be >= 1");
  if (metrics.empty()) throw std::invalid_argument("estimate_power: no metrics requested");
  for (const auto metric : metrics) {
    if (n_tests < min_batch_size(metric)) {
      throw InsufficientDataError("estimate_power: " + std::string(to_string(metric)) + " needs n >= " +
                                  std::to_string(min_batch_size(metric)));
    }
  }
  ExperimentConfig config = base;
  config.noise.theta = theta;
  config.n_tests = n_tests;
  config.validate();

  const std::size_t m = metrics.size();
  // outcome[trial * m + k]: 0 accept, 1 reject, 2 degenerate
  std::vector<unsigned char> outcome(trials * m, 0);
  detail::parallel_for_each_index(trials, workers, [&](std::size_t trial) {
    const auto stream = rng_substream(seed, trial_stream_id(theta_index, n_index, trial));
    const auto batch = run_aa_batch(config, stream);
    for (std::size_t k = 0; k < m; ++k) {
      try {
        const auto report = metric_report(metrics[k], batch, config.alpha,
                                          config.sidedness.of(metrics[k]), config.ci_level);
        outcome[trial * m + k] = report.reject ? 1 : 0;
      } catch (const ZeroStandardError&) {
        outcome[trial * m + k] = 2;
      } catch (const DegenerateDispersionError&) {
        outcome[trial * m + k] = 2;
      }
    }
  });

  std::vector<PowerPoint> points;
  points.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    PowerPoint point;
    point.theta = theta;
    point.n_tests = n_tests;
    point.trials = trials;
    point.metric = metrics[k];
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const auto o = outcome[trial * m + k];
      point.rejections += (o == 1);
      point.degenerate += (o == 2);
    }
    point.power = static_cast<double>(point.rejections) / static_cast<double>(trials);
    points.push_back(point);
  }
  return points;
}

PowerPoint estimate_power(double theta, std::size_t n_tests, std::size_t trials, MetricKind metric,
                          const ExperimentConfig& base, std::uint64_t seed, unsigned workers) {
  const MetricKind one[] = {metric};
  return estimate_power_paired(theta, n_tests, trials, one, base, seed, workers).front();
}

std::vector<double> isotonic_fit(std::span<const double> values) {
  // Blocks of (mean, weight); merge backwards while order is violated.
  std::vector<double> means;
  std::vector<std::size_t> weights;
  for (const double v : values) {
    means.push_back(v);
    weights.push_back(1);
    while (means.size() > 1 && means[means.size() - 2] > means.back()) {
      const std::size_t w = weights.back() + weights[weights.size() - 2];
      const double merged =
          (means.back() * double(weights.back()) + means[means.size() - 2] * double(weights[weights.size() - 2])) /
          double(w);
      means.pop_back();
      weights.pop_back();
      means.back() = merged;
      weights.back() = w;
    }
  }
  std::vector<double> fitted;
  fitted.reserve(values.size());
  for (std::size_t b = 0; b < means.size(); ++b) fitted.insert(fitted.end(), weights[b], means[b]);
  return fitted;
}

SampleComplexityResult sample_complexity(const PowerCurve& curve, double target_power,
                                         Interpolation mode) {
  if (!(target_power > 0 && target_power < 1)) {
    throw std::domain_error("sample_complexity: target power must lie in (0, 1)");
  }
  if (curve.points.empty()) throw ContractViolation("sample_complexity: empty power curve");
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    if (curve.points[k].n_tests <= curve.points[k - 1].n_tests) {
      throw ContractViolation("sample_complexity: n_tests must be strictly increasing");
    }
  }

  std::vector<double> power(curve.points.size());
  std::transform(curve.points.begin(), curve.points.end(), power.begin(),
                 [](const PowerPoint& p) { return p.power; });
  if (mode == Interpolation::Isotonic) power = isotonic_fit(power);

  SampleComplexityResult result{curve.metric, curve.theta, target_power, std::nullopt, false};
  const auto hit = std::find_if(power.begin(), power.end(), [&](double p) { return p >= target_power; });
  if (hit == power.end()) return result;

  const auto k = static_cast<std::size_t>(hit - power.begin());
  const double n_k = static_cast<double>(curve.points[k].n_tests);
  // A curve already above target at its first point is clamped to that point.
  if (*hit == target_power || k == 0) {
    result.n_required = n_k;
    return result;
  }
  const double n_prev = static_cast<double>(curve.points[k - 1].n_tests);
  const double fraction = (target_power - power[k - 1]) / (power[k] - power[k - 1]);
  result.n_required = n_prev + fraction * (n_k - n_prev);
  result.interpolated = true;
  return result;
}

EfficiencyEntry relative_efficiency(const PowerCurve& curve_1, const PowerCurve& curve_2,
                                    double target_power, Interpolation mode) {
  if (curve_1.theta != curve_2.theta) {
    throw ContractViolation("relative_efficiency: curves have different theta");
  }
  if (!curve_1.points.empty() && !curve_2.points.empty() &&
      curve_1.points.front().trials != curve_2.points.front().trials) {
    throw ContractViolation("relative_efficiency: curves have different trial counts");
  }
  const auto n1 = sample_complexity(curve_1, target_power, mode).n_required;
  const auto n2 = sample_complexity(curve_2, target_power, mode).n_required;
  EfficiencyEntry entry{curve_1.metric, curve_2.metric, curve_1.theta, target_power, std::nullopt};
  if (n1 && n2) entry.e12 = *n2 / *n1;
  return entry;
}

std::vector<std::size_t> log_spaced_grid(std::size_t lo, std::size_t hi, std::size_t count) {
  if (lo < 1 || hi < lo || count < 1 || (count == 1 && lo != hi)) {
    throw std::invalid_argument("log_spaced_grid: need 1 <= lo <= hi and count >= 1");
  }
  std::vector<std::size_t> grid(count);
  const double log_lo = std::log10(double(lo));
  const double step = count == 1 ? 0.0 : (std::log10(double(hi)) - log_lo) / double(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = static_cast<std::size_t>(std::llround(std::pow(10.0, log_lo + step * double(i))));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

void SweepSpec::validate() const {
  if (thetas.empty() || n_grid.empty() || metrics.empty()) {
    throw std::invalid_argument("sweep grids must be non-empty");
  }
  if (trials < 1) throw std::invalid_argument("sweep trials must be >= 1");
  for (const double theta : thetas) NoiseSpec{theta}.validate();
  auto sorted = n_grid;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("sweep n grid values must be distinct");
  }
  for (const auto metric : metrics) {
    if (sorted.front() < min_batch_size(metric)) {
      throw std::invalid_argument("sweep n grid too small for " + std::string(to_string(metric)));
    }
  }
}

SweepResult run_sweep(const SweepSpec& spec, const ExperimentConfig& base, std::uint64_t seed,
                      unsigned workers) {
  spec.validate();
  // Curves are reported with ascending n regardless of the grid's order.
  std::vector<std::size_t> n_order(spec.n_grid.size());
  std::iota(n_order.begin(), n_order.end(), 0);
  std::sort(n_order.begin(), n_order.end(),
            [&](std::size_t a, std::size_t b) { return spec.n_grid[a] < spec.n_grid[b]; });

  const std::size_t n_thetas = spec.thetas.size();
  const std::size_t n_ns = spec.n_grid.size();
  std::vector<std::vector<PowerPoint>> cells(n_thetas * n_ns);

  // Largest cells first so the tail of the schedule is cheap.
  std::vector<std::size_t> schedule(cells.size());
  std::iota(schedule.begin(), schedule.end(), 0);
  std::stable_sort(schedule.begin(), schedule.end(), [&](std::size_t a, std::size_t b) {
    return spec.n_grid[a % n_ns] > spec.n_grid[b % n_ns];
  });

  detail::parallel_for_each_index(schedule.size(), workers, [&](std::size_t s) {
    const std::size_t cell = schedule[s];
    const std::size_t ti = cell / n_ns;
    const std::size_t ni = cell % n_ns;
    try {
      cells[cell] = estimate_power_paired(spec.thetas[ti], spec.n_grid[ni], spec.trials, spec.metrics,
                                          base, seed, 1, ti, ni);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "sweep cell theta=" << spec.thetas[ti] << " n=" << spec.n_grid[ni] << ": " << e.what();
      throw SweepCellError(msg.str());
    }
  });

  SweepResult result;
  for (std::size_t ti = 0; ti < n_thetas; ++ti) {
    for (std::size_t k = 0; k < spec.metrics.size(); ++k) {
      PowerCurve curve{spec.thetas[ti], spec.metrics[k], {}};
      for (const std::size_t ni : n_order) {
        const auto& point = cells[ti * n_ns + ni][k];
        result.degenerate_batches += point.degenerate;
        curve.points.push_back(point);
      }
      result.curves.push_back(std::move(curve));
    }
  }
  return result;
}

std::vector<SampleComplexityResult> complexity_table(std::span<const PowerCurve> curves,
                                                     std::span<const double> target_powers,
                                                     Interpolation mode) {
  std::vector<SampleComplexityResult> table;
  for (const auto& curve : curves) {
    for (const double target : target_powers) table.push_back(sample_complexity(curve, target, mode));
  }
  return table;
}

std::vector<EfficiencyEntry> efficiency_table(std::span<const PowerCurve> curves,
                                              std::span<const double> target_powers,
                                              Interpolation mode) {
  std::vector<EfficiencyEntry> table;
  for (const auto& c1 : curves) {
    for (const auto& c2 : curves) {
      if (c1.theta != c2.theta || c1.metric == c2.metric) continue;
      for (const double target : target_powers) table.push_back(relative_efficiency(c1, c2, target, mode));
    }
  }
  return table;
}

}  // namespace varq
