// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. The seed is fixed up front and never tuned.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "varq/errors.hpp"
#include "varq/metrics.hpp"
#include "varq/power.hpp"
#include "varq/simulator.hpp"

namespace {

using namespace varq;

constexpr std::uint64_t kSeed = 2024;
constexpr double kZ95 = 1.6448536269514722;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ExperimentConfig make_config(SimulationMode mode, double theta, std::size_t n) {
  ExperimentConfig c;
  c.mode = mode;
  c.noise.theta = theta;
  c.n_tests = n;
  c.seed = kSeed;
  return c;
}

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

// Standard error of g2 from 20 contiguous sub-batches; valid away from the
// null where the analytic null SE understates the spread.
double batch_means_g2_se(const TStatBatch<double>& batch) {
  constexpr Eigen::Index parts = 20;
  const Eigen::Index size = batch.size() / parts;
  Eigen::ArrayXd g(parts);
  for (Eigen::Index k = 0; k < parts; ++k) g[k] = kurtosis_g2(batch.segment(k * size, size));
  const double sd = std::sqrt((g - g.mean()).square().sum() / double(parts - 1));
  return sd * std::sqrt(double(size) / double(batch.size()));
}

// ---- criteria --------------------------------------------------------------

Outcome null_calibration() {
  Outcome o;
  const auto start = Clock::now();
  const auto batch = run_aa_batch_fast(make_config(SimulationMode::FastPath, 0.0, 10'000), rng_substream(kSeed, 1));
  const double f = fpr(batch), a = avg_t2(batch), g = kurtosis_g2(batch);
  const double elapsed = seconds_since(start);
  o.detail << "FPR=" << f << " avg_t2=" << a << " g2=" << g << " (" << elapsed << " s)";
  o.check(within(f, 0.091, 0.109), "FPR in [0.091, 0.109]");
  o.check(within(a, 0.955, 1.045), "avg t2 in [0.955, 1.045]");
  o.check(within(g, -0.06, 0.06), "g2 in [-0.06, 0.06]");
  o.check(elapsed < 1.0, "runtime < 1 s");
  return o;
}

Outcome full_fidelity_calibration() {
  Outcome o;
  constexpr std::size_t n = 5000;
  const auto config = make_config(SimulationMode::FullSample, 0.0, n);
  auto start = Clock::now();
  const auto serial = run_aa_batch_full(config, rng_substream(kSeed, 2), 1);
  const double t1 = seconds_since(start);
  start = Clock::now();
  const auto parallel = run_aa_batch_full(config, rng_substream(kSeed, 2), 8);
  const double t8 = seconds_since(start);

  const double fpr_band = 3 * std::sqrt(0.1 * 0.9 / n);
  const double avg_band = 3 * std::sqrt(2.0 / n);
  const double g2_band = 3 * kurtosis_se(n);
  const double f = fpr(serial), a = avg_t2(serial), g = kurtosis_g2(serial);
  o.detail << "FPR=" << f << " (+-" << fpr_band << ") avg_t2=" << a << " (+-" << avg_band << ") g2=" << g << " (+-"
           << g2_band << ") 1 worker " << t1 << " s, 8 workers " << t8 << " s";
  o.check(std::abs(f - 0.1) <= fpr_band, "FPR within 3 sigma");
  o.check(std::abs(a - 1.0) <= avg_band, "avg t2 within 3 sigma");
  o.check(std::abs(g) <= g2_band, "g2 within 3 sigma");
  o.check((serial == parallel).all(), "1 and 8 workers agree");
  o.check(t1 < 60.0, "single-thread runtime < 60 s");
  o.check(t8 < 15.0, "8-worker runtime < 15 s");
  return o;
}

Outcome analytic_noise_oracles() {
  Outcome o;
  constexpr std::size_t n = 100'000;
  const auto start = Clock::now();
  std::uint64_t stream = 30;
  for (const double theta : {0.1, 0.2, 0.3, 0.4}) {
    const auto batch = run_aa_batch_fast(make_config(SimulationMode::FastPath, theta, n), rng_substream(kSeed, stream++));
    const auto avg = avg_t2_report(batch, 0.1);
    const double avg_target = std::exp(theta * theta);
    const double g = kurtosis_g2(batch);
    const double g_target = 3 * (std::exp(theta * theta) - 1);
    const double g_band = 4 * 2 * kurtosis_se(n);
    const double f = fpr(batch);
    const double f_target = varq::testing::population_fpr(theta, kZ95);
    const double f_se = std::sqrt(f_target * (1 - f_target) / n);
    o.detail << "theta=" << theta << ": avg " << avg.estimate << " vs " << avg_target << " ("
             << (avg.estimate - avg_target) / avg.std_error << " SE), g2 " << g << " vs " << g_target << " (band "
             << g_band << ", batch-means SE " << batch_means_g2_se(batch) << "), FPR " << f << " vs " << f_target
             << " (" << (f - f_target) / f_se << " SE); ";
    o.check(std::abs(avg.estimate - avg_target) <= 4 * avg.std_error, "avg t2 within 4 SE at theta " + std::to_string(theta));
    o.check(std::abs(g - g_target) <= g_band, "g2 within 8 kurtosis_se at theta " + std::to_string(theta));
    o.check(std::abs(f - f_target) <= 4 * f_se, "FPR within 4 SE at theta " + std::to_string(theta));
  }
  const double elapsed = seconds_since(start);
  o.detail << "(" << elapsed << " s)";
  o.check(elapsed < 5.0, "runtime < 5 s");
  return o;
}

Outcome meta_test_calibration() {
  Outcome o;
  const auto start = Clock::now();
  auto base = make_config(SimulationMode::FastPath, 0.0, 1);
  const std::size_t ns[] = {100, 1000, 10000};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto points = estimate_power_paired(0.0, ns[i], 500, kAllMetrics, base, kSeed, 8, 0, i);
    for (const auto& p : points) {
      o.detail << to_string(p.metric) << "@" << p.n_tests << "=" << p.power << " ";
      o.check(within(p.power, 0.06, 0.14),
              std::string(to_string(p.metric)) + " power in [0.06, 0.14] at n=" + std::to_string(p.n_tests));
    }
  }
  const double elapsed = seconds_since(start);
  o.detail << "(" << elapsed << " s)";
  o.check(elapsed < 30.0, "runtime < 30 s");
  return o;
}

struct DefaultSweep {
  SweepResult sweep;
  std::vector<SampleComplexityResult> complexity;
  std::vector<EfficiencyEntry> efficiency;
  double seconds = 0;
};

const DefaultSweep& default_sweep() {
  static const DefaultSweep result = [] {
    DefaultSweep s;
    const auto start = Clock::now();
    const SweepSpec spec;  // default grid: four thetas, 30 log-spaced n, 500 trials
    s.sweep = run_sweep(spec, make_config(SimulationMode::FastPath, 0.0, 1), kSeed, 8);
    const std::vector<double> targets{0.5, 0.6, 0.7, 0.8, 0.9};
    s.complexity = complexity_table(s.sweep.curves, targets, Interpolation::FirstCrossing);
    s.efficiency = efficiency_table(s.sweep.curves, targets, Interpolation::FirstCrossing);
    s.seconds = seconds_since(start);
    return s;
  }();
  return result;
}

std::optional<double> n_required(MetricKind metric, double theta, double target) {
  for (const auto& r : default_sweep().complexity) {
    if (r.metric == metric && r.theta == theta && r.target_power == target) return r.n_required;
  }
  throw std::logic_error("missing complexity entry");
}

std::string show(const std::optional<double>& v) { return v ? std::to_string(*v) : "NOT_REACHED"; }

Outcome headline_efficiency() {
  Outcome o;
  const auto& s = default_sweep();
  int strong = 0, evaluated = 0;
  for (const auto& e : s.efficiency) {
    if (e.metric_1 != MetricKind::AvgT2 || e.metric_2 != MetricKind::Fpr) continue;
    if (e.theta != 0.3 && e.theta != 0.4) continue;
    if (e.target_power < 0.55) continue;
    ++evaluated;
    o.detail << "theta=" << e.theta << "/p=" << e.target_power << ": " << show(e.e12) << "; ";
    o.check(e.e12 && *e.e12 >= 1.2, "e >= 1.2 at theta " + std::to_string(e.theta) + " power " +
                                        std::to_string(e.target_power));
    if (e.e12 && *e.e12 >= 1.4) ++strong;
  }
  o.detail << strong << "/" << evaluated << " points >= 1.4 (sweep " << s.seconds << " s)";
  o.check(evaluated == 8, "8 evaluated points");
  o.check(2 * strong > evaluated, "majority of points >= 1.4");
  o.check(s.seconds < 600.0, "runtime < 10 min");
  return o;
}

Outcome qualitative_ordering() {
  Outcome o;
  for (const double theta : {0.3, 0.4}) {
    const auto f = n_required(MetricKind::Fpr, theta, 0.8);
    const auto a = n_required(MetricKind::AvgT2, theta, 0.8);
    const auto k = n_required(MetricKind::Kurtosis, theta, 0.8);
    o.detail << "theta=" << theta << ": N(FPR)=" << show(f) << " N(AVG_T2)=" << show(a) << " N(KURTOSIS)=" << show(k)
             << "; ";
    o.check(f && a && *a < *f, "N(AVG_T2) < N(FPR) at theta " + std::to_string(theta));
    o.check(f && k && *k < *f, "N(KURTOSIS) < N(FPR) at theta " + std::to_string(theta));
  }
  return o;
}

Outcome detection_scale() {
  Outcome o;
  for (const double theta : {0.3, 0.4}) {
    for (const auto metric : kAllMetrics) {
      const auto n = n_required(metric, theta, 0.8);
      o.detail << to_string(metric) << "@" << theta << "=" << show(n) << " ";
      o.check(n && *n <= 10000.0, std::string(to_string(metric)) + " reaches 0.8 at theta " + std::to_string(theta));
    }
  }
  o.detail << "| theta=0.1, power 0.9:";
  for (const auto metric : kAllMetrics) o.detail << " " << to_string(metric) << "=" << show(n_required(metric, 0.1, 0.9));
  return o;
}

Outcome property_suite() {
  Outcome o;
  int checks = 0;
  const auto check = [&](bool ok, const std::string& what) {
    ++checks;
    o.check(ok, what);
  };

  Eigen::ArrayXd alternating(4);
  alternating << -1, 1, -1, 1;
  check(std::abs(kurtosis_g2(alternating) + 6.0) < 1e-12, "g2 of [-1,1,-1,1] = -6");

  Eigen::ArrayXd c(4), t(4);
  c << 1, 2, 3, 4;
  t << 2, 3, 4, 5;
  check(std::abs(welch_t(c, t) - 1.0954451150103322) < 1e-12, "welch_t hand case");
  check(welch_t(t, c) == -welch_t(c, t), "welch_t antisymmetry");

  PowerCurve line{0.3, MetricKind::Fpr, {}};
  for (const auto [n, p] : {std::pair{1000, 0.7}, std::pair{2000, 0.9}}) {
    PowerPoint point;
    point.n_tests = static_cast<std::size_t>(n);
    point.power = p;
    point.trials = 500;
    line.points.push_back(point);
  }
  check(std::abs(*sample_complexity(line, 0.8).n_required - 1500.0) < 1e-9, "interpolation midpoint 1500");

  const auto sample = varq::testing::std_noisy_normals(5000, 0.3, 17);
  const Eigen::ArrayXd affine = 3.5 * sample - 11.0;
  check(std::abs(kurtosis_g2(affine) - kurtosis_g2(sample)) <= 1e-9 * std::max(1.0, std::abs(kurtosis_g2(sample))),
        "g2 affine invariance");

  SweepSpec small;
  small.thetas = {0.0, 0.3};
  small.n_grid = {100, 400, 1600};
  small.trials = 60;
  const auto fast = make_config(SimulationMode::FastPath, 0.0, 1);
  const auto one = run_sweep(small, fast, kSeed, 1);
  const auto eight = run_sweep(small, fast, kSeed, 8);
  const auto again = run_sweep(small, fast, kSeed, 1);
  const auto other = run_sweep(small, fast, kSeed + 1, 1);
  check(one.curves == eight.curves, "1 vs 8 workers identical");
  check(one.curves == again.curves, "same seed identical");
  check(one.curves != other.curves, "different seed differs");

  const std::vector<double> targets{0.5, 0.6, 0.7, 0.8, 0.9};
  const auto eff = efficiency_table(one.curves, targets, Interpolation::FirstCrossing);
  for (const auto& e : eff) {
    for (const auto& r : eff) {
      if (r.metric_1 == e.metric_2 && r.metric_2 == e.metric_1 && r.theta == e.theta &&
          r.target_power == e.target_power && e.e12 && r.e12) {
        check(std::abs(*e.e12 * *r.e12 - 1.0) < 1e-12, "e12 * e21 = 1");
      }
    }
  }

  std::uint64_t stream = 80;
  for (const double theta : {0.0, 0.3}) {
    constexpr std::size_t n = 20'000;
    const auto full = run_aa_batch_full(make_config(SimulationMode::FullSample, theta, n), rng_substream(kSeed, stream++), 8);
    const auto quick = run_aa_batch_fast(make_config(SimulationMode::FastPath, theta, n), rng_substream(kSeed, stream++), 8);
    const double f1 = fpr(full), f2 = fpr(quick);
    const double f_se = std::hypot(std::sqrt(f1 * (1 - f1) / n), std::sqrt(f2 * (1 - f2) / n));
    const auto a1 = avg_t2_report(full, 0.1), a2 = avg_t2_report(quick, 0.1);
    const double a_se = std::hypot(a1.std_error, a2.std_error);
    const double g1 = kurtosis_g2(full), g2 = kurtosis_g2(quick);
    const double g_se = std::hypot(batch_means_g2_se(full), batch_means_g2_se(quick));
    o.detail << "full/fast theta=" << theta << ": FPR " << f1 << "/" << f2 << ", avg " << a1.estimate << "/"
             << a2.estimate << ", g2 " << g1 << "/" << g2 << "; ";
    const std::string at = " at theta " + std::to_string(theta);
    check(std::abs(f1 - f2) <= 4 * f_se, "FULL/FAST FPR" + at);
    check(std::abs(a1.estimate - a2.estimate) <= 4 * a_se, "FULL/FAST avg t2" + at);
    check(std::abs(g1 - g2) <= 4 * g_se, "FULL/FAST g2" + at);
  }
  o.detail << checks << " checks";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"null calibration", null_calibration},
      {"full-fidelity calibration", full_fidelity_calibration},
      {"analytic noise oracles", analytic_noise_oracles},
      {"meta-test calibration", meta_test_calibration},
      {"AVG_T2 vs FPR relative efficiency", headline_efficiency},
      {"sample-complexity ordering", qualitative_ordering},
      {"detection within 10^4 tests", detection_scale},
      {"property suite", property_suite},
  };

  int failures = 0;
  int index = 0;
  for (const auto& criterion : criteria) {
    ++index;
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail << "exception: " << e.what();
    }
    failures += outcome.pass ? 0 : 1;
    std::printf("%s  criterion %d: %s: %s\n", outcome.pass ? "PASS" : "FAIL", index, criterion.name,
                outcome.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
