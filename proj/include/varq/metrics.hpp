#pragma once

// Variance-quality metrics over a batch of A/A-test t-statistics.
//
// All functions are pure and accept any Eigen dense expression (arrays,
// vectors, Maps over std::vector, segments). Central moments use the 1/n
// convention and a two-pass reduction around the batch mean.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "varq/errors.hpp"
#include "varq/normal.hpp"

namespace varq {

template <typename Scalar>
using TStatBatch = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

enum class MetricKind { Fpr, AvgT2, Kurtosis };

inline constexpr MetricKind kAllMetrics[] = {MetricKind::Fpr, MetricKind::AvgT2,
                                             MetricKind::Kurtosis};

enum class Sidedness { TwoSided, OneSidedGreater };

inline std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Fpr: return "FPR";
    case MetricKind::AvgT2: return "AVG_T2";
    case MetricKind::Kurtosis: return "KURTOSIS";
  }
  return "?";
}

inline MetricKind parse_metric_kind(std::string_view name) {
  if (name == "FPR") return MetricKind::Fpr;
  if (name == "AVG_T2") return MetricKind::AvgT2;
  if (name == "KURTOSIS") return MetricKind::Kurtosis;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

inline std::string_view to_string(Sidedness s) {
  return s == Sidedness::TwoSided ? "two" : "greater";
}

inline Sidedness parse_sidedness(std::string_view name) {
  if (name == "two") return Sidedness::TwoSided;
  if (name == "greater") return Sidedness::OneSidedGreater;
  throw std::invalid_argument("unknown sidedness: " + std::string(name));
}

/// Outcome of one metric's z-test. Only constructible through make_report,
/// which enforces z = (estimate - null) / se and reject <=> p < alpha.
template <typename Scalar>
struct MetricReport {
  MetricKind kind;
  Scalar estimate;
  Scalar null_value;
  Scalar std_error;
  Scalar z_score;
  Scalar p_value;
  bool reject;
  Sidedness sidedness;
  Scalar alpha;
};

template <typename Scalar>
struct SampleGroupPair {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> control;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> test;
};

/// Difference of means (test - control) and the estimated variance of that
/// difference.
template <typename Scalar>
struct LiftEstimate {
  Scalar mu;
  Scalar var_of_mean_diff;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& values, const char* what) {
  if (!values.derived().array().isFinite().all()) {
    throw std::domain_error(std::string(what) + ": non-finite value in input");
  }
}

template <typename Derived>
void require_size(const Eigen::DenseBase<Derived>& values, Eigen::Index min_size, const char* what) {
  if (values.size() < min_size) {
    throw InsufficientDataError(std::string(what) + ": need at least " + std::to_string(min_size) +
                                " values, got " + std::to_string(values.size()));
  }
}

// Unbiased sample variance, two-pass.
template <typename Derived>
typename Derived::Scalar sample_variance(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const auto& x = values.derived().array();
  const Scalar mean = x.mean();
  return (x - mean).square().sum() / Scalar(x.size() - 1);
}

}  // namespace detail

template <typename Scalar>
MetricReport<Scalar> make_report(MetricKind kind, Scalar estimate, Scalar null_value, Scalar std_error,
                                 Scalar alpha, Sidedness sidedness) {
  if (!(alpha > Scalar(0) && alpha < Scalar(1))) {
    throw std::domain_error("alpha must lie in (0, 1)");
  }
  if (!(std_error > Scalar(0))) {
    throw ZeroStandardError(std::string(to_string(kind)) + ": standard error is zero");
  }
  const Scalar z = (estimate - null_value) / std_error;
  const Scalar p = sidedness == Sidedness::TwoSided ? Scalar(2) * normal_cdf(-std::abs(z))
                                                    : normal_cdf(-z);
  return {kind, estimate, null_value, std_error, z, p, p < alpha, sidedness, alpha};
}

template <typename DerivedC, typename DerivedT>
LiftEstimate<typename DerivedC::Scalar> lift_estimate(const Eigen::DenseBase<DerivedC>& control,
                                                      const Eigen::DenseBase<DerivedT>& test) {
  using Scalar = typename DerivedC::Scalar;
  if (control.size() < 2 || test.size() < 2) {
    throw InsufficientDataError("welch_t: each group needs at least 2 samples");
  }
  detail::require_finite(control, "welch_t");
  detail::require_finite(test, "welch_t");
  const Scalar mu = test.derived().array().mean() - control.derived().array().mean();
  const Scalar var = detail::sample_variance(test) / Scalar(test.size()) +
                     detail::sample_variance(control) / Scalar(control.size());
  return {mu, var};
}

/// Welch two-sample statistic (mean(test) - mean(control)) / sqrt(s_t^2/S_t + s_c^2/S_c).
template <typename DerivedC, typename DerivedT>
typename DerivedC::Scalar welch_t(const Eigen::DenseBase<DerivedC>& control,
                                  const Eigen::DenseBase<DerivedT>& test) {
  const auto lift = lift_estimate(control, test);
  if (!(lift.var_of_mean_diff > 0)) {
    throw DegenerateVarianceError("welch_t: both groups have zero variance");
  }
  return lift.mu / std::sqrt(lift.var_of_mean_diff);
}

template <typename Scalar>
Scalar welch_t(const SampleGroupPair<Scalar>& pair) {
  return welch_t(pair.control, pair.test);
}

/// The t-statistic that would have been reported had the variance estimate
/// been multiplied by xi.
template <typename Scalar>
Scalar apply_variance_noise(Scalar t, Scalar xi) {
  if (!(xi > Scalar(0))) throw std::domain_error("apply_variance_noise: xi must be positive");
  return t / std::sqrt(xi);
}

/// Fraction of |t_j| >= Phi^-1(1 - (1 - ci_level)/2). The comparison is closed.
template <typename Derived>
typename Derived::Scalar fpr(const Eigen::DenseBase<Derived>& batch,
                             typename Derived::Scalar ci_level = 0.9) {
  using Scalar = typename Derived::Scalar;
  detail::require_size(batch, 1, "fpr");
  detail::require_finite(batch, "fpr");
  if (!(ci_level > Scalar(0) && ci_level < Scalar(1))) {
    throw std::domain_error("fpr: ci_level must lie in (0, 1)");
  }
  const Scalar threshold = normal_quantile(Scalar(1) - (Scalar(1) - ci_level) / Scalar(2));
  const auto hits = (batch.derived().array().abs() >= threshold).count();
  return Scalar(hits) / Scalar(batch.size());
}

template <typename Derived>
MetricReport<typename Derived::Scalar> fpr_report(const Eigen::DenseBase<Derived>& batch,
                                                  typename Derived::Scalar alpha,
                                                  Sidedness sidedness = Sidedness::TwoSided,
                                                  typename Derived::Scalar ci_level = 0.9) {
  using Scalar = typename Derived::Scalar;
  const Scalar rate = fpr(batch, ci_level);
  const Scalar se = std::sqrt(rate * (Scalar(1) - rate) / Scalar(batch.size()));
  return make_report(MetricKind::Fpr, rate, Scalar(1) - ci_level, se, alpha, sidedness);
}

template <typename Derived>
typename Derived::Scalar avg_t2(const Eigen::DenseBase<Derived>& batch) {
  detail::require_size(batch, 1, "avg_t2");
  detail::require_finite(batch, "avg_t2");
  return batch.derived().array().square().mean();
}

/// z-test of mean(t^2) against 1, with SE = sd({t_j^2}) / sqrt(n) (sd uses n - 1).
template <typename Derived>
MetricReport<typename Derived::Scalar> avg_t2_report(const Eigen::DenseBase<Derived>& batch,
                                                     typename Derived::Scalar alpha,
                                                     Sidedness sidedness = Sidedness::TwoSided) {
  using Scalar = typename Derived::Scalar;
  detail::require_size(batch, 2, "avg_t2_report");
  const Scalar estimate = avg_t2(batch);
  const auto squares = batch.derived().array().square();
  const Scalar var = (squares - estimate).square().sum() / Scalar(batch.size() - 1);
  const Scalar se = std::sqrt(var / Scalar(batch.size()));
  return make_report(MetricKind::AvgT2, estimate, Scalar(1), se, alpha, sidedness);
}

/// Unbiased excess-kurtosis estimator
///   g2 = (n-1)/((n-2)(n-3)) * [(n+1) M4/M2^2 - 3(n-1)]
/// with M_k the 1/n central sample moments.
template <typename Derived>
typename Derived::Scalar kurtosis_g2(const Eigen::DenseBase<Derived>& batch) {
  using Scalar = typename Derived::Scalar;
  detail::require_size(batch, 4, "kurtosis_g2");
  detail::require_finite(batch, "kurtosis_g2");
  const auto& x = batch.derived().array();
  if (x.minCoeff() == x.maxCoeff()) {
    throw DegenerateDispersionError("kurtosis_g2: all values are equal");
  }
  const Scalar mean = x.mean();
  const auto sq = (x - mean).square().eval();
  const Scalar m2 = sq.mean();
  const Scalar m4 = sq.square().mean();
  if (!(m2 > Scalar(0))) throw DegenerateDispersionError("kurtosis_g2: second moment is zero");
  const Scalar n = Scalar(x.size());
  return (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * m4 / (m2 * m2) - 3 * (n - 1));
}

/// Normal-approximation standard deviation of g2 for a batch of size n.
template <typename Scalar = double>
Scalar kurtosis_se(std::size_t count) {
  if (count < 4) throw InsufficientDataError("kurtosis_se: need n >= 4");
  const Scalar n = Scalar(count);
  return std::sqrt(Scalar(24) * n * (n - 1) * (n - 1) /
                   ((n - 3) * (n - 2) * (n + 3) * (n + 5)));
}

template <typename Derived>
MetricReport<typename Derived::Scalar> kurtosis_report(const Eigen::DenseBase<Derived>& batch,
                                                       typename Derived::Scalar alpha,
                                                       Sidedness sidedness = Sidedness::TwoSided) {
  using Scalar = typename Derived::Scalar;
  const Scalar g2 = kurtosis_g2(batch);
  return make_report(MetricKind::Kurtosis, g2, Scalar(0),
                     kurtosis_se<Scalar>(static_cast<std::size_t>(batch.size())), alpha, sidedness);
}

template <typename Derived>
MetricReport<typename Derived::Scalar> metric_report(MetricKind kind,
                                                     const Eigen::DenseBase<Derived>& batch,
                                                     typename Derived::Scalar alpha,
                                                     Sidedness sidedness = Sidedness::TwoSided,
                                                     typename Derived::Scalar ci_level = 0.9) {
  switch (kind) {
    case MetricKind::Fpr: return fpr_report(batch, alpha, sidedness, ci_level);
    case MetricKind::AvgT2: return avg_t2_report(batch, alpha, sidedness);
    case MetricKind::Kurtosis: return kurtosis_report(batch, alpha, sidedness);
  }
  throw std::invalid_argument("metric_report: unknown metric");
}

/// Smallest batch size for which metric_report is defined.
inline std::size_t min_batch_size(MetricKind kind) {
  switch (kind) {
    case MetricKind::Fpr: return 1;
    case MetricKind::AvgT2: return 2;
    case MetricKind::Kurtosis: return 4;
  }
  return 1;
}

}  // namespace varq
