#pragma once

// Test-only oracles. Nothing here calls into varq, so these stay independent
// of the code paths they check.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

namespace varq::testing {

// Standard normal CDF in long double: Taylor series of the integral near the
// origin, Laplace continued fraction in the tails.
inline long double reference_cdf(long double x) {
  constexpr long double inv_sqrt_2pi = 0.398942280401432677939946059934381868L;
  const long double density = inv_sqrt_2pi * std::exp(-x * x / 2);
  if (std::fabs(x) < 3.0L) {
    long double term = x, sum = x;
    for (int k = 1; k < 200; ++k) {
      term *= x * x / (2 * k + 1);
      sum += term;
      if (std::fabs(term) < 1e-30L * std::fabs(sum)) break;
    }
    return 0.5L + density * sum;
  }
  const long double a = std::fabs(x);
  long double frac = a;
  for (int k = 300; k >= 1; --k) frac = a + k / frac;
  const long double tail = density / frac;
  return x > 0 ? 1.0L - tail : tail;
}

// Bisection inverse of reference_cdf.
inline long double reference_quantile(long double p) {
  long double lo = -40, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const long double mid = (lo + hi) / 2;
    (reference_cdf(mid) < p ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

// i.i.d. standard normals from the standard library's engine.
inline Eigen::ArrayXd std_normals(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> dist;
  Eigen::ArrayXd out(static_cast<Eigen::Index>(n));
  for (auto& v : out) v = dist(engine);
  return out;
}

// Z / sqrt(xi) with xi lognormal(-theta^2/2, theta), from the standard library.
inline Eigen::ArrayXd std_noisy_normals(std::size_t n, double theta, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> dist;
  Eigen::ArrayXd out(static_cast<Eigen::Index>(n));
  for (auto& v : out) {
    const double z = dist(engine);
    const double xi = std::exp(-theta * theta / 2 + theta * dist(engine));
    v = z / std::sqrt(xi);
  }
  return out;
}

// Composite Simpson rule on [a, b] with `intervals` (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) sum += f(a + i * h) * (i % 2 ? 4 : 2);
  return sum * h / 3;
}

// Population FPR of Z / sqrt(xi) at threshold z_star: E[2 Phi(-z_star sqrt(xi))]
// by quadrature over the standard normal driving the lognormal noise.
inline double population_fpr(double theta, double z_star) {
  const auto integrand = [&](double u) {
    const double density = std::exp(-u * u / 2) / std::sqrt(2 * M_PI);
    const double xi = std::exp(-theta * theta / 2 + theta * u);
    return density * 2 * static_cast<double>(reference_cdf(-z_star * std::sqrt(xi)));
  };
  return simpson(integrand, -12.0, 12.0, 4000);
}

}  // namespace varq::testing
