#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace varq {

/// Standard normal CDF, evaluated through erfc so both tails keep full
/// relative precision.
template <typename Scalar>
Scalar normal_cdf(Scalar x) {
  return Scalar(0.5) * std::erfc(-x / std::numbers::sqrt2_v<Scalar>);
}

namespace detail {

// Lower half (p <= 0.5) of the inverse CDF: Acklam's rational approximation
// (relative error ~1.2e-9) followed by one Halley step against erfc.
template <typename Scalar>
Scalar normal_quantile_lower(Scalar p) {
  constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                          -2.759285104469687e+02, 1.383577518672690e+02,
                          -3.066479806614716e+01, 2.506628277459239e+00};
  constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                          -1.556989798598866e+02, 6.680131188771972e+01,
                          -1.328068155288572e+01};
  constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                          -2.400758277161838e+00, -2.549732539343734e+00,
                          4.374664141464968e+00,  2.938163982698783e+00};
  constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                          2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  Scalar x;
  if (p < Scalar(p_low)) {
    const Scalar q = std::sqrt(Scalar(-2) * std::log(p));
    x = (((((Scalar(c[0]) * q + Scalar(c[1])) * q + Scalar(c[2])) * q + Scalar(c[3])) * q +
          Scalar(c[4])) * q + Scalar(c[5])) /
        ((((Scalar(d[0]) * q + Scalar(d[1])) * q + Scalar(d[2])) * q + Scalar(d[3])) * q + Scalar(1));
  } else {
    const Scalar q = p - Scalar(0.5);
    const Scalar r = q * q;
    x = (((((Scalar(a[0]) * r + Scalar(a[1])) * r + Scalar(a[2])) * r + Scalar(a[3])) * r +
          Scalar(a[4])) * r + Scalar(a[5])) * q /
        (((((Scalar(b[0]) * r + Scalar(b[1])) * r + Scalar(b[2])) * r + Scalar(b[3])) * r +
          Scalar(b[4])) * r + Scalar(1));
  }

  const Scalar sqrt_2pi = std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
  const Scalar e = normal_cdf(x) - p;
  const Scalar u = e * sqrt_2pi * std::exp(x * x / Scalar(2));
  return x - u / (Scalar(1) + x * u / Scalar(2));
}

}  // namespace detail

/// Inverse of normal_cdf on (0, 1). Throws std::domain_error outside.
///
/// The upper half is mapped onto the lower one; 1 - p is exact for
/// p in [0.5, 1), so normal_quantile(1 - p) == -normal_quantile(p) holds
/// bit-for-bit whenever 1 - p is itself representable.
template <typename Scalar>
Scalar normal_quantile(Scalar p) {
  if (!(p > Scalar(0) && p < Scalar(1))) {
    throw std::domain_error("normal_quantile: p must lie in (0, 1), got " + std::to_string(double(p)));
  }
  if (p == Scalar(0.5)) return Scalar(0);
  if (p > Scalar(0.5)) return -detail::normal_quantile_lower(Scalar(1) - p);
  return detail::normal_quantile_lower(p);
}

}  // namespace varq
