// Copyright 2026 The rcsbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace rcs {

inline double mean_of(const Eigen::Ref<const Eigen::ArrayXd>& a) {
  return a.size() == 0 ? 0.0 : a.mean();
}

/// Unbiased sample variance (denominator n-1).
inline double variance_of(const Eigen::Ref<const Eigen::ArrayXd>& a) {
  const Eigen::Index n = a.size();
  if (n < 2) return 0.0;
  const double m = a.mean();
  return (a - m).square().sum() / static_cast<double>(n - 1);
}

inline double stddev_of(const Eigen::Ref<const Eigen::ArrayXd>& a) {
  return std::sqrt(variance_of(a));
}

/// Third standardized moment, computed with the population normalization
/// n in both numerator and denominator.
inline double skewness_of(const Eigen::Ref<const Eigen::ArrayXd>& a) {
  const Eigen::Index n = a.size();
  if (n < 3) return 0.0;
  const double m = a.mean();
  const Eigen::ArrayXd d = a - m;
  const double s2 = d.square().mean();
  if (s2 <= 0.0) return 0.0;
  return d.cube().mean() / std::pow(s2, 1.5);
}

inline double pearson_correlation(const Eigen::Ref<const Eigen::ArrayXd>& a,
                                  const Eigen::Ref<const Eigen::ArrayXd>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson_correlation: size mismatch");
  }
  const Eigen::ArrayXd da = a - a.mean();
  const Eigen::ArrayXd db = b - b.mean();
  const double den = std::sqrt(da.square().sum() * db.square().sum());
  return den == 0.0 ? 0.0 : da.matrix().dot(db.matrix()) / den;
}

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Standard normal quantile (Acklam's rational approximation, |rel err| < 1.2e-9).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

/// Upper-tail probability of a chi-square with k degrees of freedom via the
/// Wilson-Hilferty cube-root normal approximation.  Accurate to a few parts
/// per thousand for the large k used here; not suitable for k < 10.
inline double chi2_sf_wh(double x, double k) {
  if (x <= 0.0) return 1.0;
  const double t = std::cbrt(x / k);
  const double z = (t - (1.0 - 2.0 / (9.0 * k))) / std::sqrt(2.0 / (9.0 * k));
  return 1.0 - normal_cdf(z);
}

/// Upper quantile companion of chi2_sf_wh: x with SF(x) = alpha.
inline double chi2_upper_quantile_wh(double alpha, double k) {
  const double z = normal_quantile(1.0 - alpha);
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

/// Kolmogorov upper tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample KS statistic of `values` against the CDF `cdf`.
/// The input need not be sorted.
inline double ks_statistic(std::vector<double> values,
                           const std::function<double(double)>& cdf) {
  if (values.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

/// Asymptotic KS p-value with Stephens' small-sample correction.
inline double ks_pvalue(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  return kolmogorov_tail(d * (rn + 0.12 + 0.11 / rn));
}

/// CDF of the size-biased mixture  phi * x e^{-x} + (1 - phi) * e^{-x}:
/// F(v) = 1 - e^{-v} (1 + phi v).
inline double size_biased_mixture_cdf(double v, double phi) {
  if (v <= 0.0) return 0.0;
  return 1.0 - std::exp(-v) * (1.0 + phi * v);
}

/// Density companion of size_biased_mixture_cdf.
inline double size_biased_mixture_pdf(double v, double phi) {
  if (v < 0.0) return 0.0;
  return std::exp(-v) * (phi * v + 1.0 - phi);
}

}  // namespace rcs
