// Copyright 2026 The varcc Authors
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

#include <cmath>
#include <limits>
#include <stdexcept>

namespace varcc::stats {

// Inverse standard normal CDF, Acklam's rational approximation refined with
// one Halley step; absolute error well below 1e-12 over (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must be in (0,1)");
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
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement against the CDF expressed via erfc.
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

// Survival function of the chi-square distribution with 1 degree of freedom.
inline double chi2_sf_1df(double x) {
  if (x < 0.0) throw std::domain_error("chi2_sf_1df: negative statistic");
  return std::erfc(std::sqrt(x / 2.0));
}

// log10 of chi2_sf_1df, finite even where the survival value underflows a
// double. Uses the erfc asymptotic expansion in the deep tail.
inline double chi2_sf_1df_log10(double x) {
  double z = std::sqrt(x / 2.0);
  if (z < 20.0) return std::log10(std::erfc(z));
  double series = 1.0 - 1.0 / (2.0 * z * z) + 3.0 / (4.0 * z * z * z * z) -
                  15.0 / (8.0 * std::pow(z, 6.0));
  double ln_p = -z * z - std::log(z * std::sqrt(M_PI)) + std::log(series);
  return ln_p / std::log(10.0);
}

// log10 of the two-sided exact binomial McNemar p-value:
//   p = min(1, 2 * sum_{k=0..m} C(n,k) / 2^n),  m = min(b,c), n = b+c.
// Evaluated in log space so values far below DBL_MIN stay meaningful.
inline double binomial_two_sided_log10(long b, long c) {
  long n = b + c;
  long m = b < c ? b : c;
  if (n <= 0) throw std::domain_error("binomial_two_sided_log10: empty discordant set");
  double ln2 = std::log(2.0);
  // log of terms C(n,k)*2^-n via lgamma; summed with a running logsumexp.
  double log_sum = -std::numeric_limits<double>::infinity();
  for (long k = 0; k <= m; ++k) {
    double lt = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                n * ln2;
    if (lt > log_sum) {
      log_sum = lt + std::log1p(std::exp(log_sum - lt));
    } else {
      log_sum = log_sum + std::log1p(std::exp(lt - log_sum));
    }
  }
  double log_p = log_sum + ln2;
  if (log_p > 0.0) log_p = 0.0;
  return log_p / std::log(10.0);
}

}  // namespace varcc::stats
