#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace rarefan {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::size_t successes, std::size_t trials,
                                double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct Proportion {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double value = 0.0;
  Interval ci;

  double half_width() const { return 0.5 * (ci.hi - ci.lo); }
  // distance from x to the point estimate, in units of the CI half-width
  bool within(double x, double widths) const {
    return std::abs(x - value) <= widths * half_width();
  }
};

inline Proportion make_proportion(std::size_t successes, std::size_t trials) {
  Proportion p;
  p.successes = successes;
  p.trials = trials;
  p.value = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  p.ci = wilson_interval(successes, trials);
  return p;
}

// One-sample KS distance against a continuous CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) return 1.0;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::max((i + 1) / n - f, f - i / n));
  }
  return d;
}

// KS distance for integer samples against a CDF evaluated at integers.
inline double ks_discrete(std::vector<long> xs, const std::function<double(long)>& cdf) {
  if (xs.empty()) return 1.0;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  const long lo = std::min(0L, xs.front());
  std::size_t i = 0;
  for (long k = lo; k <= xs.back(); ++k) {
    while (i < xs.size() && xs[i] <= k) ++i;
    d = std::max(d, std::abs(i / n - cdf(k)));
  }
  return d;
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 1.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

// Asymptotic Kolmogorov tail with the Stephens small-sample correction.
inline double ks_pvalue(double d, double n_effective) {
  const double sn = std::sqrt(n_effective);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

inline double poisson_cdf(long k, double mean) {
  if (k < 0) return 0.0;
  double term = std::exp(-mean), sum = term;
  for (long i = 1; i <= k; ++i) {
    term *= mean / static_cast<double>(i);
    sum += term;
  }
  return std::min(1.0, sum);
}

}  // namespace rarefan
