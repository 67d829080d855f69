#ifndef NOISEFP_STATS_HPP
#define NOISEFP_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "error.hpp"
#include "extraction.hpp"

namespace noisefp {

struct MomentSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

struct Histogram {
  std::vector<double> bin_edges;  // k + 1, strictly increasing
  std::vector<std::size_t> counts;
};

struct QQPoint {
  double theoretical_quantile = 0.0;
  double ordered_value = 0.0;
};

struct QQData {
  std::vector<QQPoint> points;
  double fit_mean = 0.0;
  double fit_sd = 0.0;
};

struct TailReport {
  double tail_fraction = 0.05;
  double lower_dev = 0.0;
  double upper_dev = 0.0;
  double combined_dev = 0.0;
  double normality_stat = 0.0;  // A^2 times the small-sample factor
  bool normality_pass = false;
};

/// Upper critical value of the adjusted Anderson-Darling statistic at
/// alpha = 0.01 with mean and variance estimated from the sample.
inline constexpr double kAndersonDarlingCritical = 1.092;
inline constexpr double kDefaultTailFraction = 0.05;
inline constexpr std::size_t kMinTailSamples = 40;

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

namespace detail {

// log Phi(z) without underflow deep in the lower tail.
inline double log_normal_cdf(double z) {
  if (z > -30.0) return std::log(normal_cdf(z));
  // Mills-ratio asymptotic series.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(series);
}

// Acklam's rational approximation, lower half (p <= 0.5).
inline double inv_norm_cdf_rational(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Standard normal quantile: rational approximation plus one Halley step.
inline double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("inv_norm_cdf requires 0 < p < 1");
  if (p == 0.5) return 0.0;
  // 1 - p is exact for p >= 0.5, so the upper half mirrors the lower.
  if (p > 0.5) return -inv_norm_cdf(1.0 - p);
  double x = detail::inv_norm_cdf_rational(p);
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

inline MomentSummary moments(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw TooShortError("moments need at least 2 values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi)
    throw DegenerateError("zero variance: skewness and kurtosis undefined");

  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / double(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double sd = std::sqrt(m2 / double(n - 1));
  if (!(sd > 0.0))
    throw DegenerateError("zero variance: skewness and kurtosis undefined");
  const double sd2 = sd * sd;
  return MomentSummary{n, mean, sd, (m3 / double(n)) / (sd2 * sd),
                       (m4 / double(n)) / (sd2 * sd2) - 3.0};
}

/// Equal-width bins over [min, max], last bin right-closed. Non-finite
/// values are ignored. A zero-range sample yields one bin centred on it.
inline Histogram histogram(std::span<const double> values, std::size_t k) {
  if (k < 1) throw DomainError("histogram needs at least one bin");
  std::vector<double> finite;
  finite.reserve(values.size());
  for (double v : values)
    if (std::isfinite(v)) finite.push_back(v);
  if (finite.empty()) throw EmptySeriesError("histogram of empty series");

  const auto [lo_it, hi_it] = std::minmax_element(finite.begin(), finite.end());
  const double lo = *lo_it, hi = *hi_it;
  Histogram h;
  if (!(hi > lo)) {
    h.bin_edges = {lo - 0.5, lo + 0.5};
    h.counts = {finite.size()};
    return h;
  }
  const double range = hi - lo;
  h.bin_edges.resize(k + 1);
  for (std::size_t j = 0; j < k; ++j)
    h.bin_edges[j] = lo + range * (double(j) / double(k));
  h.bin_edges[k] = hi;
  h.counts.assign(k, 0);
  for (double v : finite) {
    auto bin = static_cast<std::size_t>(std::floor(double(k) * (v - lo) / range));
    h.counts[std::min(bin, k - 1)]++;
  }
  return h;
}

namespace detail {

// Hazen plotting positions against a normal fitted by moments.
inline QQData qq_from_sorted(std::span<const double> sorted,
                             const MomentSummary& m) {
  const std::size_t n = sorted.size();
  QQData q;
  q.fit_mean = m.mean;
  q.fit_sd = m.sd;
  q.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = (double(i) + 0.5) / double(n);
    q.points[i] = {m.mean + m.sd * inv_norm_cdf(p), sorted[i]};
  }
  return q;
}

inline std::size_t tail_count(double fraction, std::size_t n) {
  // Guard against products like 0.05 * 60 landing a hair above 3.
  const double raw = fraction * double(n);
  const double nearest = std::round(raw);
  const double k = std::abs(raw - nearest) < 1e-9 ? nearest : std::ceil(raw);
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

inline double anderson_darling(std::span<const double> sorted,
                               const MomentSummary& m) {
  const std::size_t n = sorted.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z_lo = (sorted[i] - m.mean) / m.sd;
    const double z_hi = (sorted[n - 1 - i] - m.mean) / m.sd;
    // log(1 - Phi(z)) == log Phi(-z)
    acc += double(2 * i + 1) * (log_normal_cdf(z_lo) + log_normal_cdf(-z_hi));
  }
  const double a2 = -double(n) - acc / double(n);
  const double nn = double(n);
  return a2 * (1.0 + 4.0 / nn - 25.0 / (nn * nn));
}

inline TailReport tail_from_sorted(std::span<const double> sorted,
                                   const MomentSummary& m, double fraction) {
  const std::size_t n = sorted.size();
  const std::size_t k = tail_count(fraction, n);
  double lower = 0.0, upper = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double p_lo = (double(i) + 0.5) / double(n);
    lower += std::abs(sorted[i] - (m.mean + m.sd * inv_norm_cdf(p_lo)));
    const std::size_t j = n - 1 - i;
    const double p_hi = (double(j) + 0.5) / double(n);
    upper += std::abs(sorted[j] - (m.mean + m.sd * inv_norm_cdf(p_hi)));
  }
  TailReport r;
  r.tail_fraction = fraction;
  r.lower_dev = lower / (double(k) * m.sd);
  r.upper_dev = upper / (double(k) * m.sd);
  r.combined_dev = 0.5 * (r.lower_dev + r.upper_dev);
  r.normality_stat = anderson_darling(sorted, m);
  r.normality_pass = r.normality_stat < kAndersonDarlingCritical;
  return r;
}

inline void check_tail_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction < 0.5))
    throw DomainError("tail fraction must lie in (0, 0.5)");
}

}  // namespace detail

inline QQData qq_normal(std::span<const double> values) {
  if (values.size() < 3) throw TooShortError("QQ plot needs at least 3 values");
  const MomentSummary m = moments(values);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return detail::qq_from_sorted(sorted, m);
}

/// Mean normalised gap between the outer order statistics and the fitted
/// normal quantiles, plus an Anderson-Darling normality gate.
inline TailReport tail_deviation(std::span<const double> values,
                                 double tail_fraction = kDefaultTailFraction) {
  detail::check_tail_fraction(tail_fraction);
  if (values.size() < kMinTailSamples)
    throw TooShortError("tail deviation needs at least 40 values");
  const MomentSummary m = moments(values);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return detail::tail_from_sorted(sorted, m, tail_fraction);
}

namespace detail {

// Both inputs sorted ascending. Differences are formed as
// |i*m - j*n| / (n*m) so equal ECDF steps cancel exactly.
inline double ks_sorted(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size(), m = b.size();
  std::size_t i = 0, j = 0;
  std::uint64_t best = 0;
  while (i < n && j < m) {
    const double x = std::min(a[i], b[j]);
    while (i < n && a[i] == x) ++i;
    while (j < m && b[j] == x) ++j;
    const std::uint64_t lhs = std::uint64_t(i) * m, rhs = std::uint64_t(j) * n;
    best = std::max(best, lhs > rhs ? lhs - rhs : rhs - lhs);
  }
  return double(best) / (double(n) * double(m));
}

}  // namespace detail

/// Exact two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptySeriesError("KS of an empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return detail::ks_sorted(sa, sb);
}

// NoiseSeries overloads.

inline MomentSummary moments(const NoiseSeries& s) { return moments(s.values()); }
inline Histogram histogram(const NoiseSeries& s, std::size_t k) {
  return histogram(s.values(), k);
}
inline QQData qq_normal(const NoiseSeries& s) { return qq_normal(s.values()); }
inline TailReport tail_deviation(const NoiseSeries& s,
                                 double tail_fraction = kDefaultTailFraction) {
  return tail_deviation(s.values(), tail_fraction);
}
inline double ks_two_sample(const NoiseSeries& a, const NoiseSeries& b) {
  return ks_two_sample(a.values(), b.values());
}

}  // namespace noisefp

#endif  // NOISEFP_STATS_HPP
