#ifndef NOISEFP_MATCHING_HPP
#define NOISEFP_MATCHING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "extraction.hpp"
#include "stats.hpp"

namespace noisefp {

inline constexpr int kTemplateVersion = 1;
inline constexpr std::size_t kQuantileKnots = 101;
inline constexpr double kDefaultThreshold = 0.70;

using QuantileVector = std::array<double, kQuantileKnots>;

struct FingerprintTemplate {
  std::string user_id;
  Modality modality = Modality::fingerprint;
  QuantileVector quantiles{};  // p = 0.00, 0.01, ..., 1.00
  MomentSummary moments;
  TailReport tail;
  std::size_t enroll_count = 0;
  int version = kTemplateVersion;
};

struct MatchReport {
  Modality modality = Modality::fingerprint;
  double score = 0.0;
  double ks_distance = 1.0;
  double tail_gap = 0.0;
  bool accepted = false;
  double threshold = kDefaultThreshold;
};

struct FusedDecision {
  std::array<MatchReport, 3> reports;  // fingerprint, face, eye
  bool authenticated = false;
};

/// Empirical quantile with linear interpolation between order statistics
/// (position (n - 1) * p). `sorted` must be ascending and non-empty.
inline double sorted_quantile(std::span<const double> sorted, double p) {
  const double pos = p * double(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - double(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline FingerprintTemplate build_template(
    const std::string& user_id, Modality modality,
    std::span<const NoiseSeries> enrollment,
    double tail_fraction = kDefaultTailFraction) {
  if (enrollment.empty()) throw TooShortError("no enrollment series given");
  std::vector<double> pool;
  for (const NoiseSeries& s : enrollment) {
    if (s.modality != modality)
      throw ModalityError("enrollment series has modality " +
                          std::string(to_string(s.modality)) + ", expected " +
                          std::string(to_string(modality)));
    for (const Sample& smp : s.samples) pool.push_back(smp.value);
  }
  if (pool.size() < kMinTailSamples)
    throw TooShortError("pooled enrollment has " + std::to_string(pool.size()) +
                        " values, need at least 40");
  detail::check_tail_fraction(tail_fraction);

  FingerprintTemplate t;
  t.user_id = user_id;
  t.modality = modality;
  t.enroll_count = enrollment.size();
  t.moments = moments(pool);
  std::sort(pool.begin(), pool.end());
  for (std::size_t k = 0; k < kQuantileKnots; ++k)
    t.quantiles[k] = sorted_quantile(pool, double(k) / 100.0);
  t.quantiles.front() = pool.front();
  t.quantiles.back() = pool.back();
  t.tail = detail::tail_from_sorted(pool, t.moments, tail_fraction);
  return t;
}

inline FingerprintTemplate build_template(const std::string& user_id,
                                          Modality modality,
                                          const NoiseSeries& enrollment,
                                          double tail_fraction = kDefaultTailFraction) {
  return build_template(user_id, modality, std::span(&enrollment, 1),
                        tail_fraction);
}

namespace detail {

// CDF obtained by linear interpolation through (quantiles[k], k/100).
// Right-continuous value at x.
inline double template_cdf(const QuantileVector& q, double x) {
  if (x < q.front()) return 0.0;
  if (x >= q.back()) return 1.0;
  const auto k = std::size_t(std::upper_bound(q.begin(), q.end(), x) - q.begin()) - 1;
  return (double(k) + (x - q[k]) / (q[k + 1] - q[k])) / 100.0;
}

// Left limit at x; differs from template_cdf only where knots are tied.
inline double template_cdf_left(const QuantileVector& q, double x) {
  if (x <= q.front()) return 0.0;
  if (x > q.back()) return 1.0;
  const auto j = std::size_t(std::lower_bound(q.begin(), q.end(), x) - q.begin());
  return (double(j - 1) + (x - q[j - 1]) / (q[j] - q[j - 1])) / 100.0;
}

// sup_x |ECDF(x) - F(x)|. Between breakpoints the ECDF is flat and F is
// linear, so checking value and left limit at each breakpoint suffices.
inline double ks_against_template(std::span<const double> sorted,
                                  const QuantileVector& q) {
  std::vector<double> breaks(sorted.begin(), sorted.end());
  breaks.insert(breaks.end(), q.begin(), q.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const double n = double(sorted.size());
  double best = 0.0;
  std::size_t below = 0;  // values < x
  for (double x : breaks) {
    while (below < sorted.size() && sorted[below] < x) ++below;
    std::size_t upto = below;  // values <= x
    while (upto < sorted.size() && sorted[upto] == x) ++upto;
    best = std::max(best, std::abs(double(below) / n - template_cdf_left(q, x)));
    best = std::max(best, std::abs(double(upto) / n - template_cdf(q, x)));
  }
  return std::min(best, 1.0);
}

}  // namespace detail

/// A probe reduced to what matching needs, reusable across templates.
struct PreparedProbe {
  Modality modality = Modality::fingerprint;
  std::vector<double> sorted;
  TailReport tail;
};

inline PreparedProbe prepare_probe(const NoiseSeries& probe,
                                   double tail_fraction = kDefaultTailFraction) {
  if (probe.size() < kMinTailSamples)
    throw TooShortError("probe has " + std::to_string(probe.size()) +
                        " values, need at least 40");
  detail::check_tail_fraction(tail_fraction);
  PreparedProbe p;
  p.modality = probe.modality;
  p.sorted = probe.values();
  const MomentSummary m = moments(p.sorted);
  std::sort(p.sorted.begin(), p.sorted.end());
  p.tail = detail::tail_from_sorted(p.sorted, m, tail_fraction);
  return p;
}

/// Score = (1 - KS) * exp(-tail_gap). The probe's tail fraction must equal
/// the template's for the gap to be meaningful.
inline MatchReport match_score(const FingerprintTemplate& tpl,
                               const PreparedProbe& probe,
                               double threshold = kDefaultThreshold) {
  if (probe.modality != tpl.modality)
    throw ModalityError("probe modality " + std::string(to_string(probe.modality)) +
                        " does not match template modality " +
                        std::string(to_string(tpl.modality)));
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw DomainError("threshold must lie in [0, 1]");
  MatchReport r;
  r.modality = tpl.modality;
  r.threshold = threshold;
  r.ks_distance = detail::ks_against_template(probe.sorted, tpl.quantiles);
  r.tail_gap = std::abs(probe.tail.combined_dev - tpl.tail.combined_dev);
  r.score = (1.0 - r.ks_distance) * std::exp(-r.tail_gap);
  r.accepted = r.score >= threshold;
  return r;
}

inline MatchReport match_score(const FingerprintTemplate& tpl,
                               const NoiseSeries& probe,
                               double threshold = kDefaultThreshold) {
  if (probe.modality != tpl.modality)
    throw ModalityError("probe modality " + std::string(to_string(probe.modality)) +
                        " does not match template modality " +
                        std::string(to_string(tpl.modality)));
  return match_score(tpl, prepare_probe(probe, tpl.tail.tail_fraction), threshold);
}

/// Accepts only if every modality accepted. Reports may arrive in any
/// order but must cover fingerprint, face and exactly one eye axis.
inline FusedDecision fuse(const MatchReport& a, const MatchReport& b,
                          const MatchReport& c) {
  FusedDecision d;
  std::array<bool, 3> seen{};
  for (const MatchReport* r : {&a, &b, &c}) {
    std::size_t slot = 0;
    switch (r->modality) {
      case Modality::fingerprint: slot = 0; break;
      case Modality::face: slot = 1; break;
      case Modality::eye_x:
      case Modality::eye_y: slot = 2; break;
    }
    if (seen[slot])
      throw ModalityError("duplicate modality " +
                          std::string(to_string(r->modality)) + " in fusion");
    seen[slot] = true;
    d.reports[slot] = *r;
  }
  d.authenticated =
      d.reports[0].accepted && d.reports[1].accepted && d.reports[2].accepted;
  return d;
}

}  // namespace noisefp

#endif  // NOISEFP_MATCHING_HPP
