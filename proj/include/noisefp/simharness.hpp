#ifndef NOISEFP_SIMHARNESS_HPP
#define NOISEFP_SIMHARNESS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "extraction.hpp"
#include "matching.hpp"
#include "stats.hpp"

namespace noisefp {

// All randomness comes from std::mt19937_64 (fully specified by the
// standard) seeded through SplitMix64, with our own uniform and normal
// transforms so results do not depend on the standard library's
// distribution implementations.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(splitmix64(a) ^ b);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the paired variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  std::size_t index(std::size_t n) {
    // Rejection sampling keeps this exactly uniform.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do x = engine_(); while (x >= limit);
    return std::size_t(x % n);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Normal core with probability 1 - tail_weight, otherwise a normal with
/// the same mean and tail_scale times the spread.
struct MixtureParams {
  double core_mean = 0.0;
  double core_sd = 1.0;
  double tail_weight = 0.05;
  double tail_scale = 3.0;

  void validate() const {
    if (!std::isfinite(core_mean) || !std::isfinite(core_sd) || !(core_sd > 0.0))
      throw DomainError("core_sd must be finite and > 0");
    if (!(tail_weight >= 0.0 && tail_weight <= 0.2))
      throw DomainError("tail_weight must lie in [0, 0.2]");
    if (!std::isfinite(tail_scale) || !(tail_scale >= 1.0))
      throw DomainError("tail_scale must be finite and >= 1");
  }
};

struct SyntheticUserSpec {
  std::uint64_t seed = 0;
  std::array<MixtureParams, 4> params{};  // indexed by Modality

  MixtureParams& operator[](Modality m) { return params[std::size_t(m)]; }
  const MixtureParams& operator[](Modality m) const {
    return params[std::size_t(m)];
  }
};

inline NoiseSeries generate_series(const SyntheticUserSpec& spec,
                                   Modality modality, std::size_t n,
                                   std::uint64_t draw_seed) {
  if (n < kMinTailSamples)
    throw TooShortError("synthetic series needs n >= 40");
  const MixtureParams& p = spec[modality];
  p.validate();
  Rng rng(mix_seed(mix_seed(spec.seed, std::uint64_t(modality) + 1), draw_seed));
  NoiseSeries s{modality, {}};
  s.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool tail = rng.uniform() < p.tail_weight;
    const double sd = tail ? p.tail_scale * p.core_sd : p.core_sd;
    s.samples.push_back({std::int64_t(i), p.core_mean + sd * rng.normal()});
  }
  return s;
}

struct RocResult {
  std::vector<double> thresholds;
  std::vector<double> far;
  std::vector<double> frr;
  double eer = 0.0;
  double auc = 0.0;
};

inline std::vector<double> threshold_sweep(double lo, double hi, std::size_t steps) {
  if (steps < 2 || !(hi > lo))
    throw DomainError("threshold sweep needs steps >= 2 and hi > lo");
  std::vector<double> t(steps);
  for (std::size_t i = 0; i < steps; ++i)
    t[i] = lo + (hi - lo) * double(i) / double(steps - 1);
  t.back() = hi;
  return t;
}

/// FAR/FRR per threshold (accept iff score >= threshold), EER by linear
/// interpolation at the FAR = FRR crossing, AUC by trapezoids over the
/// sweep's ROC points plus the (0,0) and (1,1) corners.
inline RocResult roc_from_scores(std::span<const double> genuine,
                                 std::span<const double> impostor,
                                 std::vector<double> thresholds) {
  if (genuine.empty() || impostor.empty())
    throw EmptySeriesError("ROC needs genuine and impostor scores");
  if (thresholds.empty()) throw DomainError("empty threshold sweep");
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw DomainError("threshold sweep must be ascending");

  std::vector<double> g(genuine.begin(), genuine.end());
  std::vector<double> im(impostor.begin(), impostor.end());
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());

  RocResult r;
  r.thresholds = std::move(thresholds);
  for (double t : r.thresholds) {
    const auto imp_below = std::lower_bound(im.begin(), im.end(), t) - im.begin();
    const auto gen_below = std::lower_bound(g.begin(), g.end(), t) - g.begin();
    r.far.push_back(double(std::ptrdiff_t(im.size()) - imp_below) / double(im.size()));
    r.frr.push_back(double(gen_below) / double(g.size()));
  }

  const std::size_t k = r.thresholds.size();
  r.eer = -1.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = r.far[i] - r.frr[i];
    if (d == 0.0) {
      r.eer = r.far[i];
      break;
    }
    if (i + 1 < k) {
      const double d_next = r.far[i + 1] - r.frr[i + 1];
      if (d > 0.0 && d_next < 0.0) {
        const double s = d / (d - d_next);
        r.eer = r.far[i] + s * (r.far[i + 1] - r.far[i]);
        break;
      }
    }
  }
  if (r.eer < 0.0) {
    // Sweep never crosses: report the closest end.
    const double lo_gap = std::abs(r.far.front() - r.frr.front());
    const double hi_gap = std::abs(r.far.back() - r.frr.back());
    r.eer = lo_gap <= hi_gap ? 0.5 * (r.far.front() + r.frr.front())
                             : 0.5 * (r.far.back() + r.frr.back());
  }

  double auc = 0.0, prev_far = 0.0, prev_tpr = 0.0;
  for (std::size_t i = k; i-- > 0;) {
    const double tpr = 1.0 - r.frr[i];
    auc += (r.far[i] - prev_far) * 0.5 * (tpr + prev_tpr);
    prev_far = r.far[i];
    prev_tpr = tpr;
  }
  auc += (1.0 - prev_far) * 0.5 * (1.0 + prev_tpr);
  r.auc = std::clamp(auc, 0.0, 1.0);
  return r;
}

struct ProtocolConfig {
  std::size_t enroll_n = 1000;
  std::size_t probe_n = 500;
  std::size_t probes_per_user = 10;
  std::vector<double> thresholds = threshold_sweep(0.0, 1.0, 101);
  double tail_fraction = kDefaultTailFraction;
  Modality eye_axis = Modality::eye_y;
};

struct ProtocolResult {
  RocResult roc;
  std::vector<double> genuine_scores;   // fused (minimum over modalities)
  std::vector<double> impostor_scores;
};

namespace detail {
inline constexpr std::uint64_t kEnrollDraw = 0;
inline constexpr std::uint64_t probe_draw(std::size_t j) { return 1 + j; }
}  // namespace detail

/// Enrolls every user on fingerprint, face and one eye axis, then scores
/// each user's fresh probes against every template. A trial is accepted at
/// threshold t iff all three modality scores are >= t, so the fused score
/// is the minimum of the three.
inline ProtocolResult run_protocol(std::span<const SyntheticUserSpec> population,
                                   const ProtocolConfig& cfg) {
  if (population.size() < 2)
    throw PopulationError("population needs at least 2 users");
  if (cfg.enroll_n < kMinTailSamples || cfg.probe_n < kMinTailSamples)
    throw TooShortError("enroll and probe sizes must be >= 40");
  if (cfg.probes_per_user < 1) throw DomainError("probes_per_user must be >= 1");

  const std::array<Modality, 3> mods{Modality::fingerprint, Modality::face,
                                     cfg.eye_axis};
  const std::size_t users = population.size();

  std::vector<std::array<FingerprintTemplate, 3>> templates(users);
  for (std::size_t u = 0; u < users; ++u)
    for (std::size_t m = 0; m < 3; ++m)
      templates[u][m] = build_template(
          "user" + std::to_string(u), mods[m],
          generate_series(population[u], mods[m], cfg.enroll_n, detail::kEnrollDraw),
          cfg.tail_fraction);

  ProtocolResult out;
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t j = 0; j < cfg.probes_per_user; ++j) {
      std::array<PreparedProbe, 3> probe;
      for (std::size_t m = 0; m < 3; ++m)
        probe[m] = prepare_probe(generate_series(population[u], mods[m], cfg.probe_n,
                                                 detail::probe_draw(j)),
                                 cfg.tail_fraction);
      for (std::size_t v = 0; v < users; ++v) {
        double fused = 1.0;
        for (std::size_t m = 0; m < 3; ++m)
          fused = std::min(fused, match_score(templates[v][m], probe[m], 0.0).score);
        (u == v ? out.genuine_scores : out.impostor_scores).push_back(fused);
      }
    }
  }
  out.roc = roc_from_scores(out.genuine_scores, out.impostor_scores, cfg.thresholds);
  return out;
}

enum class AttackKind { replay, naive_gaussian, random };

inline constexpr std::string_view to_string(AttackKind k) noexcept {
  switch (k) {
    case AttackKind::replay: return "replay";
    case AttackKind::naive_gaussian: return "naive_gaussian";
    case AttackKind::random: return "random";
  }
  return "unknown";
}

inline AttackKind parse_attack_kind(std::string_view s) {
  if (s == "replay") return AttackKind::replay;
  if (s == "naive_gaussian") return AttackKind::naive_gaussian;
  if (s == "random") return AttackKind::random;
  throw ConfigError("unknown attack kind '" + std::string(s) + "'");
}

struct AttackSpec {
  AttackKind kind = AttackKind::replay;
  NoiseSeries observation;
};

inline constexpr std::size_t kMinAttackTrials = 100;

/// One forged probe of `probe_n` values built from the observation.
inline NoiseSeries forge_probe(const AttackSpec& attack, std::size_t probe_n,
                               Rng& rng) {
  const std::vector<double> obs = attack.observation.values();
  std::vector<double> out(probe_n);
  switch (attack.kind) {
    case AttackKind::replay:
      for (double& v : out) v = obs[rng.index(obs.size())];
      break;
    case AttackKind::naive_gaussian: {
      const MomentSummary m = moments(obs);
      for (double& v : out) v = m.mean + m.sd * rng.normal();
      break;
    }
    case AttackKind::random: {
      const auto [lo, hi] = std::minmax_element(obs.begin(), obs.end());
      for (double& v : out) v = rng.uniform(*lo, *hi);
      break;
    }
  }
  return NoiseSeries::from_values(attack.observation.modality, out);
}

/// Fraction of forged probes the victim template accepts. `probe_n` of 0
/// means "same size as the observation".
inline double run_attack(const FingerprintTemplate& victim, const AttackSpec& attack,
                         std::size_t trials, double threshold,
                         std::uint64_t seed, std::size_t probe_n = 0) {
  if (attack.observation.empty())
    throw EmptySeriesError("attack observation is empty");
  if (trials < kMinAttackTrials)
    throw DomainError("attack needs at least 100 trials");
  if (probe_n == 0) probe_n = attack.observation.size();
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng(mix_seed(seed, i));
    const NoiseSeries forged = forge_probe(attack, probe_n, rng);
    if (match_score(victim, forged, threshold).accepted) ++accepted;
  }
  return double(accepted) / double(trials);
}

/// Acceptance rate of fresh genuine probes, the baseline an attack is
/// compared against. Probe draws start at `first_draw`.
inline double genuine_acceptance(const FingerprintTemplate& tpl,
                                 const SyntheticUserSpec& user, std::size_t probe_n,
                                 std::size_t trials, double threshold,
                                 std::uint64_t first_draw) {
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const NoiseSeries probe = generate_series(user, tpl.modality, probe_n, first_draw + i);
    if (match_score(tpl, probe, threshold).accepted) ++accepted;
  }
  return double(accepted) / double(trials);
}

}  // namespace noisefp

#endif  // NOISEFP_SIMHARNESS_HPP
