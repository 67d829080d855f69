#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "noisefp/matching.hpp"
#include "test_support.hpp"

using namespace noisefp;
using noisefp::testing::gaussian_sample;

namespace {

NoiseSeries series(Modality m, const std::vector<double>& v) {
  return NoiseSeries::from_values(m, v);
}

// Independent evaluation of the template CDF by a linear scan over knots.
double cdf_scan(const QuantileVector& q, double x) {
  if (x < q.front()) return 0.0;
  if (x >= q.back()) return 1.0;
  for (std::size_t k = 100; k-- > 0;)
    if (q[k] <= x) return (double(k) + (x - q[k]) / (q[k + 1] - q[k])) / 100.0;
  return 0.0;
}

// sup |ECDF - F| probed at each breakpoint and just below it.
double ks_template_oracle(const std::vector<double>& probe, const QuantileVector& q) {
  std::vector<double> xs(probe);
  xs.insert(xs.end(), q.begin(), q.end());
  double best = 0.0;
  for (double b : xs) {
    for (double x : {b, std::nextafter(b, -INFINITY)}) {
      std::size_t c = 0;
      for (double v : probe) c += v <= x;
      best = std::max(best, std::abs(double(c) / double(probe.size()) - cdf_scan(q, x)));
    }
  }
  return best;
}

}  // namespace

TEST(BuildTemplate, QuantileEndpointsAreExtremes) {
  const auto v = gaussian_sample(3, 100, 10.0, 2.0);
  const FingerprintTemplate t = build_template("alice", Modality::face, series(Modality::face, v));
  EXPECT_EQ(t.quantiles.front(), *std::min_element(v.begin(), v.end()));
  EXPECT_EQ(t.quantiles.back(), *std::max_element(v.begin(), v.end()));
  EXPECT_TRUE(std::is_sorted(t.quantiles.begin(), t.quantiles.end()));
  EXPECT_EQ(t.enroll_count, 1u);
  EXPECT_EQ(t.moments.n, 100u);
  EXPECT_EQ(t.version, kTemplateVersion);
}

TEST(BuildTemplate, MedianKnotInterpolates) {
  std::vector<double> v(41);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i);
  const auto t = build_template("u", Modality::face, series(Modality::face, v));
  EXPECT_DOUBLE_EQ(t.quantiles[50], 20.0);
  EXPECT_DOUBLE_EQ(t.quantiles[1], 0.4);  // position 40 * 0.01
}

TEST(BuildTemplate, DuplicatedEnrollmentKeepsQuantiles) {
  const NoiseSeries s = series(Modality::fingerprint, gaussian_sample(5, 100));
  const auto one = build_template("u", Modality::fingerprint, s);
  const std::vector<NoiseSeries> two{s, s};
  const auto pooled = build_template("u", Modality::fingerprint, two);
  for (std::size_t k = 0; k < kQuantileKnots; ++k)
    EXPECT_NEAR(pooled.quantiles[k], one.quantiles[k], 1e-12) << k;
  EXPECT_EQ(pooled.enroll_count, 2u);
}

TEST(BuildTemplate, Errors) {
  EXPECT_THROW(build_template("u", Modality::face, series(Modality::face, gaussian_sample(1, 10))),
               TooShortError);
  const std::vector<NoiseSeries> mixed{series(Modality::face, gaussian_sample(1, 50)),
                                       series(Modality::fingerprint, gaussian_sample(2, 50))};
  EXPECT_THROW(build_template("u", Modality::face, mixed), ModalityError);
}

TEST(BuildTemplate, PermutationInvariant) {
  auto v = gaussian_sample(12, 300);
  const auto a = build_template("u", Modality::face, series(Modality::face, v));
  std::mt19937 gen(4);
  std::shuffle(v.begin(), v.end(), gen);
  const auto b = build_template("u", Modality::face, series(Modality::face, v));
  EXPECT_EQ(a.quantiles, b.quantiles);
  EXPECT_NEAR(a.moments.mean, b.moments.mean, 1e-12);
  EXPECT_NEAR(a.tail.combined_dev, b.tail.combined_dev, 1e-12);
}

TEST(MatchScore, SelfMatchAccepts) {
  const NoiseSeries s = series(Modality::face, gaussian_sample(9, 500, 100.0, 5.0));
  const auto t = build_template("u", Modality::face, s);
  const MatchReport r = match_score(t, s);
  EXPECT_EQ(r.tail_gap, 0.0);
  // Against its own interpolated quantiles a sample of 500 can only miss
  // by the ECDF step plus the knot interpolation error.
  EXPECT_LE(r.ks_distance, 0.02);
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(r.threshold, kDefaultThreshold);
  EXPECT_EQ(r.modality, Modality::face);
}

TEST(MatchScore, DisjointRangeIsRejected) {
  const auto t = build_template("u", Modality::face,
                                series(Modality::face, gaussian_sample(9, 500)));
  const MatchReport r = match_score(t, series(Modality::face, gaussian_sample(10, 100, 1e3)));
  EXPECT_EQ(r.ks_distance, 1.0);
  EXPECT_EQ(r.score, 0.0);
  EXPECT_FALSE(r.accepted);
}

TEST(MatchScore, Errors) {
  const auto t = build_template("u", Modality::face,
                                series(Modality::face, gaussian_sample(9, 100)));
  EXPECT_THROW(match_score(t, series(Modality::eye_y, gaussian_sample(1, 100))), ModalityError);
  EXPECT_THROW(match_score(t, series(Modality::face, gaussian_sample(1, 39))), TooShortError);
  EXPECT_THROW(match_score(t, series(Modality::face, gaussian_sample(1, 100)), 1.5), DomainError);
}

TEST(MatchScore, KsAgreesWithScanOracle) {
  std::mt19937 gen(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> n(40, 120), v(-6, 6);
    std::vector<double> enroll(n(gen)), probe(n(gen));
    // Small integer supports force tied knots and tied probe values.
    for (double& x : enroll) x = v(gen);
    for (double& x : probe) x = v(gen) + (trial % 2 ? 0.5 : 0.0);
    if (std::adjacent_find(enroll.begin(), enroll.end(), std::not_equal_to<>()) == enroll.end())
      enroll[0] += 1.0;
    const auto t = build_template("u", Modality::face, series(Modality::face, enroll));
    std::vector<double> sorted(probe);
    std::sort(sorted.begin(), sorted.end());
    EXPECT_NEAR(detail::ks_against_template(sorted, t.quantiles),
                ks_template_oracle(probe, t.quantiles), 1e-12);
  }
}

TEST(MatchScore, ScoreFormulaAndBounds) {
  const auto t = build_template("u", Modality::face,
                                series(Modality::face, gaussian_sample(1, 400)));
  for (std::uint64_t seed = 2; seed < 30; ++seed) {
    const auto r = match_score(t, series(Modality::face, gaussian_sample(seed, 200, 0.1 * seed)));
    EXPECT_DOUBLE_EQ(r.score, (1.0 - r.ks_distance) * std::exp(-r.tail_gap));
    EXPECT_GE(r.score, 0.0);
    EXPECT_LE(r.score, 1.0);
    EXPECT_EQ(r.accepted, r.score >= r.threshold);
  }
}

TEST(MatchScore, FrameIndexRelabelingDoesNotMatter) {
  const auto t = build_template("u", Modality::face,
                                series(Modality::face, gaussian_sample(1, 400)));
  NoiseSeries probe = series(Modality::face, gaussian_sample(2, 200));
  const auto a = match_score(t, probe);
  for (Sample& s : probe.samples) s.frame_index = 3 * s.frame_index + 11;
  const auto b = match_score(t, probe);
  EXPECT_EQ(a.score, b.score);
}

TEST(MatchScore, IncreasingAffineTransformLeavesScore) {
  const auto enroll = gaussian_sample(30, 600);
  const auto probe = gaussian_sample(31, 300, 0.2, 1.1);
  const auto t = build_template("u", Modality::face, series(Modality::face, enroll));
  const auto a = match_score(t, series(Modality::face, probe));
  auto tx = [](std::vector<double> v) {
    for (double& x : v) x = 4.0 * x + 250.0;
    return v;
  };
  const auto t2 = build_template("u", Modality::face, series(Modality::face, tx(enroll)));
  const auto b = match_score(t2, series(Modality::face, tx(probe)));
  EXPECT_NEAR(a.ks_distance, b.ks_distance, 1e-12);
  EXPECT_NEAR(a.tail_gap, b.tail_gap, 1e-9);
  EXPECT_NEAR(a.score, b.score, 1e-9);
}

TEST(MatchScore, GenuineBeatsImpostorThreeSdApart) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto tpl = build_template(
        "g", Modality::face, series(Modality::face, gaussian_sample(1000 + seed, 400)));
    const auto genuine = match_score(tpl, series(Modality::face, gaussian_sample(2000 + seed, 200)));
    const auto impostor =
        match_score(tpl, series(Modality::face, gaussian_sample(3000 + seed, 200, 3.0)));
    wins += genuine.score > impostor.score;
  }
  EXPECT_GE(wins, 99);
}

namespace {
MatchReport report(Modality m, bool accepted) {
  MatchReport r;
  r.modality = m;
  r.accepted = accepted;
  r.score = accepted ? 0.9 : 0.1;
  return r;
}
}  // namespace

TEST(Fuse, TruthTable) {
  for (int mask = 0; mask < 8; ++mask) {
    const bool a = mask & 1, b = mask & 2, c = mask & 4;
    const FusedDecision d = fuse(report(Modality::fingerprint, a), report(Modality::face, b),
                                 report(Modality::eye_y, c));
    EXPECT_EQ(d.authenticated, a && b && c) << mask;
  }
}

TEST(Fuse, OrderDoesNotMatter) {
  const auto fp = report(Modality::fingerprint, true);
  const auto face = report(Modality::face, false);
  const auto eye = report(Modality::eye_y, true);
  const FusedDecision d1 = fuse(fp, face, eye), d2 = fuse(eye, fp, face);
  EXPECT_EQ(d1.authenticated, d2.authenticated);
  EXPECT_EQ(d2.reports[0].modality, Modality::fingerprint);
  EXPECT_EQ(d2.reports[1].modality, Modality::face);
  EXPECT_EQ(d2.reports[2].modality, Modality::eye_y);
}

TEST(Fuse, DuplicateModalityThrows) {
  EXPECT_THROW(fuse(report(Modality::face, true), report(Modality::face, true),
                    report(Modality::eye_y, true)),
               ModalityError);
  EXPECT_THROW(fuse(report(Modality::fingerprint, true), report(Modality::eye_x, true),
                    report(Modality::eye_y, true)),
               ModalityError);
}
