// Enrolls two synthetic users from generated captures, then verifies a
// genuine probe set and an impostor probe set against the first user.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include "noisefp/noisefp.hpp"

using namespace noisefp;

namespace {

RawImage skin_capture(std::uint64_t seed, Rgb base, std::size_t side = 64) {
  Rng rng(seed);
  RawImage img(side, side);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) {
      auto ch = [&](std::uint8_t v) {
        return std::uint8_t(std::clamp(std::lround(v + 3.0 * rng.normal()), 0L, 255L));
      };
      img.at(r, c) = Rgb{ch(base.r), ch(base.g), ch(base.b)};
    }
  return img;
}

EyeTrace eye_capture(std::uint64_t seed, double jitter, std::size_t n = 600) {
  Rng rng(seed);
  EyeTrace t;
  t.stimulus_onset = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    t.samples.push_back({0.01 * double(i), 0.5 + jitter * rng.normal(),
                         0.5 + jitter * rng.normal()});
  return t;
}

NoiseSeries image_series(const RawImage& img, Modality m) {
  Mask mask = skin_mask(img);
  if (m == Modality::face) mask = largest_region(mask);
  return frame_rgb_sums(img, mask, FrameSpec{2}, m);
}

struct Person {
  const char* name;
  Rgb finger, face;
  double eye_jitter;
};

void enroll(const TemplateStore& store, const Person& p, std::uint64_t seed) {
  store.save(build_template(p.name, Modality::fingerprint,
                            image_series(skin_capture(seed, p.finger), Modality::fingerprint)));
  store.save(build_template(p.name, Modality::face,
                            image_series(skin_capture(seed + 1, p.face), Modality::face)));
  store.save(build_template(p.name, Modality::eye_y,
                            eye_displacements(eye_capture(seed + 2, p.eye_jitter)).second));
}

void verify(const TemplateStore& store, const char* claimed, const Person& presenter,
            std::uint64_t seed) {
  const auto fp = match_score(
      store.load(claimed, Modality::fingerprint),
      image_series(skin_capture(seed, presenter.finger), Modality::fingerprint));
  const auto face = match_score(store.load(claimed, Modality::face),
                                image_series(skin_capture(seed + 1, presenter.face), Modality::face));
  const auto eye = match_score(store.load(claimed, Modality::eye_y),
                               eye_displacements(eye_capture(seed + 2, presenter.eye_jitter)).second);
  const FusedDecision d = fuse(fp, face, eye);
  std::printf("%s presents as %s:\n", presenter.name, claimed);
  for (const MatchReport& r : d.reports)
    std::printf("  %-11s score=%.3f ks=%.3f tail_gap=%.3f %s\n", std::string(to_string(r.modality)).c_str(),
                r.score, r.ks_distance, r.tail_gap, r.accepted ? "accept" : "reject");
  std::printf("  verdict: %s\n", d.authenticated ? "AUTHENTICATED" : "REJECTED");
}

}  // namespace

int main() {
  const auto root = std::filesystem::temp_directory_path() / "noisefp-demo-store";
  std::filesystem::remove_all(root);
  const TemplateStore store(root);

  const Person alice{"alice", {180, 120, 100}, {190, 130, 105}, 0.010};
  const Person bob{"bob", {200, 140, 110}, {170, 115, 95}, 0.020};
  enroll(store, alice, 1);
  enroll(store, bob, 11);
  std::printf("templates stored under %s\n\n", root.string().c_str());

  verify(store, "alice", alice, 101);
  verify(store, "alice", bob, 201);

  const NoiseSeries s = image_series(skin_capture(301, alice.face), Modality::face);
  const TailReport t = tail_deviation(s);
  std::printf("\nalice face noise: n=%zu combined_dev=%.4f A2=%.3f (%s)\n", s.size(),
              t.combined_dev, t.normality_stat, t.normality_pass ? "gaussian" : "non-gaussian");

  std::filesystem::remove_all(root);
  return 0;
}
