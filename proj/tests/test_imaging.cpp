#include <gtest/gtest.h>

#include <queue>
#include <random>
#include <string>

#include "noisefp/image.hpp"

using namespace noisefp;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) {
  return {s.begin(), s.end()};
}

RawImage random_image(std::mt19937& gen, std::size_t w, std::size_t h) {
  std::uniform_int_distribution<int> ch(0, 255);
  RawImage img(w, h);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      img.at(r, c) = Rgb{std::uint8_t(ch(gen)), std::uint8_t(ch(gen)), std::uint8_t(ch(gen))};
  return img;
}

Mask random_mask(std::mt19937& gen, std::size_t w, std::size_t h, double p) {
  std::bernoulli_distribution on(p);
  Mask m(w, h);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) m.set(r, c, on(gen));
  return m;
}

// Counts 4-connected components by BFS, independent of largest_region.
std::size_t component_count(const Mask& m) {
  std::vector<char> seen(m.size(), 0);
  std::size_t comps = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i] || seen[i]) continue;
    ++comps;
    std::queue<std::size_t> q;
    q.push(i);
    seen[i] = 1;
    while (!q.empty()) {
      const std::size_t j = q.front();
      q.pop();
      const std::size_t r = j / m.width(), c = j % m.width();
      const std::pair<long, long> nb[] = {{long(r) - 1, long(c)}, {long(r) + 1, long(c)},
                                          {long(r), long(c) - 1}, {long(r), long(c) + 1}};
      for (auto [nr, nc] : nb) {
        if (nr < 0 || nc < 0 || nr >= long(m.height()) || nc >= long(m.width())) continue;
        const std::size_t k = std::size_t(nr) * m.width() + std::size_t(nc);
        if (m[k] && !seen[k]) {
          seen[k] = 1;
          q.push(k);
        }
      }
    }
  }
  return comps;
}

}  // namespace

TEST(DecodePpm, TwoPixelImage) {
  auto data = bytes_of("P6 2 1 255\n");
  for (int v : {255, 255, 255, 0, 0, 0}) data.push_back(std::uint8_t(v));
  const RawImage img = decode_ppm(data);
  ASSERT_EQ(img.width(), 2u);
  ASSERT_EQ(img.height(), 1u);
  EXPECT_EQ(img.at(0, 0), (Rgb{255, 255, 255}));
  EXPECT_EQ(img.at(0, 1), (Rgb{0, 0, 0}));
}

TEST(DecodePpm, SkipsHeaderComments) {
  auto data = bytes_of("P6\n# made by a scanner\n1 # width done\n1\n255\n");
  for (int v : {1, 2, 3}) data.push_back(std::uint8_t(v));
  EXPECT_EQ(decode_ppm(data).at(0, 0), (Rgb{1, 2, 3}));
}

TEST(DecodePpm, PixelBytesMayLookLikeWhitespace) {
  auto data = bytes_of("P6 1 1 255\n");
  for (int v : {'\n', ' ', '#'}) data.push_back(std::uint8_t(v));
  EXPECT_EQ(decode_ppm(data).at(0, 0), (Rgb{'\n', ' ', '#'}));
}

TEST(DecodePpm, TruncatedPixelsThrow) {
  auto data = bytes_of("P6 1 1 255\n");
  data.push_back(10);
  data.push_back(20);
  EXPECT_THROW(decode_ppm(data), TruncationError);
}

TEST(DecodePpm, WrongMagicThrows) {
  EXPECT_THROW(decode_ppm(bytes_of("P5 1 1 255\n\x01")), FormatError);
  EXPECT_THROW(decode_ppm(bytes_of("")), FormatError);
  EXPECT_THROW(decode_ppm(bytes_of("P6 x 1 255\n")), FormatError);
}

TEST(DecodePpm, MaxvalOtherThan255IsUnsupported) {
  EXPECT_THROW(decode_ppm(bytes_of("P6 1 1 65535\n\0\0\0\0\0\0")), UnsupportedError);
  EXPECT_THROW(decode_ppm(bytes_of("P6 1 1 15\n\0\0\0")), UnsupportedError);
}

TEST(DecodePpm, ZeroDimensionIsFormatError) {
  EXPECT_THROW(decode_ppm(bytes_of("P6 0 1 255\n")), FormatError);
}

TEST(DecodePpm, RoundTripsRandomImages) {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 17);
    const RawImage img = random_image(gen, dim(gen), dim(gen));
    EXPECT_EQ(decode_ppm(encode_ppm(img)), img);
  }
}

TEST(SkinMask, ChromaOfSkinTone) {
  const auto [cb, cr] = chroma(Rgb{200, 120, 100});
  EXPECT_EQ(cb, 105);
  EXPECT_EQ(cr, 170);
  RawImage img(1, 1, Rgb{200, 120, 100});
  EXPECT_TRUE(skin_mask(img).at(0, 0));
}

TEST(SkinMask, WhiteAndBlackAreExcluded) {
  EXPECT_EQ(chroma(Rgb{255, 255, 255}), std::make_pair(128, 128));
  EXPECT_EQ(chroma(Rgb{0, 0, 0}), std::make_pair(128, 128));
  RawImage img(2, 1, std::vector<Rgb>{{255, 255, 255}, {0, 0, 0}});
  const Mask m = skin_mask(img);
  EXPECT_FALSE(m.at(0, 0));
  EXPECT_FALSE(m.at(0, 1));
}

TEST(SkinMask, RejectsInvertedBounds) {
  RawImage img(1, 1);
  SkinMaskParams p;
  p.cb_min = 130;
  EXPECT_THROW(skin_mask(img, p), DomainError);
  p = {};
  p.cr_max = 300;
  EXPECT_THROW(skin_mask(img, p), DomainError);
}

TEST(SkinMask, PermutingRowsPermutesMask) {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 30; ++trial) {
    RawImage img = random_image(gen, 6, 5);
    const Mask before = skin_mask(img);
    for (std::size_t c = 0; c < img.width(); ++c) std::swap(img.at(1, c), img.at(3, c));
    const Mask after = skin_mask(img);
    for (std::size_t c = 0; c < img.width(); ++c) {
      EXPECT_EQ(after.at(1, c), before.at(3, c));
      EXPECT_EQ(after.at(3, c), before.at(1, c));
      EXPECT_EQ(after.at(0, c), before.at(0, c));
    }
  }
}

TEST(LargestRegion, KeepsBiggerBlob) {
  Mask m(6, 3);
  m.set(0, 0, true);
  m.set(0, 1, true);
  m.set(1, 1, true);  // 3-pixel blob
  m.set(2, 4, true);
  m.set(2, 5, true);  // 2-pixel blob
  const Mask out = largest_region(m);
  EXPECT_EQ(out.count(), 3u);
  EXPECT_TRUE(out.at(1, 1));
  EXPECT_FALSE(out.at(2, 4));
}

TEST(LargestRegion, EmptyStaysEmpty) {
  const Mask m(4, 4);
  EXPECT_EQ(largest_region(m), m);
}

TEST(LargestRegion, TieGoesToEarliestComponent) {
  Mask m(8, 8);
  m.set(0, 0, true);
  m.set(0, 1, true);
  m.set(5, 5, true);
  m.set(5, 6, true);
  const Mask out = largest_region(m);
  EXPECT_TRUE(out.at(0, 0));
  EXPECT_TRUE(out.at(0, 1));
  EXPECT_FALSE(out.at(5, 5));
}

TEST(LargestRegion, DiagonalPixelsAreSeparateComponents) {
  Mask m(2, 2);
  m.set(0, 0, true);
  m.set(1, 1, true);
  EXPECT_EQ(largest_region(m).count(), 1u);
}

TEST(LargestRegion, OutputIsSingleComponentSubset) {
  std::mt19937 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Mask m = random_mask(gen, 12, 9, 0.45);
    const Mask out = largest_region(m);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (out[i]) ASSERT_TRUE(m[i]);
    if (m.count() > 0) EXPECT_EQ(component_count(out), 1u);
    EXPECT_LE(mask_coverage(out), mask_coverage(m));
  }
}

TEST(MaskCoverage, Fractions) {
  EXPECT_DOUBLE_EQ(mask_coverage(Mask(2, 2, true)), 1.0);
  EXPECT_DOUBLE_EQ(mask_coverage(Mask(2, 2, false)), 0.0);
  Mask m(2, 2);
  m.set(1, 0, true);
  EXPECT_DOUBLE_EQ(mask_coverage(m), 0.25);
}
