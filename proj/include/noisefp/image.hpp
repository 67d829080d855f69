#ifndef NOISEFP_IMAGE_HPP
#define NOISEFP_IMAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace noisefp {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;

  constexpr int sum() const noexcept { return int(r) + int(g) + int(b); }
  friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 8-bit RGB pixel grid.
class RawImage {
 public:
  RawImage() = default;
  RawImage(std::size_t width, std::size_t height, Rgb fill = {})
      : width_(width), height_(height), pixels_(width * height, fill) {
    if (width == 0 || height == 0)
      throw DimensionError("image dimensions must be >= 1");
  }
  RawImage(std::size_t width, std::size_t height, std::vector<Rgb> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width == 0 || height == 0)
      throw DimensionError("image dimensions must be >= 1");
    if (pixels_.size() != width * height)
      throw DimensionError("pixel count does not match width*height");
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::span<const Rgb> pixels() const noexcept { return pixels_; }

  const Rgb& at(std::size_t row, std::size_t col) const {
    return pixels_[row * width_ + col];
  }
  Rgb& at(std::size_t row, std::size_t col) {
    return pixels_[row * width_ + col];
  }

  friend bool operator==(const RawImage&, const RawImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Rgb> pixels_;
};

/// Row-major boolean region selector (true = in-region).
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t width, std::size_t height, bool fill = false)
      : width_(width), height_(height), bits_(width * height, fill ? 1 : 0) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(std::size_t row, std::size_t col) const {
    return bits_[row * width_ + col] != 0;
  }
  void set(std::size_t row, std::size_t col, bool v) {
    bits_[row * width_ + col] = v ? 1 : 0;
  }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
  }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  // uint8_t rather than vector<bool> so rows are addressable as bytes.
  std::vector<std::uint8_t> bits_;
};

/// YCbCr chroma box used for skin segmentation.
struct SkinMaskParams {
  int cb_min = 77;
  int cb_max = 127;
  int cr_min = 133;
  int cr_max = 173;

  void validate() const {
    auto in_range = [](int v) { return v >= 0 && v <= 255; };
    if (!in_range(cb_min) || !in_range(cb_max) || !in_range(cr_min) ||
        !in_range(cr_max))
      throw DomainError("chroma bounds must lie in [0, 255]");
    if (cb_min > cb_max || cr_min > cr_max)
      throw DomainError("chroma bounds must satisfy min <= max");
  }
};

namespace detail {

inline bool is_pnm_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// Reads one unsigned decimal header token, skipping whitespace and
// '#' comments that run to end of line.
inline std::size_t read_header_int(std::span<const std::uint8_t> bytes,
                                   std::size_t& pos, const char* field) {
  for (;;) {
    while (pos < bytes.size() && is_pnm_space(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n' && bytes[pos] != '\r')
        ++pos;
      continue;
    }
    break;
  }
  if (pos >= bytes.size())
    throw FormatError(std::string("PPM header ends before ") + field);
  if (bytes[pos] < '0' || bytes[pos] > '9')
    throw FormatError(std::string("PPM header: expected digits for ") + field);
  std::size_t v = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    v = v * 10 + (bytes[pos] - '0');
    if (v > (std::size_t{1} << 31))
      throw FormatError(std::string("PPM header: ") + field + " too large");
    ++pos;
  }
  return v;
}

// Half-away-from-zero, matching std::lround.
inline int round_chroma(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace detail

/// Decodes a binary P6 pixmap with maxval 255.
inline RawImage decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw FormatError("not a binary PPM (expected magic P6)");
  std::size_t pos = 2;
  if (pos < bytes.size() && !detail::is_pnm_space(bytes[pos]) &&
      bytes[pos] != '#')
    throw FormatError("PPM magic must be followed by whitespace");
  const std::size_t width = detail::read_header_int(bytes, pos, "width");
  const std::size_t height = detail::read_header_int(bytes, pos, "height");
  const std::size_t maxval = detail::read_header_int(bytes, pos, "maxval");
  if (width == 0 || height == 0)
    throw FormatError("PPM dimensions must be >= 1");
  if (maxval != 255)
    throw UnsupportedError("PPM maxval " + std::to_string(maxval) +
                           " unsupported (only 255)");
  if (pos >= bytes.size() || !detail::is_pnm_space(bytes[pos]))
    throw TruncationError("PPM header not terminated before pixel data");
  ++pos;

  const std::size_t need = 3 * width * height;
  if (bytes.size() - pos < need)
    throw TruncationError("PPM pixel data truncated: need " +
                          std::to_string(need) + " bytes, have " +
                          std::to_string(bytes.size() - pos));
  std::vector<Rgb> px(width * height);
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = Rgb{bytes[pos], bytes[pos + 1], bytes[pos + 2]};
    pos += 3;
  }
  return RawImage(width, height, std::move(px));
}

inline std::vector<std::uint8_t> encode_ppm(const RawImage& image) {
  const std::string header = "P6\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + 3 * image.pixels().size());
  for (const Rgb& p : image.pixels()) {
    out.push_back(p.r);
    out.push_back(p.g);
    out.push_back(p.b);
  }
  return out;
}

/// Rounded (Cb, Cr) of a pixel, full-range BT.601.
inline std::pair<int, int> chroma(Rgb p) {
  const double r = p.r, g = p.g, b = p.b;
  const double cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
  const double cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
  return {detail::round_chroma(cb), detail::round_chroma(cr)};
}

inline Mask skin_mask(const RawImage& image, const SkinMaskParams& params = {}) {
  params.validate();
  Mask mask(image.width(), image.height());
  for (std::size_t row = 0; row < image.height(); ++row) {
    for (std::size_t col = 0; col < image.width(); ++col) {
      const auto [cb, cr] = chroma(image.at(row, col));
      mask.set(row, col,
               cb >= params.cb_min && cb <= params.cb_max &&
                   cr >= params.cr_min && cr <= params.cr_max);
    }
  }
  return mask;
}

/// Keeps only the largest 4-connected component. Among equal-sized
/// components the one whose first pixel in row-major order comes first wins.
inline Mask largest_region(const Mask& mask) {
  const std::size_t w = mask.width(), h = mask.height();
  Mask out(w, h);
  if (mask.size() == 0) return out;

  constexpr std::uint32_t kUnlabeled = 0;
  std::vector<std::uint32_t> label(mask.size(), kUnlabeled);
  std::vector<std::size_t> stack;
  std::uint32_t next = 0, best = kUnlabeled;
  std::size_t best_size = 0;

  // Row-major scan means a component is discovered at its first pixel, so
  // strict '>' keeps the earliest component on ties.
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || label[start] != kUnlabeled) continue;
    const std::uint32_t id = ++next;
    std::size_t size = 0;
    label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++size;
      const std::size_t row = i / w, col = i % w;
      auto visit = [&](std::size_t j) {
        if (mask[j] && label[j] == kUnlabeled) {
          label[j] = id;
          stack.push_back(j);
        }
      };
      if (col > 0) visit(i - 1);
      if (col + 1 < w) visit(i + 1);
      if (row > 0) visit(i - w);
      if (row + 1 < h) visit(i + w);
    }
    if (size > best_size) {
      best_size = size;
      best = id;
    }
  }
  if (best == kUnlabeled) return out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (label[i] == best) out.set(i / w, i % w, true);
  return out;
}

inline double mask_coverage(const Mask& mask) {
  if (mask.size() == 0) return 0.0;
  return static_cast<double>(mask.count()) / static_cast<double>(mask.size());
}

}  // namespace noisefp

#endif  // NOISEFP_IMAGE_HPP
