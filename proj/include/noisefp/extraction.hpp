#ifndef NOISEFP_EXTRACTION_HPP
#define NOISEFP_EXTRACTION_HPP

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "image.hpp"

namespace noisefp {

enum class Modality { fingerprint, face, eye_x, eye_y };

inline constexpr std::string_view to_string(Modality m) noexcept {
  switch (m) {
    case Modality::fingerprint: return "fingerprint";
    case Modality::face: return "face";
    case Modality::eye_x: return "eye_x";
    case Modality::eye_y: return "eye_y";
  }
  return "unknown";
}

/// Accepts the canonical names plus "eye" as shorthand for eye_y.
inline Modality parse_modality(std::string_view name) {
  if (name == "fingerprint") return Modality::fingerprint;
  if (name == "face") return Modality::face;
  if (name == "eye_x") return Modality::eye_x;
  if (name == "eye_y" || name == "eye") return Modality::eye_y;
  throw ModalityError("unknown modality '" + std::string(name) + "'");
}

inline constexpr bool is_image_modality(Modality m) noexcept {
  return m == Modality::fingerprint || m == Modality::face;
}

struct Sample {
  std::int64_t frame_index = 0;
  double value = 0.0;
  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Per-frame noise values of one modality, frame_index strictly increasing.
struct NoiseSeries {
  Modality modality = Modality::fingerprint;
  std::vector<Sample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const Sample& s : samples) v.push_back(s.value);
    return v;
  }

  static NoiseSeries from_values(Modality m, const std::vector<double>& vs) {
    NoiseSeries s{m, {}};
    s.samples.reserve(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i)
      s.samples.push_back({static_cast<std::int64_t>(i), vs[i]});
    return s;
  }

  friend bool operator==(const NoiseSeries&, const NoiseSeries&) = default;
};

struct FrameSpec {
  std::size_t tile = 1;
};

/// Sums R+G+B over each square tile that lies entirely inside the mask.
/// frame_index is the tile's row-major position in the full tile grid, so
/// masked-out tiles show up as gaps.
inline NoiseSeries frame_rgb_sums(const RawImage& image, const Mask& mask,
                                  FrameSpec spec, Modality modality) {
  if (mask.width() != image.width() || mask.height() != image.height())
    throw DimensionError("mask dimensions differ from image dimensions");
  if (spec.tile < 1)
    throw DimensionError("tile size must be >= 1");
  if (spec.tile > std::min(image.width(), image.height()))
    throw DimensionError("tile size exceeds image dimensions");

  const std::size_t t = spec.tile;
  const std::size_t cols = image.width() / t, rows = image.height() / t;
  NoiseSeries out{modality, {}};
  for (std::size_t tr = 0; tr < rows; ++tr) {
    for (std::size_t tc = 0; tc < cols; ++tc) {
      bool inside = true;
      std::int64_t sum = 0;
      for (std::size_t r = tr * t; r < (tr + 1) * t && inside; ++r) {
        for (std::size_t c = tc * t; c < (tc + 1) * t; ++c) {
          if (!mask.at(r, c)) {
            inside = false;
            break;
          }
          sum += image.at(r, c).sum();
        }
      }
      if (inside)
        out.samples.push_back({static_cast<std::int64_t>(tr * cols + tc),
                               static_cast<double>(sum)});
    }
  }
  if (out.empty())
    throw EmptySeriesError("no tile lies fully inside the mask");
  return out;
}

struct EyeSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct EyeTrace {
  std::vector<EyeSample> samples;
  double stimulus_onset = 0.0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(std::string_view field, std::size_t line_no) {
  field = trim(field);
  // from_chars has no leading '+'; accept it anyway.
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() ||
      !std::isfinite(v))
    throw FormatError("line " + std::to_string(line_no) + ": '" +
                      std::string(field) + "' is not a finite number");
  return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// "# key=value" comment lines; returns value for key if this line has it.
inline std::optional<std::string_view> comment_value(std::string_view line,
                                                     std::string_view key) {
  line = trim(line);
  if (line.empty() || line.front() != '#') return std::nullopt;
  line = trim(line.substr(1));
  if (line.substr(0, key.size()) != key) return std::nullopt;
  line = trim(line.substr(key.size()));
  if (line.empty() || line.front() != '=') return std::nullopt;
  return trim(line.substr(1));
}

}  // namespace detail

/// Parses a `t,x,y` CSV. The onset comes from `onset_override` when given,
/// else from a `# stimulus_onset=<seconds>` line.
inline EyeTrace parse_eye_trace(std::istream& in,
                                std::optional<double> onset_override = {}) {
  EyeTrace trace;
  std::optional<double> onset_in_file;
  bool saw_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view s = detail::trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      if (auto v = detail::comment_value(s, "stimulus_onset"))
        onset_in_file = detail::parse_real(*v, line_no);
      continue;
    }
    if (!saw_header) {
      const auto cols = detail::split_commas(s);
      if (cols.size() != 3 || detail::trim(cols[0]) != "t" ||
          detail::trim(cols[1]) != "x" || detail::trim(cols[2]) != "y")
        throw FormatError("eye trace must start with header 't,x,y'");
      saw_header = true;
      continue;
    }
    const auto cols = detail::split_commas(s);
    if (cols.size() != 3)
      throw FormatError("line " + std::to_string(line_no) +
                        ": expected 3 fields");
    EyeSample smp{detail::parse_real(cols[0], line_no),
                  detail::parse_real(cols[1], line_no),
                  detail::parse_real(cols[2], line_no)};
    if (smp.t < 0.0)
      throw FormatError("line " + std::to_string(line_no) +
                        ": negative timestamp");
    if (!trace.samples.empty() && smp.t <= trace.samples.back().t)
      throw OrderError("line " + std::to_string(line_no) +
                       ": timestamps must be strictly increasing");
    trace.samples.push_back(smp);
  }
  if (!saw_header) throw FormatError("eye trace is missing the 't,x,y' header");
  if (trace.samples.size() < 2)
    throw TooShortError("eye trace needs at least 2 samples");
  if (onset_override)
    trace.stimulus_onset = *onset_override;
  else if (onset_in_file)
    trace.stimulus_onset = *onset_in_file;
  else
    throw FormatError("no stimulus onset given (flag or '# stimulus_onset=')");
  return trace;
}

inline EyeTrace parse_eye_trace(std::string_view text,
                                std::optional<double> onset_override = {}) {
  std::istringstream in{std::string(text)};
  return parse_eye_trace(in, onset_override);
}

namespace detail {

inline double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Displacement from the resting position (median of pre-onset samples)
/// for every sample at or after stimulus onset.
inline std::pair<NoiseSeries, NoiseSeries> eye_displacements(
    const EyeTrace& trace) {
  std::vector<double> rest_x, rest_y;
  for (const EyeSample& s : trace.samples) {
    if (s.t < trace.stimulus_onset) {
      rest_x.push_back(s.x);
      rest_y.push_back(s.y);
    }
  }
  if (rest_x.empty())
    throw NoBaselineError("no eye samples before stimulus onset");
  const double rx = detail::median(std::move(rest_x));
  const double ry = detail::median(std::move(rest_y));

  NoiseSeries dx{Modality::eye_x, {}}, dy{Modality::eye_y, {}};
  std::int64_t frame = 0;
  for (const EyeSample& s : trace.samples) {
    if (s.t < trace.stimulus_onset) continue;
    dx.samples.push_back({frame, s.x - rx});
    dy.samples.push_back({frame, s.y - ry});
    ++frame;
  }
  if (dx.empty())
    throw EmptySeriesError("no eye samples at or after stimulus onset");
  return {std::move(dx), std::move(dy)};
}

/// `# modality=<name>` then `frame_index,value` rows, 17 significant digits.
inline void write_series_csv(std::ostream& out, const NoiseSeries& series) {
  out << "# modality=" << to_string(series.modality) << "\n";
  out << "frame_index,value\n";
  char buf[64];
  for (const Sample& s : series.samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.value);
    out << s.frame_index << ',' << buf << '\n';
  }
}

/// Reads the series CSV format. `fallback` is used when the file carries
/// no modality comment.
inline NoiseSeries read_series_csv(std::istream& in,
                                   std::optional<Modality> fallback = {}) {
  NoiseSeries series;
  std::optional<Modality> declared;
  bool saw_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view s = detail::trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      if (auto v = detail::comment_value(s, "modality"))
        declared = parse_modality(*v);
      continue;
    }
    const auto cols = detail::split_commas(s);
    if (!saw_header) {
      saw_header = true;
      if (cols.size() == 2 && detail::trim(cols[0]) == "frame_index" &&
          detail::trim(cols[1]) == "value")
        continue;
      throw FormatError("series CSV must start with header 'frame_index,value'");
    }
    if (cols.size() != 2)
      throw FormatError("line " + std::to_string(line_no) +
                        ": expected 2 fields");
    const double idx = detail::parse_real(cols[0], line_no);
    if (idx < 0 || idx != std::floor(idx) || idx > 9.0e15)
      throw FormatError("line " + std::to_string(line_no) +
                        ": frame_index must be a non-negative integer");
    const auto frame = static_cast<std::int64_t>(idx);
    if (!series.samples.empty() && frame <= series.samples.back().frame_index)
      throw OrderError("line " + std::to_string(line_no) +
                       ": frame_index must be strictly increasing");
    series.samples.push_back({frame, detail::parse_real(cols[1], line_no)});
  }
  if (declared)
    series.modality = *declared;
  else if (fallback)
    series.modality = *fallback;
  else
    throw FormatError("series CSV has no '# modality=' line");
  return series;
}

}  // namespace noisefp

#endif  // NOISEFP_EXTRACTION_HPP
