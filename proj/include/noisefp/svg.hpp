#ifndef NOISEFP_SVG_HPP
#define NOISEFP_SVG_HPP

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "error.hpp"
#include "extraction.hpp"
#include "stats.hpp"

namespace noisefp {

enum class PlotKind { scatter, histogram, qq };

inline PlotKind parse_plot_kind(std::string_view s) {
  if (s == "scatter") return PlotKind::scatter;
  if (s == "histogram") return PlotKind::histogram;
  if (s == "qq") return PlotKind::qq;
  throw DomainError("unknown plot kind '" + std::string(s) + "'");
}

struct PlotSpec {
  PlotKind kind = PlotKind::scatter;
  int width = 640;
  int height = 480;
  std::string title;

  void validate() const {
    if (width < 64 || height < 64)
      throw DomainError("plot width and height must be >= 64");
  }
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Maps data coordinates into the plot frame (y grows upward).
class Frame {
 public:
  static constexpr double kMargin = 48.0;

  Frame(const PlotSpec& spec, std::pair<double, double> xr, std::pair<double, double> yr)
      : spec_(spec), xr_(widen(xr)), yr_(widen(yr)) {}

  double x(double v) const {
    return kMargin + (v - xr_.first) / (xr_.second - xr_.first) * (spec_.width - 2 * kMargin);
  }
  double y(double v) const {
    return spec_.height - kMargin -
           (v - yr_.first) / (yr_.second - yr_.first) * (spec_.height - 2 * kMargin);
  }

  std::string header() const {
    std::string s =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
        std::to_string(spec_.width) + "\" height=\"" + std::to_string(spec_.height) +
        "\" viewBox=\"0 0 " + std::to_string(spec_.width) + " " +
        std::to_string(spec_.height) + "\">\n";
    if (!spec_.title.empty())
      s += "<text x=\"" + num(spec_.width / 2.0) + "\" y=\"" + num(kMargin / 2.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           xml_escape(spec_.title) + "</text>\n";
    return s;
  }

  std::string axes() const {
    const double left = kMargin, right = spec_.width - kMargin;
    const double top = kMargin, bottom = spec_.height - kMargin;
    std::string s;
    s += "<line class=\"axis\" x1=\"" + num(left) + "\" y1=\"" + num(bottom) + "\" x2=\"" +
         num(right) + "\" y2=\"" + num(bottom) + "\" stroke=\"black\"/>\n";
    s += "<line class=\"axis\" x1=\"" + num(left) + "\" y1=\"" + num(bottom) + "\" x2=\"" +
         num(left) + "\" y2=\"" + num(top) + "\" stroke=\"black\"/>\n";
    s += label(left, bottom + 16, xr_.first) + label(right, bottom + 16, xr_.second);
    s += label(left - 4, bottom, yr_.first, "end") + label(left - 4, top, yr_.second, "end");
    return s;
  }

 private:
  static std::pair<double, double> widen(std::pair<double, double> r) {
    if (!(r.second > r.first)) return {r.first - 0.5, r.first + 0.5};
    return r;
  }

  static std::string label(double x, double y, double v, const char* anchor = "middle") {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
           "\" font-family=\"sans-serif\" font-size=\"10\">" + buf + "</text>\n";
  }

  const PlotSpec& spec_;
  std::pair<double, double> xr_, yr_;
};

}  // namespace detail

/// One circle per sample, frame index against value.
inline std::string render_scatter_svg(const NoiseSeries& series, const PlotSpec& spec) {
  spec.validate();
  if (series.empty()) throw EmptySeriesError("nothing to plot");
  double x_lo = double(series.samples.front().frame_index);
  double x_hi = double(series.samples.back().frame_index);
  const auto [lo, hi] = std::minmax_element(
      series.samples.begin(), series.samples.end(),
      [](const Sample& a, const Sample& b) { return a.value < b.value; });
  detail::Frame f(spec, {x_lo, x_hi}, {lo->value, hi->value});
  std::string s = f.header() + f.axes();
  for (const Sample& p : series.samples)
    s += "<circle cx=\"" + detail::num(f.x(double(p.frame_index))) + "\" cy=\"" +
         detail::num(f.y(p.value)) + "\" r=\"1.5\" fill=\"steelblue\"/>\n";
  return s + "</svg>\n";
}

/// One rect per bin; axes are drawn with lines.
inline std::string render_histogram_svg(const Histogram& h, const PlotSpec& spec) {
  spec.validate();
  if (h.counts.empty()) throw EmptySeriesError("nothing to plot");
  const std::size_t peak = *std::max_element(h.counts.begin(), h.counts.end());
  detail::Frame f(spec, {h.bin_edges.front(), h.bin_edges.back()}, {0.0, double(peak)});
  std::string s = f.header() + f.axes();
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double x0 = f.x(h.bin_edges[i]), x1 = f.x(h.bin_edges[i + 1]);
    const double y0 = f.y(double(h.counts[i])), y1 = f.y(0.0);
    s += "<rect x=\"" + detail::num(x0) + "\" y=\"" + detail::num(y0) + "\" width=\"" +
         detail::num(x1 - x0) + "\" height=\"" + detail::num(y1 - y0) +
         "\" fill=\"steelblue\" stroke=\"white\"/>\n";
  }
  return s + "</svg>\n";
}

/// Points plus the reference line y = x; both axes share one data range so
/// the reference line is the frame diagonal.
inline std::string render_qq_svg(const QQData& q, const PlotSpec& spec) {
  spec.validate();
  if (q.points.empty()) throw EmptySeriesError("nothing to plot");
  double lo = q.points.front().theoretical_quantile, hi = lo;
  for (const QQPoint& p : q.points) {
    lo = std::min({lo, p.theoretical_quantile, p.ordered_value});
    hi = std::max({hi, p.theoretical_quantile, p.ordered_value});
  }
  detail::Frame f(spec, {lo, hi}, {lo, hi});
  std::string s = f.header() + f.axes();
  s += "<line class=\"reference\" x1=\"" + detail::num(f.x(lo)) + "\" y1=\"" +
       detail::num(f.y(lo)) + "\" x2=\"" + detail::num(f.x(hi)) + "\" y2=\"" +
       detail::num(f.y(hi)) + "\" stroke=\"crimson\"/>\n";
  for (const QQPoint& p : q.points)
    s += "<circle cx=\"" + detail::num(f.x(p.theoretical_quantile)) + "\" cy=\"" +
         detail::num(f.y(p.ordered_value)) + "\" r=\"1.5\" fill=\"steelblue\"/>\n";
  return s + "</svg>\n";
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

}  // namespace noisefp

#endif  // NOISEFP_SVG_HPP
