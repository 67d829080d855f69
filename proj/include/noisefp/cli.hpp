#ifndef NOISEFP_CLI_HPP
#define NOISEFP_CLI_HPP

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "extraction.hpp"
#include "image.hpp"
#include "matching.hpp"
#include "simconfig.hpp"
#include "stats.hpp"
#include "store.hpp"
#include "svg.hpp"

namespace noisefp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRejected = 1;
inline constexpr int kExitError = 2;
inline constexpr const char* kStoreEnv = "NOISEFP_STORE";

/// Options shared by every command that turns a capture into a series.
struct PipelineOptions {
  std::size_t tile = 1;
  double tail_fraction = kDefaultTailFraction;
  std::optional<double> stimulus_onset;
  double min_coverage = 0.0;
  SkinMaskParams skin;
};

/// A capture turned into noise, plus per-axis variances for eye traces.
struct LoadedInput {
  NoiseSeries series;
  std::optional<std::pair<double, double>> eye_axis_variance;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace detail {

inline bool looks_like_pnm(const std::string& bytes) {
  return bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7';
}

inline bool looks_like_eye_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto s = noisefp::detail::trim(line);
    if (s.empty() || s.front() == '#') continue;
    return s.substr(0, 2) == "t,";
  }
  return false;
}

inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / double(v.size() - 1);
}

}  // namespace detail

/// Runs the capture pipeline for `path`. Images go through skin masking
/// (plus largest-region isolation for faces) and frame summation; eye
/// traces through baseline removal; series CSVs are read as-is.
inline LoadedInput load_input(const std::filesystem::path& path,
                              std::optional<Modality> modality,
                              const PipelineOptions& opt) {
  const std::string bytes = read_file(path);
  LoadedInput out;
  if (detail::looks_like_pnm(bytes)) {
    const Modality m = modality.value_or(Modality::fingerprint);
    if (!is_image_modality(m))
      throw ModalityError("image input cannot produce modality " +
                          std::string(to_string(m)));
    const RawImage image = decode_ppm(std::span(
        reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    Mask mask = skin_mask(image, opt.skin);
    if (m == Modality::face) mask = largest_region(mask);
    if (mask_coverage(mask) < opt.min_coverage)
      throw EmptySeriesError("mask coverage below --min-coverage");
    out.series = frame_rgb_sums(image, mask, FrameSpec{opt.tile}, m);
    return out;
  }
  if (detail::looks_like_eye_trace(bytes)) {
    const Modality m = modality.value_or(Modality::eye_y);
    if (is_image_modality(m))
      throw ModalityError("eye trace cannot produce modality " +
                          std::string(to_string(m)));
    const EyeTrace trace = parse_eye_trace(bytes, opt.stimulus_onset);
    auto [dx, dy] = eye_displacements(trace);
    out.eye_axis_variance = {detail::sample_variance(dx.values()),
                             detail::sample_variance(dy.values())};
    out.series = m == Modality::eye_x ? std::move(dx) : std::move(dy);
    return out;
  }
  std::istringstream in(bytes);
  out.series = read_series_csv(in, modality);
  if (modality && out.series.modality != *modality)
    throw ModalityError("series file holds " + std::string(to_string(out.series.modality)) +
                        ", expected " + std::string(to_string(*modality)));
  return out;
}

inline std::string default_store() {
  if (const char* env = std::getenv(kStoreEnv); env && *env) return env;
  return "noisefp-store";
}

inline std::string fmt(double v, const char* spec = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

/// Histogram block, QQ block, then a `key,value` summary.
inline void write_analysis_report(std::ostream& out, const LoadedInput& in,
                                  std::size_t bins, double tail_fraction) {
  const std::vector<double> v = in.series.values();
  const MomentSummary m = moments(v);
  const Histogram h = histogram(v, bins);
  const QQData q = qq_normal(v);
  const TailReport t = tail_deviation(v, tail_fraction);

  out << "# modality=" << to_string(in.series.modality) << "\n";
  out << "# histogram\nbin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << fmt(h.bin_edges[i], "%.10g") << ',' << fmt(h.bin_edges[i + 1], "%.10g") << ','
        << h.counts[i] << "\n";
  out << "# qq\ntheoretical_quantile,ordered_value\n";
  for (const QQPoint& p : q.points)
    out << fmt(p.theoretical_quantile, "%.10g") << ',' << fmt(p.ordered_value, "%.10g")
        << "\n";
  out << "# summary\nkey,value\n";
  out << "n," << m.n << "\n";
  out << "mean," << fmt(m.mean, "%.10g") << "\n";
  out << "sd," << fmt(m.sd, "%.10g") << "\n";
  out << "skewness," << fmt(m.skewness, "%.10g") << "\n";
  out << "excess_kurtosis," << fmt(m.excess_kurtosis, "%.10g") << "\n";
  out << "tail_fraction," << fmt(t.tail_fraction, "%.10g") << "\n";
  out << "lower_dev," << fmt(t.lower_dev, "%.10g") << "\n";
  out << "upper_dev," << fmt(t.upper_dev, "%.10g") << "\n";
  out << "combined_dev," << fmt(t.combined_dev, "%.10g") << "\n";
  out << "A2," << fmt(t.normality_stat, "%.10g") << "\n";
  out << "pass," << (t.normality_pass ? "true" : "false") << "\n";
  if (in.eye_axis_variance) {
    out << "var_x," << fmt(in.eye_axis_variance->first, "%.10g") << "\n";
    out << "var_y," << fmt(in.eye_axis_variance->second, "%.10g") << "\n";
  }
}

inline void print_report(std::ostream& out, const MatchReport& r) {
  out << to_string(r.modality) << ": score=" << fmt(r.score) << " ks=" << fmt(r.ks_distance)
      << " tail_gap=" << fmt(r.tail_gap) << " threshold=" << fmt(r.threshold) << " -> "
      << (r.accepted ? "accept" : "reject") << "\n";
}

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noise-fingerprint enrollment, verification and analysis", "noisefp"};
  app.require_subcommand(1);

  PipelineOptions opt;
  std::string store_dir = default_store();
  double threshold = kDefaultThreshold;
  std::string modality_name;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto add_pipeline_flags = [&](CLI::App* cmd) {
    cmd->add_option("--tile", opt.tile, "Frame side in pixels")->check(CLI::PositiveNumber);
    cmd->add_option("--tail-fraction", opt.tail_fraction, "Fraction of each tail");
    cmd->add_option("--stimulus-onset", opt.stimulus_onset, "Eye stimulus onset (s)");
    cmd->add_option("--min-coverage", opt.min_coverage, "Reject masks below this coverage");
  };

  // enroll
  auto* enroll = app.add_subcommand("enroll", "Build and store a template");
  std::string user;
  std::vector<std::string> inputs;
  enroll->add_option("user", user, "User id")->required();
  enroll->add_option("inputs", inputs, "Capture files")->required();
  enroll->add_option("--modality", modality_name, "fingerprint|face|eye|eye_x|eye_y")
      ->required();
  enroll->add_option("--store", store_dir, "Template directory")->envname(kStoreEnv);
  add_pipeline_flags(enroll);

  // verify
  auto* verify = app.add_subcommand("verify", "Verify probes for all three modalities");
  std::string fp_probe, face_probe, eye_probe, eye_axis = "eye_y";
  verify->add_option("user", user, "User id")->required();
  verify->add_option("--fingerprint", fp_probe, "Fingerprint probe")->required();
  verify->add_option("--face", face_probe, "Face probe")->required();
  verify->add_option("--eye", eye_probe, "Eye probe")->required();
  verify->add_option("--eye-axis", eye_axis, "eye_y (default) or eye_x");
  verify->add_option("--threshold", threshold, "Accept threshold in [0,1]");
  verify->add_option("--store", store_dir, "Template directory")->envname(kStoreEnv);
  add_pipeline_flags(verify);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Distribution report for one capture");
  std::string input, output;
  std::size_t bins = 30;
  analyze->add_option("input", input, "Image, eye trace or series CSV")->required();
  analyze->add_option("--modality", modality_name, "Modality to extract");
  analyze->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  analyze->add_option("-o,--output", output, "Report path (default stdout)");
  add_pipeline_flags(analyze);

  // plot
  auto* plot = app.add_subcommand("plot", "Render scatter, histogram or QQ plot as SVG");
  std::string kind = "scatter", title;
  int width = 640, height = 480;
  plot->add_option("input", input, "Image, eye trace or series CSV")->required();
  plot->add_option("--kind", kind, "scatter|histogram|qq");
  plot->add_option("-o,--output", output, "SVG path")->required();
  plot->add_option("--modality", modality_name, "Modality to extract");
  plot->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  plot->add_option("--width", width, "Width in pixels");
  plot->add_option("--height", height, "Height in pixels");
  plot->add_option("--title", title, "Plot title");
  add_pipeline_flags(plot);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run the synthetic population protocol");
  std::string config_path;
  simulate->add_option("config", config_path, "Simulation config")->required();
  simulate->add_option("-o,--output", output, "Results CSV (default stdout)");
  simulate->add_option("--seed", seed, "Override the config seed")
      ->each([&](const std::string&) { seed_given = true; });

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  auto modality = [&]() -> std::optional<Modality> {
    if (modality_name.empty()) return std::nullopt;
    return parse_modality(modality_name);
  };

  try {
    if (*enroll) {
      const Modality m = *modality();
      std::vector<NoiseSeries> series;
      for (const auto& path : inputs) series.push_back(load_input(path, m, opt).series);
      const FingerprintTemplate t = build_template(user, m, series, opt.tail_fraction);
      const auto path = TemplateStore(store_dir).save(t);
      out << "enrolled " << user << " " << to_string(m) << " -> " << path.string() << "\n";
      out << "  n=" << t.moments.n << " mean=" << fmt(t.moments.mean)
          << " sd=" << fmt(t.moments.sd) << " combined_dev=" << fmt(t.tail.combined_dev)
          << " A2=" << fmt(t.tail.normality_stat) << "\n";
      return kExitOk;
    }

    if (*verify) {
      const Modality eye_m = parse_modality(eye_axis);
      if (is_image_modality(eye_m)) throw ModalityError("--eye-axis must be eye_x or eye_y");
      const TemplateStore store(store_dir);
      // Load every template before touching probes so a missing one fails fast.
      const auto fp_t = store.load(user, Modality::fingerprint);
      const auto face_t = store.load(user, Modality::face);
      const auto eye_t = store.load(user, eye_m);
      auto probe = [&](const std::string& path, const FingerprintTemplate& t) {
        PipelineOptions o = opt;
        o.tail_fraction = t.tail.tail_fraction;
        return match_score(t, load_input(path, t.modality, o).series, threshold);
      };
      const FusedDecision d = fuse(probe(fp_probe, fp_t), probe(face_probe, face_t),
                                   probe(eye_probe, eye_t));
      for (const MatchReport& r : d.reports) print_report(out, r);
      out << "verdict: " << (d.authenticated ? "AUTHENTICATED" : "REJECTED") << "\n";
      return d.authenticated ? kExitOk : kExitRejected;
    }

    if (*analyze) {
      const LoadedInput in = load_input(input, modality(), opt);
      if (output.empty()) {
        write_analysis_report(out, in, bins, opt.tail_fraction);
      } else {
        std::ostringstream report;
        write_analysis_report(report, in, bins, opt.tail_fraction);
        write_text_file(output, report.str());
      }
      return kExitOk;
    }

    if (*plot) {
      PlotSpec spec{parse_plot_kind(kind), width, height, title};
      spec.validate();
      const LoadedInput in = load_input(input, modality(), opt);
      std::string svg;
      switch (spec.kind) {
        case PlotKind::scatter: svg = render_scatter_svg(in.series, spec); break;
        case PlotKind::histogram: svg = render_histogram_svg(histogram(in.series, bins), spec); break;
        case PlotKind::qq: svg = render_qq_svg(qq_normal(in.series), spec); break;
      }
      write_text_file(output, svg);
      return kExitOk;
    }

    if (*simulate) {
      std::istringstream cfg_text(read_file(config_path));
      SimConfig cfg = parse_sim_config(cfg_text);
      if (seed_given) cfg.seed = seed;
      const SimulationResult r = run_simulation(cfg);
      std::ostringstream csv;
      write_simulation_csv(csv, r);
      if (output.empty())
        out << csv.str();
      else
        write_text_file(output, csv.str());
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace noisefp::cli

#endif  // NOISEFP_CLI_HPP
