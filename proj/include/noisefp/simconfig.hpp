#ifndef NOISEFP_SIMCONFIG_HPP
#define NOISEFP_SIMCONFIG_HPP

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "error.hpp"
#include "simharness.hpp"

namespace noisefp {

/// Parsed `simulate` config. All values are in standardised units: user u
/// has core mean base_mean + u * spacing_sd * core_sd on every modality.
struct SimConfig {
  std::size_t users = 20;
  double spacing_sd = 3.0;
  bool identical = false;  // control population: every user shares one distribution
  double base_mean = 0.0;
  double core_sd = 1.0;
  double tail_weight = 0.05;
  double tail_scale = 3.0;
  std::uint64_t seed = 1;
  std::size_t enroll_n = 1000;
  std::size_t probe_n = 500;
  std::size_t probes_per_user = 10;
  double threshold_min = 0.0;
  double threshold_max = 1.0;
  std::size_t threshold_steps = 101;
  double tail_fraction = kDefaultTailFraction;
  Modality eye_axis = Modality::eye_y;
  std::optional<AttackKind> attack;  // "none" leaves this empty
  std::size_t attack_trials = 200;
  double attack_threshold = kDefaultThreshold;
  std::size_t attack_observation_n = 0;  // 0: same as probe_n
};

namespace detail {

template <class T>
T parse_config_number(const std::string& key, const std::string& value) {
  T v{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (value.empty() || ec != std::errc{} || ptr != end)
    throw ConfigError("config key '" + key + "': bad value '" + value + "'");
  return v;
}

inline bool parse_config_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false");
}

}  // namespace detail

/// `key = value` lines; blank lines and `#` comments ignored; unknown keys
/// are an error.
inline SimConfig parse_sim_config(std::istream& in) {
  SimConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string_view s = detail::trim(line);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key(detail::trim(s.substr(0, eq)));
    const std::string val(detail::trim(s.substr(eq + 1)));
    using detail::parse_config_number;
    if (key == "users") c.users = parse_config_number<std::size_t>(key, val);
    else if (key == "spacing_sd") c.spacing_sd = parse_config_number<double>(key, val);
    else if (key == "identical") c.identical = detail::parse_config_bool(key, val);
    else if (key == "base_mean") c.base_mean = parse_config_number<double>(key, val);
    else if (key == "core_sd") c.core_sd = parse_config_number<double>(key, val);
    else if (key == "tail_weight") c.tail_weight = parse_config_number<double>(key, val);
    else if (key == "tail_scale") c.tail_scale = parse_config_number<double>(key, val);
    else if (key == "seed") c.seed = parse_config_number<std::uint64_t>(key, val);
    else if (key == "enroll_n") c.enroll_n = parse_config_number<std::size_t>(key, val);
    else if (key == "probe_n") c.probe_n = parse_config_number<std::size_t>(key, val);
    else if (key == "probes_per_user")
      c.probes_per_user = parse_config_number<std::size_t>(key, val);
    else if (key == "threshold_min") c.threshold_min = parse_config_number<double>(key, val);
    else if (key == "threshold_max") c.threshold_max = parse_config_number<double>(key, val);
    else if (key == "threshold_steps")
      c.threshold_steps = parse_config_number<std::size_t>(key, val);
    else if (key == "tail_fraction") c.tail_fraction = parse_config_number<double>(key, val);
    else if (key == "eye_axis") {
      c.eye_axis = parse_modality(val);
      if (is_image_modality(c.eye_axis))
        throw ConfigError("eye_axis must be eye_x or eye_y");
    } else if (key == "attack") {
      if (val == "none") c.attack.reset();
      else c.attack = parse_attack_kind(val);
    } else if (key == "attack_trials")
      c.attack_trials = parse_config_number<std::size_t>(key, val);
    else if (key == "attack_threshold")
      c.attack_threshold = parse_config_number<double>(key, val);
    else if (key == "attack_observation_n")
      c.attack_observation_n = parse_config_number<std::size_t>(key, val);
    else
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
  }
  return c;
}

inline std::vector<SyntheticUserSpec> make_population(const SimConfig& c) {
  std::vector<SyntheticUserSpec> pop(c.users);
  for (std::size_t u = 0; u < c.users; ++u) {
    pop[u].seed = mix_seed(c.seed, 0x5eed0000ULL + u);
    const double mean =
        c.base_mean + (c.identical ? 0.0 : double(u) * c.spacing_sd * c.core_sd);
    for (MixtureParams& p : pop[u].params)
      p = MixtureParams{mean, c.core_sd, c.tail_weight, c.tail_scale};
  }
  return pop;
}

struct SimulationResult {
  ProtocolResult protocol;
  std::optional<AttackKind> attack_kind;
  std::optional<double> attack_acceptance;
  std::optional<double> genuine_acceptance;
};

inline SimulationResult run_simulation(const SimConfig& c) {
  if (c.users < 2) throw PopulationError("population needs at least 2 users");
  const auto population = make_population(c);
  ProtocolConfig pc;
  pc.enroll_n = c.enroll_n;
  pc.probe_n = c.probe_n;
  pc.probes_per_user = c.probes_per_user;
  pc.thresholds = threshold_sweep(c.threshold_min, c.threshold_max, c.threshold_steps);
  pc.tail_fraction = c.tail_fraction;
  pc.eye_axis = c.eye_axis;

  SimulationResult r;
  r.protocol = run_protocol(population, pc);

  if (c.attack) {
    // Victim is user 0's fingerprint template; the adversary observed one
    // genuine capture drawn outside the protocol's probe draws.
    const SyntheticUserSpec& victim = population.front();
    const auto tpl = build_template(
        "user0", Modality::fingerprint,
        generate_series(victim, Modality::fingerprint, c.enroll_n, detail::kEnrollDraw),
        c.tail_fraction);
    const std::size_t obs_n = c.attack_observation_n ? c.attack_observation_n : c.probe_n;
    const std::uint64_t obs_draw = 1'000'000;
    AttackSpec attack{*c.attack,
                      generate_series(victim, Modality::fingerprint, obs_n, obs_draw)};
    r.attack_kind = c.attack;
    r.attack_acceptance = run_attack(tpl, attack, c.attack_trials, c.attack_threshold,
                                     mix_seed(c.seed, 0xa77acc), c.probe_n);
    r.genuine_acceptance = genuine_acceptance(tpl, victim, c.probe_n, c.attack_trials,
                                              c.attack_threshold, 2'000'000);
  }
  return r;
}

/// `threshold,far,frr` rows followed by `# key=value` summary lines.
inline void write_simulation_csv(std::ostream& out, const SimulationResult& r) {
  char buf[128];
  const RocResult& roc = r.protocol.roc;
  out << "threshold,far,frr\n";
  for (std::size_t i = 0; i < roc.thresholds.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g,%.10g,%.10g\n", roc.thresholds[i],
                  roc.far[i], roc.frr[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "# eer=%.10g\n# auc=%.10g\n", roc.eer, roc.auc);
  out << buf;
  out << "# genuine_trials=" << r.protocol.genuine_scores.size() << "\n";
  out << "# impostor_trials=" << r.protocol.impostor_scores.size() << "\n";
  if (r.attack_acceptance) {
    out << "# attack=" << to_string(*r.attack_kind) << "\n";
    std::snprintf(buf, sizeof buf, "# attack_acceptance=%.10g\n# genuine_acceptance=%.10g\n",
                  *r.attack_acceptance, *r.genuine_acceptance);
    out << buf;
  }
}

}  // namespace noisefp

#endif  // NOISEFP_SIMCONFIG_HPP
