#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "owlsim/common.hpp"
#include "owlsim/scenario.hpp"

// Flat `key = value` configuration, schema version 1. Lines starting with #
// are comments. Distances, powers and frequencies have canonical SI keys
// plus convenience aliases in engineering units (vcsel.beam_waist_um, ...).
// The resolved form written next to every run uses only canonical keys with
// 17-significant-digit doubles, so feeding it back reproduces the run
// bit for bit.

namespace owlsim::config {

using scenario::ScenarioConfig;

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

inline double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw ValidationError("config key '" + key + "': '" + value +
                          "' is not a number");
  return v;
}

inline long long parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw ValidationError("config key '" + key + "': '" + value +
                          "' is not an integer");
  return v;
}

inline std::uint64_t parse_seed(const std::string& key,
                                const std::string& value) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw ValidationError("config key '" + key + "': '" + value +
                          "' is not an unsigned integer");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ValidationError("config key '" + key + "': expected true or false");
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_double_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s;
}

inline std::string format_int_list(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v[i]);
  }
  return s;
}

inline std::vector<double> parse_double_list(const std::string& key,
                                             const std::string& value,
                                             double scale = 1.0) {
  std::vector<double> out;
  for (const auto& tok : split(value, ','))
    out.push_back(parse_double(key, tok) * scale);
  return out;
}

inline std::vector<int> parse_int_list(const std::string& key,
                                       const std::string& value) {
  std::vector<int> out;
  for (const auto& tok : split(value, ','))
    out.push_back(static_cast<int>(parse_int(key, tok)));
  return out;
}

/// Applies one key/value pair onto the config; unknown keys and malformed
/// values throw with the key name in the message.
inline void set_key(ScenarioConfig& cfg, const std::string& key,
                    const std::string& value) {
  auto bad_choice = [&](const std::string& accepted) {
    throw ValidationError("config key '" + key + "': '" + value +
                          "' is not one of " + accepted);
  };
  if (key == "schema") {
    if (parse_int(key, value) != 1)
      throw ValidationError("config: unsupported schema version " + value +
                            " (this tool reads schema = 1)");
  } else if (key == "room.length_m") {
    cfg.scene.room.length_m = parse_double(key, value);
  } else if (key == "room.width_m") {
    cfg.scene.room.width_m = parse_double(key, value);
  } else if (key == "room.height_m") {
    cfg.scene.room.height_m = parse_double(key, value);
  } else if (key == "room.rx_plane_height_m") {
    cfg.scene.room.rx_plane_height_m = parse_double(key, value);
  } else if (key == "tx.units") {
    std::vector<geometry::Vec3> centers;
    for (const auto& triple : split(value, ';')) {
      const auto coords = split(triple, ',');
      if (coords.size() != 3)
        throw ValidationError("config key 'tx.units': each unit needs "
                              "three comma-separated coordinates");
      centers.emplace_back(parse_double(key, coords[0]),
                           parse_double(key, coords[1]),
                           parse_double(key, coords[2]));
    }
    if (centers.empty())
      throw ValidationError("config key 'tx.units': need at least one unit");
    cfg.scene.unit_centers = std::move(centers);
  } else if (key == "tx.elements_per_unit") {
    cfg.scene.elements_per_unit = static_cast<int>(parse_int(key, value));
  } else if (key == "tx.tilt_deg") {
    cfg.scene.tilt_deg = parse_double(key, value);
  } else if (key == "tx.pointing") {
    if (value == "fixed") cfg.pointing = scenario::Pointing::Fixed;
    else if (value == "steered") cfg.pointing = scenario::Pointing::Steered;
    else bad_choice("fixed | steered");
  } else if (key == "vcsel.wavelength_m") {
    cfg.scene.wavelength_m = parse_double(key, value);
  } else if (key == "vcsel.wavelength_nm") {
    cfg.scene.wavelength_m = parse_double(key, value) * 1e-9;
  } else if (key == "vcsel.beam_waist_m") {
    cfg.scene.beam_waist_m = parse_double(key, value);
  } else if (key == "vcsel.beam_waist_um") {
    cfg.scene.beam_waist_m = parse_double(key, value) * 1e-6;
  } else if (key == "vcsel.power_w") {
    cfg.scene.optical_power_w = parse_double(key, value);
  } else if (key == "vcsel.power_mw") {
    cfg.scene.optical_power_w = parse_double(key, value) * 1e-3;
  } else if (key == "vcsel.semi_angle_deg") {
    cfg.semi_angle_deg = parse_double(key, value);
  } else if (key == "gain.model") {
    if (value == "lambertian")
      cfg.gain_model = optics::GainModelKind::Lambertian;
    else if (value == "gaussian")
      cfg.gain_model = optics::GainModelKind::GaussianBeam;
    else bad_choice("lambertian | gaussian");
  } else if (key == "adr.azimuths_deg") {
    cfg.scene.adr_azimuths_deg = parse_double_list(key, value);
    if (cfg.scene.adr_azimuths_deg.empty())
      throw ValidationError("config key 'adr.azimuths_deg': need >= 1 branch");
  } else if (key == "adr.elevation_deg") {
    cfg.scene.adr_elevation_deg = parse_double(key, value);
  } else if (key == "adr.fov_deg") {
    cfg.scene.adr_fov_deg = parse_double(key, value);
  } else if (key == "adr.area_m2") {
    cfg.scene.adr_area_m2 = parse_double(key, value);
  } else if (key == "adr.area_mm2") {
    cfg.scene.adr_area_m2 = parse_double(key, value) * 1e-6;
  } else if (key == "adr.responsivity_a_per_w") {
    cfg.scene.responsivity_a_per_w = parse_double(key, value);
  } else if (key == "branch.policy") {
    if (value == "max_sum_power")
      cfg.branch_policy = channel::BranchPolicy::MaxSumPower;
    else if (value == "max_min_gain")
      cfg.branch_policy = channel::BranchPolicy::MaxMinGain;
    else bad_choice("max_sum_power | max_min_gain");
  } else if (key == "common.strategy") {
    if (value == "principal_direction")
      cfg.common_strategy = precoding::CommonStrategy::PrincipalDirection;
    else if (value == "equal_gain_mrt")
      cfg.common_strategy = precoding::CommonStrategy::EqualGainMrt;
    else bad_choice("principal_direction | equal_gain_mrt");
  } else if (key == "noise.nsd_a_per_rthz") {
    cfg.nsd_a_per_rthz = parse_double(key, value);
  } else if (key == "noise.nsd_pa_per_rthz") {
    cfg.nsd_a_per_rthz = parse_double(key, value) * 1e-12;
  } else if (key == "noise.bandwidth_hz") {
    cfg.bandwidth_hz = parse_double(key, value);
  } else if (key == "noise.bandwidth_ghz") {
    cfg.bandwidth_hz = parse_double(key, value) * 1e9;
  } else if (key == "noise.shot_enabled") {
    cfg.shot_noise = parse_bool(key, value);
  } else if (key == "power.total") {
    cfg.total_power = parse_double(key, value);
  } else if (key == "rs.t") {
    cfg.t = parse_double(key, value);
  } else if (key == "hrs.alpha") {
    cfg.alpha = parse_double(key, value);
  } else if (key == "hrs.beta") {
    cfg.beta = parse_double(key, value);
  } else if (key == "hrs.groups") {
    cfg.hrs_groups = parse_int_list(key, value);
    if (cfg.hrs_groups.empty())
      throw ValidationError("config key 'hrs.groups': need >= 1 group count");
    for (int g : cfg.hrs_groups)
      if (g < 1)
        throw ValidationError(
            "config key 'hrs.groups': group counts must be >= 1");
  } else if (key == "scheme") {
    if (value == "rs") {
      cfg.run_rs = true;
      cfg.run_hrs = false;
    } else if (value == "hrs") {
      cfg.run_rs = false;
      cfg.run_hrs = true;
    } else if (value == "both") {
      cfg.run_rs = true;
      cfg.run_hrs = true;
    } else {
      bad_choice("rs | hrs | both");
    }
  } else if (key == "placement.model") {
    if (value == "uniform_floor")
      cfg.placement.variant = scenario::PlacementKind::UniformFloor;
    else if (value == "clustered_gaussian")
      cfg.placement.variant = scenario::PlacementKind::ClusteredGaussian;
    else bad_choice("uniform_floor | clustered_gaussian");
  } else if (key == "placement.clusters") {
    cfg.placement.cluster_count = static_cast<int>(parse_int(key, value));
  } else if (key == "placement.sigma_m") {
    cfg.placement.cluster_sigma_m = parse_double(key, value);
  } else if (key == "sim.users") {
    cfg.num_users = static_cast<int>(parse_int(key, value));
  } else if (key == "sim.trials") {
    cfg.trials = static_cast<int>(parse_int(key, value));
  } else if (key == "sim.seed") {
    cfg.master_seed = parse_seed(key, value);
  } else if (key == "sim.workers") {
    cfg.workers = static_cast<int>(parse_int(key, value));
  } else if (key == "sim.include_unserved_in_common_min") {
    cfg.include_unserved_in_common_min = parse_bool(key, value);
  } else if (key == "sim.keep_trials") {
    cfg.keep_trials = parse_bool(key, value);
  } else if (key == "sweep.users") {
    cfg.sweep_users = parse_int_list(key, value);
  } else if (key == "sweep.waist_m") {
    cfg.sweep_waist_m = parse_double_list(key, value);
  } else if (key == "sweep.waist_um") {
    cfg.sweep_waist_m = parse_double_list(key, value, 1e-6);
  } else {
    throw ValidationError("unknown config key '" + key + "'");
  }
}

inline ScenarioConfig parse_string(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected 'key = value', got '" + line + "'");
    set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

inline ScenarioConfig parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

/// Canonical (SI-unit) key/value view of a resolved config, in a fixed key
/// order. Doubles carry 17 significant digits so a round trip is exact.
inline std::vector<std::pair<std::string, std::string>> to_key_values(
    const ScenarioConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&](const std::string& k, const std::string& v) {
    kv.emplace_back(k, v);
  };
  add("schema", "1");
  add("room.length_m", format_double(cfg.scene.room.length_m));
  add("room.width_m", format_double(cfg.scene.room.width_m));
  add("room.height_m", format_double(cfg.scene.room.height_m));
  add("room.rx_plane_height_m", format_double(cfg.scene.room.rx_plane_height_m));
  {
    std::string units;
    for (std::size_t i = 0; i < cfg.scene.unit_centers.size(); ++i) {
      if (i) units += "; ";
      const auto& c = cfg.scene.unit_centers[i];
      units += format_double(c.x()) + ", " + format_double(c.y()) + ", " +
               format_double(c.z());
    }
    add("tx.units", units);
  }
  add("tx.elements_per_unit", std::to_string(cfg.scene.elements_per_unit));
  add("tx.tilt_deg", format_double(cfg.scene.tilt_deg));
  add("tx.pointing",
      cfg.pointing == scenario::Pointing::Fixed ? "fixed" : "steered");
  add("vcsel.wavelength_m", format_double(cfg.scene.wavelength_m));
  add("vcsel.beam_waist_m", format_double(cfg.scene.beam_waist_m));
  add("vcsel.power_w", format_double(cfg.scene.optical_power_w));
  add("vcsel.semi_angle_deg", format_double(cfg.semi_angle_deg));
  add("gain.model", cfg.gain_model == optics::GainModelKind::Lambertian
                        ? "lambertian"
                        : "gaussian");
  add("adr.azimuths_deg", format_double_list(cfg.scene.adr_azimuths_deg));
  add("adr.elevation_deg", format_double(cfg.scene.adr_elevation_deg));
  add("adr.fov_deg", format_double(cfg.scene.adr_fov_deg));
  add("adr.area_m2", format_double(cfg.scene.adr_area_m2));
  add("adr.responsivity_a_per_w",
      format_double(cfg.scene.responsivity_a_per_w));
  add("branch.policy", cfg.branch_policy == channel::BranchPolicy::MaxSumPower
                           ? "max_sum_power"
                           : "max_min_gain");
  add("common.strategy",
      cfg.common_strategy == precoding::CommonStrategy::PrincipalDirection
          ? "principal_direction"
          : "equal_gain_mrt");
  add("noise.nsd_a_per_rthz", format_double(cfg.nsd_a_per_rthz));
  add("noise.bandwidth_hz", format_double(cfg.bandwidth_hz));
  add("noise.shot_enabled", cfg.shot_noise ? "true" : "false");
  add("power.total", format_double(cfg.total_power));
  add("rs.t", format_double(cfg.t));
  add("hrs.alpha", format_double(cfg.alpha));
  add("hrs.beta", format_double(cfg.beta));
  add("hrs.groups", format_int_list(cfg.hrs_groups));
  add("scheme", cfg.run_rs && cfg.run_hrs ? "both"
                : cfg.run_rs              ? "rs"
                                          : "hrs");
  add("placement.model",
      cfg.placement.variant == scenario::PlacementKind::UniformFloor
          ? "uniform_floor"
          : "clustered_gaussian");
  add("placement.clusters", std::to_string(cfg.placement.cluster_count));
  add("placement.sigma_m", format_double(cfg.placement.cluster_sigma_m));
  add("sim.users", std::to_string(cfg.num_users));
  add("sim.trials", std::to_string(cfg.trials));
  add("sim.seed", std::to_string(cfg.master_seed));
  add("sim.workers", std::to_string(cfg.workers));
  add("sim.include_unserved_in_common_min",
      cfg.include_unserved_in_common_min ? "true" : "false");
  add("sim.keep_trials", cfg.keep_trials ? "true" : "false");
  add("sweep.users", format_int_list(cfg.sweep_users));
  add("sweep.waist_m", format_double_list(cfg.sweep_waist_m));
  return kv;
}

inline std::string serialize(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : to_key_values(cfg)) out += k + " = " + v + "\n";
  return out;
}

/// Environment overrides: OWLSIM_<KEY> with dots replaced by underscores,
/// e.g. OWLSIM_SIM_TRIALS or OWLSIM_VCSEL_BEAM_WAIST_UM. Applied between the
/// config file and the command-line flags.
inline void apply_env_overrides(ScenarioConfig& cfg) {
  static const std::vector<std::string> keys = {
      "room.length_m", "room.width_m", "room.height_m",
      "room.rx_plane_height_m", "tx.units", "tx.elements_per_unit",
      "tx.tilt_deg", "tx.pointing", "vcsel.wavelength_m",
      "vcsel.wavelength_nm", "vcsel.beam_waist_m", "vcsel.beam_waist_um",
      "vcsel.power_w", "vcsel.power_mw", "vcsel.semi_angle_deg", "gain.model",
      "adr.azimuths_deg", "adr.elevation_deg", "adr.fov_deg", "adr.area_m2",
      "adr.area_mm2", "adr.responsivity_a_per_w", "branch.policy",
      "common.strategy", "noise.nsd_a_per_rthz", "noise.nsd_pa_per_rthz",
      "noise.bandwidth_hz", "noise.bandwidth_ghz", "noise.shot_enabled",
      "power.total", "rs.t", "hrs.alpha", "hrs.beta", "hrs.groups", "scheme",
      "placement.model", "placement.clusters", "placement.sigma_m",
      "sim.users", "sim.trials", "sim.seed", "sim.workers",
      "sim.include_unserved_in_common_min", "sim.keep_trials", "sweep.users",
      "sweep.waist_m", "sweep.waist_um"};
  for (const auto& key : keys) {
    std::string env = "OWLSIM_";
    for (char c : key)
      env += c == '.' ? '_' : static_cast<char>(std::toupper(c));
    if (const char* v = std::getenv(env.c_str())) set_key(cfg, key, v);
  }
}

}  // namespace owlsim::config
