#pragma once

// JSON run configuration: one file carries the species, trap, gas state,
// drive, detectors, and per-subcommand task parameters. Parsing is strict:
// unknown keys are rejected and every physical quantity must be positive,
// so a config cannot silently drift from what a run actually used.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fermisea/constants.hpp"
#include "fermisea/gas.hpp"
#include "fermisea/observables.hpp"
#include "fermisea/optics.hpp"
#include "fermisea/profile.hpp"

namespace fermisea {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DetectorConfig {
  DetectionAxis axis;
  double quantum_efficiency = 1.0;
};

struct TaskSuppression {
  double k_over_kf = 0.45;
  std::uint64_t mc_samples = 1000000;
  std::uint64_t seed = 1;
};

struct TaskSweep {
  std::vector<double> grid;
};

struct TaskAngularMap {
  std::size_t n_alpha = 19;
};

struct TaskLifetime {
  EmissionWeighting weighting = EmissionWeighting::isotropic;
};

struct TaskRadialProfile {
  double k_over_kf = 0.45;
  GridSpec grid;
  double blur_e2_width_m = 0.0;
  double bin_width_m = 0.9e-6;
};

struct TaskPrepulse {
  double scatter_rate_hz = 8.0e5;
  std::vector<double> durations_s;
  std::uint64_t n_atoms = 250000;
  std::uint64_t seed = 1;
  std::size_t bins_par = 128;
  std::size_t bins_perp = 64;
  std::size_t bins_radial = 32;
};

struct RunConfig {
  SpeciesParams species;
  TrapGeometry trap;
  double t_over_tf = 0.13;
  DriveParams drive;
  std::vector<DetectorConfig> detection;
  TaskSuppression suppression;
  TaskSweep sweep_temperature;
  TaskSweep sweep_fermi;
  TaskAngularMap angular_map;
  TaskLifetime lifetime;
  TaskRadialProfile radial_profile;
  TaskPrepulse prepulse;
  nlohmann::json raw;  // as parsed, for hashing into provenance
};

namespace detail {

inline void expect_keys(const nlohmann::json& j, const std::string& where,
                        std::initializer_list<const char*> keys) {
  if (!j.is_object())
    throw ConfigError(where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
  for (const char* k : keys)
    if (!j.contains(k))
      throw ConfigError(where + ": missing key '" + std::string(k) + "'");
}

inline double number(const nlohmann::json& j, const std::string& where,
                     const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number())
    throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline double positive(const nlohmann::json& j, const std::string& where,
                       const char* key) {
  const double v = number(j, where, key);
  if (!(v > 0.0))
    throw ConfigError(where + "." + key + ": must be positive");
  return v;
}

inline double non_negative(const nlohmann::json& j, const std::string& where,
                           const char* key) {
  const double v = number(j, where, key);
  if (!(v >= 0.0))
    throw ConfigError(where + "." + key + ": must be >= 0");
  return v;
}

inline std::uint64_t count(const nlohmann::json& j, const std::string& where,
                           const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned())
    throw ConfigError(where + "." + key +
                      ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::vector<double> number_list(const nlohmann::json& j,
                                       const std::string& where,
                                       const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty())
    throw ConfigError(where + "." + key + ": expected a non-empty array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ConfigError(where + "." + key + ": expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::count;
  using detail::expect_keys;
  using detail::non_negative;
  using detail::number;
  using detail::number_list;
  using detail::positive;

  expect_keys(j, "config",
              {"species", "trap", "state", "drive", "detection", "task"});
  RunConfig cfg;
  cfg.raw = j;

  const auto& sp = j.at("species");
  expect_keys(sp, "species",
              {"mass_amu", "wavelength_m", "linewidth_hz", "i_sat_w_m2"});
  cfg.species.mass = positive(sp, "species", "mass_amu") *
                     constants::atomic_mass_unit;
  cfg.species.wavelength = positive(sp, "species", "wavelength_m");
  cfg.species.linewidth =
      2.0 * constants::pi * positive(sp, "species", "linewidth_hz");
  cfg.species.i_sat = positive(sp, "species", "i_sat_w_m2");

  const auto& tr = j.at("trap");
  expect_keys(tr, "trap",
              {"freq_x_hz", "freq_y_hz", "freq_z_hz", "n_per_spin",
               "n_spins"});
  cfg.trap.omega_x = 2.0 * constants::pi * positive(tr, "trap", "freq_x_hz");
  cfg.trap.omega_y = 2.0 * constants::pi * positive(tr, "trap", "freq_y_hz");
  cfg.trap.omega_z = 2.0 * constants::pi * positive(tr, "trap", "freq_z_hz");
  cfg.trap.n_per_spin = positive(tr, "trap", "n_per_spin");
  const std::uint64_t spins = count(tr, "trap", "n_spins");
  if (spins == 0) throw ConfigError("trap.n_spins: must be positive");
  cfg.trap.n_spins = static_cast<int>(spins);

  const auto& st = j.at("state");
  expect_keys(st, "state", {"t_over_tf"});
  cfg.t_over_tf = positive(st, "state", "t_over_tf");

  const auto& dr = j.at("drive");
  expect_keys(dr, "drive",
              {"saturation", "detuning_over_gamma", "pulse_duration_s"});
  cfg.drive.saturation = non_negative(dr, "drive", "saturation");
  cfg.drive.detuning_over_gamma = number(dr, "drive", "detuning_over_gamma");
  cfg.drive.pulse_duration = positive(dr, "drive", "pulse_duration_s");

  const auto& det = j.at("detection");
  if (!det.is_array() || det.empty())
    throw ConfigError("detection: expected a non-empty array of axes");
  for (std::size_t i = 0; i < det.size(); ++i) {
    const std::string where = "detection[" + std::to_string(i) + "]";
    expect_keys(det[i], where,
                {"alpha_deg", "numerical_aperture", "quantum_efficiency"});
    DetectorConfig d;
    d.axis.alpha_deg = positive(det[i], where, "alpha_deg");
    d.axis.numerical_aperture =
        positive(det[i], where, "numerical_aperture");
    d.quantum_efficiency = non_negative(det[i], where, "quantum_efficiency");
    if (d.quantum_efficiency > 1.0)
      throw ConfigError(where + ".quantum_efficiency: must be <= 1");
    try {
      validate(d.axis);
    } catch (const std::domain_error& e) {
      throw ConfigError(where + ": " + e.what());
    }
    cfg.detection.push_back(d);
  }

  const auto& task = j.at("task");
  expect_keys(task, "task",
              {"suppression", "sweep_temperature", "sweep_fermi",
               "angular_map", "lifetime", "radial_profile", "prepulse"});

  {
    const auto& t = task.at("suppression");
    expect_keys(t, "task.suppression", {"k_over_kf", "mc_samples", "seed"});
    cfg.suppression.k_over_kf = positive(t, "task.suppression", "k_over_kf");
    cfg.suppression.mc_samples = count(t, "task.suppression", "mc_samples");
    cfg.suppression.seed = count(t, "task.suppression", "seed");
  }
  {
    const auto& t = task.at("sweep_temperature");
    expect_keys(t, "task.sweep_temperature", {"grid"});
    cfg.sweep_temperature.grid =
        number_list(t, "task.sweep_temperature", "grid");
  }
  {
    const auto& t = task.at("sweep_fermi");
    expect_keys(t, "task.sweep_fermi", {"grid"});
    cfg.sweep_fermi.grid = number_list(t, "task.sweep_fermi", "grid");
  }
  {
    const auto& t = task.at("angular_map");
    expect_keys(t, "task.angular_map", {"n_alpha"});
    cfg.angular_map.n_alpha =
        static_cast<std::size_t>(count(t, "task.angular_map", "n_alpha"));
  }
  {
    const auto& t = task.at("lifetime");
    expect_keys(t, "task.lifetime", {"weighting"});
    const auto& w = t.at("weighting");
    if (!w.is_string())
      throw ConfigError("task.lifetime.weighting: expected a string");
    const std::string name = w.get<std::string>();
    if (name == "isotropic")
      cfg.lifetime.weighting = EmissionWeighting::isotropic;
    else if (name == "dipole_circular")
      cfg.lifetime.weighting = EmissionWeighting::dipole_circular;
    else
      throw ConfigError(
          "task.lifetime.weighting: expected 'isotropic' or "
          "'dipole_circular'");
  }
  {
    const auto& t = task.at("radial_profile");
    expect_keys(t, "task.radial_profile",
                {"k_over_kf", "nx", "ny", "pixel_size_m", "blur_e2_width_m",
                 "bin_width_m"});
    cfg.radial_profile.k_over_kf =
        positive(t, "task.radial_profile", "k_over_kf");
    cfg.radial_profile.grid.nx =
        static_cast<std::size_t>(count(t, "task.radial_profile", "nx"));
    cfg.radial_profile.grid.ny =
        static_cast<std::size_t>(count(t, "task.radial_profile", "ny"));
    cfg.radial_profile.grid.pixel_size =
        positive(t, "task.radial_profile", "pixel_size_m");
    cfg.radial_profile.blur_e2_width_m =
        non_negative(t, "task.radial_profile", "blur_e2_width_m");
    cfg.radial_profile.bin_width_m =
        positive(t, "task.radial_profile", "bin_width_m");
  }
  {
    const auto& t = task.at("prepulse");
    expect_keys(t, "task.prepulse",
                {"scatter_rate_hz", "durations_s", "n_atoms", "seed",
                 "bins_par", "bins_perp", "bins_radial"});
    cfg.prepulse.scatter_rate_hz =
        positive(t, "task.prepulse", "scatter_rate_hz");
    cfg.prepulse.durations_s = number_list(t, "task.prepulse", "durations_s");
    cfg.prepulse.n_atoms = count(t, "task.prepulse", "n_atoms");
    cfg.prepulse.seed = count(t, "task.prepulse", "seed");
    cfg.prepulse.bins_par =
        static_cast<std::size_t>(count(t, "task.prepulse", "bins_par"));
    cfg.prepulse.bins_perp =
        static_cast<std::size_t>(count(t, "task.prepulse", "bins_perp"));
    cfg.prepulse.bins_radial =
        static_cast<std::size_t>(count(t, "task.prepulse", "bins_radial"));
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

}  // namespace fermisea
