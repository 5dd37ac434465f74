// Batch front-end: reads a JSON run configuration, maps subcommands onto the
// library, and emits deterministic CSV/JSON files with provenance sidecars.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fermisea/blockade.hpp"
#include "fermisea/config.hpp"
#include "fermisea/gas.hpp"
#include "fermisea/numerics.hpp"
#include "fermisea/observables.hpp"
#include "fermisea/optics.hpp"
#include "fermisea/output.hpp"
#include "fermisea/profile.hpp"
#include "fermisea/version.hpp"

namespace {

using namespace fermisea;

constexpr int kExitConfig = 2;     // config or parameter-domain failure
constexpr int kExitNumerical = 3;  // kernel failed to meet its own checks

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::string method = "quadrature";
  std::string format = "csv";
  std::uint64_t seed = 0;
  bool seed_given = false;
};

std::string axis_label(const DetectionAxis& axis) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s_%gdeg", axis.alpha_deg);
  return buf;
}

void run_suppression(const RunConfig& cfg, const GasState& state,
                     const CliOptions& opt, Provenance prov) {
  const double k = cfg.suppression.k_over_kf;
  const std::uint64_t seed =
      opt.seed_given ? opt.seed : cfg.suppression.seed;
  Table table;
  table.columns = {"method",      "k_over_kf", "t_over_tf",
                   "s",           "std_error", "samples_or_evals"};
  const auto add = [&](const SuppressionResult& r) {
    table.rows.push_back({std::string(method_name(r.method)), k,
                          state.t_over_tf, r.s_value, r.std_error,
                          static_cast<double>(r.samples_or_evals)});
  };
  const bool all = opt.method == "all";
  bool used_seed = false;
  if (all || opt.method == "quadrature") add(suppression_trapped(k, state));
  if (opt.method == "series" || (all && state.fugacity <= 0.95))
    add(suppression_series(k, state));
  if (all || opt.method == "mc") {
    add(suppression_mc(k, state, cfg.suppression.mc_samples, seed));
    used_seed = true;
  }
  prov.method = opt.method;
  if (used_seed) {
    prov.seed = seed;
    prov.has_seed = true;
  }
  write_table(opt.out_dir, "suppression", table, prov, opt.format);
}

void run_sweep(const RunConfig& cfg, const GasScales& scales,
               SweepVariable variable, const CliOptions& opt,
               Provenance prov) {
  SweepSpec spec;
  spec.variable = variable;
  const bool sweep_t = variable == SweepVariable::t_over_tf;
  spec.fixed_value = sweep_t ? scales.ratio_kf_kr : cfg.t_over_tf;
  spec.grid =
      sweep_t ? cfg.sweep_temperature.grid : cfg.sweep_fermi.grid;
  for (const DetectorConfig& d : cfg.detection) spec.axes.push_back(d.axis);
  const std::vector<SweepRow> rows = sweep(spec);
  Table table;
  table.columns = {sweep_t ? "t_over_tf" : "kf_over_kr"};
  for (const DetectionAxis& axis : spec.axes)
    table.columns.push_back(axis_label(axis));
  for (const SweepRow& row : rows) {
    std::vector<Cell> cells{row.variable};
    for (double s : row.s) cells.push_back(s);
    table.rows.push_back(std::move(cells));
  }
  write_table(opt.out_dir, sweep_t ? "sweep_temperature" : "sweep_fermi",
              table, prov, opt.format);
}

void run_angular_map(const RunConfig& cfg, const GasScales& scales,
                     const GasState& state, const CliOptions& opt,
                     Provenance prov) {
  const std::vector<AngularPoint> points =
      angular_map(state, scales.ratio_kf_kr, cfg.angular_map.n_alpha);
  Table table;
  table.columns = {"alpha_deg", "k_over_kf", "s"};
  for (const AngularPoint& p : points)
    table.rows.push_back({p.alpha_deg, p.k_over_kf, p.s});
  write_table(opt.out_dir, "angular_map", table, prov, opt.format);
}

void run_lifetime(const RunConfig& cfg, const GasScales& scales,
                  const GasState& state, const CliOptions& opt,
                  Provenance prov) {
  const LifetimeResult r =
      lifetime_factor(state, scales.ratio_kf_kr, cfg.lifetime.weighting);
  const std::string name =
      cfg.lifetime.weighting == EmissionWeighting::dipole_circular
          ? "dipole_circular"
          : "isotropic";
  Table table;
  table.columns = {"t_over_tf", "weighting", "mean_s", "multiplier"};
  table.rows.push_back({state.t_over_tf, name, r.mean_s, r.multiplier});
  write_table(opt.out_dir, "lifetime", table, prov, opt.format);
}

void run_radial_profile(const RunConfig& cfg, const GasScales& scales,
                        const GasState& state, const CliOptions& opt,
                        Provenance prov) {
  const TaskRadialProfile& task = cfg.radial_profile;
  const BlockedProfile prof =
      blocked_scattering_profile(scales, state, task.k_over_kf, task.grid);
  const ScalarMap2D column = column_density(scales, state, task.grid);
  ScalarMap2D blocked = prof.blocked;
  ScalarMap2D unblocked = prof.unblocked;
  ScalarMap2D ratio = prof.ratio;
  if (task.blur_e2_width_m > 0.0) {
    blocked = gaussian_blur(blocked, task.blur_e2_width_m);
    unblocked = gaussian_blur(unblocked, task.blur_e2_width_m);
    for (std::size_t i = 0; i < ratio.values.size(); ++i)
      ratio.values[i] = unblocked.values[i] > 0.0
                            ? blocked.values[i] / unblocked.values[i]
                            : 1.0;
  }
  const RadialProfile radial = radial_average(
      ratio, ratio.origin_x, ratio.origin_y, task.bin_width_m);
  Table table;
  table.columns = {"bin_center_m", "mean_ratio", "pixel_count"};
  for (std::size_t i = 0; i < radial.means.size(); ++i)
    table.rows.push_back({radial.bin_centers[i], radial.means[i],
                          static_cast<double>(radial.counts[i])});

  const char* col_units = "atoms per m^2 per spin state";
  write_matrix(opt.out_dir, "column_density", column, prov, col_units);
  write_matrix(opt.out_dir, "blocked", blocked, prov, col_units);
  write_matrix(opt.out_dir, "unblocked", unblocked, prov, col_units);
  write_matrix(opt.out_dir, "ratio", ratio, prov, "dimensionless");
  write_table(opt.out_dir, "radial_ratio", table, prov, opt.format);
}

void run_prepulse(const RunConfig& cfg, const GasScales& scales,
                  const GasState& state, const CliOptions& opt,
                  Provenance prov) {
  PrepulseParams params;
  params.kf_over_kr = scales.ratio_kf_kr;
  params.scatter_rate_hz = cfg.prepulse.scatter_rate_hz;
  params.durations_s = cfg.prepulse.durations_s;
  params.probe = cfg.detection.front().axis;
  params.seed = opt.seed_given ? opt.seed : cfg.prepulse.seed;
  params.n_atoms = cfg.prepulse.n_atoms;
  params.bins_par = cfg.prepulse.bins_par;
  params.bins_perp = cfg.prepulse.bins_perp;
  params.bins_radial = cfg.prepulse.bins_radial;
  const PrepulseResult result = prepulse_relaxation_mc(state, params);
  Table table;
  table.columns = {"duration_s", "response", "normalized_s", "std_error"};
  for (const PrepulseRow& row : result.rows)
    table.rows.push_back(
        {row.duration_s, row.response, row.normalized_s, row.std_error});
  prov.seed = params.seed;
  prov.has_seed = true;
  write_table(opt.out_dir, "prepulse", table, prov, opt.format);
}

void run_budget(const RunConfig& cfg, const GasScales& scales,
                const GasState& state, const CliOptions& opt,
                Provenance prov) {
  const ScatteringOutput scatter = scattering_rate(cfg.drive, cfg.species);
  const OpticalDensity od =
      optical_density(scales, state, cfg.drive, cfg.trap.n_spins);
  const DetectorConfig& det = cfg.detection.front();
  const double n_total =
      cfg.trap.n_per_spin * static_cast<double>(cfg.trap.n_spins);
  const double photons = photon_budget(scatter, det.axis.numerical_aperture,
                                       det.quantum_efficiency, n_total);
  nlohmann::json out;
  out["provenance"] = prov.to_json();
  out["fermi_energy_nk"] = scales.fermi_energy_nk;
  out["recoil_energy_nk"] = scales.recoil_energy_nk;
  out["kf_over_kr"] = scales.ratio_kf_kr;
  out["t_over_tf"] = state.t_over_tf;
  out["scattering_rate_hz"] = scatter.rate_hz;
  out["excitation_fraction"] = scatter.excitation_fraction;
  out["linear_valid"] = scatter.linear_valid;
  out["od_resonant"] = od.od_resonant;
  out["od_effective"] = od.od_effective;
  out["transmission"] = od.transmission;
  out["aperture_fraction"] = aperture_fraction(det.axis.numerical_aperture);
  out["detected_photons"] = photons;
  write_text_file(std::filesystem::path(opt.out_dir) / "budget.json",
                  out.dump(2) + "\n");
}

int dispatch(const std::string& sub, const CliOptions& opt) {
  const RunConfig cfg = load_config(opt.config_path);
  const GasScales scales = derive_scales(cfg.trap, cfg.species);
  const GasState state = solve_fugacity(cfg.t_over_tf);
  std::filesystem::create_directories(opt.out_dir);
  Provenance prov;
  prov.subcommand = sub;
  prov.config_hash = config_hash(cfg.raw);

  if (sub == "suppression")
    run_suppression(cfg, state, opt, prov);
  else if (sub == "sweep-temperature")
    run_sweep(cfg, scales, SweepVariable::t_over_tf, opt, prov);
  else if (sub == "sweep-fermi")
    run_sweep(cfg, scales, SweepVariable::kf_over_kr, opt, prov);
  else if (sub == "angular-map")
    run_angular_map(cfg, scales, state, opt, prov);
  else if (sub == "lifetime")
    run_lifetime(cfg, scales, state, opt, prov);
  else if (sub == "radial-profile")
    run_radial_profile(cfg, scales, state, opt, prov);
  else if (sub == "prepulse")
    run_prepulse(cfg, scales, state, opt, prov);
  else if (sub == "budget")
    run_budget(cfg, scales, state, opt, prov);
  return 0;
}

void emit_error(const char* kind, const std::string& message) {
  nlohmann::json err;
  err["error"] = kind;
  err["message"] = message;
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Pauli suppression of photon scattering in a trapped Fermi gas"};
  CliOptions opt;
  app.add_option("--config", opt.config_path, "JSON run configuration")
      ->required();
  app.add_option("--out", opt.out_dir, "output directory (default '.')");
  CLI::Option* seed_opt =
      app.add_option("--seed", opt.seed, "override the task RNG seed");
  app.add_option("--method", opt.method,
                 "suppression evaluation method (default 'quadrature')")
      ->check(CLI::IsMember({"quadrature", "mc", "series", "all"}));
  app.add_option("--format", opt.format,
                 "tabular output format (default 'csv')")
      ->check(CLI::IsMember({"csv", "json"}));
  app.require_subcommand(1);
  for (const char* name :
       {"suppression", "sweep-temperature", "sweep-fermi", "angular-map",
        "lifetime", "radial-profile", "prepulse", "budget"})
    app.add_subcommand(name)->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  opt.seed_given = seed_opt->count() > 0;
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    return dispatch(sub, opt);
  } catch (const ConfigError& e) {
    emit_error("validation", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    emit_error("numerical", e.what());
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    emit_error("validation", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return kExitNumerical;
  }
}
