#pragma once

// Trap and species parameters, global Fermi/recoil scales, and the
// thermodynamic state (T/T_F, beta*mu) of the harmonically trapped ideal
// Fermi gas. The fugacity solves f_3(beta*mu) = 1/(6 (T/T_F)^3).

#include <cmath>
#include <stdexcept>

#include "fermisea/constants.hpp"
#include "fermisea/numerics.hpp"
#include "fermisea/specfun.hpp"

namespace fermisea {

struct TrapGeometry {
  double omega_x = 0.0;  // rad/s
  double omega_y = 0.0;
  double omega_z = 0.0;
  double n_per_spin = 0.0;
  int n_spins = 1;
};

struct SpeciesParams {
  double mass = 0.0;        // kg
  double wavelength = 0.0;  // m, scattering transition
  double linewidth = 0.0;   // rad/s, natural linewidth Gamma
  double i_sat = 0.0;       // W/m^2
};

struct GasScales {
  TrapGeometry trap;
  SpeciesParams species;
  double omega_bar = 0.0;           // rad/s, geometric mean
  double fermi_energy = 0.0;        // J
  double fermi_energy_nk = 0.0;     // nK
  double fermi_temperature = 0.0;   // K
  double fermi_wavevector = 0.0;    // 1/m
  double recoil_energy = 0.0;       // J
  double recoil_energy_nk = 0.0;    // nK
  double recoil_wavevector = 0.0;   // 1/m
  double ratio_kf_kr = 0.0;
  double hbar_omega_over_recoil = 0.0;
  bool weak_confinement = false;    // hbar*omega_bar / E_R < 0.05
};

struct GasState {
  double t_over_tf = 0.0;
  double beta_mu = 0.0;
  double fugacity = 0.0;  // exp(beta_mu); saturates to inf for beta_mu > 709
};

inline GasScales derive_scales(const TrapGeometry& trap,
                               const SpeciesParams& species) {
  if (!(trap.omega_x > 0.0) || !(trap.omega_y > 0.0) || !(trap.omega_z > 0.0))
    throw std::domain_error("derive_scales: trap frequencies must be positive");
  if (!(trap.n_per_spin >= 1.0))
    throw std::domain_error("derive_scales: need at least one atom per spin");
  if (trap.n_spins < 1)
    throw std::domain_error("derive_scales: n_spins must be >= 1");
  if (!(species.mass > 0.0) || !(species.wavelength > 0.0))
    throw std::domain_error("derive_scales: invalid species parameters");

  using namespace constants;
  GasScales s;
  s.trap = trap;
  s.species = species;
  s.omega_bar = std::cbrt(trap.omega_x * trap.omega_y * trap.omega_z);
  s.fermi_energy = std::cbrt(6.0 * trap.n_per_spin) * hbar * s.omega_bar;
  s.fermi_temperature = s.fermi_energy / k_boltzmann;
  s.fermi_energy_nk = s.fermi_temperature * 1e9;
  s.fermi_wavevector = std::sqrt(2.0 * species.mass * s.fermi_energy) / hbar;
  s.recoil_wavevector = 2.0 * pi / species.wavelength;
  s.recoil_energy = hbar * hbar * s.recoil_wavevector * s.recoil_wavevector /
                    (2.0 * species.mass);
  s.recoil_energy_nk = s.recoil_energy / k_boltzmann * 1e9;
  s.ratio_kf_kr = s.fermi_wavevector / s.recoil_wavevector;
  s.hbar_omega_over_recoil = hbar * s.omega_bar / s.recoil_energy;
  s.weak_confinement = s.hbar_omega_over_recoil < 0.05;
  return s;
}

inline double t_over_tf_from_mu(double beta_mu) {
  return std::cbrt(1.0 / (6.0 * fd(3.0, beta_mu)));
}

inline GasState state_from_beta_mu(double beta_mu) {
  GasState st;
  st.beta_mu = beta_mu;
  st.t_over_tf = t_over_tf_from_mu(beta_mu);
  st.fugacity = std::exp(beta_mu);
  return st;
}

// Inverts 1/(6 t^3) = f_3(beta_mu) for t in [0.01, 100].
inline GasState solve_fugacity(double t_over_tf) {
  if (!(t_over_tf >= 0.01) || !(t_over_tf <= 100.0))
    throw std::domain_error(
        "solve_fugacity: t_over_tf outside supported range [0.01, 100]");
  const double target = 1.0 / (6.0 * t_over_tf * t_over_tf * t_over_tf);

  // Starting guess: classical when dilute, Sommerfeld root of
  // mu^3 + pi^2 mu = 6*target otherwise.
  double guess;
  if (target < 0.7) {
    guess = std::log(target);
  } else {
    guess = std::cbrt(6.0 * target);
    for (int i = 0; i < 4; ++i) {
      const double f = guess * guess * guess +
                       constants::pi * constants::pi * guess - 6.0 * target;
      const double d = 3.0 * guess * guess + constants::pi * constants::pi;
      guess -= f / d;
    }
  }
  double lo = guess - 1.0, hi = guess + 1.0;
  while (fd(3.0, lo) > target) lo -= 2.0;
  while (fd(3.0, hi) < target) hi += 2.0;
  const double beta_mu = solve_increasing(
      [target](double mu) { return fd(3.0, mu) - target; },
      [](double mu) { return fd(2.0, mu); }, lo, hi, 1e-14);

  GasState st;
  st.t_over_tf = t_over_tf;
  st.beta_mu = beta_mu;
  st.fugacity = std::exp(beta_mu);
  return st;
}

}  // namespace fermisea
