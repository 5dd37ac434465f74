#pragma once

// Experiment budget layer: off-resonant scattering rate and excitation
// fraction, optical density of the cloud, and the detected-photon budget.
// These are order-of-magnitude instruments for planning a measurement, not
// precision observables; the suppression physics lives in blockade.

#include <cmath>
#include <stdexcept>

#include "fermisea/constants.hpp"
#include "fermisea/gas.hpp"
#include "fermisea/specfun.hpp"

namespace fermisea {

struct DriveParams {
  double saturation = 0.0;          // s = I / I_sat
  double detuning_over_gamma = 0.0; // Delta / Gamma
  double pulse_duration = 0.0;      // s
};

inline void validate(const DriveParams& drive) {
  if (!(drive.saturation >= 0.0))
    throw std::domain_error("drive saturation parameter must be >= 0");
  if (!(drive.pulse_duration > 0.0))
    throw std::domain_error("drive pulse duration must be positive");
}

// 1 + s + (2 Delta / Gamma)^2, the Lorentzian suppression of the drive.
inline double lorentz_denominator(const DriveParams& drive) {
  const double d = 2.0 * drive.detuning_over_gamma;
  return 1.0 + drive.saturation + d * d;
}

struct ScatteringOutput {
  double rate_hz = 0.0;              // photons per atom per second
  double excitation_fraction = 0.0;  // rate * pulse duration
  bool linear_valid = true;          // linearization flagged above 0.3
};

inline ScatteringOutput scattering_rate(const DriveParams& drive,
                                        const SpeciesParams& species) {
  validate(drive);
  if (!(species.linewidth > 0.0))
    throw std::domain_error("species linewidth must be positive");
  ScatteringOutput out;
  out.rate_hz = 0.5 * species.linewidth * drive.saturation /
                lorentz_denominator(drive);
  out.excitation_fraction = out.rate_hz * drive.pulse_duration;
  out.linear_valid = out.excitation_fraction <= 0.3;
  return out;
}

// Peak column density per spin state (atoms/m^2), looking along z. The
// Gaussian line-of-sight integral turns the f_{3/2} density into f_2:
// Int dz f_{3/2}(beta mu - c z^2) = sqrt(pi / c) f_2(beta mu).
inline double peak_column_density(const GasScales& scales,
                                  const GasState& state) {
  using namespace constants;
  const double kbt =
      state.t_over_tf * scales.fermi_temperature * k_boltzmann;
  const double m = scales.species.mass;
  const double inv_lambda3 =
      std::pow(m * kbt / (2.0 * pi * hbar * hbar), 1.5);
  const double z_extent = std::sqrt(2.0 * pi * kbt / m) / scales.trap.omega_z;
  return inv_lambda3 * z_extent * fd(2.0, state.beta_mu);
}

struct OpticalDensity {
  double od_resonant = 0.0;   // sigma_0 * column density, all spins
  double od_effective = 0.0;  // od_resonant / (1 + s + (2 Delta/Gamma)^2)
  double transmission = 0.0;  // exp(-od_effective)
};

// Resonant cross section of a two-level cycling transition, 3 lambda^2/2 pi;
// the multi-level structure of the real atom is absorbed by the consumer's
// tolerance (these budgets are quoted to tens of percent).
inline double resonant_cross_section(const SpeciesParams& species) {
  if (!(species.wavelength > 0.0))
    throw std::domain_error("species wavelength must be positive");
  return 1.5 * species.wavelength * species.wavelength / constants::pi;
}

inline OpticalDensity optical_density(const GasScales& scales,
                                      const GasState& state,
                                      const DriveParams& drive, int n_spins) {
  validate(drive);
  if (n_spins < 1)
    throw std::domain_error("optical_density: n_spins must be >= 1");
  OpticalDensity out;
  const double column =
      static_cast<double>(n_spins) * peak_column_density(scales, state);
  out.od_resonant = resonant_cross_section(scales.species) * column;
  out.od_effective = out.od_resonant / lorentz_denominator(drive);
  out.transmission = std::exp(-out.od_effective);
  return out;
}

// Fraction of the full sphere covered by a circular aperture of the given
// numerical aperture: (1 - sqrt(1 - NA^2)) / 2, half the sphere as NA -> 1.
inline double aperture_fraction(double numerical_aperture) {
  if (!(numerical_aperture > 0.0) || !(numerical_aperture <= 1.0))
    throw std::domain_error("numerical aperture must be in (0, 1]");
  return 0.5 * (1.0 - std::sqrt(1.0 - numerical_aperture * numerical_aperture));
}

// Expected photon count on a detector behind the given aperture. Quantum
// efficiency 0 is allowed (a switched-off detector counts nothing).
inline double photon_budget(const ScatteringOutput& scatter,
                            double numerical_aperture,
                            double quantum_efficiency,
                            double n_atoms_total) {
  if (!(quantum_efficiency >= 0.0) || !(quantum_efficiency <= 1.0))
    throw std::domain_error("quantum efficiency must be in [0, 1]");
  if (!(n_atoms_total >= 0.0))
    throw std::domain_error("atom number must be >= 0");
  return n_atoms_total * scatter.excitation_fraction * quantum_efficiency *
         aperture_fraction(numerical_aperture);
}

}  // namespace fermisea
