#pragma once

// Physical constants (CODATA 2018, SI units).

namespace fermisea {
namespace constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double k_boltzmann = 1.380649e-23;    // J/K (exact)
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

}  // namespace constants
}  // namespace fermisea
