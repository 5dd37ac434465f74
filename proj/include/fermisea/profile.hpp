#pragma once

// Spatially resolved maps of the trapped gas under the local density
// approximation: column densities, line-of-sight integrated blocked
// scattering, radial averaging of maps, and Gaussian blur for comparing
// theory maps against finite-resolution images.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fermisea/blockade.hpp"
#include "fermisea/constants.hpp"
#include "fermisea/gas.hpp"
#include "fermisea/numerics.hpp"
#include "fermisea/specfun.hpp"

namespace fermisea {

struct GridSpec {
  std::size_t nx = 64;
  std::size_t ny = 64;
  double pixel_size = 0.9e-6;  // m
};

inline void validate(const GridSpec& grid) {
  if (grid.nx < 8 || grid.ny < 8)
    throw std::domain_error("grid must be at least 8x8 pixels");
  if (!(grid.pixel_size > 0.0))
    throw std::domain_error("pixel size must be positive");
}

// Row-major 2D map; the trap center sits at fractional pixel coordinates
// (origin_x, origin_y).
struct ScalarMap2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double pixel_size = 0.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::vector<double> values;

  double& at(std::size_t ix, std::size_t iy) { return values[iy * nx + ix]; }
  double at(std::size_t ix, std::size_t iy) const {
    return values[iy * nx + ix];
  }
  double x_coord(std::size_t ix) const {
    return (static_cast<double>(ix) - origin_x) * pixel_size;
  }
  double y_coord(std::size_t iy) const {
    return (static_cast<double>(iy) - origin_y) * pixel_size;
  }
  double sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
};

inline void validate(const ScalarMap2D& map) {
  if (map.nx < 8 || map.ny < 8)
    throw std::domain_error("map must be at least 8x8 pixels");
  if (!(map.pixel_size > 0.0))
    throw std::domain_error("map pixel size must be positive");
  if (map.values.size() != map.nx * map.ny)
    throw std::domain_error("map value count does not match its dimensions");
  for (double v : map.values)
    if (!std::isfinite(v))
      throw std::domain_error("map contains non-finite values");
}

namespace detail {

inline ScalarMap2D centered_map(const GridSpec& grid) {
  ScalarMap2D map;
  map.nx = grid.nx;
  map.ny = grid.ny;
  map.pixel_size = grid.pixel_size;
  map.origin_x = 0.5 * static_cast<double>(grid.nx - 1);
  map.origin_y = 0.5 * static_cast<double>(grid.ny - 1);
  map.values.assign(grid.nx * grid.ny, 0.0);
  return map;
}

// beta V = cx x^2 + cy y^2 + cz z^2 with c_i = m omega_i^2 / (2 k_B T).
struct BetaPotential {
  double cx = 0.0, cy = 0.0, cz = 0.0;
  double kbt = 0.0;
};

inline BetaPotential beta_potential(const GasScales& scales,
                                    const GasState& state) {
  BetaPotential p;
  p.kbt = state.t_over_tf * scales.fermi_temperature * constants::k_boltzmann;
  const double m = scales.species.mass;
  p.cx = 0.5 * m * scales.trap.omega_x * scales.trap.omega_x / p.kbt;
  p.cy = 0.5 * m * scales.trap.omega_y * scales.trap.omega_y / p.kbt;
  p.cz = 0.5 * m * scales.trap.omega_z * scales.trap.omega_z / p.kbt;
  return p;
}

// Occupancies below beta mu = -30 carry weight < e^-30 and are dropped.
inline constexpr double kMuFloor = -30.0;

}  // namespace detail

// Column density of one spin state (atoms/m^2) looking along z; the
// line-of-sight Gaussian integral closes to f_2 of the transverse potential.
// Throws when the grid fails to hold the atom number to 1%.
inline ScalarMap2D column_density(const GasScales& scales,
                                  const GasState& state,
                                  const GridSpec& grid) {
  validate(grid);
  using namespace constants;
  const detail::BetaPotential pot = detail::beta_potential(scales, state);
  const double m = scales.species.mass;
  const double inv_lambda3 =
      std::pow(m * pot.kbt / (2.0 * pi * hbar * hbar), 1.5);
  const double amp = inv_lambda3 * std::sqrt(pi / pot.cz);
  ScalarMap2D map = detail::centered_map(grid);
  for (std::size_t iy = 0; iy < map.ny; ++iy) {
    const double y = map.y_coord(iy);
    for (std::size_t ix = 0; ix < map.nx; ++ix) {
      const double x = map.x_coord(ix);
      const double arg = state.beta_mu - pot.cx * x * x - pot.cy * y * y;
      map.at(ix, iy) = arg <= detail::kMuFloor ? 0.0 : amp * fd(2.0, arg);
    }
  }
  const double atoms = map.sum() * grid.pixel_size * grid.pixel_size;
  if (std::abs(atoms / scales.trap.n_per_spin - 1.0) > 0.01)
    throw NumericalError(
        "column density grid does not conserve the atom number to 1%; "
        "enlarge or refine the grid");
  return map;
}

namespace detail {

// The blocked and unblocked uniform-gas integrals as functions of the local
// chemical potential, tabulated once and interpolated along every line of
// sight. Arguments at or below the floor return zero.
struct LocalKernelTable {
  double mu_lo = 0.0;
  double step = 0.0;
  std::vector<double> blocked;
  std::vector<double> density;

  double eval(const std::vector<double>& tb, double mu) const {
    if (mu <= mu_lo) return 0.0;
    const double t = (mu - mu_lo) / step;
    const auto i =
        std::min(static_cast<std::size_t>(t), tb.size() - 2);
    const double w = t - static_cast<double>(i);
    return tb[i] * (1.0 - w) + tb[i + 1] * w;
  }
};

inline LocalKernelTable build_local_table(double k_over_kf, double beta_mu,
                                          double tau) {
  LocalKernelTable t;
  t.mu_lo = kMuFloor;
  const double span = beta_mu - t.mu_lo;
  const std::size_t n = std::max<std::size_t>(
      64, static_cast<std::size_t>(span / 0.05) + 2);
  t.step = span / static_cast<double>(n - 1);
  t.blocked.resize(n);
  t.density.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = t.mu_lo + t.step * static_cast<double>(i);
    const HomogeneousIntegrals h =
        homogeneous_pair_integrals(k_over_kf, mu, tau);
    t.blocked[i] = h.blocked;
    t.density[i] = h.density;
  }
  return t;
}

inline double simpson_even(const std::function<double(double)>& f, double a,
                           double b, int n) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i)
    sum += f(a + h * static_cast<double>(i)) * ((i % 2 == 1) ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace detail

struct BlockedProfile {
  ScalarMap2D blocked;    // atoms/m^2 weighted by the unblocked fraction
  ScalarMap2D unblocked;  // column density computed with the same machinery
  ScalarMap2D ratio;      // local suppression, 1 outside the cloud
  double global_ratio = 0.0;  // grid sum ratio, equals the trapped S(k)
};

// Line-of-sight integrated blocked scattering under the LDA: at each pixel
// the z integral runs the uniform-gas pair integrals at the local chemical
// potential beta mu - beta V(x, y, z).
inline BlockedProfile blocked_scattering_profile(const GasScales& scales,
                                                 const GasState& state,
                                                 double k_over_kf,
                                                 const GridSpec& grid) {
  validate(grid);
  if (!(k_over_kf >= 0.0))
    throw std::domain_error("momentum transfer must be >= 0");
  const detail::BetaPotential pot = detail::beta_potential(scales, state);
  const detail::LocalKernelTable table =
      detail::build_local_table(k_over_kf, state.beta_mu, state.t_over_tf);
  const double kf = scales.fermi_wavevector;
  const double pref =
      kf * kf * kf / (8.0 * constants::pi * constants::pi * constants::pi);

  BlockedProfile out;
  out.blocked = detail::centered_map(grid);
  out.unblocked = detail::centered_map(grid);
  out.ratio = detail::centered_map(grid);
  double total_blocked = 0.0, total_unblocked = 0.0;
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    const double y = out.blocked.y_coord(iy);
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const double x = out.blocked.x_coord(ix);
      const double arg0 = state.beta_mu - pot.cx * x * x - pot.cy * y * y;
      if (arg0 <= detail::kMuFloor) {
        out.ratio.at(ix, iy) = 1.0;  // classical limit far outside the cloud
        continue;
      }
      const double z_max = std::sqrt((arg0 - detail::kMuFloor) / pot.cz);
      const double b =
          2.0 * pref *
          detail::simpson_even(
              [&](double z) {
                return table.eval(table.blocked, arg0 - pot.cz * z * z);
              },
              0.0, z_max, 200);
      const double u =
          2.0 * pref *
          detail::simpson_even(
              [&](double z) {
                return table.eval(table.density, arg0 - pot.cz * z * z);
              },
              0.0, z_max, 200);
      out.blocked.at(ix, iy) = b;
      out.unblocked.at(ix, iy) = u;
      out.ratio.at(ix, iy) = u > 0.0 ? b / u : 1.0;
      total_blocked += b;
      total_unblocked += u;
    }
  }
  if (!(total_unblocked > 0.0))
    throw NumericalError("blocked profile: cloud does not overlap the grid");
  out.global_ratio = total_blocked / total_unblocked;
  return out;
}

struct RadialProfile {
  std::vector<double> bin_centers;  // m
  std::vector<double> means;
  std::vector<std::size_t> counts;
};

// Azimuthal average around a center given in fractional pixel coordinates;
// empty annuli are omitted.
inline RadialProfile radial_average(const ScalarMap2D& map, double center_x,
                                    double center_y, double bin_width) {
  validate(map);
  if (!(bin_width > 0.0))
    throw std::domain_error("radial bin width must be positive");
  if (!(center_x >= 0.0) || !(center_x <= static_cast<double>(map.nx - 1)) ||
      !(center_y >= 0.0) || !(center_y <= static_cast<double>(map.ny - 1)))
    throw std::domain_error("radial average center must lie inside the grid");
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  for (std::size_t iy = 0; iy < map.ny; ++iy) {
    for (std::size_t ix = 0; ix < map.nx; ++ix) {
      const double dx = (static_cast<double>(ix) - center_x) * map.pixel_size;
      const double dy = (static_cast<double>(iy) - center_y) * map.pixel_size;
      const auto bin =
          static_cast<std::size_t>(std::sqrt(dx * dx + dy * dy) / bin_width);
      if (bin >= sums.size()) {
        sums.resize(bin + 1, 0.0);
        counts.resize(bin + 1, 0);
      }
      sums[bin] += map.at(ix, iy);
      ++counts[bin];
    }
  }
  RadialProfile out;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (counts[i] == 0) continue;
    out.bin_centers.push_back((static_cast<double>(i) + 0.5) * bin_width);
    out.means.push_back(sums[i] / static_cast<double>(counts[i]));
    out.counts.push_back(counts[i]);
  }
  return out;
}

// Separable Gaussian blur whose 1/e^2 full width is e2_width (so the
// Gaussian sigma is e2_width / 4). Each source pixel scatters its value
// through a kernel renormalized over the in-grid range, so the grid sum is
// conserved exactly, also for mass near the boundary.
inline ScalarMap2D gaussian_blur(const ScalarMap2D& map, double e2_width) {
  validate(map);
  if (!(e2_width >= 0.0))
    throw std::domain_error("blur width must be >= 0");
  if (e2_width == 0.0) return map;
  const double sigma_px = 0.25 * e2_width / map.pixel_size;
  const long reach = static_cast<long>(std::ceil(4.0 * sigma_px));
  if (2 * reach + 1 >
      static_cast<long>(std::min(map.nx, map.ny)))
    throw std::domain_error("blur kernel is wider than the grid");
  std::vector<double> kernel(2 * reach + 1);
  for (long j = -reach; j <= reach; ++j)
    kernel[static_cast<std::size_t>(j + reach)] =
        std::exp(-0.5 * static_cast<double>(j * j) / (sigma_px * sigma_px));

  const auto pass = [&](const std::vector<double>& in, std::size_t n_fast,
                        std::size_t n_slow, std::size_t stride_fast,
                        std::size_t stride_slow, std::vector<double>& out) {
    for (std::size_t s = 0; s < n_slow; ++s) {
      for (std::size_t f = 0; f < n_fast; ++f) {
        const double v = in[s * stride_slow + f * stride_fast];
        if (v == 0.0) continue;
        const long lo = std::max<long>(-reach, -static_cast<long>(f));
        const long hi = std::min<long>(
            reach, static_cast<long>(n_fast - 1 - f));
        double weight = 0.0;
        for (long j = lo; j <= hi; ++j)
          weight += kernel[static_cast<std::size_t>(j + reach)];
        const double scale = v / weight;
        for (long j = lo; j <= hi; ++j) {
          const auto dest = static_cast<std::size_t>(static_cast<long>(f) + j);
          out[s * stride_slow + dest * stride_fast] +=
              scale * kernel[static_cast<std::size_t>(j + reach)];
        }
      }
    }
  };

  ScalarMap2D out = map;
  std::vector<double> tmp(map.values.size(), 0.0);
  pass(map.values, map.nx, map.ny, 1, map.nx, tmp);  // rows
  std::fill(out.values.begin(), out.values.end(), 0.0);
  pass(tmp, map.ny, map.nx, map.nx, 1, out.values);  // columns
  return out;
}

}  // namespace fermisea
