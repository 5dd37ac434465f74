#include "fermisea/profile.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "fermisea/blockade.hpp"
#include "fermisea/gas.hpp"
#include "fermisea/rng.hpp"
#include "fermisea/specfun.hpp"
#include "oracle_helpers.hpp"

namespace {

using namespace fermisea;

GasScales paper_scales() {
  return derive_scales(oracle::paper_trap(), oracle::paper_species());
}

ScalarMap2D random_map(std::size_t n, std::uint64_t seed) {
  ScalarMap2D map;
  map.nx = map.ny = n;
  map.pixel_size = 0.9e-6;
  map.origin_x = map.origin_y = 0.5 * static_cast<double>(n - 1);
  map.values.resize(n * n);
  Rng rng(seed);
  for (double& v : map.values) v = rng.uniform();
  return map;
}

TEST(Grid, RejectsBadSpecs) {
  const GasScales scales = paper_scales();
  const GasState state = solve_fugacity(0.12);
  EXPECT_THROW(column_density(scales, state, {4, 64, 0.9e-6}),
               std::domain_error);
  EXPECT_THROW(column_density(scales, state, {64, 4, 0.9e-6}),
               std::domain_error);
  EXPECT_THROW(column_density(scales, state, {64, 64, 0.0}),
               std::domain_error);
  EXPECT_THROW(column_density(scales, state, {64, 64, -0.9e-6}),
               std::domain_error);
}

TEST(MapChecks, RejectInconsistentOrNonFiniteMaps) {
  ScalarMap2D map = random_map(16, 3);
  map.values.pop_back();
  EXPECT_THROW(radial_average(map, 8.0, 8.0, 1e-6), std::domain_error);
  map = random_map(16, 3);
  map.at(5, 5) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(gaussian_blur(map, 2e-6), std::domain_error);
}

TEST(Column, IntegratesToAtomNumber) {
  const GasScales scales = paper_scales();
  const ScalarMap2D cold =
      column_density(scales, solve_fugacity(0.12), GridSpec{});
  const double pixel_area = cold.pixel_size * cold.pixel_size;
  EXPECT_NEAR(cold.sum() * pixel_area / scales.trap.n_per_spin, 1.0, 1e-6);

  GridSpec wide;
  wide.nx = wide.ny = 96;
  wide.pixel_size = 1.8e-6;
  const ScalarMap2D hot = column_density(scales, solve_fugacity(5.0), wide);
  EXPECT_NEAR(hot.sum() * wide.pixel_size * wide.pixel_size /
                  scales.trap.n_per_spin,
              1.0, 1e-3);
}

TEST(Column, MatchesLineOfSightQuadrature) {
  const GasScales scales = paper_scales();
  for (double t : {0.13, 0.5}) {
    const GasState state = solve_fugacity(t);
    const ScalarMap2D col = column_density(scales, state, GridSpec{});
    const double kbt =
        state.t_over_tf * scales.fermi_temperature * constants::k_boltzmann;
    const double m = scales.species.mass;
    const double inv_lambda3 = std::pow(
        m * kbt / (2.0 * constants::pi * constants::hbar * constants::hbar),
        1.5);
    const double cx = 0.5 * m * scales.trap.omega_x * scales.trap.omega_x / kbt;
    const double cz = 0.5 * m * scales.trap.omega_z * scales.trap.omega_z / kbt;
    const double x = col.x_coord(31), y = col.y_coord(31);
    const double arg0 = state.beta_mu - cx * (x * x + y * y);
    const double z_max = std::sqrt((arg0 + 34.0) / cz);
    const double direct =
        2.0 * oracle::simpson(
                  [&](double z) {
                    return inv_lambda3 * fd(1.5, arg0 - cz * z * z);
                  },
                  0.0, z_max, 4000);
    EXPECT_NEAR(col.at(31, 31) / direct, 1.0, 1e-7);
  }
}

TEST(Column, GridMissingTheCloudFailsConservation) {
  const GasScales scales = paper_scales();
  EXPECT_THROW(column_density(scales, solve_fugacity(0.12), {8, 8, 0.9e-6}),
               NumericalError);
}

// In the Boltzmann regime the cloud is Gaussian with widths
// sigma_i = sqrt(k_B T / m omega_i^2).
TEST(Column, ClassicalCloudIsGaussian) {
  const GasScales scales = paper_scales();
  const GasState state = solve_fugacity(5.0);
  GridSpec wide;
  wide.nx = wide.ny = 96;
  wide.pixel_size = 1.8e-6;
  const ScalarMap2D col = column_density(scales, state, wide);
  const double kbt =
      state.t_over_tf * scales.fermi_temperature * constants::k_boltzmann;
  const double m = scales.species.mass;
  const double cx = 0.5 * m * scales.trap.omega_x * scales.trap.omega_x / kbt;
  const double cy = 0.5 * m * scales.trap.omega_y * scales.trap.omega_y / kbt;
  const auto v_of = [&](std::size_t ix, std::size_t iy) {
    const double x = col.x_coord(ix), y = col.y_coord(iy);
    return cx * x * x + cy * y * y;
  };
  const double amplitude = col.at(47, 47) / std::exp(-v_of(47, 47));
  double worst = 0.0;
  for (std::size_t iy = 0; iy < col.ny; ++iy)
    for (std::size_t ix = 0; ix < col.nx; ++ix)
      worst = std::max(
          worst, std::abs(col.at(ix, iy) - amplitude * std::exp(-v_of(ix, iy))));
  EXPECT_LT(worst / amplitude, 1e-3);
}

// The peak 3D density of the coldest clouds pins the Fermi wavevector:
// n(0) approaches k_F^3 / 6 pi^2 as T -> 0, and sits 5% below it at
// T/T_F = 0.12 (the exact ratio is (3 sqrt(pi)/4) tau^1.5 f_{3/2}(beta mu)).
TEST(Column, PeakDensityTracksFermiWavevector) {
  const GasScales scales = paper_scales();
  const GasState state = solve_fugacity(0.12);
  const double kbt =
      state.t_over_tf * scales.fermi_temperature * constants::k_boltzmann;
  const double inv_lambda3 =
      std::pow(scales.species.mass * kbt /
                   (2.0 * constants::pi * constants::hbar * constants::hbar),
               1.5);
  const double n_peak = inv_lambda3 * fd(1.5, state.beta_mu);
  const double n_fermi = std::pow(scales.fermi_wavevector, 3) /
                         (6.0 * constants::pi * constants::pi);
  EXPECT_NEAR(n_peak / n_fermi, 0.94834, 5e-4);
  EXPECT_NEAR(n_peak / n_fermi, 1.0, 0.06);
}

TEST(Column, TenPercentDiameterNearTwentyMicrons) {
  const GasScales scales = paper_scales();
  const ScalarMap2D col =
      column_density(scales, solve_fugacity(0.12), GridSpec{});
  double peak = 0.0;
  for (double v : col.values) peak = std::max(peak, v);
  int above = 0;
  for (std::size_t ix = 0; ix < col.nx; ++ix)
    if (col.at(ix, 31) >= 0.1 * peak) ++above;
  const double diameter = above * col.pixel_size;
  EXPECT_GT(diameter, 14e-6);
  EXPECT_LT(diameter, 27e-6);
  EXPECT_NEAR(diameter, 21.6e-6, 1e-6);
}

TEST(Blocked, GlobalRatioMatchesTrappedSuppression) {
  const GasScales scales = paper_scales();
  for (double t : {0.12, 0.3, 0.58}) {
    const GasState state = solve_fugacity(t);
    const BlockedProfile prof =
        blocked_scattering_profile(scales, state, 0.4471, GridSpec{});
    const double s_global = suppression_trapped(0.4471, state).s_value;
    EXPECT_NEAR(prof.global_ratio, s_global, 1e-4) << "t = " << t;
  }
}

TEST(Blocked, LocalRatioRisesOutward) {
  const GasScales scales = paper_scales();
  const BlockedProfile prof =
      blocked_scattering_profile(scales, solve_fugacity(0.12), 0.4471,
                                 GridSpec{});
  const double center = prof.ratio.at(31, 31);
  EXPECT_NEAR(center, 0.43145, 5e-4);
  double prev = center;
  for (std::size_t ix : {38u, 45u, 52u, 59u}) {
    const double r = prof.ratio.at(ix, 31);
    EXPECT_GT(r, prev);
    EXPECT_LE(r, 1.0 + 1e-9);
    prev = r;
  }
  EXPECT_GT(prof.ratio.at(52, 31), 0.999);
}

TEST(Blocked, UnblockedAgreesWithColumnDensity) {
  const GasScales scales = paper_scales();
  for (double t : {0.12, 0.3, 0.58}) {
    const GasState state = solve_fugacity(t);
    const BlockedProfile prof =
        blocked_scattering_profile(scales, state, 0.4471, GridSpec{});
    const ScalarMap2D col = column_density(scales, state, GridSpec{});
    double peak = 0.0;
    for (double v : col.values) peak = std::max(peak, v);
    double worst = 0.0;
    for (std::size_t i = 0; i < col.values.size(); ++i)
      worst = std::max(
          worst, std::abs(prof.unblocked.values[i] - col.values[i]) / peak);
    EXPECT_LT(worst, 5e-4) << "t = " << t;
  }
}

TEST(Blocked, ClassicalGasIsUnsuppressed) {
  const GasScales scales = paper_scales();
  GridSpec wide;
  wide.nx = wide.ny = 96;
  wide.pixel_size = 1.8e-6;
  const BlockedProfile prof =
      blocked_scattering_profile(scales, solve_fugacity(5.0), 0.4471, wide);
  for (double r : prof.ratio.values) {
    EXPECT_GT(r, 0.999);
    EXPECT_LE(r, 1.0 + 1e-9);
  }
  EXPECT_NEAR(prof.global_ratio, 1.0, 1e-3);
}

TEST(Blocked, RejectsBadTransfer) {
  const GasScales scales = paper_scales();
  const GasState state = solve_fugacity(0.3);
  EXPECT_THROW(blocked_scattering_profile(scales, state, -0.1, GridSpec{}),
               std::domain_error);
  EXPECT_THROW(blocked_scattering_profile(
                   scales, state, std::numeric_limits<double>::quiet_NaN(),
                   GridSpec{}),
               std::domain_error);
}

TEST(Radial, UniformMapGivesConstantMeans) {
  ScalarMap2D map = random_map(32, 1);
  std::fill(map.values.begin(), map.values.end(), 5.0);
  const RadialProfile prof = radial_average(map, 15.5, 15.5, 1.5e-6);
  ASSERT_FALSE(prof.means.empty());
  std::size_t pixels = 0;
  for (std::size_t i = 0; i < prof.means.size(); ++i) {
    EXPECT_DOUBLE_EQ(prof.means[i], 5.0);
    EXPECT_GE(prof.counts[i], 1u);
    EXPECT_NEAR(prof.bin_centers[i],
                (std::floor(prof.bin_centers[i] / 1.5e-6) + 0.5) * 1.5e-6,
                1e-12);
    pixels += prof.counts[i];
  }
  EXPECT_EQ(pixels, map.values.size());
}

TEST(Radial, RecoversRadialFunction) {
  ScalarMap2D map;
  map.nx = map.ny = 65;
  map.pixel_size = 0.9e-6;
  map.origin_x = map.origin_y = 32.0;
  map.values.resize(65 * 65);
  const double sigma = 5.4e-6;
  for (std::size_t iy = 0; iy < 65; ++iy)
    for (std::size_t ix = 0; ix < 65; ++ix) {
      const double r = std::hypot(map.x_coord(ix), map.y_coord(iy));
      map.at(ix, iy) = std::exp(-0.5 * r * r / (sigma * sigma));
    }
  const RadialProfile prof = radial_average(map, 32.0, 32.0, 0.9e-6);
  for (std::size_t i = 0; i < prof.means.size(); ++i) {
    const double r = prof.bin_centers[i];
    EXPECT_NEAR(prof.means[i], std::exp(-0.5 * r * r / (sigma * sigma)), 0.04);
  }
}

TEST(Radial, ColumnDensityDecreasesMonotonically) {
  const GasScales scales = paper_scales();
  const ScalarMap2D col =
      column_density(scales, solve_fugacity(0.12), GridSpec{});
  const RadialProfile prof = radial_average(col, 31.5, 31.5, 0.9e-6);
  for (std::size_t i = 1; i < prof.means.size(); ++i) {
    if (prof.means[i - 1] < 1e-6 * prof.means[0]) break;
    EXPECT_LT(prof.means[i], prof.means[i - 1]);
  }
}

TEST(Radial, RejectsBadInputs) {
  const ScalarMap2D map = random_map(16, 2);
  EXPECT_THROW(radial_average(map, 8.0, 8.0, 0.0), std::domain_error);
  EXPECT_THROW(radial_average(map, -1.0, 8.0, 1e-6), std::domain_error);
  EXPECT_THROW(radial_average(map, 8.0, 16.0, 1e-6), std::domain_error);
}

TEST(Blur, ZeroWidthIsIdentity) {
  const ScalarMap2D map = random_map(24, 9);
  const ScalarMap2D out = gaussian_blur(map, 0.0);
  for (std::size_t i = 0; i < map.values.size(); ++i)
    EXPECT_DOUBLE_EQ(out.values[i], map.values[i]);
}

TEST(Blur, ConservesTotalMass) {
  const ScalarMap2D map = random_map(64, 17);
  const ScalarMap2D out = gaussian_blur(map, 4.5e-6);
  EXPECT_NEAR(out.sum() / map.sum(), 1.0, 1e-12);
}

// A point source blurred with a 3 um 1/e^2 width must measure back at that
// width to within half a pixel.
TEST(Blur, DeltaReachesStatedWidth) {
  ScalarMap2D delta;
  delta.nx = delta.ny = 33;
  delta.pixel_size = 0.9e-6;
  delta.origin_x = delta.origin_y = 16.0;
  delta.values.assign(33 * 33, 0.0);
  delta.at(16, 16) = 1.0;
  const ScalarMap2D out = gaussian_blur(delta, 3.0e-6);
  const double target = out.at(16, 16) * std::exp(-2.0);
  double radius = 0.0;
  for (std::size_t ix = 16; ix + 1 < 33; ++ix) {
    if (out.at(ix, 16) >= target && out.at(ix + 1, 16) < target) {
      const double f =
          (out.at(ix, 16) - target) / (out.at(ix, 16) - out.at(ix + 1, 16));
      radius = (static_cast<double>(ix) - 16.0 + f) * delta.pixel_size;
      break;
    }
  }
  EXPECT_NEAR(2.0 * radius, 3.0e-6, 0.45e-6);
  EXPECT_NEAR(2.0 * radius, 3.27e-6, 0.05e-6);
}

// Blurring a rotationally symmetric map keeps it symmetric, so radial
// averaging gives the same profile whichever operation runs first in a
// rotated frame.
TEST(Blur, CommutesWithRotationForSymmetricMaps) {
  ScalarMap2D map;
  map.nx = map.ny = 65;
  map.pixel_size = 0.9e-6;
  map.origin_x = map.origin_y = 32.0;
  map.values.resize(65 * 65);
  for (std::size_t iy = 0; iy < 65; ++iy)
    for (std::size_t ix = 0; ix < 65; ++ix) {
      const double r = std::hypot(map.x_coord(ix), map.y_coord(iy));
      map.at(ix, iy) = std::exp(-0.5 * r * r / (4.5e-6 * 4.5e-6));
    }
  const ScalarMap2D out = gaussian_blur(map, 3.0e-6);
  const double peak = out.at(32, 32);
  for (std::size_t d = 1; d <= 32; ++d) {
    EXPECT_NEAR(out.at(32 + d, 32), out.at(32 - d, 32), 1e-12 * peak);
    EXPECT_NEAR(out.at(32 + d, 32), out.at(32, 32 + d), 1e-12 * peak);
    EXPECT_NEAR(out.at(32 + d, 32 + d), out.at(32 - d, 32 - d), 1e-12 * peak);
  }
  ScalarMap2D rotated = out;
  for (std::size_t iy = 0; iy < 65; ++iy)
    for (std::size_t ix = 0; ix < 65; ++ix)
      rotated.at(ix, iy) = out.at(64 - iy, ix);
  const RadialProfile a = radial_average(out, 32.0, 32.0, 0.9e-6);
  const RadialProfile b = radial_average(rotated, 32.0, 32.0, 0.9e-6);
  ASSERT_EQ(a.means.size(), b.means.size());
  for (std::size_t i = 0; i < a.means.size(); ++i)
    EXPECT_NEAR(a.means[i], b.means[i], 1e-12 * peak);
}

TEST(Blur, RejectsOversizedKernelAndNegativeWidth) {
  const ScalarMap2D map = random_map(8, 5);
  EXPECT_THROW(gaussian_blur(map, 40e-6), std::domain_error);
  EXPECT_THROW(gaussian_blur(map, -1e-6), std::domain_error);
}

}  // namespace
