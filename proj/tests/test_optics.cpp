#include "fermisea/optics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracle_helpers.hpp"

using namespace fermisea;

namespace {

DriveParams paper_drive() { return {5.0, 40.0, 1e-6}; }

}  // namespace

TEST(Rate, OffResonantDriveStaysWeak) {
  const ScatteringOutput out =
      scattering_rate(paper_drive(), oracle::paper_species());
  // (Gamma/2) * 5 / (1 + 5 + 6400) with Gamma = 2 pi * 30.4 MHz.
  EXPECT_NEAR(out.rate_hz, 74543.0, 1.0);
  EXPECT_NEAR(out.excitation_fraction, 0.074543, 1e-5);
  EXPECT_LT(out.excitation_fraction, 0.1);
  EXPECT_TRUE(out.linear_valid);
}

TEST(Rate, DriveLimits) {
  const SpeciesParams sp = oracle::paper_species();
  EXPECT_DOUBLE_EQ(scattering_rate({0.0, 40.0, 1e-6}, sp).rate_hz, 0.0);
  EXPECT_DOUBLE_EQ(scattering_rate({0.0, 0.0, 1e-6}, sp).rate_hz, 0.0);
  const double saturated = scattering_rate({1e9, 0.0, 1e-9}, sp).rate_hz;
  EXPECT_NEAR(saturated / (0.5 * sp.linewidth), 1.0, 1e-8);
  // A resonant millisecond pulse is far outside the linearized regime.
  EXPECT_FALSE(scattering_rate({5.0, 0.0, 1e-3}, sp).linear_valid);
}

TEST(Rate, MonotoneInSaturationAndDetuning) {
  const SpeciesParams sp = oracle::paper_species();
  double prev = 0.0;
  for (double s : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const double r = scattering_rate({s, 40.0, 1e-6}, sp).rate_hz;
    EXPECT_GT(r, prev) << "s=" << s;
    prev = r;
  }
  prev = 1e300;
  for (double d : {0.0, 10.0, 20.0, 40.0, 80.0}) {
    const double r = scattering_rate({5.0, d, 1e-6}, sp).rate_hz;
    EXPECT_LT(r, prev) << "detuning=" << d;
    prev = r;
  }
}

TEST(Rate, RejectsBadInputs) {
  const SpeciesParams sp = oracle::paper_species();
  EXPECT_THROW(scattering_rate({-1.0, 40.0, 1e-6}, sp), std::domain_error);
  EXPECT_THROW(scattering_rate({5.0, 40.0, 0.0}, sp), std::domain_error);
  SpeciesParams bad = sp;
  bad.linewidth = 0.0;
  EXPECT_THROW(scattering_rate(paper_drive(), bad), std::domain_error);
}

// The closed-form f_2 column must equal the line-of-sight integral of the
// f_{3/2} density through the trap center.
TEST(Column, MatchesLineIntegratedDensity) {
  const GasScales sc = derive_scales(oracle::paper_trap(),
                                     oracle::paper_species());
  for (double t : {0.13, 0.5, 2.0}) {
    const GasState st = solve_fugacity(t);
    const double kbt = st.t_over_tf * sc.fermi_temperature *
                       constants::k_boltzmann;
    const double m = sc.species.mass;
    const double inv_lambda3 =
        std::pow(m * kbt / (2.0 * constants::pi * constants::hbar *
                            constants::hbar),
                 1.5);
    const double c = m * sc.trap.omega_z * sc.trap.omega_z / (2.0 * kbt);
    const double z_max = std::sqrt((std::max(st.beta_mu, 0.0) + 30.0) / c);
    const double ref =
        inv_lambda3 *
        oracle::simpson(
            [&](double z) { return fd(1.5, st.beta_mu - c * z * z); },
            -z_max, z_max, 2000);
    EXPECT_NEAR(peak_column_density(sc, st) / ref, 1.0, 1e-6) << "t=" << t;
  }
}

TEST(OpticalDepth, ColdCloudBudget) {
  const GasScales sc = derive_scales(oracle::paper_trap(),
                                     oracle::paper_species());
  const GasState st = solve_fugacity(0.13);
  const OpticalDensity od = optical_density(sc, st, paper_drive(), 10);
  EXPECT_GT(od.od_resonant, 100.0);
  EXPECT_NEAR(od.od_resonant, 110.8, 1.5);
  EXPECT_NEAR(od.od_effective, 0.0173, 0.002);
  EXPECT_GT(od.od_effective, 0.01);
  EXPECT_LT(od.od_effective, 0.04);
  EXPECT_NEAR(od.transmission, 0.983, 0.002);
  EXPECT_DOUBLE_EQ(od.transmission, std::exp(-od.od_effective));
}

TEST(OpticalDepth, RatioIsLorentzDenominator) {
  const GasScales sc = derive_scales(oracle::paper_trap(),
                                     oracle::paper_species());
  const GasState st = solve_fugacity(0.13);
  const OpticalDensity od = optical_density(sc, st, paper_drive(), 10);
  EXPECT_NEAR(od.od_resonant / od.od_effective, 6406.0, 1e-8);
}

TEST(OpticalDepth, LinearInSpinCount) {
  const GasScales sc = derive_scales(oracle::paper_trap(),
                                     oracle::paper_species());
  const GasState st = solve_fugacity(0.2);
  const OpticalDensity one = optical_density(sc, st, paper_drive(), 1);
  const OpticalDensity ten = optical_density(sc, st, paper_drive(), 10);
  EXPECT_NEAR(ten.od_effective / one.od_effective, 10.0, 1e-12);
  EXPECT_NEAR(ten.od_resonant / one.od_resonant, 10.0, 1e-12);
}

TEST(OpticalDepth, RejectsBadInputs) {
  const GasScales sc = derive_scales(oracle::paper_trap(),
                                     oracle::paper_species());
  const GasState st = solve_fugacity(0.2);
  EXPECT_THROW(optical_density(sc, st, paper_drive(), 0), std::domain_error);
  EXPECT_THROW(optical_density(sc, st, {-1.0, 40.0, 1e-6}, 10),
               std::domain_error);
}

TEST(Budget, PaperDetectorSeesUnderTwoHundredPhotons) {
  const ScatteringOutput scatter =
      scattering_rate(paper_drive(), oracle::paper_species());
  const double photons = photon_budget(scatter, 0.23, 1.0, 180000.0);
  EXPECT_NEAR(photons, 179.9, 0.5);
  EXPECT_LT(photons, 200.0);
}

TEST(Budget, GeometricLimits) {
  const ScatteringOutput scatter =
      scattering_rate(paper_drive(), oracle::paper_species());
  EXPECT_DOUBLE_EQ(photon_budget(scatter, 0.23, 0.0, 180000.0), 0.0);
  EXPECT_DOUBLE_EQ(aperture_fraction(1.0), 0.5);
  EXPECT_NEAR(aperture_fraction(0.23), 0.0134047, 1e-7);
  // Small-aperture expansion: NA^2 / 4.
  EXPECT_NEAR(aperture_fraction(0.01), 2.5e-5, 1e-9);
}

TEST(Budget, RejectsBadInputs) {
  const ScatteringOutput scatter =
      scattering_rate(paper_drive(), oracle::paper_species());
  EXPECT_THROW(photon_budget(scatter, 0.23, -0.1, 1e5), std::domain_error);
  EXPECT_THROW(photon_budget(scatter, 0.23, 1.1, 1e5), std::domain_error);
  EXPECT_THROW(photon_budget(scatter, 0.0, 1.0, 1e5), std::domain_error);
  EXPECT_THROW(photon_budget(scatter, 1.2, 1.0, 1e5), std::domain_error);
  EXPECT_THROW(photon_budget(scatter, 0.23, 1.0, -1.0), std::domain_error);
}
