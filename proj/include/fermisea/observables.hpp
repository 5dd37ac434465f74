#pragma once

// Detector-facing observables: the scattering-angle to momentum-transfer
// map, angular suppression maps, parameter sweeps over temperature or
// confinement, the emission-averaged lifetime factor, and a Monte Carlo of
// the pre-pulse that destroys the Fermi sea by random photon recoils.

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fermisea/blockade.hpp"
#include "fermisea/gas.hpp"
#include "fermisea/numerics.hpp"
#include "fermisea/parallel.hpp"
#include "fermisea/rng.hpp"

namespace fermisea {

struct DetectionAxis {
  double alpha_deg = 90.0;          // angle from the drive beam
  double numerical_aperture = 0.2;  // sine of the collection half-angle
};

inline void validate(const DetectionAxis& axis) {
  if (!(axis.alpha_deg > 0.0) || !(axis.alpha_deg <= 180.0))
    throw std::domain_error("detection axis angle must be in (0, 180] degrees");
  if (!(axis.numerical_aperture > 0.0) || !(axis.numerical_aperture < 1.0))
    throw std::domain_error("numerical aperture must be in (0, 1)");
}

// Momentum transfer of a photon scattered at angle alpha from the drive
// beam, |k_out - k_in| = 2 k_R sin(alpha/2), in units of k_F.
inline double angle_to_k(double alpha_deg, double kf_over_kr) {
  if (!(alpha_deg >= 0.0) || !(alpha_deg <= 180.0))
    throw std::domain_error("scattering angle must be in [0, 180] degrees");
  if (!(kf_over_kr > 0.0))
    throw std::domain_error("kf_over_kr must be positive");
  return 2.0 * std::sin(alpha_deg * constants::pi / 360.0) / kf_over_kr;
}

struct AngularPoint {
  double alpha_deg = 0.0;
  double k_over_kf = 0.0;
  double s = 0.0;
};

// S on a uniform angle grid over [0, 180] degrees; the full emission sphere
// follows by rotational symmetry about the drive axis.
inline std::vector<AngularPoint> angular_map(const GasState& state,
                                             double kf_over_kr,
                                             std::size_t n_alpha) {
  if (n_alpha < 2)
    throw std::domain_error("angular_map needs at least 2 angles");
  std::vector<AngularPoint> out(n_alpha);
  for (std::size_t i = 0; i < n_alpha; ++i) {
    const double alpha =
        180.0 * static_cast<double>(i) / static_cast<double>(n_alpha - 1);
    const double k = angle_to_k(alpha, kf_over_kr);
    out[i] = {alpha, k, suppression_trapped(k, state).s_value};
  }
  return out;
}

enum class EmissionWeighting { isotropic, dipole_circular };

struct LifetimeResult {
  double mean_s = 1.0;
  double multiplier = 1.0;  // excited-state lifetime relative to free space
};

// S(k(alpha)) averaged over photon emission directions. Isotropic emission
// weights the sphere uniformly; a circularly driven dipole radiates with
// pattern (3/16 pi)(1 + cos^2 alpha) about the drive axis.
inline LifetimeResult lifetime_factor(
    const GasState& state, double kf_over_kr,
    EmissionWeighting weighting = EmissionWeighting::isotropic) {
  if (!(kf_over_kr > 0.0))
    throw std::domain_error("kf_over_kr must be positive");
  const auto integrand = [&](double alpha) {
    const double k = 2.0 * std::sin(0.5 * alpha) / kf_over_kr;
    const double c = std::cos(alpha);
    const double weight = weighting == EmissionWeighting::dipole_circular
                              ? 0.375 * (1.0 + c * c)
                              : 0.5;
    return weight * std::sin(alpha) * suppression_trapped(k, state).s_value;
  };
  QuadResult r = integrate(integrand, 0.0, constants::pi, 0.0, 1e-7, 400);
  if (!r.converged)
    throw NumericalError("lifetime_factor: angular average did not converge");
  LifetimeResult res;
  res.mean_s = std::min(r.value, 1.0);
  res.multiplier = 1.0 / res.mean_s;
  return res;
}

enum class SweepVariable { t_over_tf, kf_over_kr };

struct SweepSpec {
  SweepVariable variable = SweepVariable::t_over_tf;
  double fixed_value = 0.0;  // the quantity that is not swept
  std::vector<double> grid;
  std::vector<DetectionAxis> axes;
};

struct SweepRow {
  double variable = 0.0;
  std::vector<double> k_over_kf;  // one entry per axis
  std::vector<double> s;
};

inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
  if (spec.grid.empty()) throw std::domain_error("sweep: empty grid");
  for (std::size_t i = 1; i < spec.grid.size(); ++i)
    if (!(spec.grid[i] > spec.grid[i - 1]))
      throw std::domain_error("sweep: grid must be strictly increasing");
  if (spec.axes.empty()) throw std::domain_error("sweep: no detection axes");
  for (const DetectionAxis& axis : spec.axes) validate(axis);

  // States and transfers are resolved up front (cheap, and any domain error
  // surfaces on the calling thread); the kernel evaluations then run in
  // parallel over grid points, each row writing only its own slot.
  const bool sweep_t = spec.variable == SweepVariable::t_over_tf;
  const std::size_t n = spec.grid.size();
  std::vector<GasState> states;
  states.reserve(n);
  const GasState fixed_state =
      sweep_t ? GasState{} : solve_fugacity(spec.fixed_value);
  std::vector<SweepRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = spec.grid[i];
    const double kf = sweep_t ? spec.fixed_value : v;
    states.push_back(sweep_t ? solve_fugacity(v) : fixed_state);
    rows[i].variable = v;
    for (const DetectionAxis& axis : spec.axes)
      rows[i].k_over_kf.push_back(angle_to_k(axis.alpha_deg, kf));
    rows[i].s.resize(spec.axes.size());
  }
  parallel_batches(n, [&](std::size_t i) {
    for (std::size_t a = 0; a < spec.axes.size(); ++a)
      rows[i].s[a] =
          suppression_trapped(rows[i].k_over_kf[a], states[i]).s_value;
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Pre-pulse Fermi-sea destruction.
//
// Atoms sampled from the equilibrium phase-space distribution receive a
// Poisson number of scattering events over the pulse; each event adds a
// recoil along the drive axis (+z) plus an equal-magnitude recoil in a random
// emission direction. Positions are frozen (trap periods are milliseconds,
// the pulse microseconds). After each requested duration the perturbed
// ensemble is coarse-grained onto a (p_z, p_perp, |q|) histogram; the evolved
// occupation stays azimuthally symmetric about the drive axis, so the
// histogram loses no angular information. A second pass replays the same
// atoms and estimates the probe response <1 - n(p + k_probe)>, the mean
// unblocked fraction for the probed transfer. The probe shares the drive
// beam; a photon scattered at angle alpha transfers momentum along
// (cos(alpha/2), 0, sin(alpha/2)). The response column is normalized to the
// mean response of the last two durations, matching how measured counts are
// normalized against long pulses where the sea is destroyed.

struct PrepulseParams {
  double kf_over_kr = 0.93;
  double scatter_rate_hz = 8e5;      // scattering events per atom per second
  std::vector<double> durations_s;   // ascending, seconds
  DetectionAxis probe{24.0, 0.23};
  std::uint64_t seed = 1;
  std::size_t n_atoms = 400000;
  std::size_t bins_par = 128;
  std::size_t bins_perp = 64;
  std::size_t bins_radial = 32;
};

struct PrepulseRow {
  double duration_s = 0.0;
  double response = 0.0;      // mean (1 - occupancy) at the probed momentum
  double normalized_s = 0.0;  // response / saturation response
  double std_error = 0.0;     // MC standard error of normalized_s
};

struct PrepulseResult {
  std::vector<PrepulseRow> rows;
  double saturation_response = 0.0;
};

namespace detail {

// Cylindrical-shell histogram over (p_z in [-b, b], p_perp in [0, b],
// |q| in [0, r_hi]); the cell measure is the exact 6D volume of the bin.
struct PrepulseGrid {
  double bound = 0.0, r_hi = 0.0;
  double d_par = 0.0, d_perp = 0.0, d_r = 0.0;
  std::size_t n_par = 0, n_perp = 0, n_r = 0;

  std::size_t cells() const { return n_par * n_perp * n_r; }

  // -1 when outside the gridded region.
  long index(double u_par, double u_perp, double r) const {
    if (u_par < -bound || u_par >= bound || u_perp >= bound || r >= r_hi)
      return -1;
    const auto ip = static_cast<std::size_t>((u_par + bound) / d_par);
    const auto jp = static_cast<std::size_t>(u_perp / d_perp);
    const auto kr = static_cast<std::size_t>(r / d_r);
    if (ip >= n_par || jp >= n_perp || kr >= n_r) return -1;
    return static_cast<long>((ip * n_perp + jp) * n_r + kr);
  }

  double cell_volume(std::size_t jp, std::size_t kr) const {
    const double p0 = static_cast<double>(jp) * d_perp;
    const double p1 = p0 + d_perp;
    const double r0 = static_cast<double>(kr) * d_r;
    const double r1 = r0 + d_r;
    const double ring = constants::pi * (p1 * p1 - p0 * p0);
    const double shell =
        4.0 * constants::pi / 3.0 * (r1 * r1 * r1 - r0 * r0 * r0);
    return d_par * ring * shell;
  }

  double cell_volume(std::size_t cell) const {
    return cell_volume((cell / n_r) % n_perp, cell % n_r);
  }
};

struct PrepulseEvent {
  double time = 0.0;
  std::array<double, 3> emission{};
};

}  // namespace detail

inline PrepulseResult prepulse_relaxation_mc(const GasState& state,
                                             const PrepulseParams& params) {
  validate(params.probe);
  if (!(params.kf_over_kr > 0.0))
    throw std::domain_error("prepulse: kf_over_kr must be positive");
  if (params.durations_s.empty() || params.durations_s.front() < 0.0)
    throw std::domain_error("prepulse: need non-negative durations");
  for (std::size_t i = 1; i < params.durations_s.size(); ++i)
    if (!(params.durations_s[i] > params.durations_s[i - 1]))
      throw std::domain_error("prepulse: durations must be ascending");
  if (!(params.scatter_rate_hz * 5e-6 >= 1.0))
    throw std::domain_error(
        "prepulse: scatter rate below one event per atom in 5 us");
  if (params.scatter_rate_hz * params.durations_s.back() > 600.0)
    throw std::domain_error(
        "prepulse: mean event count too high for the event sampler");
  if (params.n_atoms < 10000)
    throw std::domain_error("prepulse: need at least 1e4 atoms");
  if (params.bins_par < 8 || params.bins_perp < 8 || params.bins_radial < 8)
    throw std::domain_error("prepulse: need at least 8 bins per axis");
  const double rate = detail::predicted_acceptance(state);
  if (rate < 1e-3)
    throw NumericalError("rejection sampling acceptance below 1e-3");

  const double tau = state.t_over_tf;
  const double x_kick = 1.0 / params.kf_over_kr;
  const double x_probe = angle_to_k(params.probe.alpha_deg, params.kf_over_kr);
  const double half = 0.5 * params.probe.alpha_deg * constants::pi / 180.0;
  // Transfer direction for a probe photon scattered toward the detector:
  // forward component sin(alpha/2) along the beam, the rest transverse.
  const std::array<double, 3> e_probe{std::cos(half), 0.0, std::sin(half)};

  const std::size_t n_d = params.durations_s.size();
  const double d_max = params.durations_s.back();
  const double lambda_max = params.scatter_rate_hz * d_max;

  detail::PrepulseGrid grid;
  const double core = std::sqrt(detail::energy_cutoff(tau, state.beta_mu));
  grid.bound = core + 2.5 * x_kick;
  grid.r_hi = core;
  grid.n_par = params.bins_par;
  grid.n_perp = params.bins_perp;
  grid.n_r = params.bins_radial;
  grid.d_par = 2.0 * grid.bound / static_cast<double>(grid.n_par);
  grid.d_perp = grid.bound / static_cast<double>(grid.n_perp);
  grid.d_r = grid.r_hi / static_cast<double>(grid.n_r);

  // Atoms are sampled from n / norm, so occupancy = count * norm / (N * vol).
  const double norm =
      std::pow(constants::pi * tau, 3.0) * fd(3.0, state.beta_mu);
  const double n_total = static_cast<double>(params.n_atoms);

  std::vector<std::vector<std::atomic<std::int64_t>>> counts;
  counts.reserve(n_d);
  for (std::size_t d = 0; d < n_d; ++d)
    counts.emplace_back(std::vector<std::atomic<std::int64_t>>(grid.cells()));

  constexpr std::size_t kBatch = 65536;
  const std::size_t n_batches = (params.n_atoms + kBatch - 1) / kBatch;
  const std::size_t max_prop = static_cast<std::size_t>(50.0 * kBatch / rate);

  // Replays one batch: equilibrium rejection sampling, then the atom's event
  // history, reporting the evolved momentum at every duration. Both passes
  // call this with the same sub-seed and therefore see identical atoms.
  const auto simulate_batch = [&](std::size_t b, const auto& per_state) {
    const std::size_t quota = std::min(kBatch, params.n_atoms - b * kBatch);
    std::vector<detail::PrepulseEvent> events;
    detail::rejection_batch(
        state, quota, derive_subseed(params.seed, b), max_prop,
        [&](const PhasePoint& pt, Rng& rng) {
          events.clear();
          const std::size_t n_events = rng.poisson(lambda_max);
          for (std::size_t e = 0; e < n_events; ++e) {
            detail::PrepulseEvent ev;
            ev.time = d_max * rng.uniform();
            rng.unit_vector(ev.emission.data());
            events.push_back(ev);
          }
          std::sort(events.begin(), events.end(),
                    [](const detail::PrepulseEvent& a,
                       const detail::PrepulseEvent& b2) {
                      return a.time < b2.time;
                    });
          std::array<double, 3> p = pt.p;
          const double r = std::sqrt(pt.q[0] * pt.q[0] + pt.q[1] * pt.q[1] +
                                     pt.q[2] * pt.q[2]);
          std::size_t next = 0;
          for (std::size_t d = 0; d < n_d; ++d) {
            while (next < events.size() &&
                   events[next].time <= params.durations_s[d]) {
              const auto& em = events[next].emission;
              p[0] += x_kick * em[0];
              p[1] += x_kick * em[1];
              p[2] += x_kick * (1.0 + em[2]);  // drive + emission recoil
              ++next;
            }
            per_state(d, p, r);
          }
        });
  };

  parallel_batches(n_batches, [&](std::size_t b) {
    simulate_batch(
        b, [&](std::size_t d, const std::array<double, 3>& p, double r) {
          const long cell =
              grid.index(p[2], std::sqrt(p[0] * p[0] + p[1] * p[1]), r);
          if (cell >= 0)
            counts[d][static_cast<std::size_t>(cell)].fetch_add(
                1, std::memory_order_relaxed);
        });
  });

  // Self-checks on 2x2x2 coarsened blocks. The earliest (least smeared)
  // histogram must have solid statistics somewhere, else the momentum grid
  // is underresolved for this atom number; later histograms are genuinely
  // dilute. No block may exceed unit occupancy beyond noise: the estimator
  // is normalized so that would mean an internal inconsistency.
  for (std::size_t d = 0; d < n_d; ++d) {
    std::int64_t best = 0;
    for (std::size_t ip = 0; ip + 1 < grid.n_par; ip += 2)
      for (std::size_t jp = 0; jp + 1 < grid.n_perp; jp += 2)
        for (std::size_t kr = 0; kr + 1 < grid.n_r; kr += 2) {
          std::int64_t c = 0;
          double vol = 0.0;
          for (std::size_t di = 0; di < 2; ++di)
            for (std::size_t dj = 0; dj < 2; ++dj)
              for (std::size_t dk = 0; dk < 2; ++dk) {
                const std::size_t cell =
                    ((ip + di) * grid.n_perp + (jp + dj)) * grid.n_r +
                    (kr + dk);
                c += counts[d][cell].load(std::memory_order_relaxed);
                vol += grid.cell_volume(jp + dj, kr + dk);
              }
          best = std::max(best, c);
          if (c > 0) {
            const double occ = static_cast<double>(c) * norm / (n_total * vol);
            const double noise = 3.0 * occ / std::sqrt(static_cast<double>(c));
            if (occ > 1.0 + noise && occ > 1.15)
              throw NumericalError(
                  "prepulse: histogram occupancy exceeds unity");
          }
        }
    if (d == 0 && best < 400)
      throw NumericalError(
          "prepulse: histogram statistics insufficient; increase n_atoms or "
          "coarsen the bins");
  }

  std::vector<std::vector<double>> sums(n_d, std::vector<double>(n_batches)),
      sq_sums(n_d, std::vector<double>(n_batches));
  parallel_batches(n_batches, [&](std::size_t b) {
    std::vector<double> s(n_d, 0.0), s2(n_d, 0.0);
    simulate_batch(
        b, [&](std::size_t d, const std::array<double, 3>& p, double r) {
          const double tx = p[0] + x_probe * e_probe[0];
          const double ty = p[1] + x_probe * e_probe[1];
          const double tz = p[2] + x_probe * e_probe[2];
          const long cell = grid.index(tz, std::sqrt(tx * tx + ty * ty), r);
          double occ = 0.0;
          if (cell >= 0) {
            const auto idx = static_cast<std::size_t>(cell);
            const auto c = counts[d][idx].load(std::memory_order_relaxed);
            occ = static_cast<double>(c) * norm /
                  (n_total * grid.cell_volume(idx));
          }
          const double v = 1.0 - occ;
          s[d] += v;
          s2[d] += v * v;
        });
    for (std::size_t d = 0; d < n_d; ++d) {
      sums[d][b] = s[d];
      sq_sums[d][b] = s2[d];
    }
  });

  PrepulseResult out;
  std::vector<double> response(n_d), sigma_resp(n_d);
  for (std::size_t d = 0; d < n_d; ++d) {
    double total = 0.0, total_sq = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      total += sums[d][b];
      total_sq += sq_sums[d][b];
    }
    const double mean = total / n_total;
    const double var =
        std::max(0.0, (total_sq - n_total * mean * mean) / (n_total - 1.0));
    response[d] = mean;
    sigma_resp[d] = std::sqrt(var / n_total);
  }
  const double sat = n_d >= 2
                         ? 0.5 * (response[n_d - 1] + response[n_d - 2])
                         : response[0];
  if (!(sat > 0.0))
    throw NumericalError("prepulse: saturation response is not positive");
  out.saturation_response = sat;
  for (std::size_t d = 0; d < n_d; ++d)
    out.rows.push_back({params.durations_s[d], response[d],
                        response[d] / sat, sigma_resp[d] / sat});
  return out;
}

}  // namespace fermisea
