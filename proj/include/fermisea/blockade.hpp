#pragma once

// Pauli suppression of a single momentum kick in the ideal Fermi gas:
//
//   S(k) = Int n_i (1 - n_f) / Int n_i,   n_f(p, q) = n_i(p + hbar k, q)
//
// in trap-rescaled units (momenta in hbar*k_F, positions in hbar*k_F/(m w_i)),
// where the phase-space occupation depends only on eps = |p|^2 + |q|^2 in
// units of E_F. The 6D integral is isotropic apart from the kick direction,
// so it collapses to 2D: the axis p_par along the kick and the radial
// magnitude w of the remaining five dimensions (two transverse momentum
// components plus the three rescaled positions), with weight w^4 and surface
// constant 8 pi^2/3. Methods: adaptive quadrature (trapped and uniform-gas
// kernels), rejection-sampling Monte Carlo, and a fugacity expansion whose
// terms are closed-form Gaussians.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fermisea/gas.hpp"
#include "fermisea/numerics.hpp"
#include "fermisea/parallel.hpp"
#include "fermisea/rng.hpp"
#include "fermisea/specfun.hpp"

namespace fermisea {

enum class Method { quadrature, homogeneous, mc, series };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::quadrature: return "quadrature";
    case Method::homogeneous: return "homogeneous";
    case Method::mc: return "mc";
    case Method::series: return "series";
  }
  return "?";
}

struct SuppressionResult {
  double s_value = 0.0;
  Method method = Method::quadrature;
  double std_error = 0.0;          // MC only, else 0
  std::size_t samples_or_evals = 0;
};

struct PhasePoint {
  std::array<double, 3> p{};  // momentum / (hbar k_F)
  std::array<double, 3> q{};  // position * m w_i / (hbar k_F)
};

inline double phase_energy(const PhasePoint& pt) {
  return pt.p[0] * pt.p[0] + pt.p[1] * pt.p[1] + pt.p[2] * pt.p[2] +
         pt.q[0] * pt.q[0] + pt.q[1] * pt.q[1] + pt.q[2] * pt.q[2];
}

// Occupation at reduced energy eps = E/E_F for the given state.
inline double occupation(const GasState& state, double eps_over_ef) {
  const double z = eps_over_ef / state.t_over_tf - state.beta_mu;
  if (z > 700.0) return 0.0;
  if (z < -700.0) return 1.0;
  return 1.0 / (1.0 + std::exp(z));
}

namespace detail {

inline double occ(double tau, double beta_mu, double eps) {
  const double z = eps / tau - beta_mu;
  if (z > 700.0) return 0.0;
  if (z < -700.0) return 1.0;
  return 1.0 / (1.0 + std::exp(z));
}

// Reduced energy above which the occupation is below 1e-13 of its maximum.
inline double energy_cutoff(double tau, double beta_mu) {
  return tau * (std::max(beta_mu, 0.0) + 30.0);
}

inline constexpr double kSurface5 = 8.0 * constants::pi * constants::pi / 3.0;

// Appends e and e -+ 40 thermal widths, clipped to (lo, hi). The bracket
// keeps the occupation boundary layer visible to quadrature nodes: a panel
// whose nodes all miss the layer freezes with a zero error estimate and
// silently drops the layer's mass (~ delta * ln 2 per edge).
inline void bracket_edge(std::vector<double>& pts, double e, double width,
                         double lo, double hi) {
  for (double p : {e - 40.0 * width, e, e + 40.0 * width})
    if (p > lo && p < hi) pts.push_back(p);
}

// Breakpoints for the p_par integral at fixed transverse energy w^2: the
// initial and kicked occupations cross mu at u = +-r and u = -x +- r, with
// local thermal width tau / (2r).
inline std::vector<double> edge_breakpoints(double lo, double hi, double e_surf,
                                            double w2, double x, double tau) {
  std::vector<double> pts{lo, hi};
  const double r2 = e_surf - w2;
  if (r2 > 0.0) {
    const double r = std::sqrt(r2);
    const double width = 0.5 * tau / r;
    for (double e : {-r, r, -x - r, -x + r}) bracket_edge(pts, e, width, lo, hi);
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

// Breakpoints for the outer radial integral: the inner edge structure changes
// where the Fermi surface closes (w = sqrt(e_surf)) and where the initial and
// kicked surfaces intersect (w^2 = e_surf - (x/2)^2).
inline std::vector<double> radial_breakpoints(double wmax, double e_surf,
                                              double x, double tau) {
  std::vector<double> pts{0.0, wmax};
  for (double e2 : {e_surf, e_surf - 0.25 * x * x}) {
    if (e2 <= 0.0) continue;
    const double w = std::sqrt(e2);
    bracket_edge(pts, w, 0.5 * tau / w, 0.0, wmax);
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace detail

struct HomogeneousIntegrals {
  double blocked = 0.0;  // Int d3p n(p^2) (1 - n((p + x e)^2)), reduced units
  double density = 0.0;  // Int d3p n(p^2) = (pi tau)^(3/2) f_{3/2}(beta_mu)
  std::size_t evals = 0;
};

// Uniform-gas kernel at momentum transfer x (in units of the wavevector that
// defines the reduced energy scale), for an arbitrary local chemical
// potential; used directly and as the LDA integrand of the spatial maps.
inline HomogeneousIntegrals homogeneous_pair_integrals(double x,
                                                       double beta_mu,
                                                       double tau) {
  if (!(x >= 0.0)) throw std::domain_error("momentum transfer must be >= 0");
  HomogeneousIntegrals out;
  const double den =
      std::pow(constants::pi * tau, 1.5) * fd(1.5, beta_mu);
  out.density = den;
  const double eps_cut = detail::energy_cutoff(tau, beta_mu);
  const double e_surf = tau * beta_mu;
  const double pmax = std::sqrt(eps_cut);
  std::size_t evals = 0;
  const auto outer = [&](double pp) {
    const double lim = std::sqrt(std::max(eps_cut - pp * pp, 0.0));
    if (lim == 0.0) return 0.0;
    const auto inner = [&](double u) {
      const double ei = u * u + pp * pp;
      const double ef = (u + x) * (u + x) + pp * pp;
      return detail::occ(tau, beta_mu, ei) *
             (1.0 - detail::occ(tau, beta_mu, ef));
    };
    QuadResult r =
        integrate(inner, detail::edge_breakpoints(-lim, lim, e_surf, pp * pp, x, tau),
                  den * 1e-16, 1e-10);
    evals += r.evals;
    return pp * r.value;
  };
  QuadResult r = integrate(outer, detail::radial_breakpoints(pmax, e_surf, x, tau),
                           den * 1e-14, 1e-9);
  if (!r.converged)
    throw NumericalError("homogeneous kernel quadrature did not converge");
  out.blocked = 2.0 * constants::pi * r.value;
  out.evals = evals + r.evals;
  return out;
}

// S for a uniform gas whose occupation equals the trap-center occupation of
// `state`; momenta in units of the global hbar k_F. As T -> 0 this is the
// ideal-gas static structure factor 3x/4 - x^3/16 (x <= 2).
inline SuppressionResult suppression_homogeneous(double k_over_kf,
                                                 const GasState& state) {
  HomogeneousIntegrals h =
      homogeneous_pair_integrals(k_over_kf, state.beta_mu, state.t_over_tf);
  SuppressionResult res;
  res.method = Method::homogeneous;
  res.s_value = std::clamp(h.blocked / h.density, 0.0, 1.0);
  res.samples_or_evals = h.evals;
  return res;
}

// Trapped-gas S(k) by nested adaptive quadrature over (w, p_par).
inline SuppressionResult suppression_trapped(double k_over_kf,
                                             const GasState& state) {
  if (!(k_over_kf >= 0.0))
    throw std::domain_error("momentum transfer must be >= 0");
  const double tau = state.t_over_tf;
  const double mu = state.beta_mu;
  const double x = k_over_kf;
  const double den = std::pow(constants::pi * tau, 3.0) * fd(3.0, mu);
  const double eps_cut = detail::energy_cutoff(tau, mu);
  const double e_surf = tau * mu;
  const double wmax = std::sqrt(eps_cut);
  std::size_t evals = 0;
  const auto outer = [&](double w) {
    const double w2 = w * w;
    const double lim = std::sqrt(std::max(eps_cut - w2, 0.0));
    if (lim == 0.0) return 0.0;
    const auto inner = [&](double u) {
      const double ei = u * u + w2;
      const double ef = (u + x) * (u + x) + w2;
      return detail::occ(tau, mu, ei) * (1.0 - detail::occ(tau, mu, ef));
    };
    QuadResult r =
        integrate(inner, detail::edge_breakpoints(-lim, lim, e_surf, w2, x, tau),
                  den * 1e-17, 1e-10);
    evals += r.evals;
    return w2 * w2 * r.value;
  };
  QuadResult r = integrate(outer, detail::radial_breakpoints(wmax, e_surf, x, tau),
                           den / detail::kSurface5 * 1e-13, 1e-9);
  if (!r.converged)
    throw NumericalError("trapped kernel quadrature did not converge");
  SuppressionResult res;
  res.method = Method::quadrature;
  res.s_value = std::clamp(detail::kSurface5 * r.value / den, 0.0, 1.0);
  res.samples_or_evals = evals + r.evals;
  return res;
}

namespace detail {

// Draws accepted samples of the trapped FD phase-space density by rejection
// against the classical envelope zeta * exp(-eps/tau) (a 6D Gaussian at the
// gas temperature, which bounds the FD occupation everywhere). `consume` is
// called once per accepted point and may draw further randomness from the
// same stream, so a batch replays bit-exactly from its seed.
template <typename F>
void rejection_batch(const GasState& state, std::size_t quota,
                     std::uint64_t batch_seed, std::size_t max_proposals,
                     const F& consume) {
  Rng rng(batch_seed);
  const double tau = state.t_over_tf;
  const double sigma = std::sqrt(0.5 * tau);
  std::size_t accepted = 0, proposals = 0;
  while (accepted < quota) {
    if (++proposals > max_proposals)
      throw NumericalError("rejection sampling stalled (acceptance collapse)");
    PhasePoint pt;
    for (int i = 0; i < 3; ++i) pt.p[i] = sigma * rng.normal();
    for (int i = 0; i < 3; ++i) pt.q[i] = sigma * rng.normal();
    const double eps = phase_energy(pt);
    // P(accept) = n_FD / envelope = 1 / (1 + zeta exp(-eps/tau)).
    const double z = state.beta_mu - eps / tau;
    const double p_accept = (z > 700.0) ? 0.0 : 1.0 / (1.0 + std::exp(z));
    if (rng.uniform() <= p_accept) {
      ++accepted;
      consume(pt, rng);
    }
  }
}

inline double predicted_acceptance(const GasState& state) {
  // Integral of n_FD over the Gaussian envelope mass: f_3(beta_mu) / zeta.
  if (state.beta_mu > 700.0) return 0.0;
  return fd(3.0, state.beta_mu) / std::exp(state.beta_mu);
}

}  // namespace detail

inline std::vector<PhasePoint> sample_phase_points(const GasState& state,
                                                   std::size_t n,
                                                   std::uint64_t seed) {
  const double rate = detail::predicted_acceptance(state);
  if (rate < 1e-3)
    throw NumericalError("rejection sampling acceptance below 1e-3");
  constexpr std::size_t kBatch = 65536;
  const std::size_t n_batches = (n + kBatch - 1) / kBatch;
  std::vector<PhasePoint> points(n);
  const std::size_t max_prop = static_cast<std::size_t>(50.0 * kBatch / rate);
  parallel_batches(n_batches, [&](std::size_t b) {
    const std::size_t begin = b * kBatch;
    const std::size_t quota = std::min(kBatch, n - begin);
    std::size_t i = begin;
    detail::rejection_batch(state, quota, derive_subseed(seed, b), max_prop,
                            [&](const PhasePoint& pt, Rng&) { points[i++] = pt; });
  });
  return points;
}

// Monte Carlo S(k): samples initial states, averages 1 - n_f at the kicked
// momentum. Deterministic for a fixed seed, independent of thread count.
inline SuppressionResult suppression_mc(double k_over_kf,
                                        const GasState& state,
                                        std::size_t n_samples,
                                        std::uint64_t seed) {
  if (!(k_over_kf >= 0.0))
    throw std::domain_error("momentum transfer must be >= 0");
  if (n_samples < 10000)
    throw std::domain_error("suppression_mc: need at least 1e4 samples");
  const double rate = detail::predicted_acceptance(state);
  if (rate < 1e-3)
    throw NumericalError("rejection sampling acceptance below 1e-3");
  constexpr std::size_t kBatch = 65536;
  const std::size_t n_batches = (n_samples + kBatch - 1) / kBatch;
  std::vector<double> sums(n_batches, 0.0), sq_sums(n_batches, 0.0);
  const std::size_t max_prop = static_cast<std::size_t>(50.0 * kBatch / rate);
  parallel_batches(n_batches, [&](std::size_t b) {
    const std::size_t quota = std::min(kBatch, n_samples - b * kBatch);
    double s = 0.0, s2 = 0.0;
    detail::rejection_batch(
        state, quota, derive_subseed(seed, b), max_prop,
        [&](const PhasePoint& pt, Rng&) {
          const double ef = (pt.p[2] + k_over_kf) * (pt.p[2] + k_over_kf) +
                            pt.p[0] * pt.p[0] + pt.p[1] * pt.p[1] +
                            pt.q[0] * pt.q[0] + pt.q[1] * pt.q[1] +
                            pt.q[2] * pt.q[2];
          const double v = 1.0 - occupation(state, ef);
          s += v;
          s2 += v * v;
        });
    sums[b] = s;
    sq_sums[b] = s2;
  });
  double total = 0.0, total_sq = 0.0;
  for (std::size_t b = 0; b < n_batches; ++b) {
    total += sums[b];
    total_sq += sq_sums[b];
  }
  const double n = static_cast<double>(n_samples);
  const double mean = total / n;
  const double var = std::max(0.0, (total_sq - n * mean * mean) / (n - 1.0));
  SuppressionResult res;
  res.method = Method::mc;
  res.s_value = mean;
  res.std_error = std::sqrt(var / n);
  res.samples_or_evals = n_samples;
  return res;
}

// Fugacity expansion: S = 1 - (1/f_3) Sum_{a,b>=1} (-zeta)^(a+b) (a+b)^-3
// exp(-(ab/(a+b)) x^2/tau). Valid for zeta <= 0.95.
inline SuppressionResult suppression_series(double k_over_kf,
                                            const GasState& state,
                                            std::size_t max_terms = 600) {
  if (!(k_over_kf >= 0.0))
    throw std::domain_error("momentum transfer must be >= 0");
  const double zeta = state.fugacity;
  if (!(zeta <= 0.95))
    throw std::domain_error(
        "suppression_series: fugacity above series domain (zeta <= 0.95)");
  const double c = k_over_kf * k_over_kf / state.t_over_tf;
  const double f3 = fd(3.0, state.beta_mu);
  double sum = 0.0;
  double zeta_n = zeta;  // zeta^n
  std::size_t evals = 0;
  bool converged = false;
  for (std::size_t n = 2; n <= max_terms; ++n) {
    zeta_n *= zeta;
    double inner = 0.0;
    for (std::size_t a = 1; a < n; ++a) {
      const double ab = static_cast<double>(a) * static_cast<double>(n - a) /
                        static_cast<double>(n);
      inner += std::exp(-ab * c);
      ++evals;
    }
    const double nn = static_cast<double>(n);
    const double term = (n % 2 == 0 ? 1.0 : -1.0) * zeta_n / (nn * nn * nn) * inner;
    sum += term;
    // Geometric tail bound: |term_m| <= zeta^m / m^2 for m > n.
    const double tail = zeta_n * zeta / ((nn + 1.0) * (nn + 1.0) * (1.0 - zeta));
    if (tail < 1e-10 * f3) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("suppression_series: not converged within max_terms");
  SuppressionResult res;
  res.method = Method::series;
  res.s_value = std::clamp(1.0 - sum / f3, 0.0, 1.0);
  res.samples_or_evals = evals;
  return res;
}

}  // namespace fermisea
