#pragma once

// Complete Fermi-Dirac integrals
//
//   f_s(mu) = -Li_s(-e^mu) = (1/Gamma(s)) Int_0^inf t^(s-1) / (e^(t-mu)+1) dt
//
// evaluated by adaptive quadrature on the integral representation, split at
// the Fermi edge t = max(mu, 0). Guaranteed to 1e-9 relative for
// s in {1, 3/2, 2, 5/2, 3} on mu in [-30, 50]; any real s >= 1 is accepted.

#include <cmath>
#include <stdexcept>

#include "fermisea/numerics.hpp"

namespace fermisea {

struct FdOrder {
  double s;
  explicit FdOrder(double order) : s(order) {
    if (!(order >= 1.0) || !std::isfinite(order))
      throw std::domain_error("FdOrder: order must be a finite real >= 1");
  }
};

namespace detail {

inline double fd_occupation_factor(double t_minus_mu) {
  // 1/(e^x + 1), stable for large |x|.
  if (t_minus_mu > 0.0) {
    const double e = std::exp(-t_minus_mu);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t_minus_mu));
}

}  // namespace detail

inline double fd_integral(FdOrder order, double mu) {
  const double s = order.s;
  const auto integrand = [s, mu](double t) {
    const double power = (s == 1.0) ? 1.0 : std::pow(t, s - 1.0);
    return power * detail::fd_occupation_factor(t - mu);
  };
  const double edge = std::max(mu, 0.0);
  // Beyond edge + 64 the integrand is below 1e-18 of its peak.
  const double tail_end = edge + 64.0 + 8.0 * (s - 1.0);

  double total = 0.0;
  if (edge > 0.0) {
    // The point edge - 40 keeps the unit-width Fermi edge layer visible to
    // quadrature nodes at large mu; a panel sampling only the flat plateau
    // freezes with a zero error estimate and misses the layer's deficit.
    std::vector<double> pts{0.0};
    if (edge > 80.0) pts.push_back(edge - 40.0);
    pts.push_back(edge);
    QuadResult low = integrate(integrand, pts, 0.0, 5e-13);
    if (!low.converged)
      throw NumericalError("fd_integral: quadrature failed below the edge");
    total += low.value;
  }
  QuadResult tail = integrate(integrand, edge, tail_end, total * 1e-16, 5e-13);
  if (!tail.converged)
    throw NumericalError("fd_integral: quadrature failed on the tail");
  total += tail.value;
  return total / std::tgamma(s);
}

inline double fd(double s, double mu) { return fd_integral(FdOrder(s), mu); }

}  // namespace fermisea
