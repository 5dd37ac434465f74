#pragma once

// Adaptive 1D quadrature (Gauss 7 / Kronrod 15 with QUADPACK-style error
// scaling) and a safeguarded root solver for monotone functions.

#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace fermisea {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;       // estimated absolute error
  std::size_t evals = 0;    // integrand evaluations
  bool converged = false;
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Kronrod 15 abscissae on [0,1] side and weights; Gauss 7 weights.
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Panel {
  double a, b;
  double value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <typename F>
Panel eval_panel(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kXgk[i]);
    fv[14 - i] = f(c + h * kXgk[i]);
  }
  fv[7] = f(c);
  double resk = 0.0, resg = 0.0, resabs = 0.0;
  for (int i = 0; i < 7; ++i) {
    resk += kWgk[i] * (fv[i] + fv[14 - i]);
    resabs += kWgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
  }
  resk += kWgk[7] * fv[7];
  resabs += kWgk[7] * std::abs(fv[7]);
  for (int i = 0; i < 3; ++i) resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  resg += kWg[3] * fv[7];

  const double mean = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fv[7] - mean);
  for (int i = 0; i < 7; ++i)
    resasc += kWgk[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));

  double err = std::abs((resk - resg) * h);
  resasc *= h;
  if (resasc != 0.0 && err != 0.0) {
    const double scaled = std::pow(200.0 * err / resasc, 1.5);
    err = resasc * std::min(1.0, scaled);
  }
  return Panel{a, b, resk * h, err};
}

}  // namespace detail

// Integrates f over [pts.front(), pts.back()], seeding one panel per
// consecutive pair of breakpoints (ascending; repeats allowed and skipped),
// then subdividing the worst panel until the summed error estimate meets
// max(abs_tol, rel_tol * |integral|). Placing known kinks or steps of the
// integrand on the breakpoint list keeps the per-panel error estimates
// honest; a step in a panel interior can fool them.
template <typename F>
QuadResult integrate(const F& f, const std::vector<double>& pts,
                     double abs_tol, double rel_tol,
                     std::size_t max_panels = 4000) {
  QuadResult out;
  std::priority_queue<detail::Panel> panels;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1] > pts[i])) continue;
    detail::Panel p = detail::eval_panel(f, pts[i], pts[i + 1]);
    out.evals += 15;
    total += p.value;
    total_err += p.error;
    panels.push(p);
  }
  if (panels.empty()) {
    out.converged = true;
    return out;
  }
  while (panels.size() < max_panels) {
    if (total_err <= std::max(abs_tol, rel_tol * std::abs(total))) break;
    detail::Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {  // interval at double resolution
      panels.push(worst);
      break;
    }
    detail::Panel left = detail::eval_panel(f, worst.a, mid);
    detail::Panel right = detail::eval_panel(f, mid, worst.b);
    out.evals += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  out.value = total;
  out.error = total_err;
  out.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
  return out;
}

template <typename F>
QuadResult integrate(const F& f, double a, double b, double abs_tol,
                     double rel_tol, std::size_t max_panels = 4000) {
  return integrate(f, std::vector<double>{a, b}, abs_tol, rel_tol, max_panels);
}

// Root of a strictly increasing f on [lo, hi] with f(lo) <= 0 <= f(hi).
// Newton steps (optional derivative) safeguarded by bisection.
template <typename F, typename DF>
double solve_increasing(const F& f, const DF& df, double lo, double hi,
                        double x_tol = 1e-13) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo > 0.0 || fhi < 0.0)
    throw NumericalError("solve_increasing: root not bracketed");
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    double next = x - fx / df(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= x_tol * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace fermisea
