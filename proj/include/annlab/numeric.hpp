#pragma once

#include <functional>
#include <span>

namespace annlab::numeric {

double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;
/// Upper tail 1 - Phi(x), accurate far into the tail.
double normal_sf(double x) noexcept;

/// Adaptive Gauss-Kronrod quadrature of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12);

/// Bisection for an increasing function: returns x in [lo, hi] with
/// f(x) = target, to relative width rel_tol. Requires f(lo) <= target <= f(hi).
double bisect_increasing(const std::function<double(double)>& f, double target,
                         double lo, double hi, double rel_tol);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace annlab::numeric
