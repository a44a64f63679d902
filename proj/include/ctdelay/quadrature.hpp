#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctdelay/age_profile.hpp"
#include "ctdelay/curve.hpp"
#include "ctdelay/delay_kernel.hpp"
#include "ctdelay/grid.hpp"

namespace ctdelay {

/// exp(-gamma a) for a >= 0 and 0 for a < 0: survival without tracing.
double kappa_hat(double a, double gamma) noexcept;

/// kappa_hat sampled on a grid.
std::vector<double> kappa_hat_curve(double gamma, const Grid& grid);

/// exp(-int_0^a alpha + sigma) for an age profile. For FixedLatency the
/// value is 1 on [0, Ti] and kappa_hat(a - Ti) beyond.
std::vector<double> kappa_tilde(const AgeProfile& profile, const Grid& grid);

/// (phi * f)(a) = int_0^a phi(a - tau) f(tau) dtau.
///
/// Dirac kernels shift f exactly by the delay (snapped to a node); density
/// kernels use the trapezoidal rule on the grid.
SampledCurve convolve(const SampledCurve& f, const DelayKernel& kernel, const Grid& grid);
std::vector<double> convolve(std::span<const double> f, const DelayKernel& kernel, const Grid& grid);

/// (Phi * f)(a) = int_0^a Phi(a - c) f(c) dc with Phi the delay CDF,
/// equivalently (1 * phi * f)(a). Dirac kernels shift the running integral
/// of f, so the jump of Phi never passes through a quadrature rule.
std::vector<double> convolve_cdf(std::span<const double> f, const DelayKernel& kernel, const Grid& grid);

/// Trapezoidal running integral; result[0] = 0.
SampledCurve cumulative(const SampledCurve& f, const Grid& grid);
std::vector<double> cumulative(std::span<const double> f, double h);

/// int f over the nodes [from, end) with composite Simpson weights (a 3/8
/// panel closes an odd number of intervals; trapezoid for a single one).
double integrate(std::span<const double> f, double h, std::size_t from = 0);

} // namespace ctdelay
