#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctdelay/age_profile.hpp"
#include "ctdelay/curve.hpp"
#include "ctdelay/delay_kernel.hpp"
#include "ctdelay/grid.hpp"
#include "ctdelay/rates.hpp"

namespace ctdelay {

/// A first-order (in p) survival curve.
///
/// `curve` is clipped at zero; `raw` keeps the unclipped values, which stay
/// linear in p and are the right input for reproduction-number integrals.
/// `valid` is false when the delay kernel has an atom at zero.
struct FirstOrderResult {
    KappaCurve curve;
    std::vector<double> raw;
    bool valid = true;
    std::size_t clipped = 0;
};

struct FirstOrderFull {
    FirstOrderResult generation_zero;
    FirstOrderResult later_generations;
};

/// R_ct = r0 - p (backward_term + forward_term).
struct RctBreakdown {
    double r0 = 0.0;
    double p = 0.0;
    double backward_term = 0.0;
    double forward_term = 0.0;
    double rct = 0.0;
};

/// kappa_hat (1 - p p_obs beta (Phi * (1 - kappa_hat))).
FirstOrderResult first_order_backward(const Rates& rates, const DelayKernel& kernel, const Grid& grid);

/// kappa_hat (1 - p p_obs (phi * (1 - kappa_hat))), the same for every
/// generation i > 0.
FirstOrderResult first_order_forward(const Rates& rates, const DelayKernel& kernel, const Grid& grid);

/// Full tracing: generation 0 carries only the backward correction, later
/// generations the sum of both.
FirstOrderFull first_order_full(const Rates& rates, const DelayKernel& kernel, const Grid& grid);

/// The first-order corrections without the p factor and the kappa_hat
/// envelope, i.e. kappa_first_order = kappa_hat (1 - p correction).
std::vector<double> backward_correction(const Rates& rates, const DelayKernel& kernel, const Grid& grid);
std::vector<double> forward_correction(const Rates& rates, const DelayKernel& kernel, const Grid& grid);

/// int beta(a) kappa(a) da, Simpson weights from the onset of infectivity
/// plus the exponential tail beyond the grid. Requires kappa(a_max) < 1e-8.
double reproduction_number(const KappaCurve& curve, const AgeProfile& profile);
double reproduction_number(std::span<const double> values, const Grid& grid, const AgeProfile& profile);

RctBreakdown rct_fixed(double r0, double p, double p_obs, double gamma, double T);
RctBreakdown rct_exponential(double r0, double p, double p_obs, double gamma, double T);
/// Fixed latency Ti (no infectivity or detection) and fixed delay T.
RctBreakdown rct_latency(double r0, double p, double p_obs, double gamma, double T, double Ti);

/// First-order R_ct for any kernel by quadrature of the separated backward
/// and forward integrals.
RctBreakdown rct_quadrature(const Rates& rates, const DelayKernel& kernel, const Grid& grid);

/// First-order coefficients with latency and a fixed delay:
/// kappa_0 = kappa_tilde - p eta_minus, kappa_i = kappa_tilde - p (eta_minus + eta_plus).
struct EtaCurves {
    SampledCurve eta_minus;
    SampledCurve eta_plus;
};

EtaCurves eta_curves(const AgeProfile& profile, const DelayKernel& kernel, const Grid& grid);

} // namespace ctdelay
