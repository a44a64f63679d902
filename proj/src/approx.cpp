#include "ctdelay/approx.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ctdelay/errors.hpp"
#include "ctdelay/quadrature.hpp"

namespace ctdelay {

namespace {

std::vector<double> one_minus_kappa_hat(double gamma, const Grid& grid)
{
    auto out = kappa_hat_curve(gamma, grid);
    for (auto& v : out) {
        v = 1.0 - v;
    }
    return out;
}

/// The exponential fast paths divide by 1 - T gamma.
bool exponential_fast_path(const DelayKernel& kernel, double gamma, double& mean)
{
    const auto* e = std::get_if<DelayKernel::Exponential>(&kernel.variant());
    if (e == nullptr) {
        return false;
    }
    mean = e->mean;
    if (mean * gamma == 1.0) {
        spdlog::debug("exponential delay with T gamma = 1: using the numerical first-order path");
        return false;
    }
    return true;
}

FirstOrderResult envelope(const Rates& rates, const std::vector<double>& correction, const DelayKernel& kernel,
                          const Grid& grid, Generation generation, Direction direction)
{
    const std::size_t n = grid.size();
    std::vector<double> raw(n);
    std::vector<double> clipped(n);
    std::size_t count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double hat = kappa_hat(grid.age(k), rates.gamma());
        raw[k] = hat * (1.0 - rates.p() * correction[k]);
        if (raw[k] < 0.0) {
            ++count;
            clipped[k] = 0.0;
        }
        else {
            clipped[k] = raw[k];
        }
    }
    // The corrections grow with age, so clipped values are nonincreasing up
    // to rounding; enforce it exactly for the curve invariant.
    for (std::size_t k = 1; k < n; ++k) {
        clipped[k] = std::min(clipped[k], clipped[k - 1]);
    }
    if (count > 0) {
        spdlog::warn("first-order curve clipped at zero on {} of {} nodes (p = {})", count, n, rates.p());
    }
    return FirstOrderResult{KappaCurve(grid, std::move(clipped), generation, direction, Mode::recursive),
                            std::move(raw), !kernel.has_atom_at_zero(), count};
}

} // namespace

std::vector<double> backward_correction(const Rates& rates, const DelayKernel& kernel, const Grid& grid)
{
    const double g = rates.gamma();
    const double scale = rates.p_obs() * rates.beta();
    std::vector<double> out(grid.size(), 0.0);
    double mean = 0.0;
    if (const auto* d = std::get_if<DelayKernel::Dirac>(&kernel.variant())) {
        const double T = d->delay;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double x = grid.age(k) - T;
            if (x > 0.0) {
                out[k] = scale * (x - (1.0 - kappa_hat(x, g)) / g);
            }
        }
    }
    else if (exponential_fast_path(kernel, g, mean)) {
        const double tg = mean * g;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double a = grid.age(k);
            const double bracket =
                a + mean * (tg / (1.0 - tg)) * ((1.0 - std::exp(-a / mean)) - (1.0 - kappa_hat(a, g)) / (tg * tg));
            out[k] = scale * bracket;
        }
    }
    else {
        out = convolve_cdf(one_minus_kappa_hat(g, grid), kernel, grid);
        for (auto& v : out) {
            v *= scale;
        }
    }
    return out;
}

std::vector<double> forward_correction(const Rates& rates, const DelayKernel& kernel, const Grid& grid)
{
    const double g = rates.gamma();
    const double scale = rates.p_obs();
    std::vector<double> out(grid.size(), 0.0);
    double mean = 0.0;
    if (const auto* d = std::get_if<DelayKernel::Dirac>(&kernel.variant())) {
        const double T = d->delay;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double x = grid.age(k) - T;
            if (x > 0.0) {
                out[k] = scale * (1.0 - kappa_hat(x, g));
            }
        }
    }
    else if (exponential_fast_path(kernel, g, mean)) {
        const double tg = mean * g;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double a = grid.age(k);
            const double decay = std::exp(-a / mean);
            out[k] = scale * (1.0 - decay - (kappa_hat(a, g) - decay) / (1.0 - tg));
        }
    }
    else {
        out = convolve(one_minus_kappa_hat(g, grid), kernel, grid);
        for (auto& v : out) {
            v *= scale;
        }
    }
    return out;
}

FirstOrderResult first_order_backward(const Rates& rates, const DelayKernel& kernel, const Grid& grid)
{
    return envelope(rates, backward_correction(rates, kernel, grid), kernel, grid, Generation{0, false},
                    Direction::backward);
}

FirstOrderResult first_order_forward(const Rates& rates, const DelayKernel& kernel, const Grid& grid)
{
    return envelope(rates, forward_correction(rates, kernel, grid), kernel, grid, Generation{1, false},
                    Direction::forward);
}

FirstOrderFull first_order_full(const Rates& rates, const DelayKernel& kernel, const Grid& grid)
{
    const auto backward = backward_correction(rates, kernel, grid);
    auto both = forward_correction(rates, kernel, grid);
    for (std::size_t k = 0; k < both.size(); ++k) {
        both[k] += backward[k];
    }
    return FirstOrderFull{envelope(rates, backward, kernel, grid, Generation{0, false}, Direction::full),
                          envelope(rates, both, kernel, grid, Generation{1, false}, Direction::full)};
}

double reproduction_number(std::span<const double> values, const Grid& grid, const AgeProfile& profile)
{
    if (values.size() != grid.size()) {
        throw ValidationError("reproduction_number: curve does not match the grid");
    }
    const double end_value = values.back();
    if (!(std::abs(end_value) < 1e-8)) {
        throw ValidationError(
            fmt::format("curve has not decayed at a_max = {} (value {:.3g}); enlarge the grid", grid.a_max(), end_value));
    }
    const SampledRates sampled = profile.sample(grid);
    std::vector<double> integrand(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        integrand[k] = sampled.beta[k] * values[k];
    }
    const double body = integrate(integrand, grid.h(), sampled.onset);
    const double removal = profile.tail_removal_rate();
    const double tail = removal > 0.0 ? end_value * profile.tail_beta() / removal : 0.0;
    const double total = body + tail;
    if (std::abs(tail) > 1e-4 * std::abs(total)) {
        spdlog::warn("reproduction number: tail correction {:.3g} exceeds 1e-4 of the result {:.6g}", tail, total);
    }
    return total;
}

double reproduction_number(const KappaCurve& curve, const AgeProfile& profile)
{
    return reproduction_number(curve.values(), curve.grid(), profile);
}

namespace {

void require_closed_form_inputs(double r0, double p, double p_obs, double gamma, double T, double Ti = 0.0)
{
    if (!(r0 >= 0.0) || !(p >= 0.0 && p <= 1.0) || !(p_obs >= 0.0 && p_obs <= 1.0) || !(gamma > 0.0) ||
        !(T >= 0.0) || !(Ti >= 0.0)) {
        throw ValidationError(fmt::format("invalid closed-form inputs r0={} p={} p_obs={} gamma={} T={} Ti={}", r0,
                                          p, p_obs, gamma, T, Ti));
    }
}

RctBreakdown breakdown(double r0, double p, double backward, double forward)
{
    return RctBreakdown{r0, p, backward, forward, r0 - p * (backward + forward)};
}

} // namespace

RctBreakdown rct_fixed(double r0, double p, double p_obs, double gamma, double T)
{
    require_closed_form_inputs(r0, p, p_obs, gamma, T);
    const double factor = 0.5 * p_obs * kappa_hat(T, gamma);
    return breakdown(r0, p, factor * r0 * r0, factor * r0);
}

RctBreakdown rct_exponential(double r0, double p, double p_obs, double gamma, double T)
{
    require_closed_form_inputs(r0, p, p_obs, gamma, T);
    const double factor = 0.5 * p_obs / (1.0 + T * gamma);
    return breakdown(r0, p, factor * r0 * r0, factor * r0);
}

RctBreakdown rct_latency(double r0, double p, double p_obs, double gamma, double T, double Ti)
{
    require_closed_form_inputs(r0, p, p_obs, gamma, T, Ti);
    const double later = std::max(Ti, T);
    // kappa_hat(later) / kappa_hat(Ti) and kappa_hat(later) / kappa_hat(T), both in (0, 1]
    const double from_latency = kappa_hat(later - Ti, gamma);
    const double from_delay = kappa_hat(later - T, gamma);
    const double backward = 0.5 * p_obs * r0 * r0 * kappa_hat(T + Ti, gamma);
    const double forward = 0.5 * p_obs * r0 * from_latency * (2.0 - from_delay);
    return breakdown(r0, p, backward, forward);
}

RctBreakdown rct_quadrature(const Rates& rates, const DelayKernel& kernel, const Grid& grid)
{
    const auto profile = AgeProfile::constant(rates);
    auto weighted = [&](std::vector<double> correction) {
        for (std::size_t k = 0; k < correction.size(); ++k) {
            correction[k] *= kappa_hat(grid.age(k), rates.gamma());
        }
        return reproduction_number(correction, grid, profile);
    };
    const double r0 = rates.r0();
    return breakdown(r0, rates.p(), weighted(backward_correction(rates, kernel, grid)),
                     weighted(forward_correction(rates, kernel, grid)));
}

EtaCurves eta_curves(const AgeProfile& profile, const DelayKernel& kernel, const Grid& grid)
{
    const auto* d = std::get_if<DelayKernel::Dirac>(&kernel.variant());
    if (d == nullptr) {
        throw ValidationError("eta_curves requires a fixed (Dirac) delay");
    }
    const Rates* rates = profile.rates();
    if (rates == nullptr) {
        throw ValidationError("eta_curves requires a constant or fixed-latency profile");
    }
    const double T = d->delay;
    const double Ti = profile.latency();
    const double g = rates->gamma();
    const auto tilde = kappa_tilde(profile, grid);
    std::vector<double> minus(grid.size(), 0.0);
    std::vector<double> plus(grid.size(), 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double a = grid.age(k);
        const double x = a - 2.0 * Ti - T;
        if (x > 0.0) {
            minus[k] = tilde[k] * rates->beta() * rates->p_obs() * (x - (1.0 - kappa_hat(x, g)) / g);
        }
        if (a > T) {
            plus[k] = rates->p_obs() * tilde[k] * (1.0 - kappa_hat(a - T, g));
        }
    }
    return EtaCurves{SampledCurve(grid, std::move(minus)), SampledCurve(grid, std::move(plus))};
}

} // namespace ctdelay
