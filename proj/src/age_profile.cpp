#include "ctdelay/age_profile.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <spdlog/spdlog.h>

#include "ctdelay/errors.hpp"
#include "ctdelay/grid.hpp"
#include "ctdelay/quadrature.hpp"

namespace ctdelay {

namespace {

// Piecewise-linear lookup that holds the last value beyond the table.
double lookup(const std::vector<double>& table, double h, double a)
{
    if (a <= 0.0) {
        return table.front();
    }
    const double x = a / h;
    const auto j = static_cast<std::size_t>(x);
    if (j + 1 >= table.size()) {
        return table.back();
    }
    const double t = x - static_cast<double>(j);
    return (1.0 - t) * table[j] + t * table[j + 1];
}

} // namespace

AgeProfile AgeProfile::constant(const Rates& rates)
{
    return AgeProfile(Constant{rates});
}

AgeProfile AgeProfile::fixed_latency(const Rates& rates, double latency)
{
    if (!std::isfinite(latency) || latency < 0.0) {
        throw ValidationError(fmt::format("latency must be finite and nonnegative, got {}", latency));
    }
    return AgeProfile(FixedLatency{rates, latency});
}

AgeProfile AgeProfile::tabulated(double h, std::vector<double> beta, std::vector<double> alpha,
                                 std::vector<double> sigma, double p)
{
    if (!std::isfinite(h) || h <= 0.0) {
        throw ValidationError("tabulated profile needs a positive step");
    }
    if (beta.size() < 2 || alpha.size() != beta.size() || sigma.size() != beta.size()) {
        throw ValidationError("tabulated profile needs equally long beta, alpha and sigma tables");
    }
    for (const auto* table : {&beta, &alpha, &sigma}) {
        for (double v : *table) {
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("tabulated profile rates must be nonnegative");
            }
        }
    }
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw ValidationError(fmt::format("tracing probability p must lie in [0, 1], got {}", p));
    }
    std::vector<double> removal(alpha.size());
    for (std::size_t j = 0; j < removal.size(); ++j) {
        removal[j] = alpha[j] + sigma[j];
    }
    if (!(removal.back() > 0.0)) {
        throw ValidationError("tabulated profile must end with a positive removal rate");
    }
    AgeProfile profile(Tabulated{h, std::move(beta), std::move(alpha), std::move(sigma), p});
    profile.cumulative_hazard_ = cumulative(removal, h);
    return profile;
}

double AgeProfile::p() const noexcept
{
    return std::visit(
        [](const auto& v) -> double {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Tabulated>) {
                return v.p;
            }
            else {
                return v.rates.p();
            }
        },
        variant_);
}

double AgeProfile::latency() const noexcept
{
    const auto* l = std::get_if<FixedLatency>(&variant_);
    return l != nullptr ? l->latency : 0.0;
}

const Rates* AgeProfile::rates() const noexcept
{
    if (const auto* c = std::get_if<Constant>(&variant_)) {
        return &c->rates;
    }
    if (const auto* l = std::get_if<FixedLatency>(&variant_)) {
        return &l->rates;
    }
    return nullptr;
}

double AgeProfile::beta(double a) const noexcept
{
    if (const auto* t = std::get_if<Tabulated>(&variant_)) {
        return lookup(t->beta, t->h, a);
    }
    return a > latency() || (latency() == 0.0 && a >= 0.0) ? rates()->beta() : 0.0;
}

double AgeProfile::alpha(double a) const noexcept
{
    if (const auto* t = std::get_if<Tabulated>(&variant_)) {
        return lookup(t->alpha, t->h, a);
    }
    return a > latency() || (latency() == 0.0 && a >= 0.0) ? rates()->alpha() : 0.0;
}

double AgeProfile::sigma(double a) const noexcept
{
    if (const auto* t = std::get_if<Tabulated>(&variant_)) {
        return lookup(t->sigma, t->h, a);
    }
    return a > latency() || (latency() == 0.0 && a >= 0.0) ? rates()->sigma() : 0.0;
}

double AgeProfile::max_beta() const noexcept
{
    if (const auto* t = std::get_if<Tabulated>(&variant_)) {
        return *std::max_element(t->beta.begin(), t->beta.end());
    }
    return rates()->beta();
}

double AgeProfile::tail_removal_rate() const noexcept
{
    if (const auto* t = std::get_if<Tabulated>(&variant_)) {
        return t->alpha.back() + t->sigma.back();
    }
    return rates()->gamma();
}

double AgeProfile::tail_beta() const noexcept
{
    if (const auto* t = std::get_if<Tabulated>(&variant_)) {
        return t->beta.back();
    }
    return rates()->beta();
}

SampledRates AgeProfile::sample(const Grid& grid) const
{
    const std::size_t n = grid.size();
    SampledRates out;
    out.beta.assign(n, 0.0);
    out.alpha.assign(n, 0.0);
    out.sigma.assign(n, 0.0);
    if (const auto* t = std::get_if<Tabulated>(&variant_)) {
        for (std::size_t k = 0; k < n; ++k) {
            const double a = grid.age(k);
            out.beta[k] = lookup(t->beta, t->h, a);
            out.alpha[k] = lookup(t->alpha, t->h, a);
            out.sigma[k] = lookup(t->sigma, t->h, a);
        }
        return out;
    }
    const Rates& r = *rates();
    const double ti = latency();
    out.onset = grid.nearest(ti);
    if (std::abs(grid.age(out.onset) - ti) > 1e-9 * grid.h()) {
        spdlog::warn("latency {} snapped to grid node {} (h = {})", ti, grid.age(out.onset), grid.h());
    }
    for (std::size_t k = out.onset; k < n; ++k) {
        out.beta[k] = r.beta();
        out.alpha[k] = r.alpha();
        out.sigma[k] = r.sigma();
    }
    return out;
}

double AgeProfile::removal_age(double hazard) const noexcept
{
    if (const auto* t = std::get_if<Tabulated>(&variant_)) {
        const auto& cum = cumulative_hazard_;
        if (hazard >= cum.back()) {
            return t->h * static_cast<double>(cum.size() - 1) + (hazard - cum.back()) / tail_removal_rate();
        }
        const auto it = std::upper_bound(cum.begin(), cum.end(), hazard);
        const auto j = static_cast<std::size_t>(it - cum.begin()) - 1;
        // hazard rate is linear on the cell, so the cumulative is quadratic
        const double r0 = t->alpha[j] + t->sigma[j];
        const double r1 = t->alpha[j + 1] + t->sigma[j + 1];
        const double slope = (r1 - r0) / t->h;
        const double need = hazard - cum[j];
        double x = 0.0;
        if (std::abs(slope) < 1e-14) {
            x = r0 > 0.0 ? need / r0 : 0.0;
        }
        else {
            x = (-r0 + std::sqrt(std::max(0.0, r0 * r0 + 2.0 * slope * need))) / slope;
        }
        return t->h * static_cast<double>(j) + std::clamp(x, 0.0, t->h);
    }
    const double gamma = rates()->gamma();
    return latency() + hazard / gamma;
}

} // namespace ctdelay
