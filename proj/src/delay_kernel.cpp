#include "ctdelay/delay_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <sstream>

#include "ctdelay/errors.hpp"
#include "ctdelay/grid.hpp"
#include "ctdelay/quadrature.hpp"

namespace ctdelay {

namespace {

constexpr double mass_tolerance = 1e-6;

double parse_number(const std::string& text, const std::string& what)
{
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    }
    catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw ValidationError(fmt::format("cannot parse {} from '{}'", what, text));
    }
    return value;
}

double interpolate(const std::vector<double>& table, double h, double a)
{
    if (a < 0.0 || table.empty()) {
        return 0.0;
    }
    const double x = a / h;
    const auto j = static_cast<std::size_t>(x);
    if (j + 1 >= table.size()) {
        return j + 1 == table.size() && x == static_cast<double>(j) ? table.back() : 0.0;
    }
    const double t = x - static_cast<double>(j);
    return (1.0 - t) * table[j] + t * table[j + 1];
}

} // namespace

DelayKernel DelayKernel::dirac(double delay)
{
    if (!std::isfinite(delay) || delay < 0.0) {
        throw ValidationError(fmt::format("delay must be finite and nonnegative, got {}", delay));
    }
    return DelayKernel(Dirac{delay});
}

DelayKernel DelayKernel::exponential(double mean)
{
    if (!std::isfinite(mean) || mean < 0.0) {
        throw ValidationError(fmt::format("mean delay must be finite and nonnegative, got {}", mean));
    }
    if (mean == 0.0) {
        return dirac(0.0);
    }
    return DelayKernel(Exponential{mean});
}

DelayKernel DelayKernel::tabulated(double h, std::vector<double> density)
{
    if (!std::isfinite(h) || h <= 0.0) {
        throw ValidationError("tabulated delay needs a positive step");
    }
    if (density.size() < 2) {
        throw ValidationError("tabulated delay needs at least two density values");
    }
    for (double d : density) {
        if (!std::isfinite(d) || d < 0.0) {
            throw ValidationError("tabulated delay densities must be nonnegative");
        }
    }
    auto cdf = cumulative(density, h);
    if (std::abs(cdf.back() - 1.0) > mass_tolerance) {
        throw ValidationError(
            fmt::format("tabulated delay density integrates to {}, expected 1 within 1e-6", cdf.back()));
    }
    for (auto& c : cdf) {
        c /= cdf.back();
    }
    DelayKernel kernel(Tabulated{h, std::move(density)});
    kernel.table_cdf_ = std::move(cdf);
    return kernel;
}

DelayKernel DelayKernel::parse(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ValidationError(fmt::format("delay '{}' must look like dirac:T, exp:T or table:h:v0,v1,...", text));
    }
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    if (kind == "dirac" || kind == "fixed") {
        return dirac(parse_number(rest, "delay"));
    }
    if (kind == "exp" || kind == "exponential") {
        return exponential(parse_number(rest, "mean delay"));
    }
    if (kind == "table") {
        const auto second = rest.find(':');
        if (second == std::string::npos) {
            throw ValidationError("tabulated delay must look like table:h:v0,v1,...");
        }
        const double h = parse_number(rest.substr(0, second), "table step");
        std::vector<double> values;
        std::stringstream stream(rest.substr(second + 1));
        std::string item;
        while (std::getline(stream, item, ',')) {
            values.push_back(parse_number(item, "table density"));
        }
        return tabulated(h, std::move(values));
    }
    throw ValidationError(fmt::format("unknown delay kind '{}'", kind));
}

std::string DelayKernel::to_string() const
{
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Dirac>) {
                return fmt::format("dirac:{}", k.delay);
            }
            else if constexpr (std::is_same_v<K, Exponential>) {
                return fmt::format("exp:{}", k.mean);
            }
            else {
                return fmt::format("table:{}:{}", k.h, fmt::join(k.density, ","));
            }
        },
        variant_);
}

double DelayKernel::mean() const
{
    return std::visit(
        [](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Dirac>) {
                return k.delay;
            }
            else if constexpr (std::is_same_v<K, Exponential>) {
                return k.mean;
            }
            else {
                std::vector<double> moment(k.density.size());
                for (std::size_t j = 0; j < moment.size(); ++j) {
                    moment[j] = static_cast<double>(j) * k.h * k.density[j];
                }
                return integrate(moment, k.h);
            }
        },
        variant_);
}

bool DelayKernel::has_atom_at_zero() const noexcept
{
    const auto* d = std::get_if<Dirac>(&variant_);
    return d != nullptr && d->delay == 0.0;
}

double DelayKernel::cdf(double a) const
{
    if (a < 0.0) {
        return 0.0;
    }
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Dirac>) {
                return a >= k.delay ? 1.0 : 0.0;
            }
            else if constexpr (std::is_same_v<K, Exponential>) {
                return -std::expm1(-a / k.mean);
            }
            else {
                const double x = a / k.h;
                const auto j = static_cast<std::size_t>(x);
                if (j + 1 >= table_cdf_.size()) {
                    return 1.0;
                }
                const double t = x - static_cast<double>(j);
                return (1.0 - t) * table_cdf_[j] + t * table_cdf_[j + 1];
            }
        },
        variant_);
}

double DelayKernel::quantile(double u) const
{
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Dirac>) {
                return k.delay;
            }
            else if constexpr (std::is_same_v<K, Exponential>) {
                return -k.mean * std::log1p(-u);
            }
            else {
                const auto it = std::upper_bound(table_cdf_.begin(), table_cdf_.end(), u);
                if (it == table_cdf_.end()) {
                    return k.h * static_cast<double>(table_cdf_.size() - 1);
                }
                const auto j = static_cast<std::size_t>(it - table_cdf_.begin());
                const double lo = table_cdf_[j - 1];
                const double hi = table_cdf_[j];
                const double t = hi > lo ? (u - lo) / (hi - lo) : 0.0;
                return k.h * (static_cast<double>(j - 1) + t);
            }
        },
        variant_);
}

std::size_t DelayKernel::dirac_shift(const Grid& grid) const
{
    const auto* d = std::get_if<Dirac>(&variant_);
    if (d == nullptr) {
        throw ValidationError("dirac_shift requires a Dirac delay");
    }
    const double steps = d->delay / grid.h();
    const auto shift = static_cast<std::size_t>(std::llround(steps));
    const double snapped = static_cast<double>(shift) * grid.h();
    if (std::abs(snapped - d->delay) > 1e-9 * grid.h()) {
        spdlog::warn("fixed delay {} snapped to grid node {} (h = {})", d->delay, snapped, grid.h());
    }
    return shift;
}

std::vector<double> DelayKernel::sample_density(const Grid& grid) const
{
    std::vector<double> out(grid.size(), 0.0);
    if (const auto* e = std::get_if<Exponential>(&variant_)) {
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k] = std::exp(-grid.age(k) / e->mean) / e->mean;
        }
        return out;
    }
    const auto* t = std::get_if<Tabulated>(&variant_);
    if (t == nullptr) {
        throw ValidationError("a Dirac delay has no density to sample");
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = interpolate(t->density, t->h, grid.age(k));
    }
    const double mass = integrate(out, grid.h());
    if (!(mass > 0.0)) {
        throw ValidationError("tabulated delay has no mass on the solver grid");
    }
    if (std::abs(1.0 - mass) > mass_tolerance) {
        spdlog::warn("tabulated delay has mass {} on the grid [0, {}]; renormalising", mass, grid.a_max());
        for (auto& v : out) {
            v /= mass;
        }
    }
    return out;
}

bool DelayKernel::operator==(const DelayKernel& other) const
{
    if (variant_.index() != other.variant_.index()) {
        return false;
    }
    return std::visit(
        [&](const auto& k) -> bool {
            using K = std::decay_t<decltype(k)>;
            const auto& o = std::get<K>(other.variant_);
            if constexpr (std::is_same_v<K, Dirac>) {
                return k.delay == o.delay;
            }
            else if constexpr (std::is_same_v<K, Exponential>) {
                return k.mean == o.mean;
            }
            else {
                return k.h == o.h && k.density == o.density;
            }
        },
        variant_);
}

} // namespace ctdelay
