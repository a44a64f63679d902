#include "ctdelay/rates.hpp"

#include <cmath>
#include <fmt/format.h>

#include "ctdelay/errors.hpp"

namespace ctdelay {

namespace {

void require_rate(double value, const char* name)
{
    if (!std::isfinite(value) || value < 0.0) {
        throw ValidationError(fmt::format("{} must be finite and nonnegative, got {}", name, value));
    }
}

} // namespace

Rates::Rates(double beta, double alpha, double sigma, double p)
    : beta_(beta)
    , alpha_(alpha)
    , sigma_(sigma)
    , p_(p)
{
    require_rate(beta, "beta");
    require_rate(alpha, "alpha");
    require_rate(sigma, "sigma");
    if (!(alpha + sigma > 0.0)) {
        throw ValidationError("alpha + sigma must be positive");
    }
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw ValidationError(fmt::format("tracing probability p must lie in [0, 1], got {}", p));
    }
}

Rates Rates::from_gamma(double beta, double gamma, double p_obs, double p)
{
    if (!std::isfinite(p_obs) || p_obs < 0.0 || p_obs > 1.0) {
        throw ValidationError(fmt::format("p_obs must lie in [0, 1], got {}", p_obs));
    }
    return Rates(beta, (1.0 - p_obs) * gamma, p_obs * gamma, p);
}

} // namespace ctdelay
