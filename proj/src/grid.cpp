#include "ctdelay/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "ctdelay/delay_kernel.hpp"
#include "ctdelay/errors.hpp"
#include "ctdelay/rates.hpp"

namespace ctdelay {

Grid::Grid(double h, double a_max)
    : h_(h)
    , intervals_(0)
{
    if (!std::isfinite(h) || h <= 0.0) {
        throw ValidationError(fmt::format("grid step must be positive, got {}", h));
    }
    if (!std::isfinite(a_max) || a_max < 10.0 * h * (1.0 - 1e-12)) {
        throw ValidationError(fmt::format("a_max = {} must be at least 10 h = {}", a_max, 10.0 * h));
    }
    intervals_ = static_cast<std::size_t>(std::llround(a_max / h));
}

Grid Grid::for_problem(double gamma, double delay_mean)
{
    if (!(gamma > 0.0)) {
        throw ValidationError("grid defaults need a positive removal rate");
    }
    double h = 0.01 / gamma;
    if (delay_mean > 0.0) {
        h = std::min(h, delay_mean / 10.0);
        // put the delay on a node
        h = delay_mean / std::ceil(delay_mean / h - 1e-9);
    }
    return Grid(h, 25.0 / gamma);
}

Grid Grid::for_problem(const Rates& rates, const DelayKernel& kernel)
{
    return for_problem(rates.gamma(), kernel.mean());
}

std::size_t Grid::nearest(double a) const noexcept
{
    if (!(a > 0.0)) {
        return 0;
    }
    const auto k = static_cast<std::size_t>(std::llround(a / h_));
    return std::min(k, intervals_);
}

} // namespace ctdelay
