#include "ctdelay/quadrature.hpp"

#include <cmath>
#include <fmt/format.h>

#include "ctdelay/errors.hpp"

namespace ctdelay {

namespace {

void require_on_grid(std::span<const double> f, const Grid& grid)
{
    if (f.size() != grid.size()) {
        throw ValidationError(
            fmt::format("grid mismatch: curve has {} samples, grid has {} nodes", f.size(), grid.size()));
    }
}

std::vector<double> shifted(std::span<const double> f, std::size_t shift)
{
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = shift; k < f.size(); ++k) {
        out[k] = f[k - shift];
    }
    return out;
}

} // namespace

double kappa_hat(double a, double gamma) noexcept
{
    return a < 0.0 ? 0.0 : std::exp(-gamma * a);
}

std::vector<double> kappa_hat_curve(double gamma, const Grid& grid)
{
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = kappa_hat(grid.age(k), gamma);
    }
    return out;
}

std::vector<double> kappa_tilde(const AgeProfile& profile, const Grid& grid)
{
    if (const Rates* rates = profile.rates()) {
        const std::size_t onset = profile.is_fixed_latency() ? grid.nearest(profile.latency()) : 0;
        std::vector<double> out(grid.size(), 1.0);
        for (std::size_t k = onset; k < out.size(); ++k) {
            out[k] = kappa_hat(grid.age(k - onset), rates->gamma());
        }
        return out;
    }
    const SampledRates sampled = profile.sample(grid);
    std::vector<double> removal(grid.size());
    for (std::size_t k = 0; k < removal.size(); ++k) {
        removal[k] = sampled.alpha[k] + sampled.sigma[k];
    }
    auto out = cumulative(removal, grid.h());
    for (auto& v : out) {
        v = std::exp(-v);
    }
    return out;
}

std::vector<double> convolve(std::span<const double> f, const DelayKernel& kernel, const Grid& grid)
{
    require_on_grid(f, grid);
    if (kernel.is_dirac()) {
        return shifted(f, kernel.dirac_shift(grid));
    }
    const std::vector<double> phi = kernel.sample_density(grid);
    const double h = grid.h();
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = 1; k < f.size(); ++k) {
        double s = 0.5 * (phi[k] * f[0] + phi[0] * f[k]);
        for (std::size_t j = 1; j < k; ++j) {
            s += phi[k - j] * f[j];
        }
        out[k] = h * s;
    }
    return out;
}

SampledCurve convolve(const SampledCurve& f, const DelayKernel& kernel, const Grid& grid)
{
    if (!(f.grid == grid)) {
        throw ValidationError("grid mismatch between curve and requested grid");
    }
    return SampledCurve(grid, convolve(std::span<const double>(f.values), kernel, grid));
}

std::vector<double> convolve_cdf(std::span<const double> f, const DelayKernel& kernel, const Grid& grid)
{
    require_on_grid(f, grid);
    if (kernel.is_dirac()) {
        return shifted(cumulative(f, grid.h()), kernel.dirac_shift(grid));
    }
    return cumulative(convolve(f, kernel, grid), grid.h());
}

std::vector<double> cumulative(std::span<const double> f, double h)
{
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = 1; k < f.size(); ++k) {
        out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
    }
    return out;
}

SampledCurve cumulative(const SampledCurve& f, const Grid& grid)
{
    if (!(f.grid == grid)) {
        throw ValidationError("grid mismatch between curve and requested grid");
    }
    return SampledCurve(grid, cumulative(f.values, grid.h()));
}

double integrate(std::span<const double> f, double h, std::size_t from)
{
    if (from + 1 >= f.size()) {
        return 0.0;
    }
    const auto g = f.subspan(from);
    const std::size_t m = g.size() - 1;
    if (m == 1) {
        return 0.5 * h * (g[0] + g[1]);
    }
    const std::size_t simpson_end = (m % 2 == 0) ? m : m - 3;
    double s = 0.0;
    if (simpson_end > 0) {
        double odd = 0.0;
        double even = 0.0;
        for (std::size_t j = 1; j < simpson_end; ++j) {
            (j % 2 == 1 ? odd : even) += g[j];
        }
        s = h / 3.0 * (g[0] + 4.0 * odd + 2.0 * even + g[simpson_end]);
    }
    if (simpson_end < m) {
        const std::size_t j = simpson_end;
        s += 3.0 * h / 8.0 * (g[j] + 3.0 * g[j + 1] + 3.0 * g[j + 2] + g[j + 3]);
    }
    return s;
}

} // namespace ctdelay
