#include "ctdelay/kappa.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "ctdelay/errors.hpp"
#include "ctdelay/quadrature.hpp"

namespace ctdelay {

namespace {

/// Everything a solver run needs, sampled once on the grid.
struct Problem {
    Grid grid;
    SampledRates rates;
    double p = 0.0;
    /// beta, alpha, sigma constant on the whole grid; enables O(n) tail sums.
    bool constant_rates = false;
    /// Survival without tracing.
    std::vector<double> base;
    const DelayKernel* kernel = nullptr;
    std::size_t shift = 0;
    std::vector<double> phi;

    Problem(const AgeProfile& profile, const DelayKernel& k, const Grid& g, bool use_constant_shortcuts)
        : grid(g)
        , rates(profile.sample(g))
        , p(profile.p())
        , constant_rates(use_constant_shortcuts && profile.is_constant())
        , base(kappa_tilde(profile, g))
        , kernel(&k)
    {
        if (k.is_dirac()) {
            shift = k.dirac_shift(g);
        }
        else {
            phi = k.sample_density(g);
        }
    }
};

/// Marches the generation-zero equation (backward tracing through own
/// infectees) on the grid.
///
/// log kappa = log kappa_tilde - int_0^a hazard, where the tracing hazard is
/// p (phi * G)(a) and G(tau) = int_0^tau beta(tau - c) D(c) dc collects the
/// infectees diagnosed up to tau. D is the detection density of an infectee:
/// (sigma + hazard) kappa in recursive mode, sigma kappa in one-step mode.
/// Each step uses an explicit Euler predictor on log kappa followed by
/// trapezoidal corrector passes that re-evaluate the endpoint terms.
std::vector<double> march_generation_zero(const Problem& pr, Mode mode, const SolverSettings& settings)
{
    const std::size_t n = pr.grid.size();
    const double h = pr.grid.h();
    const auto& beta = pr.rates.beta;
    const auto& sigma = pr.rates.sigma;
    const std::size_t onset = pr.rates.onset;

    std::vector<double> kappa(n, 0.0);
    std::vector<double> detect(n, 0.0);
    std::vector<double> diagnosed(n, 0.0);
    std::vector<double> hazard(n, 0.0);
    std::vector<double> traced(n, 0.0);
    double detect_integral = 0.0;

    kappa[0] = pr.base[0];
    detect[0] = sigma[0] * kappa[0];
    if (pr.p == 0.0) {
        return pr.base;
    }

    for (std::size_t k = 1; k < n; ++k) {
        // G[k] = g_known + g_coef * D[k]
        double g_known = 0.0;
        double g_coef = 0.0;
        if (pr.constant_rates) {
            detect_integral += 0.5 * h * detect[k - 1];
            g_known = beta[0] * detect_integral;
            g_coef = 0.5 * h * beta[0];
        }
        else if (k >= 2 * onset && k - onset > onset) {
            const std::size_t lo = onset;
            const std::size_t hi = k - onset;
            double s = 0.5 * beta[k - lo] * detect[lo];
            for (std::size_t j = lo + 1; j < hi; ++j) {
                s += beta[k - j] * detect[j];
            }
            if (hi < k) {
                s += 0.5 * beta[k - hi] * detect[hi];
            }
            else {
                g_coef = 0.5 * h * beta[0];
            }
            g_known = h * s;
        }

        // (phi * G)[k] = t_known + t_coef * G[k]
        double t_known = 0.0;
        double t_coef = 0.0;
        if (pr.kernel->is_dirac()) {
            if (pr.shift == 0) {
                t_coef = 1.0;
            }
            else if (k >= pr.shift) {
                t_known = diagnosed[k - pr.shift];
            }
        }
        else {
            double s = 0.5 * pr.phi[k] * diagnosed[0];
            for (std::size_t j = 1; j < k; ++j) {
                s += pr.phi[k - j] * diagnosed[j];
            }
            t_known = h * s;
            t_coef = 0.5 * h * pr.phi[0];
        }

        double rate = hazard[k - 1];
        double log_loss = traced[k - 1] + h * rate;
        bool converged = false;
        double residual = 0.0;
        for (int it = 0; it < settings.max_corrector_iters; ++it) {
            const double kap = pr.base[k] * std::exp(-log_loss);
            const double d = mode == Mode::recursive ? (sigma[k] + rate) * kap : sigma[k] * kap;
            const double g = g_known + g_coef * d;
            const double next_rate = pr.p * (t_known + t_coef * g);
            const double next_loss = traced[k - 1] + 0.5 * h * (hazard[k - 1] + next_rate);
            residual = std::abs(next_loss - log_loss);
            rate = next_rate;
            log_loss = next_loss;
            if (residual <= settings.fixed_point_tol) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw SolverError(fmt::format("corrector did not converge at age {} (residual {:.3g} after {} passes)",
                                          pr.grid.age(k), residual, settings.max_corrector_iters));
        }
        traced[k] = log_loss;
        hazard[k] = rate;
        kappa[k] = pr.base[k] * std::exp(-log_loss);
        detect[k] = mode == Mode::recursive ? (sigma[k] + rate) * kappa[k] : sigma[k] * kappa[k];
        diagnosed[k] = g_known + g_coef * detect[k];
        if (pr.constant_rates) {
            detect_integral += 0.5 * h * detect[k];
        }
    }
    return kappa;
}

/// One step of the generation recursion:
///   kappa_i(a) = own(a) [1 - p (Phi * W)(a) / N],
/// where W(c) = int_0^inf beta(b) D_{i-1}(b + c) db is the beta-weighted tail
/// of the infector's detection density, N = int beta kappa_{i-1}, and Phi the
/// delay CDF. The b-marginal is taken analytically; D = -kappa' - alpha kappa
/// is integrated by parts so only kappa_{i-1} itself enters.
std::vector<double> next_generation(const Problem& pr, Mode mode, const std::vector<double>& own,
                                    const std::vector<double>& prev)
{
    const std::size_t n = pr.grid.size();
    const double h = pr.grid.h();
    const auto& beta = pr.rates.beta;
    const auto& alpha = pr.rates.alpha;
    const auto& sigma = pr.rates.sigma;
    const std::size_t m = pr.rates.onset;

    std::vector<double> weight(n, 0.0);
    double norm = 0.0;
    if (pr.constant_rates) {
        const auto cum = cumulative(prev, h);
        const double total = cum.back();
        for (std::size_t c = 0; c < n; ++c) {
            const double tail = total - cum[c];
            weight[c] = mode == Mode::recursive ? beta[0] * (prev[c] - alpha[0] * tail) : beta[0] * sigma[0] * tail;
        }
        norm = beta[0] * total;
    }
    else {
        for (std::size_t c = 0; c + m < n; ++c) {
            const std::size_t last = n - 1 - c;
            double s = 0.0;
            if (last > m) {
                for (std::size_t b = m; b <= last; ++b) {
                    const double w = (b == m || b == last) ? 0.5 : 1.0;
                    const double rate = mode == Mode::recursive ? alpha[b + c] : sigma[b + c];
                    s += w * beta[b] * rate * prev[b + c];
                }
                s *= h;
            }
            if (mode == Mode::recursive) {
                double slope_part = 0.0;
                for (std::size_t b = m; b < last; ++b) {
                    const double jump = beta[b + 1] - beta[b];
                    if (jump != 0.0) {
                        slope_part += jump * 0.5 * (prev[b + c] + prev[b + 1 + c]);
                    }
                }
                weight[c] = beta[m] * prev[m + c] + slope_part - s;
            }
            else {
                weight[c] = s;
            }
        }
        std::vector<double> infectivity(n, 0.0);
        for (std::size_t b = m; b < n; ++b) {
            infectivity[b] = beta[b] * prev[b];
        }
        norm = m + 1 < n ? h * (0.5 * infectivity[m] + 0.5 * infectivity[n - 1]) : 0.0;
        for (std::size_t b = m + 1; b + 1 < n; ++b) {
            norm += h * infectivity[b];
        }
    }

    std::vector<double> next(own);
    if (!(norm > 0.0) || pr.p == 0.0) {
        return next;
    }
    const auto traced = convolve_cdf(weight, *pr.kernel, pr.grid);
    for (std::size_t k = 0; k < n; ++k) {
        const double untraced = std::clamp(1.0 - pr.p * traced[k] / norm, 0.0, 1.0);
        next[k] = own[k] * untraced;
    }
    return next;
}

GenerationSeries iterate_generations(const Problem& pr, Direction direction, Mode mode, int i_max,
                                     const std::vector<double>& generation_zero, const std::vector<double>& own,
                                     const SolverSettings& settings)
{
    GenerationSeries series;
    series.curves.emplace_back(pr.grid, generation_zero, Generation{0, false}, direction, mode);
    std::vector<double> prev = generation_zero;
    for (int i = 1; i <= i_max; ++i) {
        auto next = next_generation(pr, mode, own, prev);
        const double change = sup_distance(next, prev);
        series.curves.emplace_back(pr.grid, next, Generation{i, false}, direction, mode);
        if (change < settings.fixed_point_tol) {
            series.converged = true;
            series.curves.push_back(series.curves.back().retagged(Generation::limit_of(i)));
            break;
        }
        prev = std::move(next);
    }
    return series;
}

void require_generations(int i_max)
{
    if (i_max < 1 || i_max > max_generations) {
        throw ValidationError(fmt::format("generations must lie in [1, {}], got {}", max_generations, i_max));
    }
}

GenerationSeries run(const AgeProfile& profile, const DelayKernel& kernel, Direction direction, Mode mode,
                     int i_max, const SolverSettings& settings, bool use_constant_shortcuts)
{
    settings.validate();
    const Problem pr(profile, kernel, settings.grid, use_constant_shortcuts);
    if (direction == Direction::untraced) {
        GenerationSeries series;
        series.curves.emplace_back(pr.grid, pr.base, Generation{0, false}, direction, mode);
        series.converged = true;
        series.curves.push_back(series.curves.back().retagged(Generation::limit_of(0)));
        return series;
    }
    if (direction == Direction::backward) {
        GenerationSeries series;
        series.curves.emplace_back(pr.grid, march_generation_zero(pr, mode, settings), Generation{0, false},
                                   direction, mode);
        series.converged = true;
        series.curves.push_back(series.curves.back().retagged(Generation::limit_of(0)));
        return series;
    }
    require_generations(i_max);
    if (direction == Direction::forward) {
        return iterate_generations(pr, direction, mode, i_max, pr.base, pr.base, settings);
    }
    const auto zero = march_generation_zero(pr, mode, settings);
    return iterate_generations(pr, direction, mode, i_max, zero, zero, settings);
}

} // namespace

void TraceConfig::validate() const
{
    if (direction != Direction::backward && direction != Direction::untraced) {
        require_generations(generations);
    }
}

void SolverSettings::validate() const
{
    if (!(fixed_point_tol > 0.0)) {
        throw ValidationError("fixed_point_tol must be positive");
    }
    if (max_corrector_iters < 1) {
        throw ValidationError("max_corrector_iters must be at least 1");
    }
}

const KappaCurve& GenerationSeries::generation(int i) const
{
    if (curves.empty()) {
        throw ValidationError("empty generation series");
    }
    if (curves.front().direction() == Direction::backward || curves.front().direction() == Direction::untraced) {
        return curves.front();
    }
    const int computed = static_cast<int>(curves.size()) - (converged ? 1 : 0);
    if (i >= 0 && i < computed) {
        return curves[static_cast<std::size_t>(i)];
    }
    if (i >= computed && converged) {
        return curves.back();
    }
    throw ValidationError(fmt::format("generation {} was not computed", i));
}

KappaCurve solve_backward_recursive(const Rates& rates, const DelayKernel& kernel, const SolverSettings& settings)
{
    return run(AgeProfile::constant(rates), kernel, Direction::backward, Mode::recursive, 1, settings, true)
        .curves.front();
}

KappaCurve solve_backward_onestep(const Rates& rates, const DelayKernel& kernel, const SolverSettings& settings)
{
    return run(AgeProfile::constant(rates), kernel, Direction::backward, Mode::one_step, 1, settings, true)
        .curves.front();
}

GenerationSeries solve_forward_generations(const Rates& rates, const DelayKernel& kernel, Mode mode, int i_max,
                                           const SolverSettings& settings)
{
    return run(AgeProfile::constant(rates), kernel, Direction::forward, mode, i_max, settings, true);
}

GenerationSeries solve_full(const Rates& rates, const DelayKernel& kernel, Mode mode, int i_max,
                            const SolverSettings& settings)
{
    return run(AgeProfile::constant(rates), kernel, Direction::full, mode, i_max, settings, true);
}

GenerationSeries solve_age_dependent(const AgeProfile& profile, const DelayKernel& kernel, Mode mode, int i_max,
                                     const SolverSettings& settings)
{
    return run(profile, kernel, Direction::full, mode, i_max, settings, false);
}

GenerationSeries solve(const AgeProfile& profile, const DelayKernel& kernel, const TraceConfig& config,
                       const SolverSettings& settings)
{
    config.validate();
    return run(profile, kernel, config.direction, config.mode, config.generations, settings, true);
}

std::vector<double> forward_conditional(const Rates& rates, const DelayKernel& kernel, Mode mode,
                                        const std::vector<double>& own, const std::vector<double>& previous,
                                        double b, const Grid& grid)
{
    const std::size_t n = grid.size();
    if (own.size() != n || previous.size() != n) {
        throw ValidationError("forward_conditional: curves must live on the grid");
    }
    const double h = grid.h();
    const std::size_t shift = grid.nearest(b);
    const double at_b = previous[shift];
    std::vector<double> out(own);
    if (!(at_b > 0.0)) {
        return out;
    }
    // Detection density of the infector at ages b + c, by central differences.
    std::vector<double> density(n, 0.0);
    for (std::size_t c = 0; c + shift < n; ++c) {
        const std::size_t x = c + shift;
        double slope = 0.0;
        if (x == 0) {
            slope = (previous[1] - previous[0]) / h;
        }
        else if (x + 1 == n) {
            slope = (previous[x] - previous[x - 1]) / h;
        }
        else {
            slope = (previous[x + 1] - previous[x - 1]) / (2.0 * h);
        }
        density[c] = mode == Mode::recursive ? -slope - rates.alpha() * previous[x] : rates.sigma() * previous[x];
        density[c] /= at_b;
    }
    const auto traced = convolve_cdf(density, kernel, grid);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = own[k] * (1.0 - rates.p() * traced[k]);
    }
    return out;
}

} // namespace ctdelay
