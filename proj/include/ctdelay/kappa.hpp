#pragma once

#include <vector>

#include "ctdelay/age_profile.hpp"
#include "ctdelay/curve.hpp"
#include "ctdelay/delay_kernel.hpp"
#include "ctdelay/grid.hpp"
#include "ctdelay/rates.hpp"

namespace ctdelay {

inline constexpr int max_generations = 50;

/// Which edges are traced, whether traced individuals trace again, and how
/// many generations to resolve (ignored for backward tracing).
struct TraceConfig {
    Direction direction = Direction::full;
    Mode mode = Mode::recursive;
    int generations = 4;

    void validate() const;
};

struct SolverSettings {
    Grid grid;
    /// Sup-norm tolerance for the generation fixed point, also used as the
    /// residual bound of the per-step corrector.
    double fixed_point_tol = 1e-8;
    int max_corrector_iters = 3;

    explicit SolverSettings(Grid g) : grid(g) {}
    void validate() const;
};

/// Generation curves kappa_0, kappa_1, ... of one solver run. When the
/// generations converged, the last entry repeats the final curve tagged as
/// the generation limit.
struct GenerationSeries {
    std::vector<KappaCurve> curves;
    bool converged = false;

    const KappaCurve& generation(int i) const;
    /// The limit curve if converged, else the last computed generation.
    const KappaCurve& last() const { return curves.back(); }
};

/// Backward tracing, recursive mode: the infector is traced whenever an
/// infectee is diagnosed directly or through tracing.
KappaCurve solve_backward_recursive(const Rates& rates, const DelayKernel& kernel, const SolverSettings& settings);

/// Backward tracing, one-step mode: only directly diagnosed infectees trace
/// their infector.
KappaCurve solve_backward_onestep(const Rates& rates, const DelayKernel& kernel, const SolverSettings& settings);

/// Forward tracing generations; generation 0 is the untraced survival.
GenerationSeries solve_forward_generations(const Rates& rates, const DelayKernel& kernel, Mode mode, int i_max,
                                           const SolverSettings& settings);

/// Full tracing: generation 0 solves the backward equation and seeds the
/// forward recursion as the factor for tracing through own infectees.
GenerationSeries solve_full(const Rates& rates, const DelayKernel& kernel, Mode mode, int i_max,
                            const SolverSettings& settings);

/// Full tracing with age-dependent rates.
GenerationSeries solve_age_dependent(const AgeProfile& profile, const DelayKernel& kernel, Mode mode, int i_max,
                                     const SolverSettings& settings);

/// Dispatches on the configuration. Backward tracing yields one curve that
/// applies to every generation.
GenerationSeries solve(const AgeProfile& profile, const DelayKernel& kernel, const TraceConfig& config,
                       const SolverSettings& settings);

/// kappa_i(a | b): survival of a generation-i individual whose infector was
/// at age b when infecting it, given the infector's curve `previous` and the
/// no-infector-trace factor `own` (kappa_hat or kappa_0). Constant rates.
std::vector<double> forward_conditional(const Rates& rates, const DelayKernel& kernel, Mode mode,
                                        const std::vector<double>& own, const std::vector<double>& previous,
                                        double b, const Grid& grid);

} // namespace ctdelay
