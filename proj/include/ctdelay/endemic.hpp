#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ctdelay/delay_kernel.hpp"
#include "ctdelay/kappa.hpp"
#include "ctdelay/rates.hpp"

namespace ctdelay {

/// Prevalence over time. `values` are infected fractions for the
/// deterministic model and infected counts for the stochastic one.
struct SisTimeSeries {
    std::vector<double> time;
    std::vector<double> values;
    /// Time from which tracing acts (deterministic: start + delay).
    double tracing_time = 0.0;
    bool extinct = false;

    /// Mean of the values on [from, to].
    double window_mean(double from, double to) const;
};

/// Effective removal rate gamma / (1 - p p_obs kappa_hat(T) (beta u / gamma + 1) / 2),
/// equal to beta u / R_ct for a fixed delay. Throws DomainError when the
/// denominator is not positive. The tracing probability in `rates` is ignored.
double gamma_eff(double u, const Rates& rates, double p, double T);

/// Equilibrium infected fraction of the deterministic model with tracing;
/// zero when the infection dies out.
double sis_equilibrium(const Rates& rates, double p, double T);

struct SisOdeSettings {
    double h = 0.01;
    /// Initial infected fraction; defaults to 10 / N when not positive.
    double initial_fraction = 0.0;
};

/// i' = beta i (1 - i) - gamma_eff(1 - i) i with classical RK4. Tracing acts
/// from tracing_start + T on; before that gamma_eff = gamma.
SisTimeSeries integrate_sis(const Rates& rates, double p, double T, double N, double horizon, double tracing_start,
                            const SisOdeSettings& settings = {});

struct SisSimulationSettings {
    std::uint32_t initial_infected = 10;
    /// Sampling interval of the output series.
    double record_step = 0.1;
};

/// Event-driven SIS epidemic in a well-mixed population of N. Tracing uses
/// only infection edges and is triggered by detections from tracing_start on.
SisTimeSeries simulate_sis_finite(const Rates& rates, double p, const DelayKernel& kernel, const TraceConfig& config,
                                  std::uint32_t N, std::uint64_t seed, double horizon, double tracing_start,
                                  const SisSimulationSettings& settings = {});

/// Rows t,value,phase with phase 0 before and 1 after tracing_time.
void write_series(const SisTimeSeries& series, std::ostream& out);

} // namespace ctdelay
