#pragma once

#include <array>

// Parameter sets of the reproduction presets. Every preset reads its values
// from here and the test suite pins them.
namespace ctdelay::presets {

struct TracingFigure {
    double beta;
    double alpha;
    double sigma;
    double delay;
    std::array<double, 2> p_values;
    int mc_generation;
};

/// Backward tracing curves.
inline constexpr TracingFigure fig1{2.0, 0.1, 0.9, 0.5, {0.3, 0.8}, 0};
/// Forward tracing curves, simulated data for generation 4.
inline constexpr TracingFigure fig2{2.0, 0.1, 0.9, 0.5, {0.3, 0.8}, 4};
/// Full tracing curves, theory and simulated data for generation 4.
inline constexpr TracingFigure fig3{2.0, 0.1, 0.9, 0.5, {0.3, 0.8}, 4};

/// Fixed versus exponential delay in the first-order curves.
struct KernelFigure {
    double beta;
    double alpha;
    double sigma;
    double p;
    double delay;
};
inline constexpr KernelFigure kernels{3.0, 1.0, 1.0, 0.3, 1.0};

/// Stochastic versus deterministic SIS model with tracing switched on.
struct SisFigure {
    double beta;
    double alpha;
    double sigma;
    double p_before;
    double p_after;
    double switch_time;
    /// Chosen value, see README.
    double delay;
    unsigned population;
    unsigned initial_infected;
    double horizon;
};
inline constexpr SisFigure sis{2.0, 0.2, 0.9, 0.0, 0.3, 15.0, 0.5, 10'000, 10, 40.0};

/// First-order effect over delay T and latency Ti, in units of the mean
/// infectious period.
struct SweepFigure {
    double r0;
    double gamma;
    double start;
    double stop;
    double step;
};
inline constexpr SweepFigure sweep{2.0, 1.0, 0.0, 3.0, 0.05};

inline constexpr std::size_t mc_replicas = 100'000;
inline constexpr unsigned long long mc_seed = 42;

} // namespace ctdelay::presets
