#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctdelay/age_profile.hpp"
#include "ctdelay/curve.hpp"
#include "ctdelay/delay_kernel.hpp"
#include "ctdelay/grid.hpp"
#include "ctdelay/kappa.hpp"

namespace ctdelay {

enum class RemovalCause { spontaneous, detected, traced };
std::string to_string(RemovalCause c);

/// One node of the infection tree.
struct Individual {
    std::uint32_t id = 0;
    int generation = 0;
    std::optional<std::uint32_t> infector;
    double infection_time = 0.0;
    double removal_time = 0.0;
    RemovalCause cause = RemovalCause::spontaneous;
    /// Infection times of the infectees. Individuals in the last simulated
    /// generation have their contacts drawn but spawn no infectees.
    std::vector<double> contact_times;

    double removal_age() const noexcept { return removal_time - infection_time; }
};

/// A tracing attempt along one edge.
struct TraceRecord {
    std::uint32_t source = 0;
    std::uint32_t target = 0;
    double index_removal = 0.0;
    double arrival = 0.0;
    bool removed_target = false;
};

struct OutbreakCaps {
    int max_generation = 10;
    std::size_t max_individuals = 5'000'000;
    double max_time = std::numeric_limits<double>::infinity();

    void validate() const;
};

struct OutbreakLog {
    std::vector<Individual> individuals;
    std::vector<TraceRecord> traces;
    /// A cap on individuals or time stopped the simulation early.
    bool censored = false;
};

/// Event-driven simulation of one tree rooted at an individual infected at
/// time 0. Deterministic in `seed`.
OutbreakLog simulate_outbreak(const AgeProfile& profile, const DelayKernel& kernel, const TraceConfig& config,
                              std::uint64_t seed, const OutbreakCaps& caps);

/// Per-generation removal ages and offspring counts pooled over replicas.
/// `replica` holds the replica index of each entry; individuals of one tree
/// are correlated, so confidence bands treat replicas as clusters.
struct Ensemble {
    std::vector<std::vector<double>> removal_ages;
    std::vector<std::vector<std::uint32_t>> offspring;
    std::vector<std::vector<std::uint32_t>> replica;
    std::size_t replicas = 0;
    std::size_t censored_replicas = 0;
};

struct EnsembleOptions {
    std::size_t replicas = 100'000;
    std::uint64_t seed = 1;
    OutbreakCaps caps;
    /// Highest generation whose statistics are kept.
    int recorded_generations = 4;
    /// Worker threads; 0 reads CTDELAY_THREADS, falling back to the hardware
    /// concurrency. Results do not depend on the thread count.
    unsigned threads = 0;
};

Ensemble run_ensemble(const AgeProfile& profile, const DelayKernel& kernel, const TraceConfig& config,
                      const EnsembleOptions& options);

/// Seed of replica r, derived from the ensemble seed.
std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica) noexcept;

/// Generations of descendants simulated below the deepest generation of
/// interest, so that backward tracing reaching it is resolved.
inline constexpr int descendant_depth = 6;

/// Generation cap that resolves generation `target` under `direction`.
int generation_cap(Direction direction, int target) noexcept;

/// Empirical survival with a pointwise Wilson 95% band. For clustered
/// samples the band uses the effective sample size of the cluster-robust
/// variance of the ratio estimator.
struct EmpiricalKappa {
    KappaCurve curve;
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t samples = 0;
};

/// Wilson score interval for a proportion s observed on n (effective) trials.
std::pair<double, double> wilson_interval(double s, double n, double z = 1.959963984540054);

/// Independent samples.
EmpiricalKappa estimate_kappa(const std::vector<double>& removal_ages, const Grid& grid, Direction direction,
                              Mode mode, int generation, std::size_t min_samples = 100);
/// Samples grouped by `cluster` id (any labels; equal labels share a cluster).
EmpiricalKappa estimate_kappa(const std::vector<double>& removal_ages, const std::vector<std::uint32_t>& cluster,
                              const Grid& grid, Direction direction, Mode mode, int generation,
                              std::size_t min_samples = 100);
EmpiricalKappa estimate_kappa(const Ensemble& ensemble, int generation, const Grid& grid, Direction direction,
                              Mode mode, std::size_t min_samples = 100);

struct MeanEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};

MeanEstimate estimate_R(const Ensemble& ensemble, int generation, std::size_t min_samples = 100);

/// Rows id,generation,infector,t_inf,t_rem,cause.
void write_event_log(const OutbreakLog& log, std::ostream& out);

unsigned default_thread_count();

} // namespace ctdelay
