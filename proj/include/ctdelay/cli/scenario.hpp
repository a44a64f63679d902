#pragma once

#include <cstdint>
#include <string>

#include "ctdelay/curve.hpp"

namespace ctdelay::cli {

enum class Task { kappa, first_order, mc, rct, sweep_rct_latency, sis };
std::string to_string(Task t);
Task parse_task(const std::string& text);

/// Everything one run of the tool needs. Unused fields keep their defaults.
struct Scenario {
    Task task = Task::kappa;

    // rates and tracing
    double beta = 2.0;
    double alpha = 0.1;
    double sigma = 0.9;
    double p = 0.3;
    double latency = 0.0;
    std::string delay = "dirac:0.5";
    Direction direction = Direction::full;
    Mode mode = Mode::recursive;
    int generations = 4;

    // grid overrides; zero selects the default grid
    double h = 0.0;
    double a_max = 0.0;

    // Monte Carlo
    std::uint64_t replicas = 100'000;
    std::uint64_t seed = 42;
    int generation = 0;

    // closed forms and sweeps
    std::string rct_kernel = "fixed";
    double r0 = 2.0;
    double p_obs = 0.9;
    double gamma = 1.0;
    double T = 0.5;
    double Ti = 0.0;
    std::string T_range = "0:3:0.05";
    std::string Ti_range = "0:3:0.05";

    // endemic model
    std::uint64_t population = 10'000;
    double horizon = 40.0;
    double tracing_start = 15.0;
    bool stochastic = true;

    std::string output = "-";

    bool operator==(const Scenario&) const = default;

    /// Flat `key = value` text listing every field.
    std::string serialize() const;
    /// Inverse of serialize; unknown keys and malformed values throw.
    static Scenario parse(const std::string& text);
};

} // namespace ctdelay::cli
