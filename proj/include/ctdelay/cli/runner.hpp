#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ctdelay/cli/scenario.hpp"
#include "ctdelay/cli/table.hpp"

namespace ctdelay::cli {

inline constexpr const char* tool_version = "1.0.0";

/// Result of a run: the table written and a one-line summary.
struct RunResult {
    Table table;
    std::string summary;
};

/// Executes a scenario and writes its table to scenario.output ("-" means
/// standard output is left to the caller).
RunResult run(const Scenario& scenario);

/// Parses "start:stop:step" into the inclusive list of values.
std::vector<double> parse_range(const std::string& text);

struct ReproduceOptions {
    std::string out_dir = ".";
    std::size_t replicas = 0; // 0 uses the preset ensemble size
};

/// Runs a figure preset (fig1, fig2, fig3, kernels, sis, sweep) and returns
/// the files written.
std::vector<std::string> reproduce(const std::string& figure_id, const ReproduceOptions& options);

/// Exit status for an exception escaping a run.
int exit_code_for(const std::exception& e) noexcept;

} // namespace ctdelay::cli
