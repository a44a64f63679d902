#include <CLI11.hpp>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <sstream>
#include <spdlog/spdlog.h>

#include "ctdelay/cli/runner.hpp"
#include "ctdelay/cli/scenario.hpp"
#include "ctdelay/errors.hpp"

using ctdelay::cli::Scenario;
using ctdelay::cli::Task;

namespace {

struct Strings {
    std::string direction = "full";
    std::string mode = "recursive";
};

void add_rates(CLI::App* app, Scenario& s)
{
    app->add_option("--beta", s.beta, "contact rate");
    app->add_option("--alpha", s.alpha, "rate of unobserved recovery");
    app->add_option("--sigma", s.sigma, "rate of recovery with diagnosis");
    app->add_option("--p", s.p, "tracing probability per edge");
    app->add_option("--delay", s.delay, "tracing delay: dirac:T, exp:T or table:h:v0,v1,...");
}

void add_tracing(CLI::App* app, Scenario& s, Strings& text)
{
    app->add_option("--direction", text.direction, "backward, forward or full");
    app->add_option("--mode", text.mode, "one-step or recursive");
    app->add_option("--latency", s.latency, "fixed latency period");
    app->add_option("--step", s.h, "age step (0: default)");
    app->add_option("--a-max", s.a_max, "truncation age (0: default)");
}

void add_output(CLI::App* app, Scenario& s, std::string& save)
{
    app->add_option("-o,--output", s.output, "output file ('-' for standard output)");
    app->add_option("--save-scenario", save, "also write the scenario as a key = value file");
}

} // namespace

int main(int argc, char** argv)
{
    spdlog::set_level(spdlog::level::warn);
    CLI::App app{"Contact tracing with delay: survival curves, reproduction numbers and simulations"};
    app.require_subcommand(1);

    Scenario s;
    Strings text;
    std::string save;
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "suppress the summary line");

    auto* kappa = app.add_subcommand("kappa", "solve for the survival curves kappa");
    add_rates(kappa, s);
    add_tracing(kappa, s, text);
    kappa->add_option("--generations", s.generations, "generations to resolve (forward and full)");
    add_output(kappa, s, save);

    auto* first = app.add_subcommand("first-order", "first-order approximation in p");
    first->alias("approx");
    add_rates(first, s);
    add_tracing(first, s, text);
    add_output(first, s, save);

    auto* mc = app.add_subcommand("mc", "Monte Carlo estimate of kappa for one generation");
    add_rates(mc, s);
    add_tracing(mc, s, text);
    mc->add_option("--replicas", s.replicas, "number of independent trees");
    mc->add_option("--seed", s.seed, "random seed");
    mc->add_option("--generation", s.generation, "generation to estimate");
    add_output(mc, s, save);

    auto* rct = app.add_subcommand("rct", "closed-form first-order reproduction number");
    rct->add_option("--kernel", s.rct_kernel, "fixed, exp or latency");
    rct->add_option("--r0", s.r0);
    rct->add_option("--p", s.p);
    rct->add_option("--p-obs", s.p_obs);
    rct->add_option("--gamma", s.gamma);
    rct->add_option("--T", s.T, "(mean) tracing delay");
    rct->add_option("--Ti", s.Ti, "latency period");
    add_output(rct, s, save);

    auto* sweep = app.add_subcommand("sweep", "parameter sweeps");
    auto* sweep_latency = sweep->add_subcommand("rct-latency", "first-order effect over delay and latency");
    sweep->require_subcommand(1);
    sweep_latency->add_option("--r0", s.r0);
    sweep_latency->add_option("--p", s.p);
    sweep_latency->add_option("--p-obs", s.p_obs);
    sweep_latency->add_option("--gamma", s.gamma);
    sweep_latency->add_option("--T", s.T_range, "start:stop:step");
    sweep_latency->add_option("--Ti", s.Ti_range, "start:stop:step");
    add_output(sweep_latency, s, save);

    auto* sis = app.add_subcommand("sis", "endemic SIS model with tracing switched on");
    add_rates(sis, s);
    sis->add_option("--mode", text.mode, "one-step or recursive");
    sis->add_option("--N", s.population, "population size");
    sis->add_option("--seed", s.seed, "random seed");
    sis->add_option("--horizon", s.horizon);
    sis->add_option("--tracing-start", s.tracing_start);
    sis->add_flag("!--deterministic-only", s.stochastic, "skip the stochastic simulation");
    add_output(sis, s, save);

    std::string figure;
    ctdelay::cli::ReproduceOptions reproduce_options;
    auto* reproduce = app.add_subcommand("reproduce", "run a figure preset");
    reproduce->add_option("figure", figure, "fig1, fig2, fig3, kernels, sis or sweep")->required();
    reproduce->add_option("--outdir", reproduce_options.out_dir, "directory for the output files");
    reproduce->add_option("--replicas", reproduce_options.replicas, "override the ensemble size");

    std::string scenario_file;
    auto* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("scenario", scenario_file, "key = value scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", s.output, "override the output path");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (reproduce->parsed()) {
            for (const auto& file : ctdelay::cli::reproduce(figure, reproduce_options)) {
                if (!quiet) {
                    std::cout << file << '\n';
                }
            }
            return 0;
        }
        if (run->parsed()) {
            std::ifstream in(scenario_file);
            std::stringstream buffer;
            buffer << in.rdbuf();
            const std::string override_output = s.output;
            s = Scenario::parse(buffer.str());
            if (run->count("--output") > 0) {
                s.output = override_output;
            }
        }
        else {
            s.direction = ctdelay::parse_direction(text.direction);
            s.mode = ctdelay::parse_mode(text.mode);
            if (kappa->parsed()) {
                s.task = Task::kappa;
            }
            else if (first->parsed()) {
                s.task = Task::first_order;
            }
            else if (mc->parsed()) {
                s.task = Task::mc;
            }
            else if (rct->parsed()) {
                s.task = Task::rct;
            }
            else if (sweep_latency->parsed()) {
                s.task = Task::sweep_rct_latency;
            }
            else if (sis->parsed()) {
                s.task = Task::sis;
            }
        }
        if (!save.empty()) {
            ctdelay::cli::write_atomically(save, s.serialize());
        }
        const auto result = ctdelay::cli::run(s);
        if (s.output == "-" || s.output.empty()) {
            std::cout << result.table.render();
            if (!quiet) {
                std::cerr << result.summary << '\n';
            }
        }
        else if (!quiet) {
            std::cout << result.summary << '\n';
        }
        return 0;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ctdelay::cli::exit_code_for(e);
    }
}
