#include "ctdelay/cli/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <sstream>

#include "ctdelay/approx.hpp"
#include "ctdelay/cli/presets.hpp"
#include "ctdelay/endemic.hpp"
#include "ctdelay/errors.hpp"
#include "ctdelay/kappa.hpp"
#include "ctdelay/mc.hpp"
#include "ctdelay/quadrature.hpp"

namespace ctdelay::cli {

namespace {

Rates scenario_rates(const Scenario& s) { return Rates(s.beta, s.alpha, s.sigma, s.p); }

AgeProfile scenario_profile(const Scenario& s)
{
    const Rates rates = scenario_rates(s);
    return s.latency > 0.0 ? AgeProfile::fixed_latency(rates, s.latency) : AgeProfile::constant(rates);
}

Grid scenario_grid(const Scenario& s, const Rates& rates, const DelayKernel& kernel)
{
    if (s.h < 0.0 || s.a_max < 0.0) {
        throw ValidationError("grid overrides must be nonnegative");
    }
    const Grid base = Grid::for_problem(rates, kernel);
    const double h = s.h > 0.0 ? s.h : base.h();
    const double a_max = s.a_max > 0.0 ? s.a_max : base.a_max() + s.latency;
    return Grid(h, a_max);
}

void add_scenario_metadata(Table& t, const Scenario& s)
{
    t.meta("tool", fmt::format("ctdelay {}", tool_version));
    std::istringstream in(s.serialize());
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        const std::string key = line.substr(0, eq);
        if (key != "output") {
            t.meta(key, line.substr(eq + 3));
        }
    }
}

/// Closed-form R_ct matching the scenario's kernel, if there is one.
RctBreakdown closed_form(const Rates& rates, const DelayKernel& kernel, double latency, const Grid& grid)
{
    if (const auto* d = std::get_if<DelayKernel::Dirac>(&kernel.variant())) {
        if (latency > 0.0) {
            return rct_latency(rates.r0(), rates.p(), rates.p_obs(), rates.gamma(), d->delay, latency);
        }
        return rct_fixed(rates.r0(), rates.p(), rates.p_obs(), rates.gamma(), d->delay);
    }
    if (latency > 0.0) {
        throw ValidationError("first-order R_ct with latency needs a fixed delay");
    }
    if (const auto* e = std::get_if<DelayKernel::Exponential>(&kernel.variant())) {
        return rct_exponential(rates.r0(), rates.p(), rates.p_obs(), rates.gamma(), e->mean);
    }
    return rct_quadrature(rates, kernel, grid);
}

RunResult run_kappa(const Scenario& s)
{
    const Rates rates = scenario_rates(s);
    const AgeProfile profile = scenario_profile(s);
    const DelayKernel kernel = DelayKernel::parse(s.delay);
    const SolverSettings settings(scenario_grid(s, rates, kernel));
    const auto series = solve(profile, kernel, TraceConfig{s.direction, s.mode, s.generations}, settings);
    const auto tilde = kappa_tilde(profile, settings.grid);

    RunResult r;
    add_scenario_metadata(r.table, s);
    r.table.meta("converged", series.converged ? "true" : "false");
    r.table.header = {"a", "kappa_untraced"};
    for (const auto& c : series.curves) {
        r.table.header.push_back(c.generation().label());
    }
    for (std::size_t k = 0; k < settings.grid.size(); ++k) {
        std::vector<double> row{settings.grid.age(k), tilde[k]};
        for (const auto& c : series.curves) {
            row.push_back(c[k]);
        }
        r.table.rows.push_back(std::move(row));
    }
    const double numeric = reproduction_number(series.last(), profile);
    const double r0 = reproduction_number(tilde, settings.grid, profile);
    const auto closed = closed_form(rates, kernel, s.latency, settings.grid);
    r.table.meta("R0", fmt::format("{}", r0));
    r.table.meta("Rct_first_order", fmt::format("{}", closed.rct));
    r.table.meta("R_numeric", fmt::format("{}", numeric));
    r.summary = fmt::format("R0={:.6g} Rct_first_order={:.6g} R_numeric={:.6g}", r0, closed.rct, numeric);
    return r;
}

RunResult run_first_order(const Scenario& s)
{
    const Rates rates = scenario_rates(s);
    const DelayKernel kernel = DelayKernel::parse(s.delay);
    const Grid grid = scenario_grid(s, rates, kernel);
    RunResult r;
    add_scenario_metadata(r.table, s);
    const auto profile = scenario_profile(s);
    const auto tilde = kappa_tilde(profile, grid);

    std::vector<std::pair<std::string, std::vector<double>>> columns;
    if (s.latency > 0.0) {
        const auto eta = eta_curves(profile, kernel, grid);
        std::vector<double> zero(grid.size());
        std::vector<double> later(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            zero[k] = tilde[k] - s.p * eta.eta_minus.values[k];
            later[k] = tilde[k] - s.p * (eta.eta_minus.values[k] + eta.eta_plus.values[k]);
        }
        columns.emplace_back("gen0_raw", std::move(zero));
        columns.emplace_back("geni_raw", std::move(later));
        columns.emplace_back("eta_minus", eta.eta_minus.values);
        columns.emplace_back("eta_plus", eta.eta_plus.values);
    }
    else {
        auto add = [&](const std::string& name, const FirstOrderResult& f) {
            columns.emplace_back(name, f.curve.values());
            columns.emplace_back(name + "_raw", f.raw);
            r.table.meta(name + "_clipped", fmt::format("{}", f.clipped));
            r.table.meta(name + "_valid", f.valid ? "true" : "false");
        };
        switch (s.direction) {
        case Direction::backward:
            add("gen0", first_order_backward(rates, kernel, grid));
            break;
        case Direction::forward:
            add("geni", first_order_forward(rates, kernel, grid));
            break;
        case Direction::full: {
            const auto full = first_order_full(rates, kernel, grid);
            add("gen0", full.generation_zero);
            add("geni", full.later_generations);
            break;
        }
        case Direction::untraced:
            break;
        }
    }
    r.table.header = {"a", "kappa_untraced"};
    for (const auto& [name, values] : columns) {
        r.table.header.push_back(name);
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<double> row{grid.age(k), tilde[k]};
        for (const auto& c : columns) {
            row.push_back(c.second[k]);
        }
        r.table.rows.push_back(std::move(row));
    }
    const auto closed = closed_form(rates, kernel, s.latency, grid);
    r.summary = fmt::format("R0={:.6g} Rct_first_order={:.6g}", rates.r0(), closed.rct);
    return r;
}

RunResult run_mc(const Scenario& s)
{
    const Rates rates = scenario_rates(s);
    const AgeProfile profile = scenario_profile(s);
    const DelayKernel kernel = DelayKernel::parse(s.delay);
    const Grid grid = scenario_grid(s, rates, kernel);
    const TraceConfig config{s.direction, s.mode, s.generations};
    EnsembleOptions options;
    options.replicas = s.replicas;
    options.seed = s.seed;
    options.recorded_generations = s.generation;
    options.caps.max_generation = generation_cap(s.direction, s.generation);
    const Ensemble ensemble = run_ensemble(profile, kernel, config, options);
    const auto kappa = estimate_kappa(ensemble, s.generation, grid, s.direction, s.mode);
    const auto R = estimate_R(ensemble, s.generation);

    RunResult r;
    add_scenario_metadata(r.table, s);
    r.table.meta("samples", fmt::format("{}", kappa.samples));
    r.table.meta("R_mc", fmt::format("{}", R.mean));
    r.table.meta("R_mc_se", fmt::format("{}", R.standard_error));
    r.table.header = {"a", "kappa", "ci_lo", "ci_hi"};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        r.table.rows.push_back({grid.age(k), kappa.curve[k], kappa.lower[k], kappa.upper[k]});
    }
    r.summary = fmt::format("R0={:.6g} R_mc={:.6g}+-{:.3g} (generation {}, {} individuals)", rates.r0(), R.mean,
                            R.standard_error, s.generation, kappa.samples);
    return r;
}

RctBreakdown scenario_rct(const Scenario& s)
{
    if (s.rct_kernel == "fixed") {
        return rct_fixed(s.r0, s.p, s.p_obs, s.gamma, s.T);
    }
    if (s.rct_kernel == "exp") {
        return rct_exponential(s.r0, s.p, s.p_obs, s.gamma, s.T);
    }
    if (s.rct_kernel == "latency") {
        return rct_latency(s.r0, s.p, s.p_obs, s.gamma, s.T, s.Ti);
    }
    throw ValidationError(fmt::format("rct kernel must be fixed, exp or latency, got '{}'", s.rct_kernel));
}

RunResult run_rct(const Scenario& s)
{
    const auto b = scenario_rct(s);
    RunResult r;
    add_scenario_metadata(r.table, s);
    r.table.header = {"r0", "p", "backward_term", "forward_term", "rct"};
    r.table.rows.push_back({b.r0, b.p, b.backward_term, b.forward_term, b.rct});
    r.summary = fmt::format("R0={:.6g} Rct_first_order={:.6g}", b.r0, b.rct);
    return r;
}

Table latency_sweep(double r0, double p, double p_obs, double gamma, const std::vector<double>& Ts,
                    const std::vector<double>& Tis)
{
    Table t;
    t.header = {"T", "Ti", "backward_term", "forward_term", "bracket", "rct"};
    for (double T : Ts) {
        for (double Ti : Tis) {
            const auto b = rct_latency(r0, p, p_obs, gamma, T, Ti);
            const auto unit = rct_latency(r0, 1.0, 1.0, gamma, T, Ti);
            t.rows.push_back({T, Ti, b.backward_term, b.forward_term,
                              2.0 * (unit.backward_term + unit.forward_term) / r0, b.rct});
        }
    }
    return t;
}

RunResult run_sweep(const Scenario& s)
{
    RunResult r;
    r.table = latency_sweep(s.r0, s.p, s.p_obs, s.gamma, parse_range(s.T_range), parse_range(s.Ti_range));
    Table with_meta;
    add_scenario_metadata(with_meta, s);
    with_meta.header = std::move(r.table.header);
    with_meta.rows = std::move(r.table.rows);
    r.table = std::move(with_meta);
    r.summary = fmt::format("{} sweep cells", r.table.rows.size());
    return r;
}

Table sis_table(const Rates& rates, double p, const DelayKernel& kernel, Mode mode, std::uint64_t N, double horizon,
                double tracing_start, bool stochastic, std::uint64_t seed, std::string& summary)
{
    const double T = kernel.mean();
    SisOdeSettings ode;
    const auto det = integrate_sis(rates, p, T, static_cast<double>(N), horizon, tracing_start, ode);
    SisSimulationSettings sim;
    const auto stride = static_cast<std::size_t>(std::llround(sim.record_step / ode.h));
    Table t;
    t.meta("tracing_effect_time", fmt::format("{}", det.tracing_time));
    if (stochastic) {
        if (N > std::numeric_limits<std::uint32_t>::max()) {
            throw ValidationError("population too large");
        }
        const auto st = simulate_sis_finite(rates, p, kernel, TraceConfig{Direction::full, mode, 4},
                                            static_cast<std::uint32_t>(N), seed, horizon, tracing_start, sim);
        t.meta("extinct", st.extinct ? "true" : "false");
        t.header = {"t", "ode", "stochastic", "phase"};
        for (std::size_t k = 0; k < st.time.size(); ++k) {
            const std::size_t j = std::min(k * stride, det.values.size() - 1);
            t.rows.push_back({st.time[k], det.values[j], st.values[k] / static_cast<double>(N),
                              st.time[k] >= det.tracing_time ? 1.0 : 0.0});
        }
    }
    else {
        t.header = {"t", "ode", "phase"};
        for (std::size_t j = 0; j < det.time.size(); j += stride) {
            t.rows.push_back({det.time[j], det.values[j], det.time[j] >= det.tracing_time ? 1.0 : 0.0});
        }
    }
    summary = fmt::format("endemic level before tracing {:.4g}, with tracing {:.4g}",
                          sis_equilibrium(rates, 0.0, T), sis_equilibrium(rates, p, T));
    return t;
}

RunResult run_sis(const Scenario& s)
{
    const Rates rates(s.beta, s.alpha, s.sigma, 0.0);
    const DelayKernel kernel = DelayKernel::parse(s.delay);
    RunResult r;
    Table body = sis_table(rates, s.p, kernel, s.mode, s.population, s.horizon, s.tracing_start, s.stochastic, s.seed,
                           r.summary);
    add_scenario_metadata(r.table, s);
    for (auto& m : body.metadata) {
        r.table.metadata.push_back(std::move(m));
    }
    r.table.header = std::move(body.header);
    r.table.rows = std::move(body.rows);
    return r;
}

} // namespace

std::vector<double> parse_range(const std::string& text)
{
    std::vector<double> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ':')) {
        try {
            parts.push_back(std::stod(item));
        }
        catch (const std::exception&) {
            throw ValidationError(fmt::format("bad range '{}'", text));
        }
    }
    if (parts.size() == 1) {
        return parts;
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
        throw ValidationError(fmt::format("range '{}' must look like start:stop:step with step > 0", text));
    }
    const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = parts[0] + parts[2] * static_cast<double>(k);
    }
    return out;
}

RunResult run(const Scenario& scenario)
{
    RunResult r;
    switch (scenario.task) {
    case Task::kappa:
        r = run_kappa(scenario);
        break;
    case Task::first_order:
        r = run_first_order(scenario);
        break;
    case Task::mc:
        r = run_mc(scenario);
        break;
    case Task::rct:
        r = run_rct(scenario);
        break;
    case Task::sweep_rct_latency:
        r = run_sweep(scenario);
        break;
    case Task::sis:
        r = run_sis(scenario);
        break;
    }
    if (scenario.output != "-" && !scenario.output.empty()) {
        write_atomically(scenario.output, r.table.render());
    }
    return r;
}

namespace {

std::string panel_path(const ReproduceOptions& o, const std::string& name)
{
    return (std::filesystem::path(o.out_dir) / (name + ".csv")).string();
}

std::string p_label(double p) { return fmt::format("p{}", p); }

/// Theory, first order, MC and untraced curves of one tracing figure.
std::vector<std::string> tracing_figure(const std::string& id, const presets::TracingFigure& fig, Direction direction,
                                        const ReproduceOptions& o)
{
    std::vector<std::string> files;
    const DelayKernel kernel = DelayKernel::dirac(fig.delay);
    const std::size_t replicas = o.replicas > 0 ? o.replicas : presets::mc_replicas;
    for (double p : fig.p_values) {
        for (Mode mode : {Mode::one_step, Mode::recursive}) {
            const Rates rates(fig.beta, fig.alpha, fig.sigma, p);
            const AgeProfile profile = AgeProfile::constant(rates);
            const SolverSettings settings(Grid::for_problem(rates, kernel));
            const Grid& grid = settings.grid;
            const auto series = solve(profile, kernel, TraceConfig{direction, mode, fig.mc_generation}, settings);

            std::vector<std::pair<std::string, std::vector<double>>> cols;
            cols.emplace_back("kappa_hat", kappa_hat_curve(rates.gamma(), grid));
            if (direction == Direction::backward) {
                cols.emplace_back("theory", series.generation(0).values());
                cols.emplace_back("first_order", first_order_backward(rates, kernel, grid).curve.values());
            }
            else {
                for (int i = 0; i <= fig.mc_generation; ++i) {
                    cols.emplace_back(fmt::format("theory_gen{}", i), series.generation(i).values());
                }
                if (direction == Direction::forward) {
                    cols.emplace_back("first_order", first_order_forward(rates, kernel, grid).curve.values());
                }
                else {
                    const auto fo = first_order_full(rates, kernel, grid);
                    cols.emplace_back("first_order_gen0", fo.generation_zero.curve.values());
                    cols.emplace_back("first_order_geni", fo.later_generations.curve.values());
                }
            }
            EnsembleOptions eo;
            eo.replicas = replicas;
            eo.seed = presets::mc_seed;
            eo.recorded_generations = fig.mc_generation;
            eo.caps.max_generation = generation_cap(direction, fig.mc_generation);
            const auto ensemble = run_ensemble(profile, kernel, TraceConfig{direction, mode, fig.mc_generation}, eo);
            const auto mc = estimate_kappa(ensemble, fig.mc_generation, grid, direction, mode);
            cols.emplace_back("mc", mc.curve.values());
            cols.emplace_back("mc_lo", mc.lower);
            cols.emplace_back("mc_hi", mc.upper);

            Table t;
            t.meta("tool", fmt::format("ctdelay {}", tool_version));
            t.meta("figure", id);
            t.meta("direction", to_string(direction));
            t.meta("mode", to_string(mode));
            t.meta("beta", fmt::format("{}", fig.beta));
            t.meta("alpha", fmt::format("{}", fig.alpha));
            t.meta("sigma", fmt::format("{}", fig.sigma));
            t.meta("p", fmt::format("{}", p));
            t.meta("delay", kernel.to_string());
            t.meta("mc_generation", fmt::format("{}", fig.mc_generation));
            t.meta("replicas", fmt::format("{}", replicas));
            t.meta("seed", fmt::format("{}", presets::mc_seed));
            t.header.push_back("a");
            for (const auto& c : cols) {
                t.header.push_back(c.first);
            }
            for (std::size_t k = 0; k < grid.size(); ++k) {
                std::vector<double> row{grid.age(k)};
                for (const auto& c : cols) {
                    row.push_back(c.second[k]);
                }
                t.rows.push_back(std::move(row));
            }
            const auto path = panel_path(o, fmt::format("{}_{}_{}", id, p_label(p), to_string(mode)));
            write_atomically(path, t.render());
            files.push_back(path);
        }
    }
    return files;
}

std::vector<std::string> kernels_figure(const ReproduceOptions& o)
{
    const auto& f = presets::kernels;
    const Rates rates(f.beta, f.alpha, f.sigma, f.p);
    const auto fixed = DelayKernel::dirac(f.delay);
    const auto expo = DelayKernel::exponential(f.delay);
    const Grid grid = Grid::for_problem(rates, fixed);
    const auto bf = first_order_backward(rates, fixed, grid);
    const auto be = first_order_backward(rates, expo, grid);
    const auto ff = first_order_forward(rates, fixed, grid);
    const auto fe = first_order_forward(rates, expo, grid);
    Table t;
    t.meta("tool", fmt::format("ctdelay {}", tool_version));
    t.meta("figure", "kernels");
    t.meta("beta", fmt::format("{}", f.beta));
    t.meta("alpha", fmt::format("{}", f.alpha));
    t.meta("sigma", fmt::format("{}", f.sigma));
    t.meta("p", fmt::format("{}", f.p));
    t.meta("delay_mean", fmt::format("{}", f.delay));
    t.header = {"a", "backward_fixed", "backward_exponential", "forward_fixed", "forward_exponential"};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double hat = kappa_hat(grid.age(k), rates.gamma());
        auto ratio = [&](const FirstOrderResult& r) { return hat > 0.0 ? r.curve[k] / hat : 1.0; };
        t.rows.push_back({grid.age(k), ratio(bf), ratio(be), ratio(ff), ratio(fe)});
    }
    const auto path = panel_path(o, "kernels");
    write_atomically(path, t.render());
    return {path};
}

std::vector<std::string> sis_figure(const ReproduceOptions& o)
{
    const auto& f = presets::sis;
    const Rates rates(f.beta, f.alpha, f.sigma, f.p_before);
    std::string summary;
    Table body = sis_table(rates, f.p_after, DelayKernel::dirac(f.delay), Mode::recursive, f.population, f.horizon,
                           f.switch_time, true, presets::mc_seed, summary);
    Table t;
    t.meta("tool", fmt::format("ctdelay {}", tool_version));
    t.meta("figure", "sis");
    t.meta("beta", fmt::format("{}", f.beta));
    t.meta("alpha", fmt::format("{}", f.alpha));
    t.meta("sigma", fmt::format("{}", f.sigma));
    t.meta("p_after", fmt::format("{}", f.p_after));
    t.meta("switch_time", fmt::format("{}", f.switch_time));
    t.meta("delay", fmt::format("{}", f.delay));
    t.meta("population", fmt::format("{}", f.population));
    t.meta("seed", fmt::format("{}", presets::mc_seed));
    for (auto& m : body.metadata) {
        t.metadata.push_back(std::move(m));
    }
    t.header = std::move(body.header);
    t.rows = std::move(body.rows);
    const auto path = panel_path(o, "sis");
    write_atomically(path, t.render());
    return {path};
}

std::vector<std::string> sweep_figure(const ReproduceOptions& o)
{
    const auto& f = presets::sweep;
    const auto axis = parse_range(fmt::format("{}:{}:{}", f.start, f.stop, f.step));
    Table t = latency_sweep(f.r0, 1.0, 1.0, f.gamma, axis, axis);
    t.metadata.insert(t.metadata.begin(), {{"tool", fmt::format("ctdelay {}", tool_version)},
                                           {"figure", "sweep"},
                                           {"r0", fmt::format("{}", f.r0)},
                                           {"gamma", fmt::format("{}", f.gamma)}});
    const auto path = panel_path(o, "sweep");
    write_atomically(path, t.render());
    return {path};
}

} // namespace

std::vector<std::string> reproduce(const std::string& figure_id, const ReproduceOptions& options)
{
    if (figure_id == "fig1") {
        return tracing_figure("fig1", presets::fig1, Direction::backward, options);
    }
    if (figure_id == "fig2") {
        return tracing_figure("fig2", presets::fig2, Direction::forward, options);
    }
    if (figure_id == "fig3") {
        return tracing_figure("fig3", presets::fig3, Direction::full, options);
    }
    if (figure_id == "kernels") {
        return kernels_figure(options);
    }
    if (figure_id == "sis") {
        return sis_figure(options);
    }
    if (figure_id == "sweep") {
        return sweep_figure(options);
    }
    throw ValidationError(
        fmt::format("unknown figure '{}'; expected fig1, fig2, fig3, kernels, sis or sweep", figure_id));
}

int exit_code_for(const std::exception& e) noexcept
{
    if (dynamic_cast<const ValidationError*>(&e) != nullptr || dynamic_cast<const DomainError*>(&e) != nullptr) {
        return 2;
    }
    if (dynamic_cast<const SolverError*>(&e) != nullptr) {
        return 3;
    }
    if (dynamic_cast<const InsufficientSampleError*>(&e) != nullptr) {
        return 4;
    }
    return 1;
}

} // namespace ctdelay::cli
