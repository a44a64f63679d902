// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
//
//   acceptance            run all criteria
//   acceptance 3 8        run only the listed criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ctdelay/approx.hpp"
#include "ctdelay/cli/presets.hpp"
#include "ctdelay/cli/runner.hpp"
#include "ctdelay/cli/scenario.hpp"
#include "ctdelay/core.hpp"
#include "ctdelay/endemic.hpp"
#include "ctdelay/kappa.hpp"
#include "ctdelay/mc.hpp"

using namespace ctdelay;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

double hat(double a, double g)
{
    return a < 0.0 ? 0.0 : std::exp(-g * a);
}

// 1. Zero tracing ------------------------------------------------------------

Verdict zero_tracing()
{
    const Rates r(2.0, 0.1, 0.9, 0.0);
    const DelayKernel k = DelayKernel::dirac(0.5);
    const SolverSettings s(Grid::for_problem(r, k));
    const auto h = kappa_hat_curve(r.gamma(), s.grid);
    double worst = 0.0;
    double slowest = 0.0;
    auto timed = [&](const std::function<std::vector<std::vector<double>>()>& solver,
                     const std::vector<double>& reference) {
        const auto t0 = Clock::now();
        const auto curves = solver();
        slowest = std::max(slowest, seconds_since(t0) / static_cast<double>(curves.size()));
        for (const auto& c : curves) {
            worst = std::max(worst, sup_distance(c, reference));
        }
    };
    auto values = [](const GenerationSeries& g) {
        std::vector<std::vector<double>> out;
        for (const auto& c : g.curves) {
            out.push_back(c.values());
        }
        return out;
    };
    timed([&] { return std::vector<std::vector<double>>{solve_backward_recursive(r, k, s).values()}; }, h);
    timed([&] { return std::vector<std::vector<double>>{solve_backward_onestep(r, k, s).values()}; }, h);
    for (Mode m : {Mode::one_step, Mode::recursive}) {
        timed([&] { return values(solve_forward_generations(r, k, m, 4, s)); }, h);
        timed([&] { return values(solve_full(r, k, m, 4, s)); }, h);
        const auto lat = AgeProfile::fixed_latency(r, 1.0);
        timed([&] { return values(solve_age_dependent(lat, k, m, 4, s)); }, kappa_tilde(lat, s.grid));
        timed([&] { return values(solve_age_dependent(AgeProfile::constant(r), k, m, 4, s)); }, h);
    }
    return {worst <= 1e-10 && slowest < 0.1,
            fmt::format("max sup-distance {:.2e} (<= 1e-10), slowest {:.4f} s per curve (< 0.1 s)", worst, slowest)};
}

// 2. R0 -----------------------------------------------------------------------

Verdict basic_reproduction()
{
    const Rates r(2.0, 0.1, 0.9, 0.0);
    const Grid g = Grid::for_problem(r, DelayKernel::dirac(0.5));
    const KappaCurve h(g, kappa_hat_curve(r.gamma(), g), Generation{0, false}, Direction::untraced,
                       Mode::recursive);
    const double R = reproduction_number(h, AgeProfile::constant(r));

    EnsembleOptions o;
    o.replicas = 100'000;
    o.seed = presets::mc_seed;
    o.recorded_generations = 0;
    o.caps.max_generation = 0;
    const auto e = run_ensemble(AgeProfile::constant(r), DelayKernel::dirac(0.5),
                                TraceConfig{Direction::untraced, Mode::recursive, 1}, o);
    const auto mc = estimate_R(e, 0);
    const double z = (mc.mean - 2.0) / mc.standard_error;
    return {std::abs(R - 2.0) <= 1e-6 && std::abs(z) <= 3.0,
            fmt::format("quadrature R0 = {:.10f}, MC R0 = {:.4f} +- {:.4f} (z = {:.2f}, {} roots)", R, mc.mean,
                        mc.standard_error, z, e.replicas)};
}

// 3. Solver vs Monte Carlo ----------------------------------------------------

Verdict solver_vs_mc()
{
    const auto t0 = Clock::now();
    const DelayKernel k = DelayKernel::dirac(0.5);
    std::vector<std::string> lines;
    bool all = true;
    for (double p : {0.3, 0.8}) {
        const Rates r(2.0, 0.1, 0.9, p);
        const SolverSettings s(Grid::for_problem(r, k));
        for (Direction d : {Direction::backward, Direction::forward, Direction::full}) {
            const int generation = d == Direction::backward ? presets::fig1.mc_generation : presets::fig2.mc_generation;
            for (Mode m : {Mode::one_step, Mode::recursive}) {
                const auto series = solve(AgeProfile::constant(r), k, TraceConfig{d, m, std::max(generation, 1)}, s);
                const auto& exact = series.generation(generation);

                EnsembleOptions o;
                o.replicas = presets::mc_replicas;
                o.seed = presets::mc_seed;
                o.recorded_generations = generation;
                o.caps.max_generation = generation_cap(d, generation);
                const auto e = run_ensemble(AgeProfile::constant(r), k, TraceConfig{d, m, std::max(generation, 1)}, o);
                const auto mc = estimate_kappa(e, generation, s.grid, d, m);

                std::size_t inside = 0;
                std::size_t total = 0;
                for (std::size_t i = 0; i <= s.grid.nearest(3.0); ++i) {
                    ++total;
                    inside += exact[i] >= mc.lower[i] && exact[i] <= mc.upper[i];
                }
                const double fraction = static_cast<double>(inside) / static_cast<double>(total);
                all = all && fraction >= 0.95;
                lines.push_back(fmt::format("p={} {} {} gen{}: {:.3f}", p, to_string(d), to_string(m), generation,
                                            fraction));
            }
        }
    }
    const double elapsed = seconds_since(t0);
    std::string detail = fmt::format("fraction of nodes on [0, 3] inside the 95% band (>= 0.95); total {:.1f} s "
                                     "(< 120 s)",
                                     elapsed);
    for (const auto& l : lines) {
        detail += "\n    " + l;
    }
    return {all && elapsed < 120.0, detail};
}

// 4. First-order quality ------------------------------------------------------

Verdict first_order_quality()
{
    const DelayKernel k = DelayKernel::dirac(0.5);
    auto distance = [&](double p) {
        const Rates r(2.0, 0.1, 0.9, p);
        const SolverSettings s(Grid::for_problem(r, k));
        const auto exact = solve_full(r, k, Mode::recursive, max_generations, s);
        const auto fo = first_order_full(r, k, s.grid);
        return sup_distance(fo.later_generations.curve.values(), exact.last().values());
    };
    const double d03 = distance(0.3);
    const double d08 = distance(0.8);
    const double ratio = distance(0.1) / distance(0.05);
    return {d03 <= 0.03 && d08 > d03 && ratio >= 3.2 && ratio <= 4.8,
            fmt::format("d(0.3) = {:.4f} (<= 0.03), d(0.8) = {:.4f} (> d(0.3)), d(0.1)/d(0.05) = {:.3f} (in [3.2, 4.8])",
                        d03, d08, ratio)};
}

// 5. Closed-form R_ct vs quadrature ------------------------------------------

Verdict closed_form_rct()
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int ordered = 0;
    const int draws = 100;
    for (int i = 0; i < draws; ++i) {
        const double r0 = 0.5 + 3.5 * u(rng);
        const double p = 0.5 * u(rng);
        const double po = 0.1 + 0.9 * u(rng);
        const double g = 0.5 + 1.5 * u(rng);
        const double T = 3.0 * u(rng) / g;
        const Rates rates = Rates::from_gamma(r0 * g, g, po, p);
        const auto profile = AgeProfile::constant(rates);
        const auto fixed_kernel = DelayKernel::dirac(T);
        const auto exp_kernel = DelayKernel::exponential(T);
        const Grid grid = Grid::for_problem(rates, fixed_kernel);
        const double qf = reproduction_number(first_order_full(rates, fixed_kernel, grid).later_generations.raw, grid,
                                              profile);
        const double qe =
            reproduction_number(first_order_full(rates, exp_kernel, grid).later_generations.raw, grid, profile);
        const auto cf = rct_fixed(r0, p, po, g, T);
        const auto ce = rct_exponential(r0, p, po, g, T);
        worst = std::max({worst, std::abs(qf - cf.rct), std::abs(qe - ce.rct)});
        ordered += (r0 - ce.rct) >= (r0 - cf.rct);
    }
    return {worst <= 1e-3 && ordered == draws,
            fmt::format("max |closed form - quadrature| = {:.2e} (<= 1e-3) over {} draws; exponential effect >= fixed in "
                        "{}/{}",
                        worst, draws, ordered, draws)};
}

// 6. Latency first-order integrals ------------------------------------------

Verdict latency_integrals()
{
    const double r0 = 2.0;
    const double g = 1.0;
    const double po = 0.9;
    const Rates rates = Rates::from_gamma(r0 * g, g, po, 1.0);
    const Grid grid(0.0025, 45.0);
    double worst = 0.0;
    double worst_impl = 0.0;
    int cells = 0;
    for (int it = 0; it <= 12; ++it) {
        for (int ii = 0; ii <= 12; ++ii) {
            const double T = 0.25 * it;
            const double Ti = 0.25 * ii;
            const auto eta = eta_curves(AgeProfile::fixed_latency(rates, Ti), DelayKernel::dirac(T), grid);
            auto integral = [&](const std::vector<double>& v) {
                std::vector<double> w(v.size());
                for (std::size_t k = 0; k < v.size(); ++k) {
                    w[k] = rates.beta() * v[k];
                }
                return integrate(w, grid.h(), grid.nearest(Ti));
            };
            const double m = std::max(T, Ti);
            const double r_minus = 0.5 * po * r0 * r0 * hat(T + Ti, g);
            const double r_plus = 0.5 * po * r0 * (hat(m, g) / hat(Ti, g)) * (2.0 - hat(m, g) / hat(T, g));
            const double q_minus = integral(eta.eta_minus.values);
            const double q_plus = integral(eta.eta_plus.values);
            worst = std::max({worst, std::abs(q_minus / r_minus - 1.0), std::abs(q_plus / r_plus - 1.0)});
            const auto b = rct_latency(r0, 1.0, po, g, T, Ti);
            worst_impl = std::max({worst_impl, std::abs(b.backward_term / r_minus - 1.0),
                                   std::abs(b.forward_term / r_plus - 1.0)});
            ++cells;
        }
    }
    return {worst <= 1e-4 && worst_impl <= 1e-12,
            fmt::format("max relative quadrature error {:.2e} (<= 1e-4) over {} (T, Ti) cells; rct_latency terms match "
                        "to {:.1e}",
                        worst, cells, worst_impl)};
}

// 7. Delay cancellation -------------------------------------------------------

Verdict delay_cancellation()
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    const double base = rct_latency(2.0, 0.3, 0.9, 1.0, 0.0, 0.0).forward_term;
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double ti = u(rng);
        worst = std::max(worst, std::abs(rct_latency(2.0, 0.3, 0.9, 1.0, ti, ti).forward_term - base));
    }
    const double eps = std::numeric_limits<double>::epsilon() * base;
    return {worst <= 2.0 * eps,
            fmt::format("max |forward_term(T = Ti) - forward_term(0, 0)| = {:.1e} over 50 draws (<= 2 ulp = {:.1e})",
                        worst, 2.0 * eps)};
}

// 8. Endemic heuristic --------------------------------------------------------

Verdict endemic()
{
    const auto& f = presets::sis;
    const Rates rates(f.beta, f.alpha, f.sigma, 0.0);
    const double from = 25.0;
    const double to = f.horizon;
    const auto ode = integrate_sis(rates, f.p_after, f.delay, f.population, f.horizon, f.switch_time);
    const double deterministic = ode.window_mean(from, to);
    double sum = 0.0;
    int runs = 0;
    int extinct = 0;
    SisSimulationSettings settings;
    settings.initial_infected = f.initial_infected;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto s = simulate_sis_finite(rates, f.p_after, DelayKernel::dirac(f.delay),
                                           TraceConfig{Direction::full, Mode::recursive, 4}, f.population, seed,
                                           f.horizon, f.switch_time, settings);
        if (s.extinct) {
            ++extinct;
            continue;
        }
        sum += s.window_mean(from, to) / f.population;
        ++runs;
    }
    const double stochastic = runs > 0 ? sum / runs : 0.0;
    const double rel = std::abs(stochastic / deterministic - 1.0);
    return {runs > 0 && rel <= 0.10,
            fmt::format("window [{}, {}]: stochastic {:.4f} (20 seeds, {} extinct), deterministic {:.4f}, relative gap "
                        "{:.3f} (<= 0.10)",
                        from, to, stochastic, extinct, deterministic, rel)};
}

// 9. Monotonicity suites ------------------------------------------------------

bool valid_curve(const KappaCurve& c)
{
    if (c[0] != 1.0) {
        return false;
    }
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (!(c[k] >= 0.0 && c[k] <= 1.0) || (k > 0 && c[k] > c[k - 1])) {
            return false;
        }
    }
    return true;
}

Verdict monotonicity()
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int draws = 1000;

    int curves_ok = 0;
    int curves = 0;
    for (int i = 0; i < draws; ++i) {
        const Rates r(0.5 + 3.5 * u(rng), 0.05 + u(rng), 0.05 + u(rng), u(rng));
        const double T = 2.0 * u(rng);
        const DelayKernel k = i % 2 ? DelayKernel::dirac(T) : DelayKernel::exponential(T);
        const SolverSettings s(Grid::for_problem(r, k));
        bool ok = true;
        try {
            switch (i % 5) {
                case 0:
                    ok = valid_curve(solve_backward_recursive(r, k, s)) && valid_curve(solve_backward_onestep(r, k, s));
                    break;
                case 1:
                case 2:
                    for (const auto& c : solve_forward_generations(r, k, i % 2 ? Mode::one_step : Mode::recursive, 4, s)
                                             .curves) {
                        ok = ok && valid_curve(c);
                    }
                    break;
                case 3:
                    for (const auto& c : solve_full(r, k, i % 2 ? Mode::one_step : Mode::recursive, 4, s).curves) {
                        ok = ok && valid_curve(c);
                    }
                    break;
                default: {
                    const auto fo = first_order_full(r, k, s.grid);
                    ok = valid_curve(fo.generation_zero.curve) && valid_curve(fo.later_generations.curve) &&
                         valid_curve(first_order_forward(r, k, s.grid).curve) &&
                         valid_curve(first_order_backward(r, k, s.grid).curve);
                }
            }
        }
        catch (const std::exception&) {
            ok = false;
        }
        ++curves;
        curves_ok += ok;
    }

    int rct_ok = 0;
    for (int i = 0; i < draws; ++i) {
        const double r0 = 0.2 + 4.0 * u(rng);
        const double p = 0.01 + 0.99 * u(rng);
        const double po = 0.01 + 0.99 * u(rng);
        const double g = 0.1 + 2.0 * u(rng);
        const double t1 = 5.0 * u(rng);
        const double t2 = t1 + 0.01 + u(rng);
        rct_ok += rct_fixed(r0, p, po, g, t2).rct > rct_fixed(r0, p, po, g, t1).rct;
    }

    // forward latency term: nonincreasing in Ti on [0, T], nondecreasing on [T, inf)
    int v_ok = 0;
    int below_ok = 0;
    int above_ok = 0;
    for (int i = 0; i < draws; ++i) {
        const double r0 = 0.2 + 4.0 * u(rng);
        const double po = 0.01 + 0.99 * u(rng);
        const double g = 0.1 + 2.0 * u(rng);
        const double T = 0.05 + 3.0 * u(rng);
        const double a1 = T * u(rng);
        const double a2 = a1 + (T - a1) * u(rng);
        const double b1 = T + 3.0 * u(rng);
        const double b2 = b1 + 3.0 * u(rng);
        auto fwd = [&](double ti) { return rct_latency(r0, 0.3, po, g, T, ti).forward_term; };
        const bool below = fwd(a2) <= fwd(a1);
        const bool above = fwd(b2) >= fwd(b1);
        below_ok += below;
        above_ok += above;
        v_ok += below && above;
    }

    const bool pass = curves_ok == curves && rct_ok == draws && v_ok == draws;
    return {pass, fmt::format("valid curves {}/{}; rct_fixed decreasing in T {}/{}; forward latency term V-shaped "
                              "in Ti {}/{} (nonincreasing below T {}/{}, nondecreasing above T {}/{})",
                              curves_ok, curves, rct_ok, draws, v_ok, draws, below_ok, draws, above_ok, draws)};
}

// 10. Determinism -------------------------------------------------------------

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict determinism()
{
    const auto dir = std::filesystem::temp_directory_path() / "ctdelay_acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    cli::Scenario s;
    s.task = cli::Task::mc;
    s.direction = Direction::full;
    s.mode = Mode::recursive;
    s.generation = 3;
    s.replicas = 20'000;
    s.seed = 2718;

    const char* previous = std::getenv("CTDELAY_THREADS");
    const std::string saved = previous ? previous : "";
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "4"}) {
        setenv("CTDELAY_THREADS", threads, 1);
        cli::Scenario run = cli::Scenario::parse(s.serialize());
        run.output = (dir / fmt::format("mc_threads{}.csv", threads)).string();
        cli::run(run);
        outputs.push_back(slurp(run.output));
    }
    cli::Scenario sis = s;
    sis.task = cli::Task::sis;
    sis.p = 0.3;
    sis.alpha = 0.2;
    sis.horizon = 20.0;
    sis.tracing_start = 10.0;
    sis.population = 2'000;
    for (const char* name : {"sis_a.csv", "sis_b.csv"}) {
        cli::Scenario run = cli::Scenario::parse(sis.serialize());
        run.output = (dir / name).string();
        cli::run(run);
        outputs.push_back(slurp(run.output));
    }
    if (previous) {
        setenv("CTDELAY_THREADS", saved.c_str(), 1);
    }
    else {
        unsetenv("CTDELAY_THREADS");
    }
    const bool round_trip = cli::Scenario::parse(s.serialize()) == s;
    const bool mc_same = !outputs[0].empty() && outputs[0] == outputs[1];
    const bool sis_same = !outputs[2].empty() && outputs[2] == outputs[3];
    std::filesystem::remove_all(dir);
    return {round_trip && mc_same && sis_same,
            fmt::format("scenario round trip {}; MC output identical for 1 and 4 threads: {}; repeated SIS run "
                        "identical: {}",
                        round_trip ? "exact" : "differs", mc_same ? "yes" : "no", sis_same ? "yes" : "no")};
}

} // namespace

int main(int argc, char** argv)
{
    spdlog::set_level(spdlog::level::err);
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"zero-tracing oracle", zero_tracing},
        {"R0 reproduction", basic_reproduction},
        {"solver vs Monte Carlo", solver_vs_mc},
        {"first-order quality gradient", first_order_quality},
        {"closed-form R_ct vs quadrature", closed_form_rct},
        {"latency first-order integrals", latency_integrals},
        {"delay cancellation", delay_cancellation},
        {"endemic heuristic", endemic},
        {"monotonicity suites", monotonicity},
        {"determinism", determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(std::atoi(argv[i]));
    }
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) {
            continue;
        }
        Verdict v;
        try {
            v = criteria[i].second();
        }
        catch (const std::exception& e) {
            v = {false, fmt::format("exception: {}", e.what())};
        }
        failed += !v.pass;
        fmt::print("criterion {:>2} {}: {} | {}\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail);
        std::fflush(stdout);
    }
    fmt::print("{} criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
