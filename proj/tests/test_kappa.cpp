#include <doctest.h>

#include <cmath>
#include <random>

#include "ctdelay/approx.hpp"
#include "ctdelay/core.hpp"
#include "ctdelay/kappa.hpp"
#include "oracles.hpp"

using namespace ctdelay;

namespace {

const Rates fig(2.0, 0.1, 0.9, 0.3);
const DelayKernel half = DelayKernel::dirac(0.5);

SolverSettings defaults(const Rates& r, const DelayKernel& k)
{
    return SolverSettings(Grid::for_problem(r, k));
}

double sup_to_hat(const KappaCurve& c, double gamma)
{
    return sup_distance(c.values(), kappa_hat_curve(gamma, c.grid()));
}

void check_shape(const KappaCurve& c)
{
    REQUIRE(c[0] == 1.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        REQUIRE(c[k] >= 0.0);
        REQUIRE(c[k] <= 1.0);
        if (k > 0) {
            REQUIRE(c[k] <= c[k - 1]);
        }
    }
}

} // namespace

TEST_CASE("p = 0 reproduces kappa_hat for every solver")
{
    const Rates r = fig.with_p(0.0);
    for (const auto& kernel : {half, DelayKernel::exponential(1.0)}) {
        const auto s = defaults(r, kernel);
        CHECK(sup_to_hat(solve_backward_recursive(r, kernel, s), 1.0) < 1e-10);
        CHECK(sup_to_hat(solve_backward_onestep(r, kernel, s), 1.0) < 1e-10);
        for (Mode m : {Mode::one_step, Mode::recursive}) {
            for (const auto& c : solve_forward_generations(r, kernel, m, 4, s).curves) {
                CHECK(sup_to_hat(c, 1.0) < 1e-10);
            }
            for (const auto& c : solve_full(r, kernel, m, 4, s).curves) {
                CHECK(sup_to_hat(c, 1.0) < 1e-10);
            }
        }
    }
}

TEST_CASE("Dirac delay leaves the curve untouched before the delay")
{
    const auto s = defaults(fig, half);
    const auto hat = kappa_hat_curve(1.0, s.grid);
    const auto rec = solve_backward_recursive(fig, half, s);
    const auto one = solve_backward_onestep(fig, half, s);
    const auto cut = s.grid.nearest(0.5);
    for (std::size_t k = 0; k <= cut; ++k) {
        REQUIRE(rec[k] == hat[k]);
        REQUIRE(one[k] == hat[k]);
    }
    CHECK(rec[cut + 5] < hat[cut + 5]);
}

TEST_CASE("one-step and recursive backward tracing are close at beta = 2, gamma = 1, p = 0.3")
{
    const auto s = defaults(fig, half);
    const auto rec = solve_backward_recursive(fig, half, s);
    const auto one = solve_backward_onestep(fig, half, s);
    CHECK(sup_distance(rec.values(), one.values()) < 0.02);
    for (std::size_t k = 0; k < rec.size(); ++k) {
        REQUIRE(rec[k] <= one[k] + 1e-12);
    }
}

TEST_CASE("backward solver matches an independent fine-step Euler march")
{
    // Oracle: explicit Euler on kappa with the trapezoid history integral,
    // on a grid 10x finer, recursive hazard with a Dirac delay.
    const double h = 0.001;
    const double T = 0.5;
    const std::size_t n = static_cast<std::size_t>(6.0 / h);
    const std::size_t shift = static_cast<std::size_t>(std::lround(T / h));
    const double beta = fig.beta();
    const double g = fig.gamma();
    const double p = fig.p();
    std::vector<double> kappa(n + 1, 1.0), hazard(n + 1, 0.0), detect(n + 1, 0.0), G(n + 1, 0.0);
    // G(a) = beta * int_0^{a-T} detect, detect = (sigma + hazard) kappa
    std::vector<double> cum(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double gk = k >= shift ? beta * cum[k - shift] : 0.0;
        hazard[k] = p * gk;
        detect[k] = (fig.sigma() + hazard[k]) * kappa[k];
        const double rate = g + hazard[k];
        kappa[k + 1] = kappa[k] * std::exp(-rate * h);
        const double hz_next = k + 1 >= shift ? p * beta * cum[k + 1 - shift] : 0.0;
        const double d_next = (fig.sigma() + hz_next) * kappa[k + 1];
        cum[k + 1] = cum[k] + 0.5 * h * (detect[k] + d_next);
    }
    const auto s = defaults(fig, half);
    const auto solver = solve_backward_recursive(fig, half, s);
    double worst = 0.0;
    for (double a = 0.0; a <= 6.0; a += 0.25) {
        const auto k = static_cast<std::size_t>(std::lround(a / h));
        worst = std::max(worst, std::abs(solver.at(a) - kappa[k]));
    }
    CHECK(worst < 2e-3);
}

TEST_CASE("forward generations are dominated by kappa_hat and full tracing is below forward")
{
    const auto s = defaults(fig, half);
    const auto hat = kappa_hat_curve(1.0, s.grid);
    for (Mode m : {Mode::one_step, Mode::recursive}) {
        const auto fwd = solve_forward_generations(fig, half, m, 6, s);
        const auto full = solve_full(fig, half, m, 6, s);
        for (int i = 1; i <= 6; ++i) {
            const auto& f = fwd.generation(i);
            const auto& u = full.generation(i);
            check_shape(f);
            check_shape(u);
            for (std::size_t k = 0; k < f.size(); ++k) {
                REQUIRE(f[k] <= hat[k] + 1e-14);
                REQUIRE(u[k] <= f[k] + 1e-12);
            }
        }
    }
}

TEST_CASE("generation series converge and report the limit")
{
    const auto s = defaults(fig, half);
    const auto full = solve_full(fig, half, Mode::recursive, max_generations, s);
    REQUIRE(full.converged);
    CHECK(full.last().generation().limit);
    std::vector<double> diffs;
    for (std::size_t i = 1; i + 1 < full.curves.size(); ++i) {
        diffs.push_back(sup_distance(full.curves[i].values(), full.curves[i - 1].values()));
    }
    REQUIRE(diffs.size() >= 4);
    // shrinking over a window after generation 2
    for (std::size_t i = 4; i < diffs.size(); ++i) {
        CHECK(diffs[i] <= diffs[i - 2] + 1e-12);
    }
    CHECK(full.generation(40).values() == full.last().values());
    const auto truncated = solve_full(fig, half, Mode::recursive, 2, s);
    CHECK_FALSE(truncated.converged);
    CHECK_THROWS(truncated.generation(5));
    CHECK_THROWS_AS(solve_full(fig, half, Mode::recursive, 51, s), ValidationError);
}

TEST_CASE("forward recursion agrees with the two-dimensional conditional route")
{
    // kappa_i(a) = int beta kappa_{i-1}(b) kappa_i(a | b) db / int beta kappa_{i-1}
    const Grid coarse(0.02, 25.0);
    const SolverSettings s(coarse);
    for (Mode m : {Mode::one_step, Mode::recursive}) {
        const auto fwd = solve_forward_generations(fig, half, m, 2, s);
        const auto own = kappa_hat_curve(1.0, coarse);
        const auto& prev = fwd.generation(1).values();
        std::vector<double> acc(coarse.size(), 0.0);
        double norm = 0.0;
        const std::size_t nb = coarse.nearest(14.0);
        for (std::size_t j = 0; j <= nb; ++j) {
            const double w = (j == 0 || j == nb) ? 0.5 : 1.0;
            const auto cond = forward_conditional(fig, half, m, own, prev, coarse.age(j), coarse);
            for (std::size_t k = 0; k < coarse.size(); ++k) {
                acc[k] += w * prev[j] * cond[k];
            }
            norm += w * prev[j];
        }
        double worst = 0.0;
        const auto& target = fwd.generation(2).values();
        for (std::size_t k = 0; k < coarse.size(); ++k) {
            worst = std::max(worst, std::abs(acc[k] / norm - target[k]));
        }
        CHECK(worst < 5e-3);
    }
}

TEST_CASE("age-dependent solver reduces to the constant-rate solver")
{
    const auto s = defaults(fig, half);
    for (Mode m : {Mode::one_step, Mode::recursive}) {
        const auto a = solve_age_dependent(AgeProfile::constant(fig), half, m, 4, s);
        const auto b = solve_full(fig, half, m, 4, s);
        REQUIRE(a.curves.size() == b.curves.size());
        for (std::size_t i = 0; i < a.curves.size(); ++i) {
            CHECK(sup_distance(a.curves[i].values(), b.curves[i].values()) < 1e-9);
        }
    }
}

TEST_CASE("fixed latency: generation 0 equals kappa_tilde up to 2 Ti + T")
{
    const Rates r(2.0, 0.1, 0.9, 0.5);
    const auto profile = AgeProfile::fixed_latency(r, 1.0);
    const SolverSettings s(Grid(0.01, 30.0));
    const auto tilde = kappa_tilde(profile, s.grid);
    const auto series = solve_age_dependent(profile, half, Mode::recursive, 3, s);
    const auto& k0 = series.generation(0);
    const auto cut = s.grid.nearest(2.5);
    for (std::size_t k = 0; k <= cut; ++k) {
        REQUIRE(k0[k] == tilde[k]);
    }
    CHECK(k0[cut + 20] < tilde[cut + 20]);
    const auto p0 = solve_age_dependent(AgeProfile::fixed_latency(r.with_p(0.0), 1.0), half, Mode::recursive, 3, s);
    for (const auto& c : p0.curves) {
        CHECK(sup_distance(c.values(), tilde) < 1e-10);
    }
}

TEST_CASE("fixed latency: limit R approaches the latency formula at O(p^2)")
{
    const Grid g(0.005, 30.0);
    const SolverSettings s(g);
    auto gap = [&](double p) {
        const Rates r(2.0, 0.1, 0.9, p);
        const auto profile = AgeProfile::fixed_latency(r, 1.0);
        const auto series = solve_age_dependent(profile, half, Mode::recursive, max_generations, s);
        const double exact = reproduction_number(series.last(), profile);
        return std::abs(exact - rct_latency(2.0, p, 0.9, 1.0, 0.5, 1.0).rct);
    };
    const double ratio = gap(0.1) / gap(0.05);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("grid refinement converges at second order")
{
    auto run = [](double h) {
        return solve_backward_recursive(fig, half, SolverSettings(Grid(h, 25.0)));
    };
    const auto a = run(0.02);
    const auto b = run(0.01);
    const auto c = run(0.005);
    auto coarse_diff = [](const KappaCurve& x, const KappaCurve& y) {
        double worst = 0.0;
        for (double t = 0.0; t <= 25.0; t += 0.02) {
            worst = std::max(worst, std::abs(x.at(t) - y.at(t)));
        }
        return worst;
    };
    const double d1 = coarse_diff(a, b);
    const double d2 = coarse_diff(b, c);
    CHECK(d1 / 0.0001 < 10.0);
    CHECK(d1 / d2 > 3.0);
}

TEST_CASE("one-step and recursive first-order agreement is O(p^2)")
{
    auto dist = [](double p) {
        const Rates r = fig.with_p(p);
        const auto s = defaults(r, half);
        return sup_distance(solve_backward_recursive(r, half, s).values(), solve_backward_onestep(r, half, s).values());
    };
    const double ratio = dist(0.1) / dist(0.05);
    CHECK(ratio > 3.2);
    CHECK(ratio < 4.8);
}

TEST_CASE("solver outputs are valid curves across random parameters")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int draw = 0; draw < 25; ++draw) {
        const Rates r(0.5 + 3.0 * u(rng), 0.05 + u(rng), 0.05 + u(rng), u(rng));
        const DelayKernel k = draw % 2 ? DelayKernel::dirac(2.0 * u(rng)) : DelayKernel::exponential(2.0 * u(rng));
        const auto s = defaults(r, k);
        TraceConfig cfg;
        cfg.direction = static_cast<Direction>(1 + draw % 3);
        cfg.mode = draw % 4 < 2 ? Mode::one_step : Mode::recursive;
        cfg.generations = 3;
        for (const auto& c : solve(AgeProfile::constant(r), k, cfg, s).curves) {
            check_shape(c);
        }
    }
}

TEST_CASE("trace configuration and settings validation")
{
    TraceConfig c;
    c.generations = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.generations = 51;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    SolverSettings s(Grid(0.01, 10.0));
    s.fixed_point_tol = 0.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
}
