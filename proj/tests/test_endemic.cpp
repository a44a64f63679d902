#include <doctest.h>

#include <cmath>
#include <random>

#include "ctdelay/approx.hpp"
#include "ctdelay/endemic.hpp"
#include "ctdelay/errors.hpp"

using namespace ctdelay;

namespace {

const Rates sis(2.0, 0.2, 0.9, 0.0);

} // namespace

TEST_CASE("effective removal rate")
{
    const double g = sis.gamma();
    CHECK(gamma_eff(1.0, sis, 0.0, 0.5) == g);
    CHECK(gamma_eff(1.0, sis, 0.3, 500.0) == doctest::Approx(g).epsilon(1e-15));
    const double value = gamma_eff(1.0, sis, 0.3, 0.5);
    CHECK(value > g);
    const auto closed = rct_fixed(sis.beta() / g, 0.3, sis.p_obs(), g, 0.5);
    CHECK(std::abs(value - sis.beta() / closed.rct) < 1e-12);
    CHECK_THROWS_AS(gamma_eff(1.0, Rates(40.0, 0.05, 0.95, 0.0), 1.0, 0.0), DomainError);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int draw = 0; draw < 1000; ++draw) {
        const double uu = 0.01 + 0.2 * u(rng);
        const double p = 0.3 * u(rng);
        const double T = 2.0 * u(rng);
        const double base = gamma_eff(uu, sis, p, T);
        REQUIRE(gamma_eff(uu, sis, p, T + 0.1) <= base);
        REQUIRE(gamma_eff(uu, sis, std::min(p + 0.05, 1.0), T) >= base);
    }
}

TEST_CASE("deterministic SIS without tracing")
{
    const double istar = 1.0 - sis.gamma() / sis.beta();
    const auto s = integrate_sis(sis, 0.0, 0.5, 1e4, 60.0, 15.0);
    CHECK(std::abs(s.values.back() - istar) < 1e-6);
    CHECK(sis_equilibrium(sis, 0.0, 0.5) == doctest::Approx(istar).epsilon(1e-12));

    // closed-form logistic solution
    const double r = sis.beta() - sis.gamma();
    const double i0 = 1e-3;
    SisOdeSettings set;
    set.initial_fraction = i0;
    const auto log = integrate_sis(sis, 0.0, 0.5, 1e4, 20.0, 15.0, set);
    double worst = 0.0;
    for (std::size_t k = 0; k < log.time.size(); ++k) {
        const double t = log.time[k];
        const double exact = istar / (1.0 + (istar / i0 - 1.0) * std::exp(-r * t));
        worst = std::max(worst, std::abs(log.values[k] - exact));
    }
    CHECK(worst < 1e-6);

    const auto sub = integrate_sis(Rates(0.8, 0.2, 0.9, 0.0), 0.0, 0.5, 1e4, 30.0, 15.0);
    for (std::size_t k = 1; k < sub.values.size(); ++k) {
        REQUIRE(sub.values[k] < sub.values[k - 1]);
    }
    CHECK_THROWS_AS(integrate_sis(sis, 0.3, 0.5, 1e4, 10.0, 15.0), ValidationError);
}

TEST_CASE("deterministic SIS with tracing settles at the modified equilibrium")
{
    const auto s = integrate_sis(sis, 0.3, 0.5, 1e4, 80.0, 15.0);
    CHECK(s.tracing_time == 15.5);
    const double eq = sis_equilibrium(sis, 0.3, 0.5);
    CHECK(eq < 1.0 - sis.gamma() / sis.beta());
    CHECK(std::abs(s.values.back() - eq) < 1e-6);
    // the equilibrium balances infection and effective removal
    CHECK(sis.beta() * (1.0 - eq) == doctest::Approx(gamma_eff(1.0 - eq, sis, 0.3, 0.5)).epsilon(1e-10));
    CHECK(s.window_mean(10.0, 15.0) > eq);
}

TEST_CASE("stochastic SIS without tracing stays near the classical equilibrium")
{
    const double istar = 1.0 - sis.gamma() / sis.beta();
    TraceConfig cfg{Direction::full, Mode::recursive, 1};
    const auto s = simulate_sis_finite(sis, 0.0, DelayKernel::dirac(0.5), cfg, 10'000, 3, 40.0, 15.0);
    REQUIRE_FALSE(s.extinct);
    CHECK(std::abs(s.window_mean(15.0, 40.0) / 10'000.0 - istar) < 0.05);
}

TEST_CASE("stochastic SIS early growth rate is beta - gamma")
{
    TraceConfig cfg{Direction::full, Mode::recursive, 1};
    SisSimulationSettings set;
    set.initial_infected = 200;
    set.record_step = 0.1;
    double rate = 0.0;
    int runs = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto s = simulate_sis_finite(sis, 0.0, DelayKernel::dirac(0.5), cfg, 1'000'000, seed, 4.0, 3.0, set);
        const double start = s.values.front();
        const double end = s.values.back();
        rate += (std::log(end) - std::log(start)) / (s.time.back() - s.time.front());
        ++runs;
    }
    rate /= runs;
    const double expect = sis.beta() - sis.gamma();
    CHECK(std::abs(rate - expect) < 0.1 * expect);
}

TEST_CASE("stochastic SIS is reproducible and validates input")
{
    TraceConfig cfg{Direction::full, Mode::recursive, 1};
    const auto a = simulate_sis_finite(sis, 0.3, DelayKernel::dirac(0.5), cfg, 2'000, 11, 20.0, 10.0);
    const auto b = simulate_sis_finite(sis, 0.3, DelayKernel::dirac(0.5), cfg, 2'000, 11, 20.0, 10.0);
    CHECK(a.values == b.values);
    CHECK_THROWS_AS(simulate_sis_finite(sis, 0.3, DelayKernel::dirac(0.5), cfg, 50, 1, 20.0, 10.0), ValidationError);
}
