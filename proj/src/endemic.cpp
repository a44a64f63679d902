#include "ctdelay/endemic.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>
#include <random>

#include "ctdelay/errors.hpp"
#include "ctdelay/quadrature.hpp"

namespace ctdelay {

double SisTimeSeries::window_mean(double from, double to) const
{
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < time.size(); ++k) {
        if (time[k] >= from && time[k] <= to) {
            sum += values[k];
            ++n;
        }
    }
    if (n == 0) {
        throw ValidationError(fmt::format("no samples in the window [{}, {}]", from, to));
    }
    return sum / static_cast<double>(n);
}

namespace {

double tracing_strength(const Rates& rates, double p, double T)
{
    return 0.5 * p * rates.p_obs() * kappa_hat(T, rates.gamma());
}

} // namespace

double gamma_eff(double u, const Rates& rates, double p, double T)
{
    if (!(u > 0.0 && u <= 1.0)) {
        throw ValidationError(fmt::format("susceptible fraction must lie in (0, 1], got {}", u));
    }
    if (!(p >= 0.0 && p <= 1.0) || !(T >= 0.0)) {
        throw ValidationError("gamma_eff needs 0 <= p <= 1 and T >= 0");
    }
    const double g = rates.gamma();
    const double denominator = 1.0 - tracing_strength(rates, p, T) * (rates.beta() * u / g + 1.0);
    if (!(denominator > 0.0)) {
        throw DomainError(fmt::format("effective removal rate undefined at u = {} (denominator {:.3g})", u, denominator));
    }
    return g / denominator;
}

double sis_equilibrium(const Rates& rates, double p, double T)
{
    const double g = rates.gamma();
    const double c = tracing_strength(rates, p, T);
    // Largest u with a positive denominator.
    double u_max = 1.0;
    if (c > 0.0 && rates.beta() > 0.0) {
        u_max = std::min(1.0, (1.0 / c - 1.0) * g / rates.beta());
    }
    if (!(u_max > 0.0)) {
        throw DomainError("tracing heuristic undefined for every susceptible fraction");
    }
    const double hi = u_max < 1.0 ? u_max * (1.0 - 1e-12) : 1.0;
    auto balance = [&](double u) { return rates.beta() * u - gamma_eff(u, rates, p, T); };
    if (balance(hi) <= 0.0) {
        return 0.0;
    }
    const double lo = std::min(1e-12, hi / 2.0);
    std::uintmax_t iterations = 200;
    const auto bracket = boost::math::tools::toms748_solve(balance, lo, hi,
                                                           boost::math::tools::eps_tolerance<double>(50), iterations);
    return 1.0 - 0.5 * (bracket.first + bracket.second);
}

SisTimeSeries integrate_sis(const Rates& rates, double p, double T, double N, double horizon, double tracing_start,
                            const SisOdeSettings& settings)
{
    if (!(tracing_start >= 0.0) || !(horizon > tracing_start)) {
        throw ValidationError("integrate_sis needs horizon > tracing_start >= 0");
    }
    if (!(settings.h > 0.0) || !(N > 0.0)) {
        throw ValidationError("integrate_sis needs a positive step and population");
    }
    const double i0 = settings.initial_fraction > 0.0 ? settings.initial_fraction : 10.0 / N;
    const double switch_time = tracing_start + T;
    const double g = rates.gamma();
    auto rhs = [&](bool tracing, double i) {
        const double u = std::clamp(1.0 - i, std::numeric_limits<double>::min(), 1.0);
        const double removal = tracing ? gamma_eff(u, rates, p, T) : g;
        return rates.beta() * i * (1.0 - i) - removal * i;
    };
    SisTimeSeries out;
    out.tracing_time = switch_time;
    const auto steps = static_cast<std::size_t>(std::llround(horizon / settings.h));
    double t = 0.0;
    double i = i0;
    out.time.push_back(t);
    out.values.push_back(i);
    for (std::size_t s = 0; s < steps; ++s) {
        const double h = settings.h;
        // The regime is fixed per step; the switch is resolved to the step grid.
        const bool tracing = t + 0.5 * h >= switch_time;
        const double k1 = rhs(tracing, i);
        const double k2 = rhs(tracing, i + 0.5 * h * k1);
        const double k3 = rhs(tracing, i + 0.5 * h * k2);
        const double k4 = rhs(tracing, i + h * k3);
        i += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = settings.h * static_cast<double>(s + 1);
        out.time.push_back(t);
        out.values.push_back(i);
    }
    return out;
}

namespace {

constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();

enum class SisEvent : std::uint8_t { contact, removal, trace };

struct QueuedEvent {
    double time;
    std::uint64_t order;
    std::uint32_t episode;
    SisEvent kind;
};

struct After {
    bool operator()(const QueuedEvent& a, const QueuedEvent& b) const noexcept
    {
        return a.time != b.time ? a.time > b.time : a.order > b.order;
    }
};

/// One infection of one person; reinfections open new episodes.
struct Episode {
    std::uint32_t person;
    std::uint32_t infector;
    std::uint32_t first_child = none;
    std::uint32_t last_child = none;
    std::uint32_t next_sibling = none;
    double end;
    bool detected;
    bool over = false;
};

class SisSimulator {
public:
    SisSimulator(const Rates& rates, double p, const DelayKernel& kernel, const TraceConfig& config, std::uint32_t N,
                 std::uint64_t seed, double tracing_start)
        : rates_(rates), p_(p), kernel_(kernel), config_(config), n_(N), rng_(seed), tracing_start_(tracing_start),
          current_(N, none)
    {
    }

    SisTimeSeries run(double horizon, const SisSimulationSettings& settings)
    {
        SisTimeSeries out;
        out.tracing_time = tracing_start_;
        std::vector<std::uint32_t> people(n_);
        for (std::uint32_t k = 0; k < n_; ++k) {
            people[k] = k;
        }
        std::shuffle(people.begin(), people.end(), rng_);
        for (std::uint32_t k = 0; k < settings.initial_infected; ++k) {
            infect(people[k], none, 0.0);
        }
        const auto samples = static_cast<std::size_t>(std::floor(horizon / settings.record_step + 1e-9)) + 1;
        std::size_t next_sample = 0;
        auto record_until = [&](double t) {
            while (next_sample < samples && settings.record_step * static_cast<double>(next_sample) < t) {
                out.time.push_back(settings.record_step * static_cast<double>(next_sample));
                out.values.push_back(static_cast<double>(infected_));
                ++next_sample;
            }
        };
        while (!queue_.empty()) {
            std::pop_heap(queue_.begin(), queue_.end(), After{});
            const QueuedEvent e = queue_.back();
            queue_.pop_back();
            if (e.time > horizon) {
                break;
            }
            record_until(e.time);
            switch (e.kind) {
            case SisEvent::contact:
                on_contact(e);
                break;
            case SisEvent::removal:
                on_removal(e);
                break;
            case SisEvent::trace:
                on_trace(e);
                break;
            }
        }
        out.extinct = infected_ == 0;
        record_until(std::numeric_limits<double>::infinity());
        return out;
    }

private:
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    double exponential(double rate) { return std::exponential_distribution<double>(rate)(rng_); }

    void push(double time, SisEvent kind, std::uint32_t episode)
    {
        queue_.push_back(QueuedEvent{time, order_++, episode, kind});
        std::push_heap(queue_.begin(), queue_.end(), After{});
    }

    void infect(std::uint32_t person, std::uint32_t infector, double t)
    {
        const auto id = static_cast<std::uint32_t>(episodes_.size());
        const double duration = exponential(rates_.gamma());
        const bool detected = uniform() * rates_.gamma() < rates_.sigma();
        episodes_.push_back(Episode{person, infector, none, none, none, t + duration, detected});
        current_[person] = id;
        ++infected_;
        if (infector != none) {
            Episode& parent = episodes_[infector];
            if (parent.last_child == none) {
                parent.first_child = id;
            }
            else {
                episodes_[parent.last_child].next_sibling = id;
            }
            parent.last_child = id;
        }
        push(t + duration, SisEvent::removal, id);
        if (rates_.beta() > 0.0) {
            const double next = t + exponential(rates_.beta());
            if (next < t + duration) {
                push(next, SisEvent::contact, id);
            }
        }
    }

    void end_episode(std::uint32_t id, double t)
    {
        Episode& e = episodes_[id];
        e.over = true;
        e.end = t;
        current_[e.person] = none;
        --infected_;
    }

    void on_contact(const QueuedEvent& ev)
    {
        if (episodes_[ev.episode].over) {
            return;
        }
        // uniform partner among the other N - 1 people
        auto partner = static_cast<std::uint32_t>(uniform() * (n_ - 1));
        partner = std::min(partner, n_ - 2);
        if (partner >= episodes_[ev.episode].person) {
            ++partner;
        }
        if (current_[partner] == none) {
            infect(partner, ev.episode, ev.time);
        }
        const double next = ev.time + exponential(rates_.beta());
        if (next < episodes_[ev.episode].end) {
            push(next, SisEvent::contact, ev.episode);
        }
    }

    void on_removal(const QueuedEvent& ev)
    {
        Episode& e = episodes_[ev.episode];
        if (e.over) {
            return;
        }
        const bool detected = e.detected;
        end_episode(ev.episode, ev.time);
        if (detected && ev.time >= tracing_start_) {
            start_tracing(ev.episode, ev.time);
        }
    }

    void on_trace(const QueuedEvent& ev)
    {
        if (episodes_[ev.episode].over || !(uniform() < p_)) {
            return;
        }
        end_episode(ev.episode, ev.time);
        if (config_.mode == Mode::recursive) {
            start_tracing(ev.episode, ev.time);
        }
    }

    void start_tracing(std::uint32_t id, double t)
    {
        if (p_ == 0.0) {
            return;
        }
        const bool backward = config_.direction == Direction::backward || config_.direction == Direction::full;
        const bool forward = config_.direction == Direction::forward || config_.direction == Direction::full;
        const Episode& e = episodes_[id];
        if (backward && e.infector != none) {
            push(t + kernel_.quantile(uniform()), SisEvent::trace, e.infector);
        }
        if (forward) {
            for (std::uint32_t c = e.first_child; c != none; c = episodes_[c].next_sibling) {
                push(t + kernel_.quantile(uniform()), SisEvent::trace, c);
            }
        }
    }

    Rates rates_;
    double p_;
    const DelayKernel& kernel_;
    TraceConfig config_;
    std::uint32_t n_;
    std::mt19937_64 rng_;
    double tracing_start_;
    std::vector<std::uint32_t> current_;
    std::vector<Episode> episodes_;
    std::vector<QueuedEvent> queue_;
    std::uint64_t order_ = 0;
    std::uint32_t infected_ = 0;
};

} // namespace

SisTimeSeries simulate_sis_finite(const Rates& rates, double p, const DelayKernel& kernel, const TraceConfig& config,
                                  std::uint32_t N, std::uint64_t seed, double horizon, double tracing_start,
                                  const SisSimulationSettings& settings)
{
    if (N < 100) {
        throw ValidationError(fmt::format("population must be at least 100, got {}", N));
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("tracing probability must lie in [0, 1]");
    }
    if (!(tracing_start >= 0.0) || !(horizon > tracing_start) || !(settings.record_step > 0.0)) {
        throw ValidationError("simulate_sis_finite needs horizon > tracing_start >= 0 and a positive record step");
    }
    if (settings.initial_infected == 0 || settings.initial_infected > N) {
        throw ValidationError("initial infected count must lie in [1, N]");
    }
    SisSimulator sim(rates, p, kernel, config, N, seed, tracing_start);
    return sim.run(horizon, settings);
}

void write_series(const SisTimeSeries& series, std::ostream& out)
{
    out << "t,value,phase\n";
    for (std::size_t k = 0; k < series.time.size(); ++k) {
        out << fmt::format("{:.10g},{:.17g},{}\n", series.time[k], series.values[k],
                           series.time[k] >= series.tracing_time ? 1 : 0);
    }
}

} // namespace ctdelay
