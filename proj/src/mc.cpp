#include "ctdelay/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <ostream>
#include <random>
#include <thread>

#include "ctdelay/errors.hpp"

namespace ctdelay {

std::string to_string(RemovalCause c)
{
    switch (c) {
    case RemovalCause::spontaneous:
        return "spontaneous";
    case RemovalCause::detected:
        return "detected";
    case RemovalCause::traced:
        return "traced";
    }
    return "unknown";
}

void OutbreakCaps::validate() const
{
    if (max_generation < 0 || max_individuals == 0 || !(max_time > 0.0)) {
        throw ValidationError("outbreak caps must be positive");
    }
}

namespace {

constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();

enum class EventKind : std::uint8_t { contact, removal, trace };

struct Event {
    double time;
    std::uint64_t order;
    std::uint32_t who;
    std::uint32_t source;
    EventKind kind;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept
    {
        return a.time != b.time ? a.time > b.time : a.order > b.order;
    }
};

struct Node {
    double infection_time;
    double spontaneous_removal;
    double removal_time;
    double next_contact;
    std::uint32_t infector;
    std::uint32_t first_child;
    std::uint32_t last_child;
    std::uint32_t next_sibling;
    std::uint32_t children;
    int generation;
    RemovalCause cause;
};

/// One replica: a single infection tree processed in time order.
class Simulator {
public:
    Simulator(const AgeProfile& profile, const DelayKernel& kernel, const TraceConfig& config,
              const OutbreakCaps& caps, std::uint64_t seed, bool record_traces)
        : profile_(profile)
        , kernel_(kernel)
        , config_(config)
        , caps_(caps)
        , rng_(seed)
        , record_traces_(record_traces)
        , max_beta_(profile.max_beta())
        , p_(profile.p())
        , constant_beta_(profile.is_constant())
    {
    }

    void run()
    {
        spawn(none, 0.0);
        while (!queue_.empty()) {
            std::pop_heap(queue_.begin(), queue_.end(), Later{});
            const Event e = queue_.back();
            queue_.pop_back();
            if (e.time > caps_.max_time) {
                censored_ = true;
                break;
            }
            switch (e.kind) {
            case EventKind::contact:
                on_contact(e);
                break;
            case EventKind::removal:
                on_removal(e);
                break;
            case EventKind::trace:
                on_trace(e);
                break;
            }
            if (censored_) {
                break;
            }
        }
    }

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<TraceRecord>& traces() const noexcept { return traces_; }
    bool censored() const noexcept { return censored_; }

    /// Offspring of a node in the last generation, drawn over its realised
    /// infectious period since it spawns no infectees.
    std::vector<double> phantom_contacts(std::uint32_t id)
    {
        std::vector<double> out;
        const Node& n = nodes_[id];
        double age = next_contact_age(0.0);
        while (n.infection_time + age < n.removal_time) {
            out.push_back(n.infection_time + age);
            age = next_contact_age(age);
        }
        return out;
    }

    std::vector<double> contact_times(std::uint32_t id)
    {
        const Node& n = nodes_[id];
        if (n.generation >= caps_.max_generation) {
            return phantom_contacts(id);
        }
        std::vector<double> out;
        out.reserve(n.children);
        for (std::uint32_t c = n.first_child; c != none; c = nodes_[c].next_sibling) {
            out.push_back(nodes_[c].infection_time);
        }
        return out;
    }

private:
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    double exponential(double rate) { return std::exponential_distribution<double>(rate)(rng_); }

    /// Next contact age after `age`, or infinity when beta vanishes.
    double next_contact_age(double age)
    {
        if (!(max_beta_ > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        if (constant_beta_) {
            return age + exponential(max_beta_);
        }
        for (;;) {
            age += exponential(max_beta_);
            if (!std::isfinite(age) || uniform() * max_beta_ < profile_.beta(age)) {
                return age;
            }
        }
    }

    void push(double time, EventKind kind, std::uint32_t who, std::uint32_t source = none)
    {
        queue_.push_back(Event{time, order_++, who, source, kind});
        std::push_heap(queue_.begin(), queue_.end(), Later{});
    }

    void spawn(std::uint32_t infector, double time)
    {
        if (nodes_.size() >= caps_.max_individuals) {
            censored_ = true;
            return;
        }
        const auto id = static_cast<std::uint32_t>(nodes_.size());
        Node n{};
        n.infection_time = time;
        n.infector = infector;
        n.first_child = n.last_child = n.next_sibling = none;
        n.children = 0;
        n.generation = infector == none ? 0 : nodes_[infector].generation + 1;
        const double age = profile_.removal_age(exponential(1.0));
        const double total = profile_.alpha(age) + profile_.sigma(age);
        const bool detected = total > 0.0 && uniform() * total < profile_.sigma(age);
        n.spontaneous_removal = time + age;
        n.removal_time = n.spontaneous_removal;
        n.cause = detected ? RemovalCause::detected : RemovalCause::spontaneous;
        nodes_.push_back(n);
        if (infector != none) {
            Node& parent = nodes_[infector];
            if (parent.last_child == none) {
                parent.first_child = id;
            }
            else {
                nodes_[parent.last_child].next_sibling = id;
            }
            parent.last_child = id;
            ++parent.children;
        }
        if (std::isfinite(n.spontaneous_removal)) {
            push(n.spontaneous_removal, EventKind::removal, id);
        }
        if (n.generation < caps_.max_generation) {
            const double first = time + next_contact_age(0.0);
            if (first < n.spontaneous_removal) {
                push(first, EventKind::contact, id);
            }
        }
    }

    void on_contact(const Event& e)
    {
        const Node& n = nodes_[e.who];
        if (!(e.time < n.removal_time)) {
            return;
        }
        spawn(e.who, e.time);
        const Node& again = nodes_[e.who];
        const double next = again.infection_time + next_contact_age(e.time - again.infection_time);
        if (next < again.removal_time) {
            push(next, EventKind::contact, e.who);
        }
    }

    void on_removal(const Event& e)
    {
        const Node& n = nodes_[e.who];
        if (n.removal_time != e.time || n.cause != RemovalCause::detected) {
            return;
        }
        start_tracing(e.who, e.time);
    }

    void on_trace(const Event& e)
    {
        Node& n = nodes_[e.who];
        const bool infectious = e.time < n.removal_time;
        bool removed = false;
        if (infectious && uniform() < p_) {
            n.removal_time = e.time;
            n.cause = RemovalCause::traced;
            removed = true;
        }
        if (record_traces_) {
            traces_.push_back(TraceRecord{e.source, e.who, nodes_[e.source].removal_time, e.time, removed});
        }
        if (removed && config_.mode == Mode::recursive) {
            start_tracing(e.who, e.time);
        }
    }

    /// Schedules one attempt per adjacent edge allowed by the direction.
    void start_tracing(std::uint32_t index, double time)
    {
        if (p_ == 0.0) {
            return;
        }
        const bool backward = config_.direction == Direction::backward || config_.direction == Direction::full;
        const bool forward = config_.direction == Direction::forward || config_.direction == Direction::full;
        const Node& n = nodes_[index];
        if (backward && n.infector != none) {
            push(time + kernel_.quantile(uniform()), EventKind::trace, n.infector, index);
        }
        if (forward) {
            for (std::uint32_t c = n.first_child; c != none; c = nodes_[c].next_sibling) {
                push(time + kernel_.quantile(uniform()), EventKind::trace, c, index);
            }
        }
    }

    const AgeProfile& profile_;
    const DelayKernel& kernel_;
    TraceConfig config_;
    OutbreakCaps caps_;
    std::mt19937_64 rng_;
    bool record_traces_;
    double max_beta_;
    double p_;
    bool constant_beta_;
    std::vector<Node> nodes_;
    std::vector<Event> queue_;
    std::vector<TraceRecord> traces_;
    std::uint64_t order_ = 0;
    bool censored_ = false;
};

struct ReplicaSummary {
    std::vector<std::vector<double>> ages;
    std::vector<std::vector<std::uint32_t>> offspring;
    bool censored = false;
    std::uint32_t replica = 0;
};

ReplicaSummary summarise(Simulator& sim, int recorded, int cap)
{
    ReplicaSummary out;
    out.censored = sim.censored();
    out.ages.resize(static_cast<std::size_t>(recorded) + 1);
    out.offspring.resize(static_cast<std::size_t>(recorded) + 1);
    const auto& nodes = sim.nodes();
    for (std::uint32_t id = 0; id < nodes.size(); ++id) {
        const Node& n = nodes[id];
        if (n.generation > recorded) {
            continue;
        }
        const auto g = static_cast<std::size_t>(n.generation);
        out.ages[g].push_back(n.removal_time - n.infection_time);
        const auto count =
            n.generation >= cap ? static_cast<std::uint32_t>(sim.phantom_contacts(id).size()) : n.children;
        out.offspring[g].push_back(count);
    }
    return out;
}

} // namespace

OutbreakLog simulate_outbreak(const AgeProfile& profile, const DelayKernel& kernel, const TraceConfig& config,
                              std::uint64_t seed, const OutbreakCaps& caps)
{
    caps.validate();
    Simulator sim(profile, kernel, config, caps, seed, true);
    sim.run();
    OutbreakLog log;
    log.censored = sim.censored();
    log.traces = sim.traces();
    const auto& nodes = sim.nodes();
    log.individuals.reserve(nodes.size());
    for (std::uint32_t id = 0; id < nodes.size(); ++id) {
        const Node& n = nodes[id];
        Individual ind;
        ind.id = id;
        ind.generation = n.generation;
        if (n.infector != none) {
            ind.infector = n.infector;
        }
        ind.infection_time = n.infection_time;
        ind.removal_time = n.removal_time;
        ind.cause = n.cause;
        ind.contact_times = sim.contact_times(id);
        log.individuals.push_back(std::move(ind));
    }
    return log;
}

std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica) noexcept
{
    // splitmix64 over a combination of both inputs
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(replica) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

int generation_cap(Direction direction, int target) noexcept
{
    switch (direction) {
    case Direction::backward:
    case Direction::full:
        return target + descendant_depth;
    case Direction::forward:
    case Direction::untraced:
        return target;
    }
    return target;
}

unsigned default_thread_count()
{
    if (const char* env = std::getenv("CTDELAY_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

Ensemble run_ensemble(const AgeProfile& profile, const DelayKernel& kernel, const TraceConfig& config,
                      const EnsembleOptions& options)
{
    options.caps.validate();
    if (options.replicas == 0) {
        throw ValidationError("ensemble needs at least one replica");
    }
    if (options.recorded_generations < 0 || options.recorded_generations > options.caps.max_generation) {
        throw ValidationError("recorded generations must lie within the generation cap");
    }
    constexpr std::size_t block = 256;
    const std::size_t blocks = (options.replicas + block - 1) / block;
    std::vector<std::vector<ReplicaSummary>> results(blocks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next++; b < blocks; b = next++) {
            const std::size_t lo = b * block;
            const std::size_t hi = std::min(options.replicas, lo + block);
            results[b].reserve(hi - lo);
            for (std::size_t r = lo; r < hi; ++r) {
                Simulator sim(profile, kernel, config, options.caps, replica_seed(options.seed, r), false);
                sim.run();
                results[b].push_back(summarise(sim, options.recorded_generations, options.caps.max_generation));
                results[b].back().replica = static_cast<std::uint32_t>(r);
            }
        }
    };
    const unsigned threads = std::min<std::size_t>(options.threads > 0 ? options.threads : default_thread_count(),
                                                   blocks);
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }

    Ensemble out;
    out.replicas = options.replicas;
    const auto gens = static_cast<std::size_t>(options.recorded_generations) + 1;
    out.removal_ages.resize(gens);
    out.offspring.resize(gens);
    out.replica.resize(gens);
    for (auto& blk : results) {
        for (auto& rep : blk) {
            if (rep.censored) {
                ++out.censored_replicas;
                continue;
            }
            for (std::size_t g = 0; g < gens; ++g) {
                out.removal_ages[g].insert(out.removal_ages[g].end(), rep.ages[g].begin(), rep.ages[g].end());
                out.offspring[g].insert(out.offspring[g].end(), rep.offspring[g].begin(), rep.offspring[g].end());
                out.replica[g].insert(out.replica[g].end(), rep.ages[g].size(), rep.replica);
            }
        }
        blk.clear();
        blk.shrink_to_fit();
    }
    return out;
}

namespace {

void require_samples(const Ensemble& ensemble, int generation, std::size_t min_samples)
{
    if (generation < 0 || static_cast<std::size_t>(generation) >= ensemble.removal_ages.size()) {
        throw InsufficientSampleError(fmt::format("generation {} was not recorded", generation));
    }
    if (ensemble.censored_replicas > 0) {
        throw InsufficientSampleError(
            fmt::format("{} of {} replicas were censored by the caps", ensemble.censored_replicas, ensemble.replicas));
    }
    const std::size_t n = ensemble.removal_ages[static_cast<std::size_t>(generation)].size();
    if (n < min_samples) {
        throw InsufficientSampleError(
            fmt::format("generation {} has {} individuals, need at least {}", generation, n, min_samples));
    }
}

} // namespace

std::pair<double, double> wilson_interval(double s, double n, double z)
{
    if (!(n > 0.0)) {
        return {0.0, 1.0};
    }
    const double z2 = z * z;
    const double centre = (s + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = z / (1.0 + z2 / n) * std::sqrt(std::max(0.0, s * (1.0 - s)) / n + z2 / (4.0 * n * n));
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

EmpiricalKappa estimate_kappa(const std::vector<double>& removal_ages, const Grid& grid, Direction direction,
                              Mode mode, int generation, std::size_t min_samples)
{
    std::vector<std::uint32_t> singletons(removal_ages.size());
    for (std::size_t i = 0; i < singletons.size(); ++i) {
        singletons[i] = static_cast<std::uint32_t>(i);
    }
    return estimate_kappa(removal_ages, singletons, grid, direction, mode, generation, min_samples);
}

EmpiricalKappa estimate_kappa(const std::vector<double>& removal_ages, const std::vector<std::uint32_t>& cluster,
                              const Grid& grid, Direction direction, Mode mode, int generation,
                              std::size_t min_samples)
{
    const std::size_t n = removal_ages.size();
    if (n == 0 || n < min_samples) {
        throw InsufficientSampleError(
            fmt::format("{} samples, need at least {}", n, std::max<std::size_t>(min_samples, 1)));
    }
    if (cluster.size() != n) {
        throw ValidationError("cluster labels must match the samples");
    }
    // Dense cluster indices and sizes.
    std::vector<std::uint32_t> labels(cluster);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    std::vector<std::size_t> dense(n);
    std::vector<double> size(labels.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        dense[i] = static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), cluster[i]) - labels.begin());
        size[dense[i]] += 1.0;
    }
    std::vector<double> alive(size);
    // Running sums over clusters of Y^2 and Y N, with Y the number alive.
    double sum_y2 = 0.0;
    double sum_yn = 0.0;
    double sum_n2 = 0.0;
    for (double s : size) {
        sum_y2 += s * s;
        sum_yn += s * s;
        sum_n2 += s * s;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return removal_ages[a] != removal_ages[b] ? removal_ages[a] < removal_ages[b] : a < b;
    });

    const double total = static_cast<double>(n);
    const double clusters = static_cast<double>(labels.size());
    std::vector<double> values(grid.size());
    std::vector<double> lower(grid.size());
    std::vector<double> upper(grid.size());
    std::size_t dead = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double a = grid.age(k);
        while (dead < n && removal_ages[order[dead]] <= a) {
            const std::size_t c = dense[order[dead]];
            sum_y2 += 1.0 - 2.0 * alive[c];
            sum_yn -= size[c];
            alive[c] -= 1.0;
            ++dead;
        }
        const double s = static_cast<double>(n - dead) / total;
        double effective = total;
        if (clusters > 1.0 && s > 0.0 && s < 1.0) {
            const double spread = std::max(0.0, sum_y2 - 2.0 * s * sum_yn + s * s * sum_n2);
            const double variance = clusters / (clusters - 1.0) * spread / (total * total);
            if (variance > 0.0) {
                effective = std::min(total, s * (1.0 - s) / variance);
            }
        }
        values[k] = s;
        std::tie(lower[k], upper[k]) = wilson_interval(s, effective);
    }
    values[0] = 1.0;
    return EmpiricalKappa{KappaCurve(grid, std::move(values), Generation{generation, false}, direction, mode),
                          std::move(lower), std::move(upper), n};
}

EmpiricalKappa estimate_kappa(const Ensemble& ensemble, int generation, const Grid& grid, Direction direction,
                              Mode mode, std::size_t min_samples)
{
    require_samples(ensemble, generation, min_samples);
    const auto g = static_cast<std::size_t>(generation);
    return estimate_kappa(ensemble.removal_ages[g], ensemble.replica[g], grid, direction, mode, generation,
                          min_samples);
}

MeanEstimate estimate_R(const Ensemble& ensemble, int generation, std::size_t min_samples)
{
    require_samples(ensemble, generation, min_samples);
    const auto g = static_cast<std::size_t>(generation);
    const auto& counts = ensemble.offspring[g];
    const auto& replica = ensemble.replica[g];
    const double n = static_cast<double>(counts.size());
    double sum = 0.0;
    for (auto c : counts) {
        sum += c;
    }
    const double mean = sum / n;
    // Entries of one replica are contiguous; accumulate residual sums per replica.
    double spread = 0.0;
    double clusters = 0.0;
    for (std::size_t i = 0; i < counts.size();) {
        double residual = 0.0;
        std::size_t j = i;
        for (; j < counts.size() && replica[j] == replica[i]; ++j) {
            residual += counts[j] - mean;
        }
        spread += residual * residual;
        clusters += 1.0;
        i = j;
    }
    const double variance = clusters > 1.0 ? clusters / (clusters - 1.0) * spread / (n * n) : 0.0;
    return MeanEstimate{mean, std::sqrt(variance), counts.size()};
}

void write_event_log(const OutbreakLog& log, std::ostream& out)
{
    out << "id,generation,infector,t_inf,t_rem,cause\n";
    for (const auto& ind : log.individuals) {
        out << fmt::format("{},{},{},{:.17g},{:.17g},{}\n", ind.id, ind.generation,
                           ind.infector ? std::to_string(*ind.infector) : std::string(), ind.infection_time,
                           ind.removal_time, to_string(ind.cause));
    }
}

} // namespace ctdelay
