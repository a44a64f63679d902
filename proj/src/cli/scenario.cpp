#include "ctdelay/cli/scenario.hpp"

#include <fmt/format.h>
#include <functional>
#include <map>
#include <sstream>

#include "ctdelay/errors.hpp"

namespace ctdelay::cli {

std::string to_string(Task t)
{
    switch (t) {
    case Task::kappa:
        return "kappa";
    case Task::first_order:
        return "first-order";
    case Task::mc:
        return "mc";
    case Task::rct:
        return "rct";
    case Task::sweep_rct_latency:
        return "sweep-rct-latency";
    case Task::sis:
        return "sis";
    }
    return "unknown";
}

Task parse_task(const std::string& text)
{
    for (Task t : {Task::kappa, Task::first_order, Task::mc, Task::rct, Task::sweep_rct_latency, Task::sis}) {
        if (to_string(t) == text) {
            return t;
        }
    }
    throw ValidationError(fmt::format("unknown task '{}'", text));
}

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    }
    catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) {
        throw ValidationError(fmt::format("{}: '{}' is not a number", key, v));
    }
    return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &used);
    }
    catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || v.front() == '-') {
        throw ValidationError(fmt::format("{}: '{}' is not a nonnegative integer", key, v));
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ValidationError(fmt::format("{}: '{}' is not a boolean", key, v));
}

/// Field accessors in serialization order.
struct Field {
    const char* key;
    std::function<std::string(const Scenario&)> get;
    std::function<void(Scenario&, const std::string&)> set;
};

const std::vector<Field>& fields()
{
    auto num = [](double Scenario::*m, const char* key) {
        return Field{key, [m](const Scenario& s) { return fmt::format("{}", s.*m); },
                     [m, key](Scenario& s, const std::string& v) { s.*m = to_double(key, v); }};
    };
    auto uint = [](std::uint64_t Scenario::*m, const char* key) {
        return Field{key, [m](const Scenario& s) { return fmt::format("{}", s.*m); },
                     [m, key](Scenario& s, const std::string& v) { s.*m = to_unsigned(key, v); }};
    };
    auto text = [](std::string Scenario::*m, const char* key) {
        return Field{key, [m](const Scenario& s) { return s.*m; },
                     [m](Scenario& s, const std::string& v) { s.*m = v; }};
    };
    static const std::vector<Field> all{
        Field{"task", [](const Scenario& s) { return to_string(s.task); },
              [](Scenario& s, const std::string& v) { s.task = parse_task(v); }},
        num(&Scenario::beta, "beta"),
        num(&Scenario::alpha, "alpha"),
        num(&Scenario::sigma, "sigma"),
        num(&Scenario::p, "p"),
        num(&Scenario::latency, "latency"),
        text(&Scenario::delay, "delay"),
        Field{"direction", [](const Scenario& s) { return to_string(s.direction); },
              [](Scenario& s, const std::string& v) { s.direction = parse_direction(v); }},
        Field{"mode", [](const Scenario& s) { return to_string(s.mode); },
              [](Scenario& s, const std::string& v) { s.mode = parse_mode(v); }},
        Field{"generations", [](const Scenario& s) { return fmt::format("{}", s.generations); },
              [](Scenario& s, const std::string& v) { s.generations = static_cast<int>(to_unsigned("generations", v)); }},
        num(&Scenario::h, "h"),
        num(&Scenario::a_max, "a_max"),
        uint(&Scenario::replicas, "replicas"),
        uint(&Scenario::seed, "seed"),
        Field{"generation", [](const Scenario& s) { return fmt::format("{}", s.generation); },
              [](Scenario& s, const std::string& v) { s.generation = static_cast<int>(to_unsigned("generation", v)); }},
        text(&Scenario::rct_kernel, "rct_kernel"),
        num(&Scenario::r0, "r0"),
        num(&Scenario::p_obs, "p_obs"),
        num(&Scenario::gamma, "gamma"),
        num(&Scenario::T, "T"),
        num(&Scenario::Ti, "Ti"),
        text(&Scenario::T_range, "T_range"),
        text(&Scenario::Ti_range, "Ti_range"),
        uint(&Scenario::population, "population"),
        num(&Scenario::horizon, "horizon"),
        num(&Scenario::tracing_start, "tracing_start"),
        Field{"stochastic", [](const Scenario& s) { return std::string(s.stochastic ? "true" : "false"); },
              [](Scenario& s, const std::string& v) { s.stochastic = to_bool("stochastic", v); }},
        text(&Scenario::output, "output"),
    };
    return all;
}

} // namespace

std::string Scenario::serialize() const
{
    std::string out;
    for (const auto& f : fields()) {
        out += fmt::format("{} = {}\n", f.key, f.get(*this));
    }
    return out;
}

Scenario Scenario::parse(const std::string& text)
{
    std::map<std::string, const Field*> by_key;
    for (const auto& f : fields()) {
        by_key.emplace(f.key, &f);
    }
    Scenario s;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        const std::string content = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (content.empty()) {
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(fmt::format("line {}: expected key = value", number));
        }
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        const auto it = by_key.find(key);
        if (it == by_key.end()) {
            throw ValidationError(fmt::format("line {}: unknown key '{}'", number, key));
        }
        it->second->set(s, value);
    }
    return s;
}

} // namespace ctdelay::cli
