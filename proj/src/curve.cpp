#include "ctdelay/curve.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "ctdelay/errors.hpp"

namespace ctdelay {

namespace {

constexpr double invariant_slack = 1e-12;

} // namespace

std::string to_string(Direction d)
{
    switch (d) {
    case Direction::untraced:
        return "untraced";
    case Direction::backward:
        return "backward";
    case Direction::forward:
        return "forward";
    case Direction::full:
        return "full";
    }
    return "unknown";
}

std::string to_string(Mode m)
{
    return m == Mode::one_step ? "one-step" : "recursive";
}

Direction parse_direction(const std::string& text)
{
    if (text == "backward") {
        return Direction::backward;
    }
    if (text == "forward") {
        return Direction::forward;
    }
    if (text == "full") {
        return Direction::full;
    }
    if (text == "untraced" || text == "none") {
        return Direction::untraced;
    }
    throw ValidationError(fmt::format("unknown tracing direction '{}'", text));
}

Mode parse_mode(const std::string& text)
{
    if (text == "recursive") {
        return Mode::recursive;
    }
    if (text == "one-step" || text == "onestep" || text == "one_step") {
        return Mode::one_step;
    }
    throw ValidationError(fmt::format("unknown tracing mode '{}'", text));
}

std::string Generation::label() const
{
    return limit ? "limit" : fmt::format("gen{}", index);
}

SampledCurve::SampledCurve(Grid g, std::vector<double> v)
    : grid(g)
    , values(std::move(v))
{
    if (values.size() != grid.size()) {
        throw ValidationError(
            fmt::format("curve has {} samples but its grid has {} nodes", values.size(), grid.size()));
    }
}

double SampledCurve::at(double a) const noexcept
{
    if (a < 0.0) {
        return 0.0;
    }
    const double x = a / grid.h();
    const auto j = static_cast<std::size_t>(x);
    if (j + 1 >= values.size()) {
        return j + 1 == values.size() ? values.back() : 0.0;
    }
    const double t = x - static_cast<double>(j);
    return (1.0 - t) * values[j] + t * values[j + 1];
}

KappaCurve::KappaCurve(Grid grid, std::vector<double> values, Generation generation, Direction direction,
                       Mode mode)
    : grid_(grid)
    , values_(std::move(values))
    , generation_(generation)
    , direction_(direction)
    , mode_(mode)
{
    if (values_.size() != grid_.size()) {
        throw ValidationError(
            fmt::format("kappa curve has {} samples but its grid has {} nodes", values_.size(), grid_.size()));
    }
    if (values_.front() != 1.0) {
        throw ValidationError(fmt::format("kappa curve must start at 1, got {}", values_.front()));
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
        const double v = values_[k];
        if (!(v >= -invariant_slack && v <= 1.0 + invariant_slack)) {
            throw ValidationError(fmt::format("kappa curve value {} at age {} outside [0, 1]", v, grid_.age(k)));
        }
        if (k > 0 && v > values_[k - 1] + invariant_slack) {
            throw ValidationError(fmt::format("kappa curve increases at age {}", grid_.age(k)));
        }
    }
}

double KappaCurve::at(double a) const noexcept
{
    return SampledCurve(grid_, values_).at(a);
}

KappaCurve KappaCurve::retagged(Generation g) const
{
    KappaCurve copy = *this;
    copy.generation_ = g;
    return copy;
}

double sup_distance(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size()) {
        throw ValidationError("sup_distance needs curves of equal length");
    }
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        d = std::max(d, std::abs(a[k] - b[k]));
    }
    return d;
}

double sup_distance(const KappaCurve& a, const KappaCurve& b, std::optional<double> up_to)
{
    if (!(a.grid() == b.grid())) {
        throw ValidationError("sup_distance needs curves on the same grid");
    }
    const std::size_t end = up_to ? std::min(a.size(), a.grid().nearest(*up_to) + 1) : a.size();
    double d = 0.0;
    for (std::size_t k = 0; k < end; ++k) {
        d = std::max(d, std::abs(a[k] - b[k]));
    }
    return d;
}

} // namespace ctdelay
