#pragma once

#include <cstddef>

namespace ctdelay {

class Rates;
class DelayKernel;

/// Uniform age-of-infection grid 0, h, 2h, ..., a_max.
class Grid {
public:
    /// a_max is rounded to the nearest multiple of h; requires a_max >= 10 h.
    Grid(double h, double a_max);

    /// Default resolution for a rate set and delay kernel.
    ///
    /// h = min(0.01 / gamma, T / 10) refined so that the delay mean T falls on
    /// a node, and a_max = 25 / gamma.
    static Grid for_problem(const Rates& rates, const DelayKernel& kernel);
    static Grid for_problem(double gamma, double delay_mean);

    double h() const noexcept { return h_; }
    double a_max() const noexcept { return h_ * static_cast<double>(intervals_); }
    std::size_t size() const noexcept { return intervals_ + 1; }
    std::size_t intervals() const noexcept { return intervals_; }
    double age(std::size_t k) const noexcept { return h_ * static_cast<double>(k); }

    /// Index of the node nearest to age a (clamped to the grid).
    std::size_t nearest(double a) const noexcept;

    /// Grid with the same a_max and half the step.
    Grid refined() const { return Grid(h_ / 2.0, a_max()); }

    bool operator==(const Grid&) const = default;

private:
    double h_;
    std::size_t intervals_;
};

} // namespace ctdelay
