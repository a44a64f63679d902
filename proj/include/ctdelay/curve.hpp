#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctdelay/grid.hpp"

namespace ctdelay {

enum class Direction { untraced, backward, forward, full };
enum class Mode { one_step, recursive };

std::string to_string(Direction d);
std::string to_string(Mode m);
Direction parse_direction(const std::string& text);
Mode parse_mode(const std::string& text);

/// Generation index of a curve; `limit` marks the converged generation limit.
struct Generation {
    int index = 0;
    bool limit = false;

    static Generation limit_of(int index) { return {index, true}; }
    std::string label() const;
    bool operator==(const Generation&) const = default;
};

/// A function of age sampled on a grid.
struct SampledCurve {
    Grid grid;
    std::vector<double> values;

    SampledCurve(Grid g, std::vector<double> v);
    /// Piecewise-linear interpolation; zero beyond the grid.
    double at(double a) const noexcept;
};

/// Probability to be still infectious at age of infection a.
///
/// Invariants, checked on construction: values[0] == 1, values within [0, 1]
/// and nonincreasing in age.
class KappaCurve {
public:
    KappaCurve(Grid grid, std::vector<double> values, Generation generation, Direction direction,
               Mode mode);

    const Grid& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    std::size_t size() const noexcept { return values_.size(); }
    double at(double a) const noexcept;

    Generation generation() const noexcept { return generation_; }
    Direction direction() const noexcept { return direction_; }
    Mode mode() const noexcept { return mode_; }

    KappaCurve retagged(Generation g) const;
    SampledCurve samples() const { return SampledCurve(grid_, values_); }

private:
    Grid grid_;
    std::vector<double> values_;
    Generation generation_;
    Direction direction_;
    Mode mode_;
};

/// Sup-norm distance between two curves on the same grid, restricted to
/// ages in [0, up_to] when given.
double sup_distance(const std::vector<double>& a, const std::vector<double>& b);
double sup_distance(const KappaCurve& a, const KappaCurve& b, std::optional<double> up_to = std::nullopt);

} // namespace ctdelay
