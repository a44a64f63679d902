#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace ctdelay {

class Grid;

/// Tracing-delay distribution: a fixed delay, an exponential delay or a
/// tabulated density on its own uniform step.
class DelayKernel {
public:
    struct Dirac {
        double delay;
    };
    struct Exponential {
        double mean;
    };
    struct Tabulated {
        double h;
        std::vector<double> density;
    };

    static DelayKernel dirac(double delay);
    /// A zero mean degenerates to an immediate (Dirac at 0) delay.
    static DelayKernel exponential(double mean);
    /// Densities must be nonnegative and integrate to one within 1e-6.
    static DelayKernel tabulated(double h, std::vector<double> density);

    /// Parses "dirac:T", "exp:T" or "table:h:v0,v1,...".
    static DelayKernel parse(const std::string& text);
    std::string to_string() const;

    bool is_dirac() const noexcept { return std::holds_alternative<Dirac>(variant_); }
    bool is_exponential() const noexcept { return std::holds_alternative<Exponential>(variant_); }
    bool is_tabulated() const noexcept { return std::holds_alternative<Tabulated>(variant_); }
    const std::variant<Dirac, Exponential, Tabulated>& variant() const noexcept { return variant_; }

    double mean() const;

    /// True when a positive fraction of tracing events happens without delay,
    /// i.e. the mass of [0, eps] does not vanish as eps -> 0.
    bool has_atom_at_zero() const noexcept;

    /// Cumulative distribution function.
    double cdf(double a) const;

    /// Inverse CDF, used for sampling delays from uniform variates.
    double quantile(double u) const;

    /// Number of grid steps of a Dirac delay, snapped to the nearest node.
    std::size_t dirac_shift(const Grid& grid) const;

    /// Density sampled at the grid nodes (not defined for Dirac kernels).
    /// Tabulated kernels are interpolated linearly and renormalised when the
    /// grid truncates more than 1e-6 of their mass.
    std::vector<double> sample_density(const Grid& grid) const;

    bool operator==(const DelayKernel& other) const;

private:
    explicit DelayKernel(std::variant<Dirac, Exponential, Tabulated> v) : variant_(std::move(v)) {}

    std::variant<Dirac, Exponential, Tabulated> variant_;
    std::vector<double> table_cdf_;
};

} // namespace ctdelay
