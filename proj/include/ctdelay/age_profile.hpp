#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "ctdelay/rates.hpp"

namespace ctdelay {

class Grid;

/// Rates sampled on a grid. Values at nodes below `onset` are zero; the value
/// stored at `onset` itself is the right limit of a step profile, so that
/// quadrature starting at the onset node resolves the step exactly.
struct SampledRates {
    std::size_t onset = 0;
    std::vector<double> beta;
    std::vector<double> alpha;
    std::vector<double> sigma;
};

/// Age-of-infection dependent rates beta(a), alpha(a), sigma(a).
class AgeProfile {
public:
    struct Constant {
        Rates rates;
    };
    /// beta(a) = chi_{a > latency} beta, likewise alpha and sigma.
    struct FixedLatency {
        Rates rates;
        double latency;
    };
    struct Tabulated {
        double h;
        std::vector<double> beta;
        std::vector<double> alpha;
        std::vector<double> sigma;
        double p;
    };

    static AgeProfile constant(const Rates& rates);
    static AgeProfile fixed_latency(const Rates& rates, double latency);
    static AgeProfile tabulated(double h, std::vector<double> beta, std::vector<double> alpha,
                                std::vector<double> sigma, double p);

    const std::variant<Constant, FixedLatency, Tabulated>& variant() const noexcept { return variant_; }
    bool is_constant() const noexcept { return std::holds_alternative<Constant>(variant_); }
    bool is_fixed_latency() const noexcept { return std::holds_alternative<FixedLatency>(variant_); }

    double p() const noexcept;
    /// Start of infectivity and detectability; zero unless FixedLatency.
    double latency() const noexcept;

    double beta(double a) const noexcept;
    double alpha(double a) const noexcept;
    double sigma(double a) const noexcept;
    double max_beta() const noexcept;

    /// Constant rates after the latency, if the profile has them.
    const Rates* rates() const noexcept;

    /// Removal rate alpha + sigma beyond the end of the profile, used for
    /// analytic tail corrections. Zero when the tail does not decay.
    double tail_removal_rate() const noexcept;
    double tail_beta() const noexcept;

    /// Samples the profile on a grid. A FixedLatency onset is snapped to the
    /// nearest node.
    SampledRates sample(const Grid& grid) const;

    /// Age at which the cumulative removal hazard int_0^a (alpha+sigma) equals
    /// `hazard`; infinity if it never does.
    double removal_age(double hazard) const noexcept;

private:
    explicit AgeProfile(std::variant<Constant, FixedLatency, Tabulated> v) : variant_(std::move(v)) {}

    std::variant<Constant, FixedLatency, Tabulated> variant_;
    std::vector<double> cumulative_hazard_;
};

} // namespace ctdelay
