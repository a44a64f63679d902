#pragma once

namespace ctdelay {

/// Constant epidemiological rates of the branching process with tracing.
///
/// beta is the contact rate, alpha the rate of unobserved recovery, sigma the
/// rate of recovery with direct diagnosis and p the per-edge tracing
/// probability. The total removal rate gamma = alpha + sigma must be positive.
class Rates {
public:
    Rates(double beta, double alpha, double sigma, double p);

    /// Builds rates from gamma and the observed fraction p_obs = sigma / gamma.
    static Rates from_gamma(double beta, double gamma, double p_obs, double p);

    double beta() const noexcept { return beta_; }
    double alpha() const noexcept { return alpha_; }
    double sigma() const noexcept { return sigma_; }
    double p() const noexcept { return p_; }

    double gamma() const noexcept { return alpha_ + sigma_; }
    double p_obs() const noexcept { return sigma_ / gamma(); }
    double r0() const noexcept { return beta_ / gamma(); }

    Rates with_p(double p) const { return Rates(beta_, alpha_, sigma_, p); }
    Rates with_beta(double beta) const { return Rates(beta, alpha_, sigma_, p_); }

    bool operator==(const Rates&) const = default;

private:
    double beta_;
    double alpha_;
    double sigma_;
    double p_;
};

} // namespace ctdelay
