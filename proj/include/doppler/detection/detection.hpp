#pragma once

// Per-PRF detection statistics of the combined pulse/subpulse detector.
//
// At one PRF the pulse-domain Doppler bins hold one Rician cell R1 and M-1
// Rayleigh cells; the subpulse-domain bins hold one Rician cell R2 and N-1
// Rayleigh cells. R1 and R2 share the target component (correlation
// lambda1 * lambda2). Detection: R1 and R2 both beat all of their
// competitors. False alarm: some competitor beats R1 and some beats R2.

#include <cstdint>
#include <span>

#include "doppler/numerics/quadrature.hpp"

namespace doppler::detection {

/// How an SNR_1 axis value turns into the noncentrality m.
enum class SnrMappingKind {
    /// sigma_t^2 = 1: sigma1^2 = M, sigma2^2 = N, m = 2 sigma1^2 snr / lambda1^2.
    unit_noise,
    /// m = scale * M * snr; sigma1^2 = M, sigma2^2 = N.
    axis_scale,
};

struct SnrMapping {
    SnrMappingKind kind = SnrMappingKind::unit_noise;
    double scale = 0.32;

    static SnrMapping unit_noise() noexcept { return {}; }
    static SnrMapping axis_scale(double k) noexcept { return {SnrMappingKind::axis_scale, k}; }
};

class ChannelStats {
public:
    struct Params {
        double sigma1 = 1.0;
        double sigma2 = 1.0;
        double lambda1 = 0.5;
        double lambda2 = 0.5;
        double m_re = 0.0;
        double m_im = 0.0;
        std::uint32_t M = 1;
        std::uint32_t N = 1;
    };

    /// Throws InvalidArgument unless sigmas > 0, lambdas in (0, 1), M, N >= 1.
    explicit ChannelStats(const Params& p);

    /// Builds the stats of one channel at SNR_1 = snr1_db. -inf dB gives m = 0.
    static ChannelStats from_snr(double snr1_db, double lambda1, double lambda2, std::uint32_t M, std::uint32_t N,
                                 SnrMapping mapping = {});

    const Params& params() const noexcept { return p_; }
    double sigma1() const noexcept { return p_.sigma1; }
    double sigma2() const noexcept { return p_.sigma2; }
    double lambda1() const noexcept { return p_.lambda1; }
    double lambda2() const noexcept { return p_.lambda2; }
    std::uint32_t M() const noexcept { return p_.M; }
    std::uint32_t N() const noexcept { return p_.N; }

    /// m_re^2 + m_im^2
    double m() const noexcept { return m_; }
    /// sigma_p^2 (1 - lambda_p^2) / 2
    double omega1_sq() const noexcept { return omega1_sq_; }
    double omega2_sq() const noexcept { return omega2_sq_; }
    /// 1 + sum_p sigma_p^2 lambda_p^2 / (2 Omega_p^2)
    double xi() const noexcept { return xi_; }

private:
    Params p_;
    double m_;
    double omega1_sq_;
    double omega2_sq_;
    double xi_;
};

/// SNR_2 in dB implied by SNR_1: snr2 = snr1 (lambda2 / lambda1)^2 (M / N).
double snr2_db(double snr1_db, double lambda1, double lambda2, std::uint32_t M, std::uint32_t N);

struct FusionRule {
    std::uint32_t required = 1;  // script M
    std::uint32_t total = 1;     // L

    void validate() const;
};

/// Double binomial sum over competitor counts. Throws NumericalDomain if a
/// U term is not positive or the raw sum leaves [0, 1] by more than 1e-9.
double pd_closed_form(const ChannelStats& stats);

/// Full inclusion-exclusion double sum over k = 1..M-1, l = 1..N-1 with
/// sign (-1)^(k+l). Zero when M == 1 or N == 1.
double pfa_closed_form(const ChannelStats& stats);

/// PD by conditioning on the shared component: nested quadrature over its
/// magnitude and over each conditionally Rician amplitude.
double pd_oracle(const ChannelStats& stats, const numerics::QuadSpec& spec = {});

/// PFA by the same conditioning, with survivor products.
double pfa_oracle(const ChannelStats& stats, const numerics::QuadSpec& spec = {});

/// Joint density of (R1, R2) as a t-integral. Throws InvalidArgument on negative amplitudes.
double bivariate_rician_pdf(double r1, double r2, const ChannelStats& stats, const numerics::QuadSpec& spec = {});

/// Rician density with noncentrality nu and per-component variance s2.
double rician_pdf(double r, double nu, double s2);

/// Probability that at least `rule.required` of the independent channels
/// fire. Returns exactly the product when required == total.
double combine_m_of_l(std::span<const double> per_channel, const FusionRule& rule);

/// Alternative readings of the printed formulas, for diagnostics only.
namespace variants {
/// U(k, l) with the xi factor on each correction term, as printed.
double pd_printed_xi(const ChannelStats& stats);
/// Diagonal-only alternating sum over k = l, as printed for PFA.
double pfa_diagonal(const ChannelStats& stats);
}  // namespace variants

}  // namespace doppler::detection
