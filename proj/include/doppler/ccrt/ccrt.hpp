#pragma once

// Doppler bin folding and the classic Chinese remainder theorem.
//
// A target at true Doppler bin b_d is observed on a channel with M pulses
// at the apparent bin b_d mod M. With pairwise-coprime pulse counts
// M_1..M_L sharing one bin spacing, the residues determine b_d modulo
// Theta = prod M_i; the coarse subpulse estimate then picks the alias.

#include <cstdint>
#include <span>
#include <vector>

namespace doppler::ccrt {

struct PrfChannel {
    double prf_hz = 0.0;
    std::uint32_t num_pulses = 1;     // M
    std::uint32_t num_subpulses = 1;  // N

    /// Delta D = PRF / M
    double bin_spacing_hz() const noexcept { return prf_hz / num_pulses; }

    /// Throws InvalidArgument unless prf > 0, M >= 1 and N >= 1.
    void validate() const;
};

struct CongruenceSystem {
    std::vector<std::uint64_t> moduli;
    std::vector<std::uint64_t> residues;

    /// prod moduli; throws InvalidArgument on overflow past 2^62.
    std::uint64_t theta() const;

    /// Shape and range checks; NotInvertible if moduli are not pairwise coprime.
    void validate() const;
};

struct UnfoldResult {
    std::uint64_t bin = 0;  // b_d in [0, Theta)
    double doppler_hz = 0.0;
    double velocity_mps = 0.0;
    bool sign_resolved = false;
    double coarse_hz = 0.0;
};

/// Geometry needed to turn bins into physical Doppler and velocity.
struct UnfoldGeometry {
    double pulse_width_s = 0.0;
    double wavelength_m = 0.0;
};

std::uint64_t gcd(std::uint64_t a, std::uint64_t b) noexcept;

/// Smallest b in [1, m) with (a * b) mod m == 1 (0 when m == 1).
/// Throws NotInvertible when gcd(a, m) != 1, InvalidArgument when m == 0.
std::uint64_t modular_inverse(std::uint64_t a, std::uint64_t m);

/// b_d = (sum_i r_i * beta_i) mod Theta with beta_i = b_i * Theta / M_i and
/// b_i the inverse of Theta / M_i modulo M_i.
std::uint64_t ccrt_solve(const CongruenceSystem& sys);

/// floor(|f|/dD) for f >= 0; M - floor(|f|/dD) for f < 0, with M wrapped to 0.
/// Throws OutOfWindow when |f| > PRF/2.
std::uint32_t apparent_bin(double f_ap_hz, const PrfChannel& channel);

/// b_d mod M
std::uint32_t fold_bin(std::uint64_t b_d, const PrfChannel& channel) noexcept;

/// v = f * lambda / 2. Throws InvalidArgument unless wavelength > 0.
double doppler_to_velocity(double doppler_hz, double wavelength_m);
/// f = 2 v / lambda
double velocity_to_doppler(double velocity_mps, double wavelength_m);

/// Largest |f| the subpulse processing can represent: max N / (2 tau).
double subpulse_window_hz(std::span<const PrfChannel> channels, double pulse_width_s);

/// Relative tolerance used when checking that channels share one bin spacing.
inline constexpr double kCommonSpacingTolerance = 1e-9;

/// Throws InvalidArgument if the channels do not share one bin spacing.
void require_common_spacing(std::span<const PrfChannel> channels);

/// Exact unfold: requires a common bin spacing and coprime pulse counts.
/// Candidates (b_d + q Theta) dD inside the subpulse window are ranked by
/// distance to coarse_hz. Throws WindowExceeded when no candidate fits.
UnfoldResult unfold(std::span<const std::uint32_t> residues, std::span<const PrfChannel> channels,
                    double coarse_hz, const UnfoldGeometry& geometry);

/// How observed residues relate to frequency: `floor` is apparent_bin,
/// `nearest` is round(f / dD) mod M, the index of a DFT peak.
enum class BinRule { floor, nearest };

/// Coincidence unfold for channels whose bin spacings differ: scans the
/// subpulse window for frequencies whose predicted apparent bin is within
/// `tolerance_bins` (circularly) of every observed residue, and returns the
/// match closest to coarse_hz among those with the smallest worst mismatch.
/// `bin` is reported on the first channel's spacing, modulo the product of
/// pulse counts.
UnfoldResult unfold_coincidence(std::span<const std::uint32_t> residues, std::span<const PrfChannel> channels,
                                double coarse_hz, const UnfoldGeometry& geometry,
                                std::uint32_t tolerance_bins = 1, BinRule rule = BinRule::floor);

}  // namespace doppler::ccrt
