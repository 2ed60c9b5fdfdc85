#include "doppler/ccrt/ccrt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "doppler/error.hpp"

namespace doppler::ccrt {

namespace {

__extension__ typedef unsigned __int128 u128;
__extension__ typedef __int128 i128;

constexpr std::uint64_t kThetaLimit = std::uint64_t{1} << 62;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) noexcept {
    return static_cast<std::uint64_t>((static_cast<u128>(a) * b) % m);
}

std::uint32_t circular_distance(std::uint32_t a, std::uint32_t b, std::uint32_t m) noexcept {
    const std::uint32_t d = a > b ? a - b : b - a;
    return std::min(d, m - d);
}

double wrap_to_window(double f, double prf) noexcept {
    // map into [-prf/2, prf/2)
    double w = std::fmod(f + 0.5 * prf, prf);
    if (w < 0.0) w += prf;
    return w - 0.5 * prf;
}

void check_inputs(std::span<const std::uint32_t> residues, std::span<const PrfChannel> channels,
                  const UnfoldGeometry& geometry) {
    if (channels.empty()) throw InvalidArgument("unfold: no channels");
    if (residues.size() != channels.size()) {
        throw InvalidArgument("unfold: " + std::to_string(residues.size()) + " residues for " +
                              std::to_string(channels.size()) + " channels");
    }
    for (std::size_t i = 0; i < channels.size(); ++i) {
        channels[i].validate();
        if (residues[i] >= channels[i].num_pulses) {
            throw InvalidArgument("unfold: residue " + std::to_string(residues[i]) + " out of range for M=" +
                                  std::to_string(channels[i].num_pulses));
        }
    }
    if (!(geometry.pulse_width_s > 0.0)) throw InvalidArgument("unfold: pulse width must be positive");
    if (!(geometry.wavelength_m > 0.0)) throw InvalidArgument("unfold: wavelength must be positive");
}

}  // namespace

void PrfChannel::validate() const {
    if (!(prf_hz > 0.0) || !std::isfinite(prf_hz)) throw InvalidArgument("PrfChannel: PRF must be positive");
    if (num_pulses < 1) throw InvalidArgument("PrfChannel: M must be at least 1");
    if (num_subpulses < 1) throw InvalidArgument("PrfChannel: N must be at least 1");
}

std::uint64_t CongruenceSystem::theta() const {
    std::uint64_t t = 1;
    for (auto m : moduli) {
        if (m == 0) throw InvalidArgument("CongruenceSystem: zero modulus");
        if (t > kThetaLimit / m) throw InvalidArgument("CongruenceSystem: product of moduli too large");
        t *= m;
    }
    return t;
}

void CongruenceSystem::validate() const {
    if (moduli.empty()) throw InvalidArgument("CongruenceSystem: empty");
    if (moduli.size() != residues.size()) throw InvalidArgument("CongruenceSystem: moduli/residues size mismatch");
    for (std::size_t i = 0; i < moduli.size(); ++i) {
        if (moduli[i] == 0) throw InvalidArgument("CongruenceSystem: zero modulus");
        if (residues[i] >= moduli[i]) {
            throw InvalidArgument("CongruenceSystem: residue " + std::to_string(residues[i]) +
                                  " not below modulus " + std::to_string(moduli[i]));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (gcd(moduli[i], moduli[j]) != 1) {
                throw NotInvertible("CongruenceSystem: moduli " + std::to_string(moduli[j]) + " and " +
                                    std::to_string(moduli[i]) + " are not coprime");
            }
        }
    }
    (void)theta();
}

std::uint64_t gcd(std::uint64_t a, std::uint64_t b) noexcept {
    while (b != 0) {
        const std::uint64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

std::uint64_t modular_inverse(std::uint64_t a, std::uint64_t m) {
    if (m == 0) throw InvalidArgument("modular_inverse: modulus must be positive");
    if (m == 1) return 0;
    // extended Euclid on (a mod m, m) with signed 128-bit coefficients
    i128 old_r = static_cast<i128>(a % m), r = m;
    i128 old_s = 1, s = 0;
    while (r != 0) {
        const i128 q = old_r / r;
        const i128 nr = old_r - q * r;
        old_r = r;
        r = nr;
        const i128 ns = old_s - q * s;
        old_s = s;
        s = ns;
    }
    if (old_r != 1) {
        throw NotInvertible("modular_inverse: " + std::to_string(a) + " has no inverse modulo " + std::to_string(m));
    }
    i128 inv = old_s % static_cast<i128>(m);
    if (inv < 0) inv += m;
    return static_cast<std::uint64_t>(inv);
}

std::uint64_t ccrt_solve(const CongruenceSystem& sys) {
    sys.validate();
    const std::uint64_t theta = sys.theta();
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < sys.moduli.size(); ++i) {
        const std::uint64_t mi = sys.moduli[i];
        const std::uint64_t partial = theta / mi;
        const std::uint64_t bi = modular_inverse(partial % mi, mi);
        const std::uint64_t beta = mulmod(bi, partial, theta);
        acc = (acc + mulmod(sys.residues[i], beta, theta)) % theta;
    }
    return acc;
}

std::uint32_t apparent_bin(double f_ap_hz, const PrfChannel& channel) {
    channel.validate();
    if (!std::isfinite(f_ap_hz) || std::abs(f_ap_hz) > 0.5 * channel.prf_hz) {
        throw OutOfWindow("apparent_bin: |f| = " + std::to_string(std::abs(f_ap_hz)) + " Hz exceeds PRF/2 = " +
                          std::to_string(0.5 * channel.prf_hz) + " Hz");
    }
    const auto M = channel.num_pulses;
    const double scaled = std::abs(f_ap_hz) * M / channel.prf_hz;
    auto k = static_cast<std::uint32_t>(std::floor(scaled));
    k = std::min(k, M);
    if (f_ap_hz >= 0.0) return k % M;
    return (M - k) % M;
}

std::uint32_t fold_bin(std::uint64_t b_d, const PrfChannel& channel) noexcept {
    return static_cast<std::uint32_t>(b_d % channel.num_pulses);
}

double doppler_to_velocity(double doppler_hz, double wavelength_m) {
    if (!(wavelength_m > 0.0)) throw InvalidArgument("doppler_to_velocity: wavelength must be positive");
    return doppler_hz * wavelength_m / 2.0;
}

double velocity_to_doppler(double velocity_mps, double wavelength_m) {
    if (!(wavelength_m > 0.0)) throw InvalidArgument("velocity_to_doppler: wavelength must be positive");
    return 2.0 * velocity_mps / wavelength_m;
}

double subpulse_window_hz(std::span<const PrfChannel> channels, double pulse_width_s) {
    if (!(pulse_width_s > 0.0)) throw InvalidArgument("subpulse_window_hz: pulse width must be positive");
    std::uint32_t n_max = 0;
    for (const auto& c : channels) n_max = std::max(n_max, c.num_subpulses);
    return n_max / (2.0 * pulse_width_s);
}

void require_common_spacing(std::span<const PrfChannel> channels) {
    if (channels.empty()) return;
    const double ref = channels.front().bin_spacing_hz();
    for (const auto& c : channels) {
        if (std::abs(c.bin_spacing_hz() - ref) > kCommonSpacingTolerance * ref) {
            throw InvalidArgument("unfold: channels do not share a common bin spacing (" + std::to_string(ref) +
                                  " Hz vs " + std::to_string(c.bin_spacing_hz()) +
                                  " Hz); use the coincidence mode");
        }
    }
}

UnfoldResult unfold(std::span<const std::uint32_t> residues, std::span<const PrfChannel> channels, double coarse_hz,
                    const UnfoldGeometry& geometry) {
    check_inputs(residues, channels, geometry);
    require_common_spacing(channels);

    CongruenceSystem sys;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        sys.moduli.push_back(channels[i].num_pulses);
        sys.residues.push_back(residues[i]);
    }
    const std::uint64_t b_d = ccrt_solve(sys);
    const std::uint64_t theta = sys.theta();
    const double dD = channels.front().bin_spacing_hz();
    const double phi_max = subpulse_window_hz(channels, geometry.pulse_width_s);

    // candidate frequencies (b_d + q Theta) dD with |f| <= phi_max
    const double span_bins = phi_max / dD;
    const auto q_lo = static_cast<long long>(std::floor((-span_bins - static_cast<double>(b_d)) / theta)) - 1;
    const auto q_hi = static_cast<long long>(std::ceil((span_bins - static_cast<double>(b_d)) / theta)) + 1;

    double best = std::numeric_limits<double>::infinity();
    double best_f = 0.0;
    int n_best = 0;
    for (long long q = q_lo; q <= q_hi; ++q) {
        const double f = (static_cast<double>(b_d) + static_cast<double>(q) * static_cast<double>(theta)) * dD;
        if (std::abs(f) > phi_max) continue;
        const double d = std::abs(f - coarse_hz);
        if (d < best) {
            best = d;
            best_f = f;
            n_best = 1;
        } else if (d == best) {
            ++n_best;
        }
    }
    if (n_best == 0) {
        throw WindowExceeded("unfold: no alias of bin " + std::to_string(b_d) + " lies within +/-" +
                             std::to_string(phi_max) + " Hz");
    }

    UnfoldResult out;
    out.bin = b_d;
    out.doppler_hz = best_f;
    out.velocity_mps = doppler_to_velocity(best_f, geometry.wavelength_m);
    out.sign_resolved = n_best == 1;
    out.coarse_hz = coarse_hz;
    return out;
}

UnfoldResult unfold_coincidence(std::span<const std::uint32_t> residues, std::span<const PrfChannel> channels,
                                double coarse_hz, const UnfoldGeometry& geometry, std::uint32_t tolerance_bins,
                                BinRule rule) {
    check_inputs(residues, channels, geometry);
    const double phi_max = subpulse_window_hz(channels, geometry.pulse_width_s);
    double min_spacing = std::numeric_limits<double>::infinity();
    for (const auto& c : channels) min_spacing = std::min(min_spacing, c.bin_spacing_hz());
    const double step = min_spacing / 8.0;
    const auto n_steps = static_cast<long long>(std::ceil(phi_max / step));

    // Score each grid frequency by its worst residue mismatch; keep runs of
    // consecutive matches and report each run's midpoint.
    struct Run {
        double lo, hi;
        std::uint32_t worst;
    };
    std::vector<Run> runs;
    bool open = false;
    for (long long i = -n_steps; i <= n_steps; ++i) {
        const double f = std::clamp(static_cast<double>(i) * step, -phi_max, phi_max);
        std::uint32_t worst = 0;
        for (std::size_t c = 0; c < channels.size() && worst <= tolerance_bins; ++c) {
            if (rule == BinRule::floor) {
                const double wrapped = wrap_to_window(f, channels[c].prf_hz);
                const auto b = apparent_bin(wrapped, channels[c]);
                worst = std::max(worst, circular_distance(b, residues[c], channels[c].num_pulses));
            } else {
                // distance of f / dD to the residue on the circle of M bins,
                // counted in whole bins beyond the rounding half-bin
                const double m = channels[c].num_pulses;
                double d = std::fmod(f / channels[c].bin_spacing_hz() - residues[c], m);
                if (d < 0.0) d += m;
                d = std::min(d, m - d);
                worst = std::max(worst, static_cast<std::uint32_t>(std::ceil(std::max(0.0, d - 0.5))));
            }
        }
        if (worst <= tolerance_bins) {
            if (open && runs.back().worst == worst) {
                runs.back().hi = f;
            } else {
                runs.push_back({f, f, worst});
                open = true;
            }
        } else {
            open = false;
        }
    }
    if (runs.empty()) {
        throw WindowExceeded("unfold_coincidence: no frequency within +/-" + std::to_string(phi_max) +
                             " Hz matches all residues to within " + std::to_string(tolerance_bins) + " bins");
    }

    std::uint32_t best_worst = std::numeric_limits<std::uint32_t>::max();
    for (const auto& r : runs) best_worst = std::min(best_worst, r.worst);
    double best = std::numeric_limits<double>::infinity();
    double best_f = 0.0;
    int n_best = 0;
    for (const auto& r : runs) {
        if (r.worst != best_worst) continue;
        const double f = 0.5 * (r.lo + r.hi);
        const double d = std::abs(f - coarse_hz);
        if (d < best) {
            best = d;
            best_f = f;
            n_best = 1;
        } else if (d == best) {
            ++n_best;
        }
    }

    std::uint64_t theta = 1;
    for (const auto& c : channels) theta = std::min<std::uint64_t>(theta * c.num_pulses, kThetaLimit);
    const double dD0 = channels.front().bin_spacing_hz();
    const auto signed_bin = static_cast<long long>(std::floor(best_f / dD0));
    const auto t = static_cast<long long>(theta);

    UnfoldResult out;
    out.bin = static_cast<std::uint64_t>(((signed_bin % t) + t) % t);
    out.doppler_hz = best_f;
    out.velocity_mps = doppler_to_velocity(best_f, geometry.wavelength_m);
    out.sign_resolved = n_best == 1;
    out.coarse_hz = coarse_hz;
    return out;
}

}  // namespace doppler::ccrt
