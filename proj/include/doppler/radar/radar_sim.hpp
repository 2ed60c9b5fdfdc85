#pragma once

// End-to-end pulse/subpulse Doppler simulation: LFM pulse, target echo,
// range compression with the full replica (PP) and with N subpulse
// replicas (SP), datacube, Doppler maps, peak picking and unfolding.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "doppler/ccrt/ccrt.hpp"
#include "doppler/numerics/dft.hpp"
#include "doppler/numerics/rng.hpp"

namespace doppler::radar {

using numerics::ComplexSample;
using Signal = std::vector<ComplexSample>;

inline constexpr double kSpeedOfLight = 299'792'458.0;

struct RadarSetup {
    double carrier_hz = 6e9;
    double wavelength_m = kSpeedOfLight / 6e9;
    double pulse_width_s = 25e-6;
    double bandwidth_hz = 2e6;
    double sample_rate_hz = 8e6;
    std::vector<ccrt::PrfChannel> channels;

    /// wavelength = c / carrier, Fs = 4 B.
    static RadarSetup make(double carrier_hz, double pulse_width_s, double bandwidth_hz,
                           std::vector<ccrt::PrfChannel> channels);

    /// round(tau * Fs)
    std::size_t pulse_samples() const;
    /// floor(Fs / PRF): receive window per PRI.
    std::size_t pri_samples(const ccrt::PrfChannel& channel) const;
    /// c / (2 Fs)
    double range_bin_m() const noexcept { return kSpeedOfLight / (2.0 * sample_rate_hz); }

    /// Throws ValidationError naming the field.
    void validate() const;
};

struct TargetTruth {
    double range_m = 10e3;
    double radial_velocity_mps = 0.0;  // negative: receding
    double amplitude = 1.0;
};

/// Compressed samples of one channel. pp is [range][pulse], sp is
/// [range][pulse][subpulse], both range-major.
struct Datacube {
    std::size_t range_bins = 0;
    std::size_t pulses = 0;
    std::size_t subpulses = 0;
    std::vector<ComplexSample> pp;
    std::vector<ComplexSample> sp;

    ComplexSample& pp_at(std::size_t r, std::size_t m) { return pp[r * pulses + m]; }
    const ComplexSample& pp_at(std::size_t r, std::size_t m) const { return pp[r * pulses + m]; }
    ComplexSample& sp_at(std::size_t r, std::size_t m, std::size_t n) {
        return sp[(r * pulses + m) * subpulses + n];
    }
    const ComplexSample& sp_at(std::size_t r, std::size_t m, std::size_t n) const {
        return sp[(r * pulses + m) * subpulses + n];
    }
};

/// Magnitude spectra. pp is [range][k'], sp is [range][k'][l'].
struct DopplerMap {
    std::size_t range_bins = 0;
    std::size_t pulses = 0;
    std::size_t subpulses = 0;
    std::vector<double> pp;
    std::vector<double> sp;

    double pp_at(std::size_t r, std::size_t k) const { return pp[r * pulses + k]; }
    double sp_at(std::size_t r, std::size_t k, std::size_t l) const { return sp[(r * pulses + k) * subpulses + l]; }
};

struct ChannelDetection {
    std::uint32_t apparent_bin = 0;  // k' of the PP peak
    std::uint32_t coarse_bin = 0;    // l' of the SP peak
    std::size_t peak_range_bin = 0;
    std::size_t sp_peak_range_bin = 0;
    double coarse_hz = 0.0;
    double pp_peak_to_median = 0.0;
    double sp_peak_to_median = 0.0;
};

struct DetectionReport {
    bool detected = false;
    std::vector<std::optional<ChannelDetection>> channels;
    ccrt::UnfoldResult fused;
    double velocity_mps = 0.0;
};

/// s[n] = exp(j pi (B/tau) t_n^2), t_n = -tau/2 + n/Fs, n < round(tau Fs).
Signal make_lfm(const RadarSetup& setup);

/// N contiguous segments; the remainder goes to the last one.
std::vector<Signal> split_subpulses(std::span<const ComplexSample> replica, std::size_t n);

/// Start index of each segment produced by split_subpulses.
std::vector<std::size_t> subpulse_offsets(std::size_t length, std::size_t n);

/// One receive window of pri_samples per pulse: the replica delayed by
/// round(2 R Fs / c) samples, times exp(j 2 pi f_d (m / PRF + t / Fs)) with t
/// the sample index in the window, plus complex white noise of total
/// variance noise_sigma^2. Throws OutOfWindow if the echo does not fit.
std::vector<Signal> synth_echo(const RadarSetup& setup, const ccrt::PrfChannel& channel, const TargetTruth& truth,
                               numerics::RngStream& rng, double noise_sigma);

/// [pulse][range]
std::vector<Signal> compress_pp(std::span<const Signal> rx, std::span<const ComplexSample> replica);

/// [pulse][subpulse][range]. Sub-compression n is shifted by the segment's
/// offset so that every output shares the PP range axis.
std::vector<std::vector<Signal>> compress_sp(std::span<const Signal> rx, std::span<const Signal> subpulses);

Datacube build_datacube(std::span<const Signal> pp, std::span<const std::vector<Signal>> sp);

/// |DFT over pulses| of pp and |2-D DFT over (pulse, subpulse)| of sp.
DopplerMap doppler_maps(const Datacube& cube);

/// max / median of a magnitude grid; +inf for a positive peak over a zero
/// median, 0 for an all-zero grid.
double peak_to_median(std::span<const double> magnitudes);

struct DetectionPolicy {
    double threshold_factor = 3.0;  // peak must reach this times the map median
    /// PP and SP peaks must fall within this many range bins of each other;
    /// 0 selects ceil((N/2 + 1) Fs / B) + 1.
    std::size_t range_tolerance_bins = 0;
};

/// Peak-picks one channel. nullopt when either map fails the threshold or
/// the two peaks disagree in range.
std::optional<ChannelDetection> detect_channel(const DopplerMap& map, const RadarSetup& setup,
                                               const ccrt::PrfChannel& channel, const DetectionPolicy& policy = {});

/// Residues from the PP peaks, coarse frequency from the median SP estimate.
/// Uses the exact unfold for a common bin spacing and the coincidence search
/// otherwise.
DetectionReport detect_and_unfold(std::span<const DopplerMap> maps, const RadarSetup& setup,
                                  const DetectionPolicy& policy = {});

struct SimulationResult {
    std::vector<Datacube> cubes;
    std::vector<DopplerMap> maps;
    DetectionReport report;
};

/// Channel i draws noise from RngStream(seed, i).
SimulationResult simulate(const RadarSetup& setup, const TargetTruth& truth, std::uint64_t seed,
                          double noise_sigma, const DetectionPolicy& policy = {});

/// Noise sigma giving the requested post-compression per-pulse PP SNR
/// (amplitude^2 * pulse_samples / sigma^2) for a matched target.
double noise_sigma_for_snr(const RadarSetup& setup, double amplitude, double snr_db);

/// Writes <stem>.pp.f32, <stem>.sp.f32 (little-endian float32, range-major)
/// and <stem>.json describing shapes and axes.
void export_map(const std::filesystem::path& stem, const DopplerMap& map, const RadarSetup& setup,
                const ccrt::PrfChannel& channel);

/// Writes <stem>.cube.f32 as interleaved (re, im) float32 in
/// [range][pulse][subpulse] order, plus <stem>.cube.json.
void export_datacube(const std::filesystem::path& stem, const Datacube& cube, const RadarSetup& setup,
                     const ccrt::PrfChannel& channel);

}  // namespace doppler::radar
