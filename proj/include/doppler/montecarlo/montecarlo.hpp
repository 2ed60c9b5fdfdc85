#pragma once

#include <complex>
#include <cstdint>
#include <utility>

#include "doppler/detection/detection.hpp"
#include "doppler/numerics/rng.hpp"

namespace doppler::montecarlo {

struct McConfig {
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 0;
    detection::ChannelStats stats{detection::ChannelStats::Params{}};
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;

    void validate() const;
};

struct McEstimate {
    double pd_hat = 0.0;
    double pfa_hat = 0.0;
    double stderr_pd = 0.0;
    double stderr_pfa = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t detections = 0;
    std::uint64_t false_alarms = 0;
    std::uint64_t mixed = 0;
};

enum class Outcome { detection, false_alarm, mixed };

/// One draw of the correlated target cells (G1, G2).
std::pair<std::complex<double>, std::complex<double>> sample_target_cells(numerics::RngStream& rng,
                                                                         const detection::ChannelStats& stats);

/// (|G1|, |G2|)
std::pair<double, double> sample_pair(numerics::RngStream& rng, const detection::ChannelStats& stats);

/// Rayleigh amplitude |w|, w complex Gaussian with per-component variance sigma^2.
double sample_competitor(numerics::RngStream& rng, double sigma);

Outcome run_trial(numerics::RngStream& rng, const detection::ChannelStats& stats);

/// Trial t draws from RngStream(seed, t), so the result does not depend on
/// the thread count. Counts are reduced as integers.
McEstimate estimate(const McConfig& config);

/// sqrt(p (1 - p) / n)
double binomial_stderr(double p, std::uint64_t n);

/// |p_hat - p_ref| <= k * max(stderr at p_hat, stderr at p_ref). Using the
/// larger of the two keeps the test meaningful when p_hat is 0 or 1.
bool concordant(double p_hat, double p_ref, std::uint64_t n, double k = 3.0);

}  // namespace doppler::montecarlo
