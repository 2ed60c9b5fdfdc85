#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace doppler::numerics {

/// xoshiro256** seeded through SplitMix64. Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

private:
    std::uint64_t s_[4];
};

/// Reproducible random stream keyed by (seed, stream_id). Equal keys give
/// equal sequences; different stream_ids give statistically independent
/// streams. Single-owner: give each concurrent task its own stream.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Uniform on [0, 1).
    double uniform() noexcept { return std::generate_canonical<double, 53>(engine_); }

    /// N(0, 1)
    double standard_normal() { return normal_(engine_); }

    Xoshiro256& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    Xoshiro256 engine_;
    boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

/// Draw from N(mean, variance). Throws InvalidArgument unless variance > 0.
double gaussian(RngStream& rng, double mean, double variance);

/// Combine a seed and a stream index into one well-mixed 64-bit key.
std::uint64_t mix_stream_key(std::uint64_t seed, std::uint64_t stream_id) noexcept;

}  // namespace doppler::numerics
