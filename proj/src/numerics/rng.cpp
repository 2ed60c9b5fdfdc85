#include "doppler/numerics/rng.hpp"

#include <cmath>

#include "doppler/error.hpp"

namespace doppler::numerics {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& word : s_) word = splitmix64(x);
}

Xoshiro256::result_type Xoshiro256::operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

std::uint64_t mix_stream_key(std::uint64_t seed, std::uint64_t stream_id) noexcept {
    std::uint64_t a = seed;
    std::uint64_t b = stream_id ^ 0xD1B54A32D192ED03ULL;
    const std::uint64_t ha = splitmix64(a);
    const std::uint64_t hb = splitmix64(b);
    std::uint64_t c = ha ^ rotl(hb, 29);
    return splitmix64(c);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id), engine_(mix_stream_key(seed, stream_id)) {}

double gaussian(RngStream& rng, double mean, double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw InvalidArgument("gaussian: variance must be positive and finite");
    }
    return mean + std::sqrt(variance) * rng.standard_normal();
}

}  // namespace doppler::numerics
