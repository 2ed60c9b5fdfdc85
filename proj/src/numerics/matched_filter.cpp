#include "doppler/numerics/matched_filter.hpp"

#include <bit>

#include "doppler/error.hpp"
#include "doppler/numerics/kernels.hpp"

namespace doppler::numerics {

namespace {

void check_lengths(std::span<const ComplexSample> rx, std::span<const ComplexSample> replica) {
    if (replica.empty()) throw InvalidArgument("matched_filter: empty replica");
    if (replica.size() > rx.size()) {
        throw InvalidArgument("matched_filter: replica (" + std::to_string(replica.size()) +
                              " samples) longer than received signal (" + std::to_string(rx.size()) + ")");
    }
}

}  // namespace

std::vector<ComplexSample> matched_filter_direct(std::span<const ComplexSample> rx,
                                                 std::span<const ComplexSample> replica) {
    check_lengths(rx, replica);
    const std::size_t lags = rx.size() - replica.size() + 1;
    std::vector<ComplexSample> y(lags);
    for (std::size_t k = 0; k < lags; ++k) {
        y[k] = kernels::dot_conj(rx.subspan(k, replica.size()), replica);
    }
    return y;
}

std::vector<ComplexSample> matched_filter_fft(std::span<const ComplexSample> rx,
                                              std::span<const ComplexSample> replica) {
    check_lengths(rx, replica);
    // Circular correlation of length P equals the linear one for every
    // full-overlap lag as long as P >= rx.size().
    const std::size_t P = std::bit_ceil(rx.size());
    std::vector<ComplexSample> a(P), b(P);
    std::copy(rx.begin(), rx.end(), a.begin());
    std::copy(replica.begin(), replica.end(), b.begin());
    const auto A = dft_fft(a);
    const auto B = dft_fft(b);
    for (std::size_t i = 0; i < P; ++i) a[i] = std::conj(A[i] * std::conj(B[i]));
    // ifft(Z) = conj(fft(conj(Z))) / P
    const auto c = dft_fft(a);
    const double inv = 1.0 / static_cast<double>(P);
    const std::size_t lags = rx.size() - replica.size() + 1;
    std::vector<ComplexSample> y(lags);
    for (std::size_t k = 0; k < lags; ++k) y[k] = std::conj(c[k]) * inv;
    return y;
}

std::vector<ComplexSample> matched_filter(std::span<const ComplexSample> rx,
                                          std::span<const ComplexSample> replica) {
    return replica.size() <= kDirectTransformMaxLength ? matched_filter_direct(rx, replica)
                                                       : matched_filter_fft(rx, replica);
}

}  // namespace doppler::numerics
