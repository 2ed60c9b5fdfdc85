#pragma once

#include <span>
#include <vector>

#include "doppler/numerics/dft.hpp"

namespace doppler::numerics {

/// Cross-correlation over all full-overlap lags:
///   y[k] = sum_n rx[k + n] * conj(replica[n]),  k = 0 .. rx.size() - replica.size()
/// Replicas up to kDirectTransformMaxLength samples are correlated directly;
/// longer ones through zero-padded FFTs. Throws InvalidArgument when the
/// replica is empty or longer than rx.
std::vector<ComplexSample> matched_filter(std::span<const ComplexSample> rx,
                                          std::span<const ComplexSample> replica);

std::vector<ComplexSample> matched_filter_direct(std::span<const ComplexSample> rx,
                                                 std::span<const ComplexSample> replica);
std::vector<ComplexSample> matched_filter_fft(std::span<const ComplexSample> rx,
                                              std::span<const ComplexSample> replica);

}  // namespace doppler::numerics
