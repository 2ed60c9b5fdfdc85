#include "doppler/numerics/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace doppler::kernels::scalar {

cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) noexcept {
    const std::size_t n = std::min(a.size(), b.size());
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ai * br - ar * bi;
    }
    return {re, im};
}

void magnitude(std::span<const cplx> in, std::span<double> out) noexcept {
    const std::size_t n = std::min(in.size(), out.size());
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::sqrt(in[i].real() * in[i].real() + in[i].imag() * in[i].imag());
    }
}

double energy(std::span<const cplx> a) noexcept {
    double acc = 0.0;
    for (const auto& z : a) acc += z.real() * z.real() + z.imag() * z.imag();
    return acc;
}

}  // namespace doppler::kernels::scalar
