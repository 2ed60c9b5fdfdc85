#include "doppler/numerics/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>
#include <cmath>

namespace doppler::kernels::neon {

namespace {
inline const double* raw(const cplx* p) { return reinterpret_cast<const double*>(p); }
}  // namespace

// One complex per 128-bit lane pair: v = [re, im].
cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) noexcept {
    const std::size_t n = std::min(a.size(), b.size());
    const double* pa = raw(a.data());
    const double* pb = raw(b.data());
    float64x2_t dir0 = vdupq_n_f64(0.0), dir1 = vdupq_n_f64(0.0);
    float64x2_t crs0 = vdupq_n_f64(0.0), crs1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t va0 = vld1q_f64(pa + 2 * i);
        const float64x2_t vb0 = vld1q_f64(pb + 2 * i);
        const float64x2_t va1 = vld1q_f64(pa + 2 * i + 2);
        const float64x2_t vb1 = vld1q_f64(pb + 2 * i + 2);
        dir0 = vfmaq_f64(dir0, va0, vb0);
        dir1 = vfmaq_f64(dir1, va1, vb1);
        crs0 = vfmaq_f64(crs0, va0, vextq_f64(vb0, vb0, 1));
        crs1 = vfmaq_f64(crs1, va1, vextq_f64(vb1, vb1, 1));
    }
    const float64x2_t dir = vaddq_f64(dir0, dir1);
    const float64x2_t crs = vaddq_f64(crs0, crs1);
    double re = vgetq_lane_f64(dir, 0) + vgetq_lane_f64(dir, 1);
    double im = vgetq_lane_f64(crs, 1) - vgetq_lane_f64(crs, 0);
    for (; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].imag() * b[i].real() - a[i].real() * b[i].imag();
    }
    return {re, im};
}

void magnitude(std::span<const cplx> in, std::span<double> out) noexcept {
    const std::size_t n = std::min(in.size(), out.size());
    const double* p = raw(in.data());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t v0 = vld1q_f64(p + 2 * i);
        const float64x2_t v1 = vld1q_f64(p + 2 * i + 2);
        const float64x2_t s = vpaddq_f64(vmulq_f64(v0, v0), vmulq_f64(v1, v1));
        vst1q_f64(out.data() + i, vsqrtq_f64(s));
    }
    for (; i < n; ++i) {
        out[i] = std::sqrt(in[i].real() * in[i].real() + in[i].imag() * in[i].imag());
    }
}

double energy(std::span<const cplx> a) noexcept {
    const double* p = raw(a.data());
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const float64x2_t v = vld1q_f64(p + 2 * i);
        acc = vfmaq_f64(acc, v, v);
    }
    return vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
}

}  // namespace doppler::kernels::neon

#endif
