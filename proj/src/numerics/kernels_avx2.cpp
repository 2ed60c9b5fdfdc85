// Built with -mavx2 -mfma; only reached through dispatch after a cpuid check.

#include "doppler/numerics/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace doppler::kernels::avx2 {

namespace {

inline const double* raw(const cplx* p) { return reinterpret_cast<const double*>(p); }

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

// Lanes hold [re0, im0, re1, im1]. acc_dir collects ar*br and ai*bi,
// acc_cross collects ar*bi and ai*br (b with re/im swapped).
cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) noexcept {
    const std::size_t n = std::min(a.size(), b.size());
    const double* pa = raw(a.data());
    const double* pb = raw(b.data());

    __m256d dir0 = _mm256_setzero_pd(), dir1 = _mm256_setzero_pd();
    __m256d crs0 = _mm256_setzero_pd(), crs1 = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va0 = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb0 = _mm256_loadu_pd(pb + 2 * i);
        const __m256d va1 = _mm256_loadu_pd(pa + 2 * i + 4);
        const __m256d vb1 = _mm256_loadu_pd(pb + 2 * i + 4);
        dir0 = _mm256_fmadd_pd(va0, vb0, dir0);
        dir1 = _mm256_fmadd_pd(va1, vb1, dir1);
        crs0 = _mm256_fmadd_pd(va0, _mm256_permute_pd(vb0, 0b0101), crs0);
        crs1 = _mm256_fmadd_pd(va1, _mm256_permute_pd(vb1, 0b0101), crs1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        dir0 = _mm256_fmadd_pd(va, vb, dir0);
        crs0 = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0b0101), crs0);
    }
    const __m256d dir = _mm256_add_pd(dir0, dir1);
    const __m256d crs = _mm256_add_pd(crs0, crs1);

    double re = hsum(dir);
    // crs lanes: [ar*bi, ai*br, ...]; imag = sum(ai*br) - sum(ar*bi)
    const __m256d sign = _mm256_set_pd(1.0, -1.0, 1.0, -1.0);
    double im = hsum(_mm256_mul_pd(crs, sign));

    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ai * br - ar * bi;
    }
    return {re, im};
}

void magnitude(std::span<const cplx> in, std::span<double> out) noexcept {
    const std::size_t n = std::min(in.size(), out.size());
    const double* p = raw(in.data());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v0 = _mm256_loadu_pd(p + 2 * i);      // r0 i0 r1 i1
        const __m256d v1 = _mm256_loadu_pd(p + 2 * i + 4);  // r2 i2 r3 i3
        const __m256d s0 = _mm256_mul_pd(v0, v0);
        const __m256d s1 = _mm256_mul_pd(v1, v1);
        // hadd -> [s0.0+s0.1, s1.0+s1.1, s0.2+s0.3, s1.2+s1.3] = [m0, m2, m1, m3]
        const __m256d h = _mm256_hadd_pd(s0, s1);
        const __m256d ordered = _mm256_permute4x64_pd(h, 0b11011000);
        _mm256_storeu_pd(out.data() + i, _mm256_sqrt_pd(ordered));
    }
    for (; i < n; ++i) {
        out[i] = std::sqrt(in[i].real() * in[i].real() + in[i].imag() * in[i].imag());
    }
}

double energy(std::span<const cplx> a) noexcept {
    const std::size_t n = a.size();
    const double* p = raw(a.data());
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v0 = _mm256_loadu_pd(p + 2 * i);
        const __m256d v1 = _mm256_loadu_pd(p + 2 * i + 4);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return acc;
}

}  // namespace doppler::kernels::avx2
