#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation plus AVX2 (x86-64) and NEON (aarch64) variants; the
// dispatching entry points pick one at runtime. Variants must agree with
// the scalar reference to rounding (tests/unit/test_kernels.cpp).

#include <complex>
#include <span>
#include <string_view>

namespace doppler::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

/// Best ISA supported by this CPU and build. Honors DOPPLER_ISA=scalar|avx2|neon.
Isa detect_isa() noexcept;

/// ISA currently used by the dispatching entry points.
Isa active_isa() noexcept;

/// Override dispatch (tests and benchmarking). Returns false, leaving the
/// active ISA unchanged, if `isa` is not available here.
bool set_active_isa(Isa isa) noexcept;

bool isa_available(Isa isa) noexcept;

/// sum_i a[i] * conj(b[i]) over min(a.size(), b.size()) elements.
cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) noexcept;

/// out[i] = |in[i]|. `out` must be at least as long as `in`.
void magnitude(std::span<const cplx> in, std::span<double> out) noexcept;

/// sum_i |a[i]|^2
double energy(std::span<const cplx> a) noexcept;

namespace scalar {
cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) noexcept;
void magnitude(std::span<const cplx> in, std::span<double> out) noexcept;
double energy(std::span<const cplx> a) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) noexcept;
void magnitude(std::span<const cplx> in, std::span<double> out) noexcept;
double energy(std::span<const cplx> a) noexcept;
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) noexcept;
void magnitude(std::span<const cplx> in, std::span<double> out) noexcept;
double energy(std::span<const cplx> a) noexcept;
}  // namespace neon
#endif

}  // namespace doppler::kernels
