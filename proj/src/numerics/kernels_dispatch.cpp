#include "doppler/numerics/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace doppler::kernels {

namespace {

bool cpu_has(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{detect_isa()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool isa_available(Isa isa) noexcept { return cpu_has(isa); }

Isa detect_isa() noexcept {
    if (const char* env = std::getenv("DOPPLER_ISA")) {
        const std::string_view want{env};
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
            if (want == isa_name(isa) && cpu_has(isa)) return isa;
        }
    }
    if (cpu_has(Isa::avx2)) return Isa::avx2;
    if (cpu_has(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) noexcept {
    if (!cpu_has(isa)) return false;
    active().store(isa, std::memory_order_relaxed);
    return true;
}

cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) noexcept {
    switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: return avx2::dot_conj(a, b);
#endif
#if defined(__aarch64__)
        case Isa::neon: return neon::dot_conj(a, b);
#endif
        default: return scalar::dot_conj(a, b);
    }
}

void magnitude(std::span<const cplx> in, std::span<double> out) noexcept {
    switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: avx2::magnitude(in, out); return;
#endif
#if defined(__aarch64__)
        case Isa::neon: neon::magnitude(in, out); return;
#endif
        default: scalar::magnitude(in, out); return;
    }
}

double energy(std::span<const cplx> a) noexcept {
    switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: return avx2::energy(a);
#endif
#if defined(__aarch64__)
        case Isa::neon: return neon::energy(a);
#endif
        default: return scalar::energy(a);
    }
}

}  // namespace doppler::kernels
