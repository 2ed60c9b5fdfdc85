#include "doppler/numerics/bessel.hpp"

#include <cmath>
#include <numbers>

#include "doppler/error.hpp"

namespace doppler::numerics {

namespace detail {

double bessel_i0_series(double x) noexcept {
    const double y = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int q = 1; q < 500; ++q) {
        term *= y / (static_cast<double>(q) * q);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

// I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)
// Terms shrink until k ~ 2x; for x >= 20 the smallest is below 1e-17.
double bessel_i0_asymptotic_tail(double x) noexcept {
    const double inv8x = 1.0 / (8.0 * x);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * odd * odd * inv8x / k;
        if (next >= term) break;
        term = next;
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

}  // namespace detail

namespace {

double checked_abs(double x) {
    if (!std::isfinite(x)) throw InvalidArgument("bessel_i0: non-finite argument");
    return std::fabs(x);
}

}  // namespace

double bessel_i0(double x) {
    const double ax = checked_abs(x);
    if (ax < kBesselI0Switchover) return detail::bessel_i0_series(ax);
    return std::exp(bessel_i0_log(ax));
}

double bessel_i0_log(double x) {
    const double ax = checked_abs(x);
    if (ax < kBesselI0Switchover) return std::log(detail::bessel_i0_series(ax));
    return ax - 0.5 * std::log(2.0 * std::numbers::pi * ax) +
           std::log(detail::bessel_i0_asymptotic_tail(ax));
}

double bessel_i0_scaled(double x) {
    const double ax = checked_abs(x);
    if (ax < kBesselI0Switchover) return std::exp(-ax) * detail::bessel_i0_series(ax);
    return detail::bessel_i0_asymptotic_tail(ax) / std::sqrt(2.0 * std::numbers::pi * ax);
}

}  // namespace doppler::numerics
