#pragma once

namespace doppler::numerics {

/// Argument at which I0 switches from the power series to the
/// large-argument asymptotic expansion.
inline constexpr double kBesselI0Switchover = 20.0;

/// Modified Bessel function of the first kind, order zero.
/// Relative error <= 1e-12. Returns +inf once I0(x) exceeds the double
/// range (x > ~713.9); use bessel_i0_log there. Throws InvalidArgument on
/// non-finite input. I0 is even, so negative arguments are accepted.
double bessel_i0(double x);

/// log(I0(x)), finite for every finite x.
double bessel_i0_log(double x);

/// exp(-|x|) * I0(x); bounded by 1 and well scaled for large arguments.
double bessel_i0_scaled(double x);

namespace detail {
/// Power series sum_q (x/2)^(2q) / (q!)^2; accurate for moderate |x|.
double bessel_i0_series(double x) noexcept;
/// Asymptotic sum with the exp(x)/sqrt(2 pi x) prefactor removed.
double bessel_i0_asymptotic_tail(double x) noexcept;
}  // namespace detail

}  // namespace doppler::numerics
