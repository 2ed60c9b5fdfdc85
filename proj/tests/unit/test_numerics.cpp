#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doppler/error.hpp"
#include "doppler/numerics/bessel.hpp"
#include "doppler/numerics/dft.hpp"
#include "doppler/numerics/kernels.hpp"
#include "doppler/numerics/matched_filter.hpp"
#include "doppler/numerics/quadrature.hpp"
#include "doppler/numerics/rng.hpp"

using namespace doppler;
using namespace doppler::numerics;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<cplx> random_signal(std::size_t n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g;
    std::vector<cplx> v(n);
    for (auto& z : v) z = {g(gen), g(gen)};
    return v;
}

// extended-precision power series, enough terms for |x| <= 60
long double i0_series_ld(long double x, int terms) {
    long double term = 1.0L, sum = 1.0L;
    const long double h = x * x / 4.0L;
    for (int q = 1; q < terms; ++q) {
        term *= h / (static_cast<long double>(q) * q);
        sum += term;
    }
    return sum;
}

std::vector<cplx> brute_dft(const std::vector<cplx>& x) {
    const std::size_t K = x.size();
    std::vector<cplx> X(K);
    for (std::size_t k = 0; k < K; ++k) {
        long double re = 0, im = 0;
        for (std::size_t n = 0; n < K; ++n) {
            const long double ph = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>((k * n) % K) / K;
            re += x[n].real() * std::cos(ph) - x[n].imag() * std::sin(ph);
            im += x[n].real() * std::sin(ph) + x[n].imag() * std::cos(ph);
        }
        X[k] = {static_cast<double>(re), static_cast<double>(im)};
    }
    return X;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

// ---------------------------------------------------------------- bessel

TEST(Bessel, ZeroIsOne) { EXPECT_EQ(bessel_i0(0.0), 1.0); }

TEST(Bessel, MatchesExtendedPrecisionSeriesAtOne) {
    const double ref = static_cast<double>(i0_series_ld(1.0L, 40));
    EXPECT_NEAR(bessel_i0(1.0) / ref, 1.0, 1e-12);
}

TEST(Bessel, LargeArgumentLogConsistent) {
    const double v = bessel_i0(50.0);
    ASSERT_TRUE(std::isfinite(v));
    EXPECT_NEAR(bessel_i0_log(50.0), std::log(v), 1e-10);
    const double ref = static_cast<double>(i0_series_ld(50.0L, 200));
    EXPECT_NEAR(v / ref, 1.0, 1e-12);
}

TEST(Bessel, AgreesWithBoostOnGrid) {
    for (double x = 0.0; x <= 700.0; x += 0.37) {
        const double ref = boost::math::cyl_bessel_i(0, x);
        EXPECT_NEAR(bessel_i0(x) / ref, 1.0, 1e-12) << "x=" << x;
    }
}

TEST(Bessel, LogFiniteBeyondOverflow) {
    const double l = bessel_i0_log(5000.0);
    EXPECT_TRUE(std::isfinite(l));
    // log I0(x) ~ x - 0.5 log(2 pi x) + 1/(8x) + 1/(16x^2)
    const double x = 5000.0;
    EXPECT_NEAR(l, x - 0.5 * std::log(2 * kPi * x) + 1.0 / (8 * x) + 1.0 / (16 * x * x), 1e-10);
    EXPECT_TRUE(std::isinf(bessel_i0(800.0)));
}

TEST(Bessel, ScaledBoundedAndConsistent) {
    for (double x : {0.0, 0.5, 3.0, 19.9, 20.1, 100.0, 1e4}) {
        const double s = bessel_i0_scaled(x);
        EXPECT_GT(s, 0.0);
        EXPECT_LE(s, 1.0);
        EXPECT_NEAR(std::log(s), bessel_i0_log(x) - x, 1e-10);
    }
}

TEST(Bessel, BranchesAgreeAtSwitchover) {
    const double x = kBesselI0Switchover;
    const double series = detail::bessel_i0_series(x);
    const double asym = std::exp(x) / std::sqrt(2 * kPi * x) * detail::bessel_i0_asymptotic_tail(x);
    EXPECT_NEAR(asym / series, 1.0, 1e-9);
}

TEST(Bessel, MonotoneAndEven) {
    double prev = 0.0;
    for (double x = 0.0; x < 60.0; x += 0.05) {
        const double v = bessel_i0(x);
        EXPECT_GE(v, prev);
        EXPECT_EQ(v, bessel_i0(-x));
        prev = v;
    }
}

TEST(Bessel, RejectsNonFinite) {
    EXPECT_THROW(bessel_i0(std::nan("")), InvalidArgument);
    EXPECT_THROW(bessel_i0(INFINITY), InvalidArgument);
    EXPECT_THROW(bessel_i0_log(std::nan("")), InvalidArgument);
}

// ---------------------------------------------------------------- quadrature

TEST(Quadrature, Exponential) {
    const auto r = integrate_semi_infinite([](double t) { return std::exp(-t); });
    EXPECT_NEAR(r.value, 1.0, 1e-10);
}

TEST(Quadrature, GaussianMoment) {
    const auto r = integrate_semi_infinite([](double t) { return t * std::exp(-t * t); });
    EXPECT_NEAR(r.value, 0.5, 1e-10);
}

TEST(Quadrature, BesselExponentialIdentity) {
    // int_0^inf exp(b t) I0(a sqrt t) dt = -exp(-a^2 / (4 b)) / b
    const auto r = integrate_semi_infinite([](double t) { return std::exp(-2.0 * t) * bessel_i0(2.0 * std::sqrt(t)); });
    EXPECT_NEAR(r.value, std::exp(0.5) / 2.0, 1e-10 * std::exp(0.5) / 2.0);
}

TEST(Quadrature, BesselExponentialIdentityGrid) {
    for (double a : {0.0, 1.0, 2.0}) {
        for (double b : {-0.5, -1.0, -2.0}) {
            QuadSpec spec;
            spec.scale = 1.0 / -b;
            const auto r = integrate_semi_infinite(
                [a, b](double t) { return std::exp(b * t + bessel_i0_log(a * std::sqrt(t))); }, spec);
            const double exact = -std::exp(-a * a / (4 * b)) / b;
            EXPECT_NEAR(r.value, exact, spec.rel_tol * exact + spec.abs_tol) << "a=" << a << " b=" << b;
        }
    }
}

TEST(Quadrature, FiniteInterval) {
    const auto r = integrate([](double x) { return std::sin(x); }, 0.0, kPi);
    EXPECT_NEAR(r.value, 2.0, 1e-12);
    EXPECT_LE(r.error, 1e-10 * 2.0);
    const auto s = integrate([](double x) { return std::exp(-50.0 * (x - 0.3) * (x - 0.3)); }, -5.0, 5.0);
    EXPECT_NEAR(s.value, std::sqrt(kPi / 50.0), 1e-12);
}

TEST(Quadrature, Deterministic) {
    auto f = [](double t) { return std::exp(-t) * std::cos(3 * t); };
    EXPECT_EQ(integrate_semi_infinite(f).value, integrate_semi_infinite(f).value);
}

TEST(Quadrature, ConvergenceFailureCarriesEstimate) {
    QuadSpec spec;
    spec.max_subdivisions = 3;
    spec.rel_tol = 1e-14;
    spec.abs_tol = 1e-16;
    try {
        integrate([](double x) { return std::sin(1.0 / x); }, 1e-4, 1.0, spec);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_TRUE(std::isfinite(e.estimate()));
        EXPECT_GT(e.error_bound(), 0.0);
    }
}

TEST(Quadrature, RejectsBadSpec) {
    QuadSpec spec;
    spec.rel_tol = 0.0;
    EXPECT_THROW(integrate_semi_infinite([](double t) { return std::exp(-t); }, spec), InvalidArgument);
}

TEST(Quadrature, NonFiniteIntegrand) {
    EXPECT_THROW(integrate([](double) { return std::nan(""); }, 0.0, 1.0), NumericalDomain);
}

// ---------------------------------------------------------------- dft

TEST(Dft, ConstantSequence) {
    const std::vector<cplx> x(4, 1.0);
    const auto X = dft_1d(x);
    EXPECT_NEAR(std::abs(X[0] - 4.0), 0.0, 1e-15);
    for (int k = 1; k < 4; ++k) EXPECT_NEAR(std::abs(X[k]), 0.0, 1e-15);
}

TEST(Dft, SingleTone) {
    std::vector<cplx> x(8);
    for (int n = 0; n < 8; ++n) x[n] = std::polar(1.0, 2 * kPi * 2 * n / 8);
    const auto X = dft_1d(x);
    for (int k = 0; k < 8; ++k) EXPECT_NEAR(std::abs(X[k]), k == 2 ? 8.0 : 0.0, 1e-12);
}

TEST(Dft, ParsevalAndBruteForce) {
    for (std::size_t K : {1u, 2u, 3u, 7u, 16u, 31u, 64u, 65u, 100u, 1024u}) {
        const auto x = random_signal(K, static_cast<unsigned>(K));
        const auto X = dft_1d(x);
        double ex = 0, eX = 0;
        for (auto z : x) ex += std::norm(z);
        for (auto z : X) eX += std::norm(z);
        EXPECT_NEAR(eX / K, ex, 1e-10 * ex) << "K=" << K;
        if (K <= 128) {
            EXPECT_LT(max_abs_diff(X, brute_dft(x)), 1e-10 * std::sqrt(K * ex)) << "K=" << K;
        }
    }
}

TEST(Dft, DirectMatchesFft) {
    for (std::size_t K : {1u, 5u, 8u, 17u, 64u}) {
        const auto x = random_signal(K, 99);
        EXPECT_LT(max_abs_diff(dft_direct(x), dft_fft(x)), 1e-12 * K);
    }
}

TEST(Dft, InverseRoundTrip) {
    for (std::size_t K : {1u, 11u, 64u, 300u}) {
        const auto x = random_signal(K, 7);
        EXPECT_LT(max_abs_diff(idft_1d(dft_1d(x)), x), 1e-10);
    }
}

TEST(Dft, EmptyRejected) {
    EXPECT_THROW(dft_1d(std::vector<cplx>{}), InvalidArgument);
    EXPECT_THROW(idft_1d(std::vector<cplx>{}), InvalidArgument);
}

TEST(Dft2d, AllOnes) {
    ComplexGrid g(2, 2);
    for (auto& z : g.data()) z = 1.0;
    const auto G = dft_2d(g);
    EXPECT_NEAR(std::abs(G(0, 0) - 4.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(G(0, 1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(G(1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(G(1, 1)), 0.0, 1e-15);
}

TEST(Dft2d, SeparableTone) {
    ComplexGrid g(8, 4);
    for (int m = 0; m < 8; ++m)
        for (int n = 0; n < 4; ++n) g(m, n) = std::polar(1.0, 2 * kPi * (3.0 * m / 8 + 1.0 * n / 4));
    const auto G = dft_2d(g);
    for (int m = 0; m < 8; ++m)
        for (int n = 0; n < 4; ++n) EXPECT_NEAR(std::abs(G(m, n)), (m == 3 && n == 1) ? 32.0 : 0.0, 1e-12);
}

TEST(Dft2d, MatchesDoubleSum) {
    for (auto [M, N] : {std::pair{3, 3}, std::pair{5, 2}, std::pair{1, 7}, std::pair{13, 8}}) {
        ComplexGrid g(M, N);
        const auto r = random_signal(static_cast<std::size_t>(M * N), 3);
        std::copy(r.begin(), r.end(), g.data().begin());
        const auto G = dft_2d(g);
        for (int k = 0; k < M; ++k) {
            for (int l = 0; l < N; ++l) {
                cplx s = 0.0;
                for (int m = 0; m < M; ++m)
                    for (int n = 0; n < N; ++n)
                        s += g(m, n) * std::polar(1.0, -2 * kPi * (static_cast<double>(k * m) / M +
                                                                    static_cast<double>(l * n) / N));
                EXPECT_NEAR(std::abs(G(k, l) - s), 0.0, 1e-12) << M << "x" << N << " (" << k << "," << l << ")";
            }
        }
    }
}

TEST(Dft2d, DegenerateRejected) { EXPECT_THROW(dft_2d(ComplexGrid(0, 4)), InvalidArgument); }

// ---------------------------------------------------------------- matched filter

TEST(MatchedFilter, AutocorrelationPeak) {
    const auto rep = random_signal(40, 11);
    const auto y = matched_filter(rep, rep);
    ASSERT_EQ(y.size(), 1u);
    double e = 0;
    for (auto z : rep) e += std::norm(z);
    EXPECT_NEAR(y[0].real(), e, 1e-12 * e);
    EXPECT_NEAR(y[0].imag(), 0.0, 1e-12 * e);
}

TEST(MatchedFilter, DelayedReplica) {
    for (std::size_t L : {16u, 200u}) {
        const auto rep = random_signal(L, 5);
        const std::size_t d = 37;
        std::vector<cplx> rx(L + 100, 0.0);
        std::copy(rep.begin(), rep.end(), rx.begin() + d);
        const auto y = matched_filter(rx, rep);
        std::size_t arg = 0;
        for (std::size_t k = 0; k < y.size(); ++k)
            if (std::abs(y[k]) > std::abs(y[arg])) arg = k;
        EXPECT_EQ(arg, d) << "L=" << L;
    }
}

TEST(MatchedFilter, DopplerMismatchFollowsSinc) {
    const std::size_t L = 2000;
    const double fd_tau = 0.9;
    std::vector<cplx> rep(L, 1.0), rx(L);
    for (std::size_t n = 0; n < L; ++n) rx[n] = std::polar(1.0, 2 * kPi * fd_tau * n / L);
    const double ratio = std::abs(matched_filter(rx, rep)[0]) / std::abs(matched_filter(rep, rep)[0]);
    const double sinc = std::abs(std::sin(kPi * fd_tau) / (kPi * fd_tau));
    EXPECT_NEAR(ratio, sinc, 1e-3);
}

TEST(MatchedFilter, DirectMatchesFft) {
    for (std::size_t L : {1u, 10u, 64u, 65u, 150u}) {
        const auto rep = random_signal(L, 21);
        const auto rx = random_signal(L + 333, 22);
        const auto a = matched_filter_direct(rx, rep);
        const auto b = matched_filter_fft(rx, rep);
        ASSERT_EQ(a.size(), b.size());
        EXPECT_LT(max_abs_diff(a, b), 1e-10 * L) << "L=" << L;
    }
}

TEST(MatchedFilter, ConjugateSymmetryUnderRoleSwap) {
    const std::size_t L = 50, K = 20;
    const auto a = random_signal(L, 1);
    const auto b = random_signal(L, 2);
    std::vector<cplx> A(L + 2 * K, 0.0), B(L + 2 * K, 0.0);
    std::copy(a.begin(), a.end(), A.begin() + K);
    std::copy(b.begin(), b.end(), B.begin() + K);
    const auto yab = matched_filter(A, b);
    const auto yba = matched_filter(B, a);
    for (std::size_t j = 0; j <= K; ++j) {
        EXPECT_NEAR(std::abs(yab[K + j] - std::conj(yba[K - j])), 0.0, 1e-10);
    }
}

TEST(MatchedFilter, RejectsBadLengths) {
    const std::vector<cplx> s(4), l(8);
    EXPECT_THROW(matched_filter(s, l), InvalidArgument);
    EXPECT_THROW(matched_filter(l, std::vector<cplx>{}), InvalidArgument);
}

// ---------------------------------------------------------------- kernels

class KernelEquivalence : public ::testing::TestWithParam<kernels::Isa> {};

TEST_P(KernelEquivalence, MatchesScalarReference) {
    const auto isa = GetParam();
    if (!kernels::isa_available(isa)) GTEST_SKIP() << kernels::isa_name(isa) << " not available";
    for (std::size_t n = 0; n < 260; n += (n < 20 ? 1 : 17)) {
        const auto a = random_signal(n, 100 + static_cast<unsigned>(n));
        const auto b = random_signal(n, 200 + static_cast<unsigned>(n));
        ASSERT_TRUE(kernels::set_active_isa(isa));
        const auto d = kernels::dot_conj(a, b);
        const auto e = kernels::energy(a);
        std::vector<double> m(n);
        kernels::magnitude(a, m);
        const auto d0 = kernels::scalar::dot_conj(a, b);
        const auto e0 = kernels::scalar::energy(a);
        std::vector<double> m0(n);
        kernels::scalar::magnitude(a, m0);
        const double scale = 1.0 + static_cast<double>(n);
        EXPECT_NEAR(std::abs(d - d0), 0.0, 1e-13 * scale) << "n=" << n;
        EXPECT_NEAR(e, e0, 1e-13 * scale) << "n=" << n;
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(m[i], m0[i], 1e-15 * (1.0 + m0[i]));
    }
    kernels::set_active_isa(kernels::detect_isa());
}

INSTANTIATE_TEST_SUITE_P(AllIsas, KernelEquivalence,
                         ::testing::Values(kernels::Isa::scalar, kernels::Isa::avx2, kernels::Isa::neon),
                         [](const auto& info) { return std::string(kernels::isa_name(info.param)); });

TEST(Kernels, UnavailableIsaRefused) {
#if defined(__x86_64__)
    EXPECT_FALSE(kernels::set_active_isa(kernels::Isa::neon));
#else
    EXPECT_FALSE(kernels::set_active_isa(kernels::Isa::avx2));
#endif
    EXPECT_TRUE(kernels::isa_available(kernels::Isa::scalar));
}

// ---------------------------------------------------------------- rng

TEST(Rng, ReplayIsIdentical) {
    RngStream a(42, 7), b(42, 7);
    const double a1 = gaussian(a, 0.0, 0.5), a2 = gaussian(a, 0.0, 0.5);
    EXPECT_EQ(a1, gaussian(b, 0.0, 0.5));
    EXPECT_EQ(a2, gaussian(b, 0.0, 0.5));
}

TEST(Rng, StreamsDiffer) {
    RngStream a(42, 0), b(42, 1), c(43, 0);
    const double x = a.uniform();
    EXPECT_NE(x, b.uniform());
    EXPECT_NE(x, c.uniform());
}

TEST(Rng, MomentsZeroMean) {
    RngStream r(2024, 0);
    const int n = 1'000'000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = gaussian(r, 0.0, 0.5);
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    EXPECT_LE(std::abs(mean), 0.0035);
    EXPECT_NEAR(s2 / n - mean * mean, 0.5, 0.01);
}

TEST(Rng, MomentsShiftedMean) {
    RngStream r(2025, 3);
    const int n = 1'000'000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = gaussian(r, 2.0, 0.5);
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    EXPECT_LE(std::abs(mean - 2.0), 5 * std::sqrt(0.5 / n));
    EXPECT_GE(var, 0.49);
    EXPECT_LE(var, 0.51);
}

TEST(Rng, UniformRange) {
    RngStream r(1, 1);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, RejectsBadVariance) {
    RngStream r(1, 1);
    EXPECT_THROW(gaussian(r, 0.0, 0.0), InvalidArgument);
    EXPECT_THROW(gaussian(r, 0.0, -1.0), InvalidArgument);
}
