#include "doppler/detection/detection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doppler/error.hpp"
#include "doppler/numerics/bessel.hpp"

namespace doppler::detection {

namespace {

using numerics::QuadSpec;

constexpr double kUnitTolerance = 1e-9;

// Row n of Pascal's triangle; exact in long double up to n = 64.
std::vector<long double> pascal_row(std::uint32_t n) {
    std::vector<long double> row(n + 1, 0.0L);
    row[0] = 1.0L;
    for (std::uint32_t i = 1; i <= n; ++i) {
        for (std::uint32_t k = i; k > 0; --k) row[k] += row[k - 1];
    }
    return row;
}

double check_unit(long double raw, const char* what) {
    if (!std::isfinite(static_cast<double>(raw)) || raw < -kUnitTolerance || raw > 1.0L + kUnitTolerance) {
        throw NumericalDomain(std::string(what) + ": raw sum " + std::to_string(static_cast<double>(raw)) +
                              " lies outside [0, 1]; cancellation or invalid parameters");
    }
    return std::clamp(static_cast<double>(raw), 0.0, 1.0);
}

// lambda^2 sigma^4 / (2 Omega^2 (Omega^2 j + sigma^2))
long double correction(long double lambda, long double sigma_sq, long double omega_sq, long double j) {
    return lambda * lambda * sigma_sq * sigma_sq / (2.0L * omega_sq * (omega_sq * j + sigma_sq));
}

// The share of xi - 1 left after subtracting correction(): one summand of
// U - 1 (or P - 1), written without the cancellation.
long double excess(long double lambda, long double sigma_sq, long double omega_sq, long double j) {
    return lambda * lambda * sigma_sq * j / (2.0L * (omega_sq * j + sigma_sq));
}

// sum_{a, b} sign * C(n1, a) C(n2, b) (V / U) exp(-m + m / U) over a in [a0, n1], b in [b0, n2]
template <class TermFn>
long double binomial_double_sum(std::uint32_t n1, std::uint32_t n2, std::uint32_t a0, std::uint32_t b0,
                                const TermFn& term) {
    const auto c1 = pascal_row(n1);
    const auto c2 = pascal_row(n2);
    long double acc = 0.0L;
    for (std::uint32_t a = a0; a <= n1; ++a) {
        for (std::uint32_t b = b0; b <= n2; ++b) acc += c1[a] * c2[b] * term(a, b);
    }
    return acc;
}

long double exp_kernel(long double m, long double u) { return std::exp(-m + m / u); }

// exp(-m + m / U) with U = 1 + u_minus_1
long double exp_kernel_excess(long double m, long double u_minus_1) {
    return std::exp(-m * u_minus_1 / (1.0L + u_minus_1));
}

double log_rician_pdf(double r, double nu, double s2) {
    return std::log(r / s2) - (r - nu) * (r - nu) / (2.0 * s2) + std::log(numerics::bessel_i0_scaled(r * nu / s2));
}

QuadSpec inner_spec(const QuadSpec& outer) {
    QuadSpec s = outer;
    s.rel_tol = std::max(outer.rel_tol * 1e-2, 1e-14);
    s.abs_tol = std::max(outer.abs_tol * 1e-2, 1e-16);
    return s;
}

// Integral over r of Rician(r; nu, s2) times either F(r)^n (detect) or
// 1 - F(r)^n (survive), with F(r) = 1 - exp(-r^2 / (2 sigma^2)).
double conditional_probability(double nu, double s2, double sigma_sq, std::uint32_t n, bool survive,
                               const QuadSpec& spec) {
    if (n == 0) return survive ? 0.0 : 1.0;
    const double s = std::sqrt(s2);
    const double lo = std::max(0.0, nu - 14.0 * s);
    const double hi = nu + 14.0 * s;
    const double nn = n;
    auto f = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double log_f = nn * std::log1p(-std::exp(-r * r / (2.0 * sigma_sq)));
        const double weight = survive ? -std::expm1(log_f) : std::exp(log_f);
        return std::exp(log_rician_pdf(r, nu, s2)) * weight;
    };
    return numerics::integrate(f, lo, hi, spec).value;
}

template <class Inner>
double integrate_over_shared_component(const ChannelStats& st, const QuadSpec& spec, const Inner& inner) {
    spec.validate();
    const double root_m = std::sqrt(st.m());
    const double lo = std::max(0.0, root_m - 9.0);
    const double hi = root_m + 9.0;
    auto f = [&](double rho) {
        if (rho <= 0.0) return 0.0;
        // |A0 + j B0| is Rician with noncentrality sqrt(m), per-component variance 1/2
        const double dens = 2.0 * rho * std::exp(-(rho - root_m) * (rho - root_m)) *
                             numerics::bessel_i0_scaled(2.0 * rho * root_m);
        if (dens == 0.0) return 0.0;
        return dens * inner(rho);
    };
    return numerics::integrate(f, lo, hi, spec).value;
}

}  // namespace

// ---------------------------------------------------------------- ChannelStats

ChannelStats::ChannelStats(const Params& p) : p_(p) {
    auto in_open_unit = [](double x) { return x > 0.0 && x < 1.0; };
    if (!(p.sigma1 > 0.0) || !(p.sigma2 > 0.0) || !std::isfinite(p.sigma1) || !std::isfinite(p.sigma2)) {
        throw InvalidArgument("ChannelStats: sigma1 and sigma2 must be positive and finite");
    }
    if (!in_open_unit(p.lambda1) || !in_open_unit(p.lambda2)) {
        throw InvalidArgument("ChannelStats: lambda1 and lambda2 must lie in (0, 1)");
    }
    if (!std::isfinite(p.m_re) || !std::isfinite(p.m_im)) throw InvalidArgument("ChannelStats: non-finite mean");
    if (p.M < 1 || p.N < 1) throw InvalidArgument("ChannelStats: M and N must be at least 1");
    if (p.M > 64 || p.N > 64) throw InvalidArgument("ChannelStats: M and N are limited to 64");
    m_ = p.m_re * p.m_re + p.m_im * p.m_im;
    omega1_sq_ = p.sigma1 * p.sigma1 * (1.0 - p.lambda1 * p.lambda1) / 2.0;
    omega2_sq_ = p.sigma2 * p.sigma2 * (1.0 - p.lambda2 * p.lambda2) / 2.0;
    xi_ = 1.0 + p.sigma1 * p.sigma1 * p.lambda1 * p.lambda1 / (2.0 * omega1_sq_) +
          p.sigma2 * p.sigma2 * p.lambda2 * p.lambda2 / (2.0 * omega2_sq_);
}

ChannelStats ChannelStats::from_snr(double snr1_db, double lambda1, double lambda2, std::uint32_t M, std::uint32_t N,
                                    SnrMapping mapping) {
    if (std::isnan(snr1_db) || snr1_db == std::numeric_limits<double>::infinity()) {
        throw InvalidArgument("from_snr: SNR must be finite or -inf");
    }
    if (!(lambda1 > 0.0 && lambda1 < 1.0)) throw InvalidArgument("from_snr: lambda1 must lie in (0, 1)");
    const double snr = std::pow(10.0, snr1_db / 10.0);
    Params p;
    p.sigma1 = std::sqrt(static_cast<double>(M));
    p.sigma2 = std::sqrt(static_cast<double>(N));
    p.lambda1 = lambda1;
    p.lambda2 = lambda2;
    p.M = M;
    p.N = N;
    double m = 0.0;
    switch (mapping.kind) {
        case SnrMappingKind::unit_noise:
            m = 2.0 * p.sigma1 * p.sigma1 * snr / (lambda1 * lambda1);
            break;
        case SnrMappingKind::axis_scale:
            if (!(mapping.scale > 0.0)) throw InvalidArgument("from_snr: axis scale must be positive");
            m = mapping.scale * M * snr;
            break;
    }
    p.m_re = std::sqrt(m);
    return ChannelStats(p);
}

double snr2_db(double snr1_db, double lambda1, double lambda2, std::uint32_t M, std::uint32_t N) {
    return snr1_db + 20.0 * std::log10(lambda2 / lambda1) + 10.0 * std::log10(static_cast<double>(M) / N);
}

void FusionRule::validate() const {
    if (total < 1) throw InvalidArgument("FusionRule: L must be at least 1");
    if (required < 1 || required > total) {
        throw InvalidArgument("FusionRule: required " + std::to_string(required) + " must lie in [1, " +
                              std::to_string(total) + "]");
    }
}

// ---------------------------------------------------------------- closed forms

double pd_closed_form(const ChannelStats& st) {
    const long double m = st.m();
    const long double s1 = st.sigma1() * static_cast<long double>(st.sigma1());
    const long double s2 = st.sigma2() * static_cast<long double>(st.sigma2());
    const long double o1 = st.omega1_sq(), o2 = st.omega2_sq();
    const std::uint32_t M = st.M(), N = st.N();
    const long double raw = binomial_double_sum(M - 1, N - 1, 0, 0, [&](std::uint32_t k, std::uint32_t l) {
        const long double j1 = M - 1 - k, j2 = N - 1 - l;
        const long double u1 = excess(st.lambda1(), s1, o1, j1) + excess(st.lambda2(), s2, o2, j2);
        const long double U = 1.0L + u1;
        if (!(U > 0.0L)) throw NumericalDomain("pd_closed_form: U(k, l) <= 0");
        const long double V = s1 * s2 / ((o1 * j1 + s1) * (o2 * j2 + s2));
        const long double sign = ((M + N - k - l) % 2 == 0) ? 1.0L : -1.0L;
        return sign * V / U * exp_kernel_excess(m, u1);
    });
    return check_unit(raw, "pd_closed_form");
}

double pfa_closed_form(const ChannelStats& st) {
    const std::uint32_t M = st.M(), N = st.N();
    if (M == 1 || N == 1) return 0.0;
    const long double m = st.m();
    const long double s1 = st.sigma1() * static_cast<long double>(st.sigma1());
    const long double s2 = st.sigma2() * static_cast<long double>(st.sigma2());
    const long double o1 = st.omega1_sq(), o2 = st.omega2_sq();
    const long double raw = binomial_double_sum(M - 1, N - 1, 1, 1, [&](std::uint32_t k, std::uint32_t l) {
        const long double p1 = excess(st.lambda1(), s1, o1, k) + excess(st.lambda2(), s2, o2, l);
        const long double P = 1.0L + p1;
        if (!(P > 0.0L)) throw NumericalDomain("pfa_closed_form: P(k, l) <= 0");
        const long double Q = s1 * s2 / ((o1 * k + s1) * (o2 * l + s2));
        const long double sign = ((k + l) % 2 == 0) ? 1.0L : -1.0L;
        return sign * Q / P * exp_kernel_excess(m, p1);
    });
    return check_unit(raw, "pfa_closed_form");
}

namespace variants {

double pd_printed_xi(const ChannelStats& st) {
    const long double m = st.m();
    const long double s1 = st.sigma1() * static_cast<long double>(st.sigma1());
    const long double s2 = st.sigma2() * static_cast<long double>(st.sigma2());
    const long double o1 = st.omega1_sq(), o2 = st.omega2_sq(), xi = st.xi();
    const long double l1 = st.lambda1(), l2 = st.lambda2();
    const std::uint32_t M = st.M(), N = st.N();
    const long double raw = binomial_double_sum(M - 1, N - 1, 0, 0, [&](std::uint32_t k, std::uint32_t l) {
        const long double d1 = o1 * (static_cast<long double>(k) - M + 1) - s1;
        const long double d2 = o2 * (static_cast<long double>(l) - N + 1) - s2;
        const long double U = xi - xi * l1 * l1 * s1 * s1 / (2.0L * o1 * d1) - xi * l2 * l2 * s2 * s2 / (2.0L * o2 * d2);
        if (!(U > 0.0L)) throw NumericalDomain("pd_printed_xi: U(k, l) <= 0");
        const long double V = s1 * s2 / ((o1 * (M - 1 - k) + s1) * (o2 * (N - 1 - l) + s2));
        const long double sign = ((M + N - k - l) % 2 == 0) ? 1.0L : -1.0L;
        return sign * V / U * exp_kernel(m, U);
    });
    return static_cast<double>(raw);
}

double pfa_diagonal(const ChannelStats& st) {
    const std::uint32_t M = st.M(), N = st.N();
    if (M == 1 || N == 1) return 0.0;
    const long double m = st.m();
    const long double s1 = st.sigma1() * static_cast<long double>(st.sigma1());
    const long double s2 = st.sigma2() * static_cast<long double>(st.sigma2());
    const long double o1 = st.omega1_sq(), o2 = st.omega2_sq(), xi = st.xi();
    const auto c1 = pascal_row(M - 1);
    const auto c2 = pascal_row(N - 1);
    long double acc = 0.0L;
    for (std::uint32_t k = 1; k <= std::min(M - 1, N - 1); ++k) {
        const long double P = xi - correction(st.lambda1(), s1, o1, k) - correction(st.lambda2(), s2, o2, k);
        const long double Q = s1 * s2 / ((o1 * k + s1) * (o2 * k + s2));
        const long double sign = (k % 2 == 1) ? 1.0L : -1.0L;
        acc += sign * c1[k] * c2[k] * Q / P * exp_kernel(m, P);
    }
    return static_cast<double>(acc);
}

}  // namespace variants

// ---------------------------------------------------------------- oracles

double pd_oracle(const ChannelStats& st, const QuadSpec& spec) {
    const QuadSpec in = inner_spec(spec);
    const double s1 = st.sigma1() * st.sigma1(), s2 = st.sigma2() * st.sigma2();
    return integrate_over_shared_component(st, spec, [&](double rho) {
        const double g1 = conditional_probability(st.sigma1() * st.lambda1() * rho, st.omega1_sq(), s1, st.M() - 1,
                                                  false, in);
        const double g2 = conditional_probability(st.sigma2() * st.lambda2() * rho, st.omega2_sq(), s2, st.N() - 1,
                                                  false, in);
        return g1 * g2;
    });
}

double pfa_oracle(const ChannelStats& st, const QuadSpec& spec) {
    if (st.M() == 1 || st.N() == 1) return 0.0;
    const QuadSpec in = inner_spec(spec);
    const double s1 = st.sigma1() * st.sigma1(), s2 = st.sigma2() * st.sigma2();
    return integrate_over_shared_component(st, spec, [&](double rho) {
        const double h1 = conditional_probability(st.sigma1() * st.lambda1() * rho, st.omega1_sq(), s1, st.M() - 1,
                                                  true, in);
        if (h1 == 0.0) return 0.0;
        const double h2 = conditional_probability(st.sigma2() * st.lambda2() * rho, st.omega2_sq(), s2, st.N() - 1,
                                                  true, in);
        return h1 * h2;
    });
}

double rician_pdf(double r, double nu, double s2) {
    if (!(s2 > 0.0)) throw InvalidArgument("rician_pdf: variance must be positive");
    if (r < 0.0) throw InvalidArgument("rician_pdf: negative amplitude");
    if (r == 0.0) return 0.0;
    return std::exp(log_rician_pdf(r, nu, s2));
}

double bivariate_rician_pdf(double r1, double r2, const ChannelStats& st, const QuadSpec& spec) {
    if (r1 < 0.0 || r2 < 0.0 || !std::isfinite(r1) || !std::isfinite(r2)) {
        throw InvalidArgument("bivariate_rician_pdf: amplitudes must be finite and non-negative");
    }
    spec.validate();
    if (r1 == 0.0 || r2 == 0.0) return 0.0;
    const double m = st.m(), xi = st.xi();
    const std::array<double, 2> r{r1, r2};
    const std::array<double, 2> o{st.omega1_sq(), st.omega2_sq()};
    const std::array<double, 2> sl{st.sigma1() * st.lambda1(), st.sigma2() * st.lambda2()};

    auto log_integrand = [&](double t) {
        double v = -t * xi - m + numerics::bessel_i0_log(2.0 * std::sqrt(m * t));
        for (int p = 0; p < 2; ++p) {
            v += std::log(r[p] / o[p]) - r[p] * r[p] / (2.0 * o[p]) +
                 numerics::bessel_i0_log(r[p] * sl[p] * std::sqrt(t) / o[p]);
        }
        return v;
    };

    // locate the peak on a geometric grid, then integrate around it with
    // the peak value factored out
    double t_peak = 0.0, l_peak = log_integrand(0.0);
    for (double t = 1e-8; t < 1e8; t *= 1.05) {
        const double v = log_integrand(t);
        if (v > l_peak) {
            l_peak = v;
            t_peak = t;
        }
    }
    const double width = std::max(1.0, 2.0 * std::sqrt(t_peak)) / std::sqrt(xi);
    auto f = [&](double t) { return std::exp(log_integrand(t) - l_peak); };

    double total = 0.0;
    const double split = std::max(0.0, t_peak - 10.0 * width);
    if (split > 0.0) total += numerics::integrate(f, 0.0, split, spec).value;
    if (t_peak > split) total += numerics::integrate(f, split, t_peak, spec).value;
    QuadSpec tail = spec;
    tail.scale = width;
    total += numerics::integrate_semi_infinite([&](double u) { return f(t_peak + u); }, tail).value;
    return total * std::exp(l_peak);
}

// ---------------------------------------------------------------- fusion

double combine_m_of_l(std::span<const double> p, const FusionRule& rule) {
    rule.validate();
    if (p.size() != rule.total) {
        throw InvalidArgument("combine_m_of_l: " + std::to_string(p.size()) + " probabilities for L = " +
                              std::to_string(rule.total));
    }
    for (double x : p) {
        if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("combine_m_of_l: probabilities must lie in [0, 1]");
    }
    if (rule.required == rule.total) {
        double prod = 1.0;
        for (double x : p) prod *= x;
        return prod;
    }
    // distribution of the number of firing channels
    std::vector<double> count(p.size() + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t c = i + 1; c > 0; --c) count[c] = count[c] * (1.0 - p[i]) + count[c - 1] * p[i];
        count[0] *= 1.0 - p[i];
    }
    double acc = 0.0;
    for (std::size_t c = rule.required; c <= p.size(); ++c) acc += count[c];
    return std::clamp(acc, 0.0, 1.0);
}

}  // namespace doppler::detection
