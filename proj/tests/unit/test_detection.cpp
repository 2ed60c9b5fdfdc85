#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "doppler/detection/detection.hpp"
#include "doppler/error.hpp"
#include "doppler/numerics/quadrature.hpp"

using namespace doppler;
using namespace doppler::detection;

namespace {

ChannelStats make(double m, std::uint32_t M, std::uint32_t N, double l1 = 0.5, double l2 = 0.99, double s1 = 1.3,
                  double s2 = 0.7) {
    ChannelStats::Params p;
    p.sigma1 = s1;
    p.sigma2 = s2;
    p.lambda1 = l1;
    p.lambda2 = l2;
    p.m_re = std::sqrt(m);
    p.M = M;
    p.N = N;
    return ChannelStats(p);
}

const SnrMapping kMappings[] = {SnrMapping::unit_noise(), SnrMapping::axis_scale(0.32)};

}  // namespace

TEST(ChannelStats, DerivedParameters) {
    const auto s = make(4.0, 7, 8, 0.5, 0.99, 2.0, 3.0);
    EXPECT_DOUBLE_EQ(s.m(), 4.0);
    EXPECT_DOUBLE_EQ(s.omega1_sq(), 4.0 * 0.75 / 2);
    EXPECT_DOUBLE_EQ(s.omega2_sq(), 9.0 * (1 - 0.99 * 0.99) / 2);
    EXPECT_NEAR(s.xi(), 1 + 0.25 / 0.75 + 0.9801 / (1 - 0.9801), 1e-12);
    EXPECT_GE(s.xi(), 1.0);
}

TEST(ChannelStats, RejectsBadParameters) {
    EXPECT_THROW(make(1.0, 7, 8, 1.0, 0.5), InvalidArgument);
    EXPECT_THROW(make(1.0, 7, 8, 0.5, 0.0), InvalidArgument);
    EXPECT_THROW(make(1.0, 0, 8), InvalidArgument);
    EXPECT_THROW(make(1.0, 7, 8, 0.5, 0.5, -1.0), InvalidArgument);
    EXPECT_THROW(ChannelStats::from_snr(10.0, 1.0, 0.5, 7, 8), InvalidArgument);
}

TEST(FromSnr, UnitNoiseArithmetic) {
    const auto s = ChannelStats::from_snr(10.0, 0.5, 0.99, 7, 8);
    EXPECT_NEAR(s.m(), 560.0, 1e-9);
    EXPECT_DOUBLE_EQ(s.sigma1() * s.sigma1(), 7.0);
    EXPECT_DOUBLE_EQ(s.sigma2() * s.sigma2(), 8.0);
    EXPECT_EQ(ChannelStats::from_snr(-INFINITY, 0.5, 0.99, 7, 8).m(), 0.0);
}

TEST(FromSnr, AxisScaleArithmetic) {
    const auto s = ChannelStats::from_snr(10.0, 0.5, 0.99, 7, 8, SnrMapping::axis_scale(0.32));
    EXPECT_NEAR(s.m(), 0.32 * 7 * 10, 1e-9);
}

TEST(FromSnr, Snr2Relation) {
    const double d = snr2_db(3.0, 0.5, 0.99, 7, 8) - 3.0;
    EXPECT_NEAR(std::pow(10.0, d / 10), (0.99 / 0.5) * (0.99 / 0.5) * 7.0 / 8.0, 1e-12);
}

TEST(PdClosedForm, NoCompetitorsIsCertain) {
    for (double m : {0.0, 1.0, 50.0, 5000.0}) EXPECT_NEAR(pd_closed_form(make(m, 1, 1)), 1.0, 1e-12);
}

TEST(PdClosedForm, PrintedXiVariantBreaksNoCompetitorCase) {
    // with xi attached to the corrections U(0, 0) != 1, so PD(M = N = 1) != 1
    EXPECT_GT(std::abs(variants::pd_printed_xi(make(4.0, 1, 1)) - 1.0), 0.1);
}

TEST(PdClosedForm, IndependentOfSigma) {
    for (std::uint32_t M : {2u, 7u, 13u}) {
        const double a = pd_closed_form(make(9.0, M, 8, 0.5, 0.99, 1.0, 1.0));
        const double b = pd_closed_form(make(9.0, M, 8, 0.5, 0.99, 3.7, 0.2));
        EXPECT_NEAR(a, b, 1e-12);
        EXPECT_NEAR(pfa_closed_form(make(9.0, M, 8, 0.5, 0.99, 1.0, 1.0)),
                    pfa_closed_form(make(9.0, M, 8, 0.5, 0.99, 3.7, 0.2)), 1e-12);
    }
}

TEST(PfaClosedForm, SingleCellChannelsNeverFalseAlarm) {
    EXPECT_EQ(pfa_closed_form(make(3.0, 1, 8)), 0.0);
    EXPECT_EQ(pfa_closed_form(make(3.0, 8, 1)), 0.0);
    EXPECT_EQ(pfa_oracle(make(3.0, 1, 8)), 0.0);
}

TEST(PfaClosedForm, NoTargetTwoByTwoMatchesOracle) {
    const auto s = make(0.0, 2, 2);
    EXPECT_NEAR(pfa_closed_form(s), pfa_oracle(s), 1e-9);
    EXPECT_NEAR(pd_closed_form(s), pd_oracle(s), 1e-9);
}

TEST(ClosedForm, OracleAgreementGrid) {
    for (const auto& mapping : kMappings) {
        for (double snr : {0.0, 4.0, 8.0, 12.0, 16.0}) {
            for (std::uint32_t M : {3u, 7u, 11u, 13u, 17u}) {
                const auto s = ChannelStats::from_snr(snr, 0.5, 0.99, M, 8, mapping);
                EXPECT_NEAR(pd_closed_form(s), pd_oracle(s), 1e-6) << "snr=" << snr << " M=" << M;
                EXPECT_NEAR(pfa_closed_form(s), pfa_oracle(s), 1e-6) << "snr=" << snr << " M=" << M;
            }
        }
    }
}

TEST(ClosedForm, OracleAgreementOtherLoadings) {
    for (double l1 : {0.2, 0.7, 0.95}) {
        for (double l2 : {0.3, 0.8}) {
            for (double m : {0.0, 0.7, 6.0, 30.0}) {
                const auto s = make(m, 5, 4, l1, l2);
                EXPECT_NEAR(pd_closed_form(s), pd_oracle(s), 1e-6) << l1 << " " << l2 << " " << m;
                EXPECT_NEAR(pfa_closed_form(s), pfa_oracle(s), 1e-6) << l1 << " " << l2 << " " << m;
            }
        }
    }
}

TEST(ClosedForm, DetectionAndFalseAlarmDisjoint) {
    for (double l1 : {0.1, 0.5, 0.9}) {
        for (double m : {0.0, 0.5, 3.0, 20.0, 200.0}) {
            for (std::uint32_t M : {1u, 2u, 5u, 19u}) {
                for (std::uint32_t N : {1u, 3u, 8u}) {
                    const auto s = make(m, M, N, l1, 0.99);
                    EXPECT_LE(pd_closed_form(s) + pfa_closed_form(s), 1.0 + 1e-9);
                }
            }
        }
    }
}

TEST(ClosedForm, PhaseInvariance) {
    ChannelStats::Params a;
    a.lambda1 = 0.5;
    a.lambda2 = 0.99;
    a.M = 11;
    a.N = 8;
    a.m_re = 3.0;
    auto b = a;
    b.m_re = 0.0;
    b.m_im = 3.0;
    auto c = a;
    c.m_re = -3.0;
    const ChannelStats sa(a), sb(b), sc(c);
    ASSERT_EQ(sa.m(), sb.m());
    EXPECT_EQ(pd_closed_form(sa), pd_closed_form(sb));
    EXPECT_EQ(pd_closed_form(sa), pd_closed_form(sc));
    EXPECT_EQ(pfa_closed_form(sa), pfa_closed_form(sb));
}

TEST(ClosedForm, MonotoneInSnr) {
    for (const auto& mapping : kMappings) {
        for (std::uint32_t M : {3u, 7u, 17u}) {
            double prev_pd = -1.0, prev_pfa = 2.0;
            for (double snr = -5.0; snr <= 15.0; snr += 0.5) {
                const auto s = ChannelStats::from_snr(snr, 0.5, 0.99, M, 8, mapping);
                const double pd = pd_closed_form(s), pfa = pfa_closed_form(s);
                EXPECT_GE(pd, prev_pd - 1e-12) << "snr=" << snr << " M=" << M;
                EXPECT_LE(pfa, prev_pfa + 1e-12) << "snr=" << snr << " M=" << M;
                prev_pd = pd;
                prev_pfa = pfa;
            }
        }
    }
}

TEST(ClosedForm, HighSnrStaysFinite) {
    const auto s = ChannelStats::from_snr(30.0, 0.5, 0.99, 19, 8);
    ASSERT_GT(s.m(), 500.0);
    EXPECT_NEAR(pd_closed_form(s), 1.0, 1e-9);
    EXPECT_NEAR(pfa_closed_form(s), 0.0, 1e-9);
}

TEST(PdOracle, NoCompetitors) { EXPECT_NEAR(pd_oracle(make(5.0, 1, 1)), 1.0, 1e-9); }

TEST(Fusion, ProductWhenAllRequired) {
    const std::vector<double> p{0.9, 0.8, 0.7, 0.6};
    EXPECT_DOUBLE_EQ(combine_m_of_l(p, {4, 4}), 0.9 * 0.8 * 0.7 * 0.6);
}

TEST(Fusion, Examples) {
    const std::vector<double> p{0.9, 0.8};
    EXPECT_NEAR(combine_m_of_l(p, {1, 2}), 0.98, 1e-15);
    EXPECT_DOUBLE_EQ(combine_m_of_l(std::vector<double>{0.37}, {1, 1}), 0.37);
}

TEST(Fusion, MatchesEnumeration) {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::uint32_t L = 1; L <= 6; ++L) {
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> p(L);
            for (auto& x : p) x = u(gen);
            for (std::uint32_t req = 1; req <= L; ++req) {
                double expect = 0.0;
                for (std::uint32_t mask = 0; mask < (1u << L); ++mask) {
                    if (static_cast<std::uint32_t>(__builtin_popcount(mask)) < req) continue;
                    double w = 1.0;
                    for (std::uint32_t i = 0; i < L; ++i) w *= (mask >> i & 1u) ? p[i] : 1.0 - p[i];
                    expect += w;
                }
                EXPECT_NEAR(combine_m_of_l(p, {req, L}), expect, 1e-14);
            }
        }
    }
}

TEST(Fusion, RejectsBadRule) {
    const std::vector<double> p{0.5, 0.5};
    EXPECT_THROW(combine_m_of_l(p, {3, 2}), InvalidArgument);
    EXPECT_THROW(combine_m_of_l(p, {0, 2}), InvalidArgument);
    EXPECT_THROW(combine_m_of_l(p, {1, 3}), InvalidArgument);
    EXPECT_THROW(combine_m_of_l(std::vector<double>{1.5, 0.1}, {1, 2}), InvalidArgument);
}

TEST(BivariatePdf, ZeroOnAxes) {
    const auto s = make(4.0, 7, 8);
    EXPECT_EQ(bivariate_rician_pdf(0.0, 0.0, s), 0.0);
    EXPECT_EQ(bivariate_rician_pdf(0.0, 1.0, s), 0.0);
    EXPECT_THROW(bivariate_rician_pdf(-1.0, 1.0, s), InvalidArgument);
}

TEST(BivariatePdf, MarginalIsRician) {
    const auto s = make(4.0, 7, 8, 0.5, 0.99, 1.0, 1.0);
    const double nu2 = s.sigma2() * s.lambda2() * std::sqrt(s.m());
    const double sd2 = s.sigma2() / std::sqrt(2.0);
    for (double r1 : {0.3, 1.0, 1.8}) {
        numerics::QuadSpec outer;
        outer.rel_tol = 1e-8;
        const double marg =
            numerics::integrate([&](double r2) { return bivariate_rician_pdf(r1, r2, s); }, std::max(1e-9, nu2 - 12 * sd2),
                                nu2 + 12 * sd2, outer)
                .value;
        const double nu1 = s.sigma1() * s.lambda1() * std::sqrt(s.m());
        const double expect = rician_pdf(r1, nu1, s.sigma1() * s.sigma1() / 2.0);
        EXPECT_NEAR(marg, expect, 1e-6) << "r1=" << r1;
    }
}

TEST(BivariatePdf, Normalized) {
    const auto s = make(4.0, 7, 8, 0.5, 0.99, 1.0, 1.0);
    numerics::QuadSpec outer;
    outer.rel_tol = 1e-6;
    outer.abs_tol = 1e-9;
    const double nu1 = s.lambda1() * 2.0, nu2 = s.lambda2() * 2.0;
    const double sd = 1.0 / std::sqrt(2.0);
    const double total = numerics::integrate(
                             [&](double r1) {
                                 return numerics::integrate([&](double r2) { return bivariate_rician_pdf(r1, r2, s); },
                                                            std::max(1e-9, nu2 - 10 * sd), nu2 + 10 * sd, outer)
                                     .value;
                             },
                             1e-9, nu1 + 10 * sd, outer)
                             .value;
    EXPECT_NEAR(total, 1.0, 1e-4);
}

TEST(BivariatePdf, LargeNoncentralityStaysFinite) {
    const auto s = make(400.0, 7, 8, 0.5, 0.99, 1.0, 1.0);
    const double v = bivariate_rician_pdf(0.5 * 20.0, 0.99 * 20.0, s);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0.0);
}
