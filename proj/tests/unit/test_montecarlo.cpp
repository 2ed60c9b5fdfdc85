#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "doppler/detection/detection.hpp"
#include "doppler/error.hpp"
#include "doppler/montecarlo/montecarlo.hpp"

using namespace doppler;
using namespace doppler::montecarlo;
using detection::ChannelStats;
using numerics::RngStream;

namespace {

ChannelStats make(double m_re, double m_im, std::uint32_t M, std::uint32_t N, double l1 = 0.5, double l2 = 0.99,
                  double s1 = 1.0, double s2 = 1.0) {
    ChannelStats::Params p;
    p.sigma1 = s1;
    p.sigma2 = s2;
    p.lambda1 = l1;
    p.lambda2 = l2;
    p.m_re = m_re;
    p.m_im = m_im;
    p.M = M;
    p.N = N;
    return ChannelStats(p);
}

McConfig config(const ChannelStats& s, std::uint64_t trials, std::uint64_t seed, unsigned threads = 1) {
    McConfig c;
    c.stats = s;
    c.trials = trials;
    c.seed = seed;
    c.threads = threads;
    return c;
}

}  // namespace

TEST(SamplePair, ComplexCorrelationIsProductOfLoadings) {
    const auto s = make(1.0, -0.5, 7, 8, 0.6, 0.8, 1.5, 0.7);
    RngStream rng(5, 0);
    const int n = 1'000'000;
    std::vector<std::complex<double>> g1(n), g2(n);
    std::complex<double> mu1 = 0.0, mu2 = 0.0;
    for (int i = 0; i < n; ++i) {
        std::tie(g1[i], g2[i]) = sample_target_cells(rng, s);
        mu1 += g1[i];
        mu2 += g2[i];
    }
    mu1 /= n;
    mu2 /= n;
    std::complex<double> cov = 0.0;
    double v1 = 0.0, v2 = 0.0;
    for (int i = 0; i < n; ++i) {
        cov += (g1[i] - mu1) * std::conj(g2[i] - mu2);
        v1 += std::norm(g1[i] - mu1);
        v2 += std::norm(g2[i] - mu2);
    }
    const std::complex<double> rho = cov / std::sqrt(v1 * v2);
    const double target = 0.6 * 0.8;
    const double se = (1.0 - target * target) / std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(rho.real(), target, 3 * se);
    EXPECT_NEAR(rho.imag(), 0.0, 3 * se);
}

TEST(SamplePair, MeanOfTargetCell) {
    // with sigma1 = 1 the mean is lambda1 (m_re + j m_im); in general sigma1 lambda1 (m_re + j m_im)
    for (double s1 : {1.0, 2.5}) {
        const auto s = make(1.2, 0.7, 7, 8, 0.6, 0.8, s1, 1.0);
        RngStream rng(6, 0);
        const int n = 1'000'000;
        std::complex<double> mu = 0.0;
        for (int i = 0; i < n; ++i) mu += sample_target_cells(rng, s).first;
        mu /= n;
        const double sd = s1 / std::sqrt(2.0 * n);  // per-component std of the mean
        EXPECT_NEAR(mu.real(), s1 * 0.6 * 1.2, 3 * sd);
        EXPECT_NEAR(mu.imag(), s1 * 0.6 * 0.7, 3 * sd);
    }
}

TEST(SamplePair, NearIndependentWhenLoadingsTiny) {
    const auto s = make(0.0, 0.0, 2, 2, 1e-4, 1e-4);
    RngStream rng(7, 0);
    const int n = 1'000'000;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const auto [r1, r2] = sample_pair(rng, s);
        const double x = r1 * r1, y = r2 * r2;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
    EXPECT_NEAR(corr, 0.0, 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Competitor, RayleighScale) {
    // E|w|^2 = 2 sigma^2 for per-component variance sigma^2
    RngStream rng(8, 0);
    const int n = 1'000'000;
    double acc = 0;
    for (int i = 0; i < n; ++i) acc += std::pow(sample_competitor(rng, 1.7), 2);
    const double mean = acc / n;
    const double expect = 2 * 1.7 * 1.7;
    EXPECT_NEAR(mean, expect, 3 * expect / std::sqrt(static_cast<double>(n)));
}

TEST(RunTrial, NoCompetitorsAlwaysDetects) {
    const auto s = make(0.0, 0.0, 1, 1);
    RngStream rng(9, 0);
    for (int i = 0; i < 10000; ++i) ASSERT_EQ(run_trial(rng, s), Outcome::detection);
}

TEST(RunTrial, HugeSnrDetects) {
    const auto s = make(100.0, 0.0, 7, 8);
    const auto e = estimate(config(s, 100000, 10));
    EXPECT_TRUE(concordant(e.pd_hat, detection::pd_closed_form(s), e.trials));
    EXPECT_GE(e.pd_hat, 1.0 - 3 * std::sqrt(1.0 / 100000));
}

TEST(Estimate, Deterministic) {
    const auto s = make(2.0, 0.0, 7, 8);
    const auto a = estimate(config(s, 20000, 11, 1));
    const auto b = estimate(config(s, 20000, 11, 1));
    const auto c = estimate(config(s, 20000, 11, 4));
    EXPECT_EQ(a.detections, b.detections);
    EXPECT_EQ(a.false_alarms, b.false_alarms);
    EXPECT_EQ(a.pd_hat, b.pd_hat);
    EXPECT_EQ(a.pfa_hat, b.pfa_hat);
    EXPECT_EQ(a.detections, c.detections);
    EXPECT_EQ(a.false_alarms, c.false_alarms);
    EXPECT_EQ(a.mixed, c.mixed);
}

TEST(Estimate, OutcomesPartitionTrials) {
    const auto s = make(1.0, 0.0, 5, 3);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto e = estimate(config(s, 12345, seed));
        EXPECT_EQ(e.detections + e.false_alarms + e.mixed, e.trials);
        EXPECT_LE(e.pd_hat + e.pfa_hat, 1.0);
        EXPECT_DOUBLE_EQ(e.stderr_pd, std::sqrt(e.pd_hat * (1 - e.pd_hat) / e.trials));
    }
}

TEST(Estimate, NoTargetTwoByTwoMatchesOracles) {
    const auto s = make(0.0, 0.0, 2, 2);
    const auto e = estimate(config(s, 1'000'000, 12));
    EXPECT_TRUE(concordant(e.pd_hat, detection::pd_oracle(s), e.trials)) << e.pd_hat;
    EXPECT_TRUE(concordant(e.pfa_hat, detection::pfa_oracle(s), e.trials)) << e.pfa_hat;
}

TEST(Estimate, NoTargetMatchesClosedFormAtOperatingGeometry) {
    for (std::uint32_t M : {7u, 17u}) {
        const auto s = make(0.0, 0.0, M, 8);
        const auto e = estimate(config(s, 1'000'000, 13));
        EXPECT_TRUE(concordant(e.pd_hat, detection::pd_closed_form(s), e.trials)) << M;
        EXPECT_TRUE(concordant(e.pfa_hat, detection::pfa_closed_form(s), e.trials)) << M;
    }
}

TEST(Estimate, ConcordantAtFigureTwoPoint) {
    const auto s = ChannelStats::from_snr(10.0, 0.5, 0.99, 7, 8, detection::SnrMapping::axis_scale(0.32));
    const auto e = estimate(config(s, 1'000'000, 14));
    EXPECT_TRUE(concordant(e.pd_hat, detection::pd_closed_form(s), e.trials))
        << e.pd_hat << " vs " << detection::pd_closed_form(s);
    EXPECT_TRUE(concordant(e.pfa_hat, detection::pfa_closed_form(s), e.trials));
}

TEST(Estimate, ConcordanceRate) {
    // >= 99 of 100 seeded runs within 3 standard errors (expected ~99.7)
    const auto s = ChannelStats::from_snr(5.0, 0.5, 0.99, 11, 8, detection::SnrMapping::axis_scale(0.32));
    const double pd = detection::pd_closed_form(s), pfa = detection::pfa_closed_form(s);
    int ok_pd = 0, ok_pfa = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto e = estimate(config(s, 20000, 1000 + seed));
        ok_pd += concordant(e.pd_hat, pd, e.trials);
        ok_pfa += concordant(e.pfa_hat, pfa, e.trials);
    }
    EXPECT_GE(ok_pd, 99);
    EXPECT_GE(ok_pfa, 99);
}

TEST(Estimate, VarianceHalvesWhenTrialsDouble) {
    const auto s = ChannelStats::from_snr(5.0, 0.5, 0.99, 7, 8, detection::SnrMapping::axis_scale(0.32));
    auto spread = [&](std::uint64_t trials, std::uint64_t base) {
        std::vector<double> v;
        for (std::uint64_t seed = 0; seed < 32; ++seed) v.push_back(estimate(config(s, trials, base + seed)).pd_hat);
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double acc = 0;
        for (double x : v) acc += (x - mean) * (x - mean);
        return acc / (v.size() - 1);
    };
    const double v1 = spread(20000, 5000), v2 = spread(40000, 6000);
    EXPECT_NEAR(v2 / v1, 0.5, 0.5 * 0.2) << "v1=" << v1 << " v2=" << v2;
}

TEST(Estimate, RejectsZeroTrials) {
    McConfig c;
    c.trials = 0;
    EXPECT_THROW(estimate(c), InvalidArgument);
}

TEST(Concordant, DegenerateEstimate) {
    EXPECT_TRUE(concordant(1.0, 1.0 - 1e-9, 1'000'000));
    EXPECT_FALSE(concordant(1.0, 0.99, 1'000'000));
    EXPECT_TRUE(concordant(0.0, 0.0, 10));
}
