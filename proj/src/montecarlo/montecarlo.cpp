#include "doppler/montecarlo/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>
#include <vector>

#include "doppler/error.hpp"

namespace doppler::montecarlo {

using detection::ChannelStats;
using numerics::RngStream;

void McConfig::validate() const {
    if (trials < 1) throw InvalidArgument("McConfig: trials must be at least 1");
}

std::pair<std::complex<double>, std::complex<double>> sample_target_cells(RngStream& rng, const ChannelStats& st) {
    const auto& p = st.params();
    // N(mean, 1/2)
    const double h = std::sqrt(0.5);
    const double a0 = p.m_re + h * rng.standard_normal();
    const double b0 = p.m_im + h * rng.standard_normal();
    const double a1 = h * rng.standard_normal();
    const double b1 = h * rng.standard_normal();
    const double a2 = h * rng.standard_normal();
    const double b2 = h * rng.standard_normal();
    const double c1 = std::sqrt(1.0 - p.lambda1 * p.lambda1);
    const double c2 = std::sqrt(1.0 - p.lambda2 * p.lambda2);
    const std::complex<double> g1(p.sigma1 * (c1 * a1 + p.lambda1 * a0), p.sigma1 * (c1 * b1 + p.lambda1 * b0));
    const std::complex<double> g2(p.sigma2 * (c2 * a2 + p.lambda2 * a0), p.sigma2 * (c2 * b2 + p.lambda2 * b0));
    return {g1, g2};
}

std::pair<double, double> sample_pair(RngStream& rng, const ChannelStats& st) {
    const auto [g1, g2] = sample_target_cells(rng, st);
    return {std::abs(g1), std::abs(g2)};
}

namespace {

double competitor_power(RngStream& rng, double sigma) {
    const double re = sigma * rng.standard_normal();
    const double im = sigma * rng.standard_normal();
    return re * re + im * im;
}

}  // namespace

double sample_competitor(RngStream& rng, double sigma) { return std::sqrt(competitor_power(rng, sigma)); }

Outcome run_trial(RngStream& rng, const ChannelStats& st) {
    // amplitudes compared through their squares
    const auto [g1, g2] = sample_target_cells(rng, st);
    const double r1 = std::norm(g1), r2 = std::norm(g2);
    double x_max = -1.0, y_max = -1.0;
    for (std::uint32_t k = 1; k < st.M(); ++k) x_max = std::max(x_max, competitor_power(rng, st.sigma1()));
    for (std::uint32_t l = 1; l < st.N(); ++l) y_max = std::max(y_max, competitor_power(rng, st.sigma2()));
    if (r1 > x_max && r2 > y_max) return Outcome::detection;
    if (x_max > r1 && y_max > r2) return Outcome::false_alarm;
    return Outcome::mixed;
}

McEstimate estimate(const McConfig& cfg) {
    cfg.validate();
    unsigned workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, cfg.trials));

    std::vector<std::array<std::uint64_t, 3>> counts(workers, {0, 0, 0});
    auto work = [&](unsigned w) {
        const std::uint64_t begin = cfg.trials * w / workers;
        const std::uint64_t end = cfg.trials * (w + 1) / workers;
        auto& c = counts[w];
        for (std::uint64_t t = begin; t < end; ++t) {
            RngStream rng(cfg.seed, t);
            ++c[static_cast<int>(run_trial(rng, cfg.stats))];
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    McEstimate out;
    for (const auto& c : counts) {
        out.detections += c[static_cast<int>(Outcome::detection)];
        out.false_alarms += c[static_cast<int>(Outcome::false_alarm)];
        out.mixed += c[static_cast<int>(Outcome::mixed)];
    }
    out.trials = cfg.trials;
    out.seed = cfg.seed;
    const double n = static_cast<double>(cfg.trials);
    out.pd_hat = static_cast<double>(out.detections) / n;
    out.pfa_hat = static_cast<double>(out.false_alarms) / n;
    out.stderr_pd = binomial_stderr(out.pd_hat, cfg.trials);
    out.stderr_pfa = binomial_stderr(out.pfa_hat, cfg.trials);
    return out;
}

double binomial_stderr(double p, std::uint64_t n) {
    if (n == 0) throw InvalidArgument("binomial_stderr: n must be positive");
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

bool concordant(double p_hat, double p_ref, std::uint64_t n, double k) {
    const double se = std::max(binomial_stderr(p_hat, n), binomial_stderr(p_ref, n));
    return std::abs(p_hat - p_ref) <= k * se;
}

}  // namespace doppler::montecarlo
