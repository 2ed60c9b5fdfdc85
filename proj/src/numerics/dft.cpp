#include "doppler/numerics/dft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "doppler/error.hpp"
#include "doppler/numerics/kernels.hpp"

namespace doppler::numerics {

namespace {

// exp(+j 2 pi r / K) for r in [0, K)
std::vector<ComplexSample> twiddles(std::size_t K) {
    std::vector<ComplexSample> w(K);
    for (std::size_t r = 0; r < K; ++r) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(K);
        w[r] = {std::cos(phase), std::sin(phase)};
    }
    return w;
}

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan forward(std::size_t n) { return get(n, FFTW_FORWARD); }
    fftw_plan backward(std::size_t n) { return get(n, FFTW_BACKWARD); }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    // Planning is not thread-safe in FFTW; execution through
    // fftw_execute_dft on caller arrays is.
    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<ComplexSample> scratch_in(n), scratch_out(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(scratch_in.data()),
                                          reinterpret_cast<fftw_complex*>(scratch_out.data()), sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

void execute(fftw_plan plan, std::span<const ComplexSample> in, std::span<ComplexSample> out) {
    // FFTW's new-array execute takes non-const input even for out-of-place plans.
    auto* src = const_cast<fftw_complex*>(reinterpret_cast<const fftw_complex*>(in.data()));
    fftw_execute_dft(plan, src, reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

std::vector<ComplexSample> dft_direct(std::span<const ComplexSample> x) {
    const std::size_t K = x.size();
    if (K == 0) throw InvalidArgument("dft: empty input");
    const auto w = twiddles(K);
    std::vector<ComplexSample> row(K);
    std::vector<ComplexSample> X(K);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t n = 0; n < K; ++n) row[n] = w[(k * n) % K];
        X[k] = kernels::dot_conj(x, row);
    }
    return X;
}

std::vector<ComplexSample> dft_fft(std::span<const ComplexSample> x) {
    const std::size_t K = x.size();
    if (K == 0) throw InvalidArgument("dft: empty input");
    std::vector<ComplexSample> X(K);
    execute(PlanCache::instance().forward(K), x, X);
    return X;
}

std::vector<ComplexSample> dft_1d(std::span<const ComplexSample> x) {
    return x.size() <= kDirectTransformMaxLength ? dft_direct(x) : dft_fft(x);
}

std::vector<ComplexSample> idft_1d(std::span<const ComplexSample> X) {
    const std::size_t K = X.size();
    if (K == 0) throw InvalidArgument("idft: empty input");
    std::vector<ComplexSample> conj_in(K);
    for (std::size_t k = 0; k < K; ++k) conj_in[k] = std::conj(X[k]);
    auto y = dft_1d(conj_in);
    const double inv = 1.0 / static_cast<double>(K);
    for (auto& v : y) v = std::conj(v) * inv;
    return y;
}

ComplexGrid dft_2d(const ComplexGrid& x) {
    const std::size_t M = x.rows();
    const std::size_t N = x.cols();
    if (M == 0 || N == 0) throw InvalidArgument("dft_2d: degenerate grid");

    ComplexGrid out(M, N);
    std::vector<ComplexSample> column(M);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t m = 0; m < M; ++m) column[m] = x(m, n);
        const auto Xc = dft_1d(column);
        for (std::size_t m = 0; m < M; ++m) out(m, n) = Xc[m];
    }
    for (std::size_t m = 0; m < M; ++m) {
        const auto Xr = dft_1d(out.row(m));
        std::copy(Xr.begin(), Xr.end(), out.row(m).begin());
    }
    return out;
}

}  // namespace doppler::numerics
