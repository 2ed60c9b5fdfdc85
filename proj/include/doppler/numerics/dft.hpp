#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace doppler::numerics {

using ComplexSample = std::complex<double>;

/// Lengths at or below this use the direct O(K^2) sum; longer ones go
/// through the FFT.
inline constexpr std::size_t kDirectTransformMaxLength = 64;

/// X[k] = sum_n x[n] exp(-j 2 pi k n / K). Throws InvalidArgument on empty input.
std::vector<ComplexSample> dft_1d(std::span<const ComplexSample> x);

/// Inverse of dft_1d, including the 1/K factor.
std::vector<ComplexSample> idft_1d(std::span<const ComplexSample> X);

std::vector<ComplexSample> dft_direct(std::span<const ComplexSample> x);
std::vector<ComplexSample> dft_fft(std::span<const ComplexSample> x);

/// Row-major rows x cols grid of complex samples.
class ComplexGrid {
public:
    ComplexGrid() = default;
    ComplexGrid(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    ComplexSample& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const ComplexSample& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<ComplexSample> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const ComplexSample> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<ComplexSample> data() noexcept { return data_; }
    std::span<const ComplexSample> data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<ComplexSample> data_;
};

/// Separable 2-D DFT: along rows' index (length rows, pulse axis) and
/// along columns' index (length cols, subpulse axis).
ComplexGrid dft_2d(const ComplexGrid& x);

}  // namespace doppler::numerics
