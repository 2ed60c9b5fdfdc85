#pragma once

#include <cstddef>
#include <functional>

namespace doppler::numerics {

struct QuadSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    std::size_t max_subdivisions = 2000;
    /// Width of the first panel on [0, inf). Should be on the order of the
    /// distance to where the integrand starts decaying.
    double scale = 1.0;

    void validate() const;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (21-point) on [a, b]. Meets
/// error <= max(abs_tol, rel_tol * |value|) or throws ConvergenceError
/// carrying the best estimate and its error bound.
QuadResult integrate(const Integrand& f, double a, double b, const QuadSpec& spec = {});

/// Integral over [0, inf) for integrands with a decaying tail. Panels of
/// doubling width starting at spec.scale are added until a panel's
/// contribution is both shrinking and below tolerance.
QuadResult integrate_semi_infinite(const Integrand& f, const QuadSpec& spec = {});

}  // namespace doppler::numerics
