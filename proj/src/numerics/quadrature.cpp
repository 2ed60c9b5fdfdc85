#include "doppler/numerics/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "doppler/error.hpp"

namespace doppler::numerics {

void QuadSpec::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw InvalidArgument("QuadSpec: rel_tol and abs_tol must be positive");
    }
    if (max_subdivisions == 0) throw InvalidArgument("QuadSpec: max_subdivisions must be >= 1");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("QuadSpec: scale must be positive");
}

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel apply_rule(const Integrand& f, double a, double b, std::size_t& evals) {
    double err = 0.0;
    const double v = Rule::integrate(f, a, b, 0, 0.0, &err);
    evals += 21;
    if (!std::isfinite(v)) {
        throw NumericalDomain("integrate: integrand not finite on [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]");
    }
    return {a, b, v, err};
}

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b, const QuadSpec& spec) {
    spec.validate();
    if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("integrate: bounds must be finite");
    if (a == b) return {};
    if (b < a) {
        QuadResult r = integrate(f, b, a, spec);
        r.value = -r.value;
        return r;
    }

    QuadResult out;
    std::priority_queue<Panel> panels;
    Panel first = apply_rule(f, a, b, out.evaluations);
    double total = first.value;
    double total_err = first.error;
    panels.push(first);

    auto converged = [&] { return total_err <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(total)); };

    while (!converged()) {
        if (panels.size() >= spec.max_subdivisions) {
            throw ConvergenceError("integrate: subdivision limit reached", total, total_err);
        }
        const Panel worst = panels.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw ConvergenceError("integrate: interval below floating-point resolution", total, total_err);
        }
        panels.pop();
        const Panel left = apply_rule(f, worst.a, mid, out.evaluations);
        const Panel right = apply_rule(f, mid, worst.b, out.evaluations);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
    }

    // Recompute from the panel set to shed accumulated update round-off.
    double value = 0.0, error = 0.0;
    while (!panels.empty()) {
        value += panels.top().value;
        error += panels.top().error;
        panels.pop();
    }
    out.value = value;
    out.error = error;
    return out;
}

QuadResult integrate_semi_infinite(const Integrand& f, const QuadSpec& spec) {
    spec.validate();
    constexpr int kMaxPanels = 80;

    QuadResult out;
    double lo = 0.0;
    double width = spec.scale;
    double previous = INFINITY;
    for (int k = 0; k < kMaxPanels; ++k) {
        const double hi = lo + width;
        QuadSpec panel_spec = spec;
        panel_spec.abs_tol = spec.abs_tol / 4.0;
        const QuadResult piece = integrate(f, lo, hi, panel_spec);
        out.value += piece.value;
        out.error += piece.error;
        out.evaluations += piece.evaluations;

        const double contribution = std::fabs(piece.value);
        const double tol = std::max(spec.abs_tol, spec.rel_tol * std::fabs(out.value));
        if (k >= 1 && contribution <= tol && contribution <= previous) {
            // Tail beyond hi is bounded by the (shrinking) last panel.
            out.error += contribution;
            return out;
        }
        previous = contribution;
        lo = hi;
        width *= 2.0;
        if (!std::isfinite(lo)) break;
    }
    throw ConvergenceError("integrate_semi_infinite: tail did not decay", out.value, out.error);
}

}  // namespace doppler::numerics
