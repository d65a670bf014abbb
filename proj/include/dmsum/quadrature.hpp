#pragma once

// Adaptive Simpson quadrature with Richardson correction. The log-variable
// form integrates f over [a, b] as the integral of f(e^v) e^v over
// [log a, log b], which suits integrands decaying like powers of t.

#include <cmath>
#include <cstddef>
#include <type_traits>

#include "error.hpp"

namespace dmsum {

struct QuadratureResult {
    double value = 0;
    double error_estimate = 0;
    std::size_t evaluations = 0;
};

namespace detail {

template <class F>
struct SimpsonState {
    F& f;
    std::size_t evaluations = 0;
    double error = 0;
    int max_depth;

    double eval(double x)
    {
        ++evaluations;
        return f(x);
    }

    double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth)
    {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = eval(lm), frm = eval(rm);
        const double h = (b - a) / 12.0;
        const double left = h * (fa + 4 * flm + fm);
        const double right = h * (fm + 4 * frm + fb);
        const double delta = left + right - whole;
        // Below ~1e-13 relative the difference is rounding noise, so
        // refining further cannot reduce it.
        if (depth >= max_depth || std::fabs(delta) <= 15 * tol || std::fabs(delta) <= 1e-13 * std::fabs(whole)) {
            error += std::fabs(delta) / 15;
            return left + right + delta / 15;
        }
        return recurse(a, m, fa, flm, fm, left, tol / 2, depth + 1) +
               recurse(m, b, fm, frm, fb, right, tol / 2, depth + 1);
    }
};

} // namespace detail

// Integrates f over [a, b] to absolute tolerance abs_tol, starting from
// `panels` equal sub-intervals so that narrow features are not skipped.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, double abs_tol, int panels = 16, int max_depth = 40)
{
    detail::require(b >= a, "adaptive_simpson: b < a");
    detail::require(abs_tol > 0, "adaptive_simpson: tolerance must be positive");
    detail::SimpsonState<std::remove_reference_t<F>> st{f, 0, 0, max_depth};
    QuadratureResult out;
    if (a == b) return out;
    const double width = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        const double lo = a + i * width;
        const double hi = i + 1 == panels ? b : lo + width;
        const double fa = st.eval(lo), fb = st.eval(hi), fm = st.eval(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (fa + 4 * fm + fb);
        out.value += st.recurse(lo, hi, fa, fm, fb, whole, abs_tol / panels, 0);
    }
    out.error_estimate = st.error;
    out.evaluations = st.evaluations;
    return out;
}

// Integral of f over [a, b] (0 < a <= b) in the variable v = log t.
template <class F>
QuadratureResult integrate_log_variable(F&& f, double a, double b, double abs_tol, int panels = 32)
{
    detail::require(a > 0 && b >= a, "integrate_log_variable needs 0 < a <= b");
    auto g = [&f](double v) {
        const double t = std::exp(v);
        return f(t) * t;
    };
    return adaptive_simpson(g, std::log(a), std::log(b), abs_tol, panels);
}

} // namespace dmsum
