#pragma once
#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <type_traits>
#include <vector>

#include "affine_kelvin/errors.hpp"

namespace ak {

namespace detail {
inline double qnorm(double v) { return std::abs(v); }
inline double qnorm(const std::complex<double>& v) { return std::abs(v); }
template <class D>
double qnorm(const Eigen::MatrixBase<D>& v) { return v.cwiseAbs().maxCoeff(); }

template <int N>
struct GL {
    using G = boost::math::quadrature::gauss<double, N>;
    // Apply an N-point rule on [a,b].
    template <class F>
    static auto panel(F&& f, double a, double b) {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        const auto& x = G::abscissa();
        const auto& w = G::weights();
        auto acc = f(c);
        size_t start = 0;
        if (N % 2 == 1) { acc = acc * w[0]; start = 1; }
        else acc = acc * 0.0;
        for (size_t i = start; i < x.size(); ++i) {
            auto fl = f(c - h * x[i]);
            auto fr = f(c + h * x[i]);
            acc = acc + (fl + fr) * w[i];
        }
        return decltype(f(c))(acc * h);
    }
};

template <class F, class R>
void adaptive_rec(F& f, double a, double b, const R& whole, double tol, int depth, R& sum) {
    const double m = 0.5 * (a + b);
    R l = GL<20>::panel(f, a, m);
    R r = GL<20>::panel(f, m, b);
    R both = l + r;
    if (depth <= 0 || qnorm(R(both - whole)) <= tol) {
        sum = sum + both;
        return;
    }
    adaptive_rec(f, a, m, l, 0.5 * tol, depth - 1, sum);
    adaptive_rec(f, m, b, r, 0.5 * tol, depth - 1, sum);
}
} // namespace detail

// Fixed 32-point Gauss-Legendre on [a,b]; works for double, complex and Eigen results.
template <class F>
auto gl32(F&& f, double a, double b) { return detail::GL<32>::panel(f, a, b); }

// Adaptive bisection with a 20-point Gauss-Legendre rule; tolerance is absolute on
// the max-norm of the result, relative tolerance is applied against a first estimate.
template <class F>
auto integrate(F f, double a, double b, double abs_tol = 1e-14, double rel_tol = 1e-13, int max_depth = 40) {
    using R = decltype(f(a));
    if (a == b) return R(f(a) * 0.0);
    R whole = detail::GL<20>::panel(f, a, b);
    const double tol = std::max(abs_tol, rel_tol * detail::qnorm(whole));
    R sum = R(whole * 0.0);
    detail::adaptive_rec(f, a, b, whole, tol, max_depth, sum);
    return sum;
}

// Same, split at the given knots so no panel straddles a breakpoint.
template <class F>
auto integrate_knots(F f, const std::vector<double>& knots, double abs_tol = 1e-14, double rel_tol = 1e-13) {
    using R = decltype(f(knots.front()));
    R sum = integrate(f, knots[0], knots[1], abs_tol, rel_tol);
    for (size_t i = 1; i + 1 < knots.size(); ++i) sum = sum + integrate(f, knots[i], knots[i + 1], abs_tol, rel_tol);
    return sum;
}

// Integral over [a, inf) for integrands decaying at least exponentially,
// by summing doubling panels until their contribution falls below tol.
template <class F>
double integrate_to_inf(F f, double a, double width, double tol = 1e-14) {
    double s = 0, lo = a, w = width;
    for (int i = 0; i < 200; ++i) {
        const double part = integrate(f, lo, lo + w, tol * 0.1, 1e-14);
        s += part;
        lo += w;
        if (std::abs(part) < tol && i > 2) return s;
        w *= 1.5;
    }
    throw AccuracyError("integrate_to_inf: tail did not decay");
}

} // namespace ak
