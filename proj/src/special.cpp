#include "affine_kelvin/special.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>

#include "affine_kelvin/errors.hpp"

namespace ak {

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// log sum_{k>=0} (x^2/4)^k / (k! Gamma(k+nu+1)) + nu log(x/2); all terms positive.
double log_bessel_series(double nu, double x) {
    const double q = 0.25 * x * x;
    double log_scale = 0.0, term = 1.0, sum = 1.0;
    for (int k = 1; k < 10000000; ++k) {
        term *= q / (double(k) * (double(k) + nu));
        sum += term;
        if (sum > 1e280) {
            log_scale += std::log(sum);
            term /= sum;
            sum = 1.0;
        }
        if (term < 1e-17 * sum && double(k) * (double(k) + nu) > q) break;
    }
    return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + log_scale + std::log(sum);
}

// Hankel expansion of log(I_nu(x) e^{-x} sqrt(2 pi x)); stops at smallest term.
double log_hankel_tail(double nu, double x) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0, prev = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu - odd * odd) / (k * 8.0 * x);
        if (std::abs(term) > std::abs(prev)) break;
        sum += term;
        prev = term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::log(sum);
}

using mp = boost::multiprecision::cpp_bin_float_50;

cplx entire_series_mp(double nu, cplx q) {
    mp qr = q.real(), qi = q.imag();
    mp tr = 1, ti = 0, sr = 1, si = 0;
    mp nu_mp = nu;
    for (int k = 1; k < 100000; ++k) {
        mp d = mp(k) * (mp(k) + nu_mp);
        mp nr = (tr * qr - ti * qi) / d;
        mp ni = (tr * qi + ti * qr) / d;
        tr = nr; ti = ni;
        sr += tr; si += ti;
        if (abs(tr) + abs(ti) < mp(1e-40) * (abs(sr) + abs(si)) && d > abs(qr) + abs(qi)) break;
    }
    const double r = static_cast<double>(sr), i = static_cast<double>(si);
    return std::log(cplx(r, i)) - std::lgamma(nu + 1.0);
}

} // namespace

double log_bessel_i(double nu, double x) {
    if (x < 0) throw DomainError("log_bessel_i: negative argument");
    if (x == 0) return nu == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (x > 1e4 && nu * nu < x / 20.0)
        return x - 0.5 * std::log(2.0 * M_PI * x) + log_hankel_tail(nu, x);
    return log_bessel_series(nu, x);
}

cplx log_bessel_entire(double nu, cplx q) {
    const double aq = std::abs(q);
    if (aq == 0) return -std::lgamma(nu + 1.0);
    const cplx z = 2.0 * std::sqrt(q);  // principal: Re z >= 0
    const double argz = std::abs(std::arg(z));
    if (std::abs(z) > 40.0 && argz < 1.2) {
        // I_nu(z) ~ e^z/sqrt(2 pi z) sum (-1)^k a_k z^-k; the e^{-z} companion is below
        // e^{-2 Re z} <= e^{-28} relative and is dropped.
        const double mu = 4.0 * nu * nu;
        cplx term = 1.0, sum = 1.0;
        double prev = 1.0;
        for (int k = 1; k < 200; ++k) {
            const double odd = 2.0 * k - 1.0;
            term *= -(mu - odd * odd) / (k * 8.0) / z;
            if (std::abs(term) > prev) break;
            sum += term;
            prev = std::abs(term);
            if (prev < 1e-17 * std::abs(sum)) break;
        }
        return z - 0.5 * std::log(2.0 * M_PI * z) + std::log(sum) - nu * std::log(0.5 * z);
    }
    // Plain series; retried in 50 digits when the terms cancel badly.
    cplx term = 1.0, sum = 1.0;
    double biggest = 1.0;
    for (int k = 1; k < 100000; ++k) {
        const double d = double(k) * (double(k) + nu);
        term *= q / d;
        sum += term;
        biggest = std::max(biggest, std::abs(term));
        if (std::abs(term) < 1e-17 * std::abs(sum) && d > aq) break;
    }
    if (biggest > 1e5 * std::abs(sum)) return entire_series_mp(nu, q);
    return std::log(sum) - std::lgamma(nu + 1.0);
}

double expint_e1(double x) {
    if (!(x > 0)) throw DomainError("expint_e1: argument must be positive");
    return boost::math::expint(1, x);
}

} // namespace ak
