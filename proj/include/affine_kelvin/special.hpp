#pragma once
#include <complex>

namespace ak {

using cplx = std::complex<double>;

double norm_pdf(double x);
double norm_cdf(double x);

// log I_nu(x) for x >= 0, nu >= 0 (nu > -1 with x > 0). No overflow for large x.
double log_bessel_i(double nu, double x);

// log of F_nu(q) = sum_j q^j / (j! Gamma(j+nu+1)) = I_nu(z) (z/2)^{-nu}, z = 2 sqrt(q).
// Entire in q, so no branch is involved; the imaginary part is only defined mod 2 pi.
cplx log_bessel_entire(double nu, cplx q);

// Exponential integral E1(x), x > 0.
double expint_e1(double x);

} // namespace ak
