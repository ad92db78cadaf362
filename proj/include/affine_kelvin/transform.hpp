#pragma once
#include <complex>
#include <functional>
#include <vector>

namespace ak {

using cplx = std::complex<double>;

// Characteristic functions in the probabilist's convention E[exp(i k.X)].
using CF1D = std::function<cplx(cplx)>;
using CF2D = std::function<cplx(cplx, cplx)>;

struct Axis {
    double min = 0, max = 1;
    int points = 64;
    double k_max = 0;  // 0 = choose by doubling until |cf| < tail_tol
    std::vector<double> nodes() const;
};

struct InversionGrid {
    std::vector<Axis> axes;
    double tail_tol = 1e-10;
    double k_cap = 1e6;
    void validate(int dim) const;
};

struct Inversion1D {
    std::vector<double> x, density;
    double k_max = 0;
};
struct Inversion2D {
    std::vector<double> x1, x2;
    std::vector<double> density;  // row-major, density[i * x2.size() + j] at (x1[i], x2[j])
    double k1_max = 0, k2_max = 0;
    double at(size_t i, size_t j) const { return density[i * x2.size() + j]; }
};

Inversion1D invert_cf_1d(const CF1D& cf, const InversionGrid& grid);
Inversion2D invert_cf_2d(const CF2D& cf, const InversionGrid& grid);

// Moment E[X^order] from M(p) = cf(-i p): order 1 by a central difference with step h,
// order 2 by Richardson-extrapolated central second differences.
double cf_moment(const CF1D& cf, int order, double h = 1e-5);

// Gauss-Legendre panels on [a, b], each no wider than width; 32 nodes per panel.
void gl_panels(double a, double b, double width, std::vector<double>& x, std::vector<double>& w);

} // namespace ak
