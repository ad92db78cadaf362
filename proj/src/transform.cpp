#include "affine_kelvin/transform.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "affine_kelvin/errors.hpp"

namespace ak {

namespace {

const cplx I1(0, 1);

double pick_k_max(const std::function<double(double)>& mag, double tol, double cap) {
    // two consecutive doublings below tol so an isolated zero of an oscillating cf is not mistaken for decay
    for (double K = 1; K <= cap; K *= 2)
        if (mag(K) < tol && mag(2 * K) < tol) return K;
    throw NonIntegrableCF("cf tail stays above tolerance up to k = " + std::to_string(cap));
}

double span(const Axis& a) { return std::max({std::abs(a.min), std::abs(a.max), a.max - a.min}); }

// Panels resolve half an oscillation of exp(i k x) over the window.
double panel_width(double K, double X) { return std::min(K / 4, M_PI / std::max(X, 1e-12)); }

} // namespace

std::vector<double> Axis::nodes() const {
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) v[i] = points == 1 ? min : min + (max - min) * i / (points - 1);
    return v;
}

void InversionGrid::validate(int dim) const {
    if (int(axes.size()) != dim) throw ConfigError("inversion grid: expected " + std::to_string(dim) + " axes");
    for (const auto& a : axes) {
        if (a.points < 16) throw ConfigError("inversion grid: at least 16 points per axis");
        if (!(a.max > a.min)) throw ConfigError("inversion grid: empty axis range");
        if (a.k_max < 0) throw ConfigError("inversion grid: negative k_max");
    }
    if (!(tail_tol > 0)) throw ConfigError("inversion grid: tail tolerance must be positive");
}

void gl_panels(double a, double b, double width, std::vector<double>& x, std::vector<double>& w) {
    using G = boost::math::quadrature::gauss<double, 32>;
    const int n = std::max(1, int(std::ceil((b - a) / width)));
    const double h = (b - a) / n;
    x.reserve(x.size() + 32 * n);
    w.reserve(w.size() + 32 * n);
    for (int p = 0; p < n; ++p) {
        const double c = a + (p + 0.5) * h, r = 0.5 * h;
        for (size_t i = 0; i < G::abscissa().size(); ++i) {
            x.push_back(c - r * G::abscissa()[i]);
            w.push_back(r * G::weights()[i]);
            x.push_back(c + r * G::abscissa()[i]);
            w.push_back(r * G::weights()[i]);
        }
    }
}

Inversion1D invert_cf_1d(const CF1D& cf, const InversionGrid& grid) {
    grid.validate(1);
    const Axis& ax = grid.axes[0];
    Inversion1D out;
    out.k_max = ax.k_max > 0 ? ax.k_max
                             : pick_k_max([&](double k) { return std::abs(cf(k)); }, grid.tail_tol, grid.k_cap);
    std::vector<double> k, w;
    gl_panels(0, out.k_max, panel_width(out.k_max, span(ax)), k, w);
    std::vector<cplx> c(k.size());
    for (size_t j = 0; j < k.size(); ++j) c[j] = cf(k[j]) * w[j];
    out.x = ax.nodes();
    out.density.resize(out.x.size());
    for (size_t i = 0; i < out.x.size(); ++i) {
        double s = 0;
        for (size_t j = 0; j < k.size(); ++j) s += (c[j] * std::polar(1.0, -k[j] * out.x[i])).real();
        out.density[i] = s / M_PI;
    }
    return out;
}

Inversion2D invert_cf_2d(const CF2D& cf, const InversionGrid& grid) {
    grid.validate(2);
    const Axis &a1 = grid.axes[0], &a2 = grid.axes[1];
    Inversion2D out;
    double K1 = a1.k_max > 0 ? a1.k_max
                             : pick_k_max([&](double k) { return std::abs(cf(k, 0.0)); }, grid.tail_tol, grid.k_cap);
    double K2 = a2.k_max > 0 ? a2.k_max
                             : pick_k_max([&](double k) { return std::abs(cf(0.0, k)); }, grid.tail_tol, grid.k_cap);
    if (a1.k_max <= 0 || a2.k_max <= 0) {
        // correlated laws can be larger on the box edge than on the axes
        auto edge_max = [&] {
            double m = 0;
            for (int i = 0; i <= 64; ++i) {
                const double s = -1 + 2.0 * i / 64;
                m = std::max({m, std::abs(cf(K1, s * K2)), std::abs(cf(s * K1, K2))});
            }
            return m;
        };
        while (edge_max() >= grid.tail_tol) {
            K1 *= 2;
            K2 *= 2;
            if (K1 > grid.k_cap || K2 > grid.k_cap) throw NonIntegrableCF("2-D cf tail stays above tolerance");
        }
    }
    out.k1_max = K1;
    out.k2_max = K2;
    std::vector<double> k1, w1, k2, w2;
    gl_panels(0, K1, panel_width(K1, span(a1)), k1, w1);
    gl_panels(-K2, K2, panel_width(K2, span(a2)), k2, w2);
    out.x1 = a1.nodes();
    out.x2 = a2.nodes();
    Eigen::MatrixXcd C(k1.size(), k2.size());
    for (size_t i = 0; i < k1.size(); ++i)
        for (size_t j = 0; j < k2.size(); ++j) C(i, j) = cf(k1[i], k2[j]) * (w1[i] * w2[j]);
    Eigen::MatrixXcd E1(out.x1.size(), k1.size()), E2(k2.size(), out.x2.size());
    for (size_t p = 0; p < out.x1.size(); ++p)
        for (size_t i = 0; i < k1.size(); ++i) E1(p, i) = std::polar(1.0, -k1[i] * out.x1[p]);
    for (size_t j = 0; j < k2.size(); ++j)
        for (size_t q = 0; q < out.x2.size(); ++q) E2(j, q) = std::polar(1.0, -k2[j] * out.x2[q]);
    const Eigen::MatrixXd F = (E1 * C * E2).real() / (2 * M_PI * M_PI);
    out.density.resize(out.x1.size() * out.x2.size());
    for (size_t p = 0; p < out.x1.size(); ++p)
        for (size_t q = 0; q < out.x2.size(); ++q) out.density[p * out.x2.size() + q] = F(p, q);
    return out;
}

double cf_moment(const CF1D& cf, int order, double h) {
    if (order != 1 && order != 2) throw DomainError("cf_moment: order must be 1 or 2");
    if (!(h > 0)) throw DomainError("cf_moment: step must be positive");
    auto M = [&](double p) {
        const cplx v = cf(cplx(0, -p));
        if (!std::isfinite(v.real())) throw Explosion(NAN, "cf_moment: moment generating function not finite");
        return v.real();
    };
    if (order == 1) return (M(h) - M(-h)) / (2 * h);
    // Ridders: a plain second difference at small h is swamped by rounding.
    const double M0 = M(0);
    const int n = 10;
    const double shrink = 1.4, s2 = shrink * shrink;
    double a[n][n];
    double hh = std::max(h, 0.05), best = NAN, err = INFINITY;
    for (int i = 0; i < n; ++i, hh /= shrink) {
        a[0][i] = (M(hh) - 2 * M0 + M(-hh)) / (hh * hh);
        double f = 1;
        for (int j = 1; j <= i; ++j) {
            f *= s2;
            a[j][i] = (a[j - 1][i] * f - a[j - 1][i - 1]) / (f - 1);
            const double e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
            if (e <= err) {
                err = e;
                best = a[j][i];
            }
        }
        if (i > 0 && std::abs(a[i][i] - a[i - 1][i - 1]) >= 2 * err) break;
    }
    return best;
}

} // namespace ak
