#include "affine_kelvin/fluids.hpp"

#include <cmath>

#include "affine_kelvin/errors.hpp"
#include "affine_kelvin/special.hpp"

namespace ak {

using Eigen::Matrix3d;
using Eigen::Vector3d;

double LinearFlow2D::zeta() const {
    if (!(w * w > s * s)) throw DomainError("vorticity: hyperbolic streamlines (need w^2 > s^2)");
    return 0.5 * std::sqrt(w * w - s * s);
}

double LinearFlow2D::stream(double x1, double x2) const { return 0.25 * (w * (x1 * x1 + x2 * x2) - 2 * s * x1 * x2); }

namespace {

struct KW {
    Vector3d xi, g, a;
};

KW rhs(const Matrix3d& L, double nu, const KW& y) {
    const double g2 = y.g.squaredNorm();
    if (!(g2 > 0)) throw Singularity(0.0, "kelvin_wave_integrate: wave vector vanished");
    const Vector3d La = L * y.a;
    return {L * y.xi, -L.transpose() * y.g, -La + 2.0 * La.dot(y.g) / g2 * y.g - nu * g2 * y.a};
}

KW axpy(const KW& y, double h, const KW& k) { return {y.xi + h * k.xi, y.g + h * k.g, y.a + h * k.a}; }

std::vector<KW> rk4(const MatrixSchedule& L, double nu, const KW& y0, double tau, double t, int n) {
    std::vector<KW> out{y0};
    const double h = (t - tau) / n;
    KW y = y0;
    for (int i = 0; i < n; ++i) {
        const double s = tau + i * h;
        const double c = s + 0.5 * h;
        const Matrix3d L0 = L.on(s, c), Lm = L(c), L1 = L.on(s + h, c);
        const KW k1 = rhs(L0, nu, y), k2 = rhs(Lm, nu, axpy(y, 0.5 * h, k1)), k3 = rhs(Lm, nu, axpy(y, 0.5 * h, k2)),
                 k4 = rhs(L1, nu, axpy(y, h, k3));
        y.xi += h / 6 * (k1.xi + 2 * k2.xi + 2 * k3.xi + k4.xi);
        y.g += h / 6 * (k1.g + 2 * k2.g + 2 * k3.g + k4.g);
        y.a += h / 6 * (k1.a + 2 * k2.a + 2 * k3.a + k4.a);
        out.push_back(y);
    }
    return out;
}

} // namespace

KelvinTrajectory kelvin_wave_integrate(const MatrixSchedule& L, double nu, const KelvinWaveState& init, double tau,
                                       double t, int steps) {
    if (!(t > tau)) throw DomainError("kelvin_wave_integrate: need t > tau");
    if (steps < 1) throw ConfigError("kelvin_wave_integrate: need at least one step");
    if (!(nu >= 0)) throw InvalidModel("kelvin_wave_integrate: viscosity must be nonnegative");
    const double gn = init.gamma.norm(), an = init.amp.norm();
    if (!(gn > 0)) throw InvalidModel("kelvin_wave_integrate: zero initial wave vector");
    if (std::abs(init.gamma.dot(init.amp)) > 1e-12 * std::max(1.0, gn * an))
        throw InvalidModel("kelvin_wave_integrate: amplitude not orthogonal to the wave vector");
    for (const auto& p : L.pieces())
        for (size_t j = 0; j < p.poly.size(); ++j) {
            if (p.poly[j].rows() != 3 || p.poly[j].cols() != 3) throw InvalidModel("kelvin_wave_integrate: L must be 3x3");
            if (std::abs(p.poly[j].trace()) > 1e-12) throw InvalidModel("kelvin_wave_integrate: L must be traceless");
        }
    const KW y0{init.xi, init.gamma, init.amp};
    const auto coarse = rk4(L, nu, y0, tau, t, steps);
    const auto fine = rk4(L, nu, y0, tau, t, 2 * steps);
    KelvinTrajectory tr;
    const double h = (t - tau) / steps;
    for (int i = 0; i <= steps; ++i) {
        const KW& y = coarse[i];
        tr.states.push_back({y.xi, y.g, y.a, tau + i * h});
        if (an > 0) tr.max_growth = std::max(tr.max_growth, y.a.norm() / an);
    }
    const KW &a = coarse.back(), &b = fine.back();
    tr.step_error = std::max({(a.xi - b.xi).lpNorm<Eigen::Infinity>(), (a.g - b.g).lpNorm<Eigen::Infinity>(),
                              (a.a - b.a).lpNorm<Eigen::Infinity>()});
    return tr;
}

VorticityPsi vorticity_psi(const LinearFlow2D& f, double tau, double t) {
    const double z = f.zeta(), T = t - tau, s = f.s, w = f.w, nu = f.nu;
    const double C2 = std::cos(2 * z * T), S2 = std::sin(2 * z * T);
    VorticityPsi p;
    // antiderivatives of S2 and 1 - C2 give (1 - C2)/(2 zeta) and T - S2/(2 zeta)
    p.psi0 = 2 * nu * (T + s / (2 * z) * (1 - C2) / (2 * z) + s * s / (4 * z * z) * (T - S2 / (2 * z)));
    p.psi1 = -nu * s * w / (2 * z * z) * (T - S2 / (2 * z));
    p.psi2 = 2 * nu * (T - s / (2 * z) * (1 - C2) / (2 * z) + s * s / (4 * z * z) * (T - S2 / (2 * z)));
    return p;
}

GaussianLaw vorticity_law(const LinearFlow2D& f, double xi1, double xi2, double tau, double t) {
    if (!(t > tau)) throw DegenerateLaw("vorticity_law: t == tau is a point mass");
    if (!(f.nu > 0)) throw InvalidModel("vorticity_law: need nu > 0");
    const double z = f.zeta(), T = t - tau, s = f.s, w = f.w;
    const double C1 = std::cos(z * T), S1 = std::sin(z * T), C2 = std::cos(2 * z * T), S2 = std::sin(2 * z * T);
    const VorticityPsi p = vorticity_psi(f, tau, t);
    const double q = w * w / (8 * z * z), dC = 1 - C2, sz = s / (2 * z), wz = w / (2 * z);
    const double h0 = (q + (4 * z * z - s * s) / (8 * z * z) * C2 + sz * S2) * p.psi2 + wz * (sz * dC + S2) * p.psi1 +
                      q * dC * p.psi0;
    const double h1 = 0.5 * wz * (sz * dC + S2) * p.psi2 - (1 - w * w / (4 * z * z) * dC) * p.psi1 +
                      0.5 * wz * (sz * dC - S2) * p.psi0;
    const double h2 = q * dC * p.psi2 + wz * (sz * dC - S2) * p.psi1 +
                      (q + (4 * z * z - s * s) / (8 * z * z) * C2 - sz * S2) * p.psi0;
    GaussianLaw g;
    g.mean = Eigen::Vector2d((C1 + sz * S1) * xi1 - wz * S1 * xi2, wz * S1 * xi1 + (C1 - sz * S1) * xi2);
    g.cov.resize(2, 2);
    g.cov << h0, h1, h1, h2;
    return g;
}

double rotational_stream_function(double R) {
    if (!(R >= 0)) throw DomainError("rotational_stream_function: need R >= 0");
    const double x = 0.5 * R * R;
    if (x < 1e-3) {
        // E1(x) + ln x = -gamma + x - x^2/4 + x^3/18 - ..., and ln R = (ln x + ln 2)/2
        const double series = -0.57721566490153286061 + x * (1 - x * (0.25 - x * (1.0 / 18 - x / 96)));
        return series / (4 * M_PI) + std::log(2.0) / (4 * M_PI);
    }
    return expint_e1(x) / (4 * M_PI) + std::log(R) / (2 * M_PI);
}

} // namespace ak
