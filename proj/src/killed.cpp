#include "affine_kelvin/killed.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "affine_kelvin/errors.hpp"
#include "affine_kelvin/linalg_ode.hpp"
#include "affine_kelvin/special.hpp"

namespace ak {

using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace odeint = boost::numeric::odeint;

double KilledGaussianLaw::log_Q(const VectorXd& z) const { return -(L * e).dot(z) - varpi1; }

KilledGaussianLaw killed_gaussian_law(const AffineModelSpec& model, const VectorXd& zeta, double tau, double t) {
    model.validate();
    if (!model.gaussian()) throw InvalidModel(model.name + ": killed_gaussian_law needs a Gaussian model");
    if (t < tau) throw DomainError("killed_gaussian_law: t < tau");
    if (t == tau) throw DegenerateLaw("killed_gaussian_law: t == tau, law is a point mass at zeta");
    const int I = model.dim();
    if (zeta.size() != I) throw DomainError("killed_gaussian_law: start state dimension");

    const FundamentalSolution fs = fundamental_solution(model.B, tau, t);
    // one pass for e, C^{-1}, d and varpi1; d and varpi1 need e(s) at the running time
    using state = std::vector<double>;
    const int ne = 0, nc = I, nd = I + I * I, nv = 2 * I + I * I, n = nv + 1;
    double hint = tau;
    auto rhs = [&](const state& x, state& dx, double s) {
        const MatrixXd L = fs.at(s);
        const MatrixXd Li = L.inverse();
        const MatrixXd A = model.A0.on(s, hint);
        const VectorXd b = model.b.on(s, hint), cv = model.kill_vec.on(s, hint);
        const VectorXd e = Eigen::Map<const VectorXd>(x.data() + ne, I);
        const MatrixXd LAL = L.transpose() * A * L;
        Eigen::Map<VectorXd>(dx.data() + ne, I) = Li * cv;
        Eigen::Map<MatrixXd>(dx.data() + nc, I, I) = LAL;
        Eigen::Map<VectorXd>(dx.data() + nd, I) = L.transpose() * b + LAL * e;
        dx[nv] = model.kill_c.on(s, hint) - 0.5 * e.dot(LAL * e) - e.dot(L.transpose() * b);
    };
    state x(n, 0.0);
    const std::vector<double> knots = merged_knots(tau, t, model.b, model.B, model.A0, model.kill_c, model.kill_vec);
    // most components are pure quadratures, where the embedded 7(8) estimate misjudges the error
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
        hint = 0.5 * (knots[i] + knots[i + 1]);
        odeint::integrate_adaptive(odeint::make_controlled(1e-15, 1e-13, odeint::runge_kutta_dopri5<state>()),
                                   rhs, x, knots[i], knots[i + 1], (knots[i + 1] - knots[i]) / 16);
    }

    KilledGaussianLaw k;
    k.e = Eigen::Map<const VectorXd>(x.data() + ne, I);
    MatrixXd Ci = Eigen::Map<const MatrixXd>(x.data() + nc, I, I);
    k.Cinv = 0.5 * (Ci + Ci.transpose());
    k.d = Eigen::Map<const VectorXd>(x.data() + nd, I);
    k.varpi1 = x[nv];
    k.varpi0 = -fs.det_log;
    k.L = fs.L;
    const MatrixXd LinvT = fs.L_inv.transpose();
    const MatrixXd H = LinvT * k.Cinv * fs.L_inv;
    k.q = LinvT * (k.d + zeta);
    k.law.cov = 0.5 * (H + H.transpose());
    k.law.mean = LinvT * (k.d + zeta - k.Cinv * k.e);
    k.law.log_prefactor = -k.e.dot(k.d + zeta) + 0.5 * k.e.dot(k.Cinv * k.e) - k.varpi1;

    const VectorXd cv = model.kill_vec(t);
    const double mu = model.kill_c(t) + cv.dot(k.law.mean), sd = std::sqrt(std::max(0.0, cv.dot(k.law.cov * cv)));
    k.negative_kill_prob = sd > 0 ? norm_cdf(-mu / sd) : (mu < 0 ? 1.0 : 0.0);
    k.negative_kill_flag = k.negative_kill_prob > 0.01;
    return k;
}

namespace {
double expm1c(double x) { return std::abs(x) < 1e-5 ? 1 + x * (0.5 + x / 6) : std::expm1(x) / x; }
} // namespace

cplx killed_feller_cf(const FellerParams& p, cplx m, double gamma) {
    p.validate();
    const double T = p.T();
    if (T < 0) throw DomainError("killed_feller_cf: t < tau");
    if (T == 0) return cplx(0, 1) * m * p.theta;
    const double e2 = p.eps * p.eps;
    // backward Riccati psi' = eps^2/2 psi^2 - kappa psi - gamma, psi(0) = i m, phi' = chi psi
    const double g = std::sqrt(p.kappa * p.kappa + 2 * e2 * gamma);
    const double rm = (p.kappa - g) / e2, rp = (p.kappa + g) / e2;
    const cplx u0 = cplx(0, 1) * m - rm;
    // W~(s) = 1 - u0 (eps^2/2) s (1 - e^{-gs})/(gs); psi = rm + u0 e^{-gs}/W~
    auto Wt = [&](double s) { return 1.0 - u0 * (0.5 * e2 * s * expm1c(-g * s)); };
    if (m.real() == 0) {
        const double c = u0.real() * 0.5 * e2;  // W~ = 0 at c s expm1c(-g s) = 1
        const double lim = g > 0 ? c / g : INFINITY;
        if (c > 0 && (g == 0 || lim > 1)) {
            const double ss = g > 0 ? -std::log1p(-g / c) / g : 1 / c;
            if (ss <= T) throw Explosion(p.tau + ss, "killed_feller_cf: Riccati blow-up");
        }
    }
    const cplx lw = tracked_log(Wt, T);
    const cplx psi = rm + u0 * std::exp(-g * T) / Wt(T);
    const cplx phi = p.chi * rp * T - (2 * p.chi / e2) * (g * T + lw);
    return phi + psi * p.theta;
}

} // namespace ak
