#include "affine_kelvin/gaussian.hpp"

#include <cmath>
#include <complex>

#include "affine_kelvin/errors.hpp"
#include "affine_kelvin/linalg_ode.hpp"
#include "affine_kelvin/quadrature.hpp"

namespace ak {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double GaussianLaw::log_density(const VectorXd& z) const {
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw DomainError("GaussianLaw: covariance is not positive definite");
    const VectorXd w = llt.matrixL().solve(z - mean);
    double logdet = 0;
    for (int i = 0; i < cov.rows(); ++i) logdet += 2 * std::log(llt.matrixL()(i, i));
    return log_prefactor - 0.5 * (double(cov.rows()) * std::log(2 * M_PI) + logdet) - 0.5 * w.squaredNorm();
}

double GaussianLaw::density(const VectorXd& z) const { return std::exp(log_density(z)); }

GaussianLaw GaussianLaw::marginal(const std::vector<int>& idx) const {
    GaussianLaw g;
    const int n = int(idx.size());
    g.mean.resize(n);
    g.cov.resize(n, n);
    for (int i = 0; i < n; ++i) {
        g.mean[i] = mean[idx[i]];
        for (int j = 0; j < n; ++j) g.cov(i, j) = cov(idx[i], idx[j]);
    }
    g.log_prefactor = log_prefactor;
    return g;
}

GaussianLaw gaussian_law(const AffineModelSpec& model, const VectorXd& zeta, double tau, double t) {
    model.validate();
    if (!model.gaussian()) throw InvalidModel(model.name + ": gaussian_law needs a Gaussian model");
    if (model.killed()) throw InvalidModel(model.name + ": killed model, use killed_gaussian_law");
    if (t < tau) throw DomainError("gaussian_law: t < tau");
    if (t == tau) throw DegenerateLaw("gaussian_law: t == tau, law is a point mass at zeta");
    if (zeta.size() != model.dim()) throw DomainError("gaussian_law: start state dimension");
    const FundamentalSolution fs = fundamental_solution(model.B, tau, t);
    const MatrixXd C = covariance_integral(fs, model.A0, tau, t);
    const DriftIntegral di = drift_integral(fs, model.b, tau, t);
    const MatrixXd LinvT = fs.L_inv.transpose();
    GaussianLaw g;
    g.mean = LinvT * (di.d + zeta);
    MatrixXd H = LinvT * C * fs.L_inv;
    g.cov = 0.5 * (H + H.transpose());
    return g;
}

double kolmogorov_density(double a, double b, double xi, double theta, double tau, double t, double x, double y) {
    if (!(a > 0)) throw InvalidModel("kolmogorov_density: a must be positive");
    if (t < tau) throw DomainError("kolmogorov_density: t < tau");
    if (t == tau) throw DegenerateLaw("kolmogorov_density: t == tau");
    const double T = t - tau;
    const double A = (y - theta - b * T) / std::sqrt(a * T);
    const double B = (x - xi - 0.5 * (y + theta) * T) / std::sqrt(a * T * T * T);
    return std::sqrt(3.0) / (M_PI * a * T * T) * std::exp(-0.5 * A * A - 6 * B * B);
}

double kolmogorov_density(const ScalarSchedule& a, const ScalarSchedule& b, double xi, double theta, double tau,
                          double t, double x, double y) {
    const auto law = gaussian_law(models::kolmogorov(a, b), (VectorXd(2) << xi, theta).finished(), tau, t);
    return law.density((VectorXd(2) << x, y).finished());
}

double kolmogorov_original_density(double k, double f, double xi, double theta, double tau, double t, double x,
                                   double y) {
    if (!(k > 0)) throw InvalidModel("kolmogorov_original_density: k must be positive");
    if (!(t > tau)) throw DomainError("kolmogorov_original_density: need t > tau");
    // variables as printed: (t, q, qdot) -> (t', q', qdot')
    const double T = t - tau;
    const double dv = y - theta - f * T;
    const double dq = x - xi - 0.5 * (y + theta) * T;
    return 2 * std::sqrt(3.0) / (M_PI * k * k * T * T) *
           std::exp(-dv * dv / (4 * k * T) - 3 * dq * dq / (k * k * k * T * T * T));
}

OUMoments ou_moments(double chi, double kappa, double eps, double theta, double tau, double t) {
    if (!(eps > 0)) throw InvalidModel("ou: eps must be positive");
    const double T = t - tau;
    const double e1 = std::exp(-kappa * T);
    // (1-e^{-kT})/k and (1-e^{-2kT})/(2k) without cancellation for small k
    const double g1 = std::abs(kappa * T) < 1e-8 ? T * (1 - 0.5 * kappa * T) : -std::expm1(-kappa * T) / kappa;
    const double g2 =
        std::abs(kappa * T) < 1e-8 ? T * (1 - kappa * T) : -std::expm1(-2 * kappa * T) / (2 * kappa);
    return {e1 * theta + chi * g1, eps * eps * g2};
}

OUMoments ou_moments(const ScalarSchedule& chi, const ScalarSchedule& kappa, const ScalarSchedule& eps, double theta,
                     double tau, double t) {
    if (t < tau) throw DomainError("ou: t < tau");
    std::vector<double> knots = merged_knots(tau, t, chi, kappa, eps);
    auto eta = [&](double s) {  // int_s^t kappa
        std::vector<double> k{s};
        for (double v : knots)
            if (v > s) k.push_back(v);
        if (k.size() < 2) return 0.0;
        return integrate_knots([&](double u) { return kappa(u); }, k);
    };
    for (const auto& p : eps.pieces())
        for (size_t j = 0; j < p.poly.size(); ++j)
            if (!std::isfinite(p.poly[j])) throw InvalidModel("ou: non-finite eps");
    const double m = integrate_knots([&](double s) { return std::exp(-eta(s)) * chi(s); }, knots);
    const double v = integrate_knots([&](double s) {
        const double e = eps(s);
        return std::exp(-2 * eta(s)) * e * e;
    }, knots);
    if (!(v > 0)) throw InvalidModel("ou: eps must be positive");
    return {m + std::exp(-eta(tau)) * theta, v};
}

namespace {
double gauss1(double m, double v, double y) { return std::exp(-0.5 * (y - m) * (y - m) / v) / std::sqrt(2 * M_PI * v); }
} // namespace

double ou_density(double chi, double kappa, double eps, double theta, double tau, double t, double y) {
    if (t == tau) throw DegenerateLaw("ou_density: t == tau");
    const auto mo = ou_moments(chi, kappa, eps, theta, tau, t);
    return gauss1(mo.mean, mo.var, y);
}

double ou_density(const ScalarSchedule& chi, const ScalarSchedule& kappa, const ScalarSchedule& eps, double theta,
                  double tau, double t, double y) {
    if (t == tau) throw DegenerateLaw("ou_density: t == tau");
    const auto mo = ou_moments(chi, kappa, eps, theta, tau, t);
    return gauss1(mo.mean, mo.var, y);
}

GaussianLaw augmented_ou_law(double chi, double kappa, double eps, double xi, double theta, double tau, double t) {
    if (!(eps > 0)) throw InvalidModel("augmented_ou: eps must be positive");
    if (t < tau) throw DomainError("augmented_ou: t < tau");
    if (t == tau) throw DegenerateLaw("augmented_ou: t == tau");
    const double T = t - tau, e2 = eps * eps, kT = kappa * T;
    GaussianLaw g;
    g.mean.resize(2);
    g.cov.resize(2, 2);
    double h0, h1, h2, p1, p2;  // p1 = (1-e^{-kT})/k, p2 = (kT - (1-e^{-kT}))/k^2
    if (std::abs(kT) < 1e-3) {
        // series in kappa to 4th order
        const double T2 = T * T, T3 = T2 * T, k = kappa, k2 = k * k, k3 = k2 * k, k4 = k3 * k;
        h0 = e2 * (T3 / 3 - k * T3 * T / 4 + 7 * k2 * T3 * T2 / 60 - k3 * T3 * T3 / 24 + 31 * k4 * T3 * T3 * T / 2520);
        h1 = e2 * (T2 / 2 - k * T3 / 2 + 7 * k2 * T2 * T2 / 24 - k3 * T3 * T2 / 8 + 31 * k4 * T3 * T3 / 720);
        h2 = e2 * (T - k * T2 + 2 * k2 * T3 / 3 - k3 * T3 * T / 3 + 2 * k4 * T3 * T2 / 15);
        p1 = T * (1 - kT / 2 + kT * kT / 6 - kT * kT * kT / 24 + kT * kT * kT * kT / 120);
        p2 = T2 * (0.5 - kT / 6 + kT * kT / 24 - kT * kT * kT / 120 + kT * kT * kT * kT / 720);
    } else {
        const double em = std::exp(-kT), em2 = std::exp(-2 * kT);
        h0 = e2 / (2 * kappa * kappa * kappa) * (-3 + 4 * em - em2 + 2 * kT);
        h1 = e2 / (2 * kappa * kappa) * (1 - em) * (1 - em);
        h2 = e2 * (1 - em2) / (2 * kappa);
        p1 = (1 - em) / kappa;
        p2 = (kT - (1 - em)) / (kappa * kappa);
    }
    g.mean << xi + p2 * chi + p1 * theta, p1 * chi + (1 - kappa * p1) * theta;
    g.cov << h0, h1, h1, h2;
    return g;
}

GaussianLaw harmonic_particle_law(double kappa, double omega2, double eps, double xi, double theta, double tau,
                                  double t) {
    using C = std::complex<double>;
    if (!(eps > 0)) throw InvalidModel("harmonic_particle: eps must be positive");
    if (omega2 < 0) throw InvalidModel("harmonic_particle: omega^2 must be nonnegative");
    if (t < tau) throw DomainError("harmonic_particle: t < tau");
    if (t == tau) throw DegenerateLaw("harmonic_particle: t == tau");
    const double T = t - tau, e2 = eps * eps;
    // closed form at a given discriminant D = kappa^2 - 4 omega^2 (omega^2 follows from D)
    auto eval = [&](double D) {
        const double w2 = 0.25 * (kappa * kappa - D);
        const C sq = std::sqrt(C(D));
        const C lp = 0.5 * (kappa + sq), lm = 0.5 * (kappa - sq);
        const C Epi = std::exp(-lp * T), Emi = std::exp(-lm * T);  // E_+^{-1}, E_-^{-1}
        const C p = ((lp * Emi - lm * Epi) * xi + (Emi - Epi) * theta) / sq;
        const C q = -(w2 * (Emi - Epi) * xi + (lm * Emi - lp * Epi) * theta) / sq;
        const C h0 = e2 / (2 * kappa * w2 * D) *
                     (-kappa * lm * Epi * Epi + 4 * w2 * Emi * Epi - kappa * lp * Emi * Emi + D);
        const C h1 = e2 / (2 * D) * (Emi * Emi - 2.0 * Epi * Emi + Epi * Epi);
        const C h2 = e2 / (2 * kappa * D) * (-kappa * lp * Epi * Epi + 4 * w2 * Emi * Epi - kappa * lm * Emi * Emi + D);
        return std::array<C, 5>{p, q, h0, h1, h2};
    };
    const double D = kappa * kappa - 4 * omega2;
    const double scale = kappa * kappa + 4 * omega2;
    std::array<C, 5> v;
    if (std::abs(D) < 1e-8 * std::max(1.0, scale)) {
        // near critical damping: cubic Lagrange interpolation in D through +-d, +-2d
        const double d = 1e-3 * std::max(scale, 1e-300);
        const double nodes[4] = {-2 * d, -d, d, 2 * d};
        v = {0, 0, 0, 0, 0};
        for (int i = 0; i < 4; ++i) {
            double w = 1;
            for (int j = 0; j < 4; ++j)
                if (j != i) w *= (D - nodes[j]) / (nodes[i] - nodes[j]);
            const auto vi = eval(nodes[i]);
            for (int k = 0; k < 5; ++k) v[k] += w * vi[k];
        }
    } else {
        v = eval(D);
    }
    for (const auto& c : v)
        if (std::abs(c.imag()) > 1e-12 * std::max(1.0, std::abs(c)))
            throw AccuracyError("harmonic_particle_law: complex residue in real output");
    GaussianLaw g;
    g.mean = (VectorXd(2) << v[0].real(), v[1].real()).finished();
    g.cov = (MatrixXd(2, 2) << v[2].real(), v[3].real(), v[3].real(), v[4].real()).finished();
    return g;
}

ChandrasekharFGH chandrasekhar_fgh(double q, double beta, double T) {
    const double e1 = std::exp(-beta * T), e2 = std::exp(-2 * beta * T);
    return {q / (beta * beta * beta) * (-3 + 4 * e1 - e2 + 2 * beta * T), q / beta * (1 - e2),
            q / (beta * beta) * (1 - e1) * (1 - e1)};
}

double chandrasekhar_free(double q, double beta, double rho, double upsilon, double tau, double t, double r,
                          double u) {
    if (!(beta > 0) || !(q > 0)) throw DomainError("chandrasekhar_free: need beta > 0, q > 0");
    if (!(t > tau)) throw DomainError("chandrasekhar_free: need t > tau");
    const double T = t - tau;
    const auto [F, G, H] = chandrasekhar_fgh(q, beta, T);
    const double S = u - std::exp(-beta * T) * upsilon;
    const double R = r - rho - (1 - std::exp(-beta * T)) / beta * upsilon;
    const double det = F * G - H * H;
    return std::exp(-(F * S * S - 2 * H * R * S + G * R * R) / (2 * det)) / (2 * M_PI * std::sqrt(det));
}

double chandrasekhar_bound(double q, double beta, double omega2, double rho, double upsilon, double tau, double t,
                           double r, double u) {
    using C = std::complex<double>;
    if (!(beta > 0) || !(q > 0)) throw DomainError("chandrasekhar_bound: need beta > 0, q > 0");
    if (!(t > tau)) throw DomainError("chandrasekhar_bound: need t > tau");
    const double T = t - tau;
    const C sq = std::sqrt(C(beta * beta - 4 * omega2));
    const C mp = 0.5 * (-beta + sq), mm = 0.5 * (-beta - sq);
    const C xi = std::exp(-mm * T) * (mp * r - u), eta = std::exp(-mp * T) * (mm * r - u);
    const C xh = mp * rho - upsilon, eh = mm * rho - upsilon;
    const C a = q / mp * (1.0 - std::exp(-2.0 * mp * T));
    const C b = q / mm * (1.0 - std::exp(-2.0 * mm * T));
    const C h = -2.0 * q / (mp + mm) * (1.0 - std::exp(-(mp + mm) * T));
    const C det = a * b - h * h;
    const C dx = xi - xh, de = eta - eh;
    // (xi, eta) -> (r, u) has Jacobian e^{beta T} |mu_+ - mu_-|; the printed form drops the
    // second factor. In the underdamped case det < 0 and sqrt(det) is imaginary, so the
    // prefactor is taken in modulus.
    const double pref = std::exp(beta * T) * std::abs(sq) / (2 * M_PI * std::abs(std::sqrt(det)));
    const C Q = (a * dx * dx + 2.0 * h * dx * de + b * de * de) / (2.0 * det);
    return pref * std::exp(-Q.real());
}

} // namespace ak
