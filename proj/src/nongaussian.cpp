#include "affine_kelvin/nongaussian.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <vector>

#include "affine_kelvin/errors.hpp"
#include "affine_kelvin/quadrature.hpp"
#include "affine_kelvin/special.hpp"

namespace ak {

using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

const cplx I1(0, 1);

// (e^x - 1)/x, continuous at 0.
double expm1c(double x) { return std::abs(x) < 1e-300 ? 1.0 : std::expm1(x) / x; }

// cosh(w T) = e^{wT} c and sinh(w T)/w = e^{wT} s for w^2 = z2, Re w >= 0.
// Both c and s are even in w, so no branch of the square root is involved.
struct Hyp {
    cplx w, c, s;
};
Hyp hyp(cplx z2, double T) {
    Hyp h;
    h.w = std::sqrt(z2);
    if (h.w.real() < 0) h.w = -h.w;
    const cplx wT = h.w * T;
    const cplx e = std::exp(-2.0 * wT);
    h.c = 0.5 * (1.0 + e);
    if (std::abs(wT) < 1e-3) {
        const cplx x = z2 * T * T;
        h.s = std::exp(-wT) * T * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
    } else {
        h.s = (1.0 - e) / (2.0 * h.w);
    }
    return h;
}

void arg_walk(const std::function<cplx(double)>& f, double a, cplx fa, double b, cplx fb, int depth, double& acc) {
    const double d = std::arg(fb / fa);
    if (std::abs(d) < 0.3 || depth == 0) {
        acc += d;
        return;
    }
    const double m = 0.5 * (a + b);
    const cplx fm = f(m);
    if (!(std::abs(fm) > 0) || !std::isfinite(std::abs(fm)))
        throw Singularity(m, "tracked_log: path through zero or infinity");
    arg_walk(f, a, fa, m, fm, depth - 1, acc);
    arg_walk(f, m, fm, b, fb, depth - 1, acc);
}

// Marginal CF template shared by the augmented Feller and Heston cases:
// log E[exp(-i k (x - xi))] for given mu and lambda_+ lambda_-.
struct Template {
    cplx log_value;
    Hyp h;
    cplx mu, pp;
};
Template aug_template(const FellerParams& p, cplx mu, cplx pp) {
    const double T = p.T(), e2 = p.eps * p.eps;
    Template out;
    out.mu = mu;
    out.pp = pp;
    const cplx z2 = mu * mu - pp;
    out.h = hyp(z2, T);
    const cplx w = out.h.w;
    auto D = [&](double s) {
        const Hyp g = hyp(z2, s);
        // same w for every s, so the scalings match
        return g.c + mu * g.s;
    };
    const cplx logD = w * T + tracked_log(D, T);
    const cplx Dt = out.h.c + mu * out.h.s;
    if (std::abs(Dt) < 1e-300) throw Singularity(p.t, "augmented Feller: denominator vanishes");
    out.log_value = 2.0 * p.chi * mu * T / e2 - (2.0 * p.chi / e2) * logD + 2.0 * pp * p.theta * out.h.s / (e2 * Dt);
    return out;
}

// First zero in T of cosh(zeta T) + mu sinh(zeta T)/zeta for real mu, zeta^2.
std::optional<double> first_zero(double mu, double z2) {
    if (z2 < 0) {
        const double a = std::sqrt(-z2);
        if (mu > 0) return (M_PI - std::atan(a / mu)) / a;
        if (mu < 0) return std::atan(a / -mu) / a;
        return 0.5 * M_PI / a;
    }
    if (z2 == 0) {
        if (mu < 0) return -1.0 / mu;
        return std::nullopt;
    }
    const double z = std::sqrt(z2);
    const double lp = mu + z, lm = mu - z;
    if (lp < 0) return std::log(lm / lp) / (2 * z);
    return std::nullopt;
}

void check_explosion(ExplosionModel model, const FellerParams& p, double pm) {
    const auto r = explosion_time(model, pm, p);
    if (r.explodes && p.T() >= r.T_star)
        throw Explosion(r.t_star, "moment of order " + std::to_string(pm) + " explodes at t* = " +
                                      std::to_string(r.t_star));
}

bool imaginary(cplx k) { return std::abs(k.real()) <= 1e-14 * (1 + std::abs(k)); }

} // namespace

cplx tracked_log(const std::function<cplx(double)>& f, double T) {
    const cplx f0 = f(0.0);
    if (!(std::abs(f0) > 0)) throw Singularity(0, "tracked_log: zero at start");
    if (T == 0) return std::log(f0);
    const int n = 16;
    double acc = std::arg(f0);
    cplx fa = f0;
    for (int i = 1; i <= n; ++i) {
        const double a = T * (i - 1) / n, b = T * i / n;
        const cplx fb = f(b);
        if (!(std::abs(fb) > 0) || !std::isfinite(std::abs(fb)))
            throw Singularity(b, "tracked_log: path through zero or infinity");
        arg_walk(f, a, fa, b, fb, 40, acc);
        fa = fb;
    }
    return {std::log(std::abs(fa)), acc};
}

void FellerParams::validate() const {
    if (!(eps > 0) || !std::isfinite(eps)) throw InvalidModel("FellerParams: eps must be positive");
    if (!std::isfinite(chi) || !std::isfinite(kappa) || !std::isfinite(theta))
        throw InvalidModel("FellerParams: non-finite coefficient");
    if (theta < 0) throw InvalidModel("FellerParams: theta must be nonnegative");
    if (!(std::abs(rho) < 1)) throw InvalidModel("FellerParams: |rho| must be below one");
    if (!(t >= tau)) throw DomainError("FellerParams: t < tau");
    if (!(vartheta() > 0)) {
        if (!allow_boundary)
            throw InvalidModel("FellerParams: Feller condition 2 chi > eps^2 violated (vartheta <= 0)");
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::fprintf(stderr, "warning: vartheta = %g <= 0, zero is attainable and the atom is not modelled\n",
                         vartheta());
    }
}

cplx KelvinMode::H(const VectorXd& z, const VectorXd& zeta) const {
    const cplx e = alpha + I1 * (upsilon.transpose() * z.cast<cplx>())(0) - I1 * (m.transpose() * zeta.cast<cplx>())(0);
    return std::exp(e);
}

// ---------------------------------------------------------------- Feller

double feller_mean(const FellerParams& p) {
    const double T = p.T();
    // theta e^{-kT} + chi (1 - e^{-kT})/k
    return p.theta * std::exp(-p.kappa * T) + p.chi * T * expm1c(-p.kappa * T);
}

double feller_log_density(const FellerParams& p, double y) {
    p.validate();
    if (y < 0) throw DomainError("feller_density: y < 0");
    const double T = p.T();
    if (T <= 0) throw DegenerateLaw("feller_density: t == tau");
    const double e2 = p.eps * p.eps, vt = p.vartheta();
    const double Z = std::exp(-p.kappa * T);
    // M = 2 kappa / (eps^2 (1 - Z)), kappa -> 0 gives 2/(eps^2 T)
    const double M = 2.0 / (e2 * T * expm1c(-p.kappa * T));
    const double thb = Z * p.theta;
    if (y == 0) {
        if (vt > 0) return -INFINITY;
        if (vt == 0) return std::log(M) - M * thb;
        return INFINITY;
    }
    if (thb == 0)  // Gamma law
        return (vt + 1) * std::log(M) + vt * std::log(y) - M * y - std::lgamma(vt + 1);
    const double x = 2 * M * std::sqrt(y * thb);
    if (vt <= -1) throw DomainError("feller_density: vartheta <= -1");
    return std::log(M) - M * (y + thb) + 0.5 * vt * std::log(y / thb) + log_bessel_i(vt, x);
}

double feller_density(const FellerParams& p, double y) {
    const double l = feller_log_density(p, y);
    return std::exp(l);
}

cplx feller_cf(const FellerParams& p, cplx u) {
    p.validate();
    const double T = p.T(), e2 = p.eps * p.eps;
    if (T == 0) return std::exp(I1 * u * p.theta);
    const double Z = std::exp(-p.kappa * T);
    const double M = 2.0 / (e2 * T * expm1c(-p.kappa * T));
    const cplx q = 1.0 - I1 * u / M;
    return std::exp(-(2 * p.chi / e2) * std::log(q) + I1 * u * Z * p.theta / q);
}

KelvinMode feller_kelvin(const FellerParams& p, cplx l) {
    p.validate();
    const double T = p.T(), e2 = p.eps * p.eps, k = p.kappa;
    auto Om = [&](double s) { return 1.0 - 0.5 * I1 * e2 * l * s * expm1c(k * s); };
    const cplx lnO = tracked_log(Om, T);
    KelvinMode r;
    r.alpha = k * T + 2.0 * (p.chi / e2 - 1.0) * lnO;
    r.upsilon = VectorXcd::Constant(1, l * std::exp(k * T) / Om(T));
    r.m = VectorXcd::Constant(1, l);
    return r;
}

// ---------------------------------------------------------------- augmented Feller

AugFellerCF feller_augmented_cf(const FellerParams& p, cplx k) {
    p.validate();
    if (imaginary(k) && k != 0.0) check_explosion(ExplosionModel::feller_augmented, p, k.imag());
    const double e2 = p.eps * p.eps, T = p.T();
    AugFellerCF r;
    if (T == 0) {
        r.value = 1;
        r.log_value = 0;
        r.S = r.M = INFINITY;
        r.Z1 = r.Z = 1;
        return r;
    }
    const RiccatiRoots rr = feller_augmented_roots(p, k);
    const cplx mu = rr.mu, pp = rr.product();
    const Template tp = aug_template(p, mu, pp);
    r.log_value = tp.log_value;
    r.value = std::exp(tp.log_value);
    // M = 2/(eps^2 shc (cosh - mu shc)), R = -2 pp shc / (eps^2 (cosh - mu shc)), Z = (cosh - mu shc)^2
    const Hyp& h = tp.h;
    const cplx ew = std::exp(tp.h.w * T);
    const cplx shc = ew * h.s, G = ew * (h.c - mu * h.s);
    r.M = 2.0 / (e2 * shc * G);
    const cplx R = -2.0 * pp * shc / (e2 * G);
    r.S = r.M + R;
    r.Z = G * G;
    r.Z1 = (r.M / r.S) * (r.M / r.S) * r.Z;
    return r;
}

double feller_augmented_mean(const FellerParams& p) {
    const double T = p.T(), k = p.kappa;
    // int_0^T (chi/k + (theta - chi/k) e^{-k s}) ds
    const double a = T * expm1c(-k * T);  // (1 - e^{-kT})/k
    if (std::abs(k * T) < 1e-8) return p.theta * T + 0.5 * p.chi * T * T;
    return p.chi / k * T + (p.theta - p.chi / k) * a;
}

namespace {
// log of the k-dependent joint kernel at y: log cf + log S^{vt+1} y^vt e^{-S y - M^2 Z theta / S} F(M^2 Z theta y).
struct JointNode {
    double k, w;
    cplx log_cf, logS, S, M2Z;
};

JointNode joint_node(const FellerParams& p, double k) {
    if (k == 0) k = 1e-300;
    JointNode n;
    n.k = k;
    const AugFellerCF c = feller_augmented_cf(p, k);
    n.log_cf = c.log_value;
    n.S = c.S;
    const double e2 = p.eps * p.eps, T = p.T();
    const cplx mu = 0.5 * p.kappa, pp = -0.5 * I1 * e2 * cplx(k);
    const cplx z2 = mu * mu - pp;
    // s S(s) -> 2/eps^2 as s -> 0, continued along s
    auto g = [&](double s) {
        if (s == 0) return cplx(2.0 / e2);
        const Hyp h = hyp(z2, s);
        const cplx ew = std::exp(h.w * s);
        const cplx shc = ew * h.s, G = ew * (h.c - mu * h.s);
        return s * (2.0 / (e2 * shc * G) - 2.0 * pp * shc / (e2 * G));
    };
    n.logS = tracked_log(g, T) - std::log(T);
    const Hyp h = hyp(z2, T);
    const cplx shc = std::exp(h.w * T) * h.s;
    n.M2Z = 4.0 / (e2 * e2 * shc * shc);
    return n;
}

cplx joint_kernel(const FellerParams& p, const JointNode& n, double y) {
    const double vt = p.vartheta();
    const cplx ez = n.M2Z * p.theta;
    cplx l = n.log_cf + (vt + 1) * n.logS - n.S * y - ez / n.S;
    if (y > 0) l += vt * std::log(y) + log_bessel_entire(vt, ez * y);
    else if (vt > 0) return 0;
    else l += -std::lgamma(vt + 1);
    return std::exp(l);
}
} // namespace

namespace {
double joint_k_max(const FellerParams& p) {
    // |cf| decays roughly like exp(-c sqrt(k)); walk out until it is negligible
    double k_max = 8;
    while (k_max < 1e6 && std::abs(feller_augmented_cf(p, k_max).value) > 1e-16) k_max *= 2;
    return k_max;
}

// k nodes and weights on [0, k_max]; quadratic panel spacing concentrates panels near k = 0
// where the integrand varies on the scale of the x-range
void joint_nodes(const FellerParams& p, double k_max, std::vector<JointNode>& nodes) {
    using G = boost::math::quadrature::gauss<double, 32>;
    const int panels = 64;
    for (int i = 0; i < panels; ++i) {
        const double a = k_max * double(i * i) / (panels * panels), b = k_max * double((i + 1) * (i + 1)) / (panels * panels);
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (size_t j = 0; j < G::abscissa().size(); ++j)
            for (int sg : {-1, 1}) {
                if (j == 0 && sg > 0 && G::abscissa()[0] == 0) continue;
                JointNode n = joint_node(p, c + sg * h * G::abscissa()[j]);
                n.w = h * G::weights()[j];
                nodes.push_back(n);
            }
    }
}
} // namespace

double feller_augmented_joint_density(const FellerParams& p, double dx, double y, double k_max) {
    return feller_augmented_joint_grid(p, {dx}, {y}, k_max)[0];
}

std::vector<double> feller_augmented_joint_grid(const FellerParams& p, const std::vector<double>& dx,
                                                const std::vector<double>& y, double k_max) {
    p.validate();
    if (p.T() <= 0) throw DegenerateLaw("feller_augmented_joint_density: t == tau");
    if (k_max <= 0) k_max = joint_k_max(p);
    std::vector<JointNode> nodes;
    joint_nodes(p, k_max, nodes);
    std::vector<double> out(dx.size() * y.size(), 0.0);
    std::vector<cplx> ker(nodes.size());
    for (size_t j = 0; j < y.size(); ++j) {
        if (y[j] < 0) continue;
        for (size_t n = 0; n < nodes.size(); ++n) ker[n] = nodes[n].w * joint_kernel(p, nodes[n], y[j]);
        for (size_t i = 0; i < dx.size(); ++i) {
            double s = 0;
            for (size_t n = 0; n < nodes.size(); ++n) s += (std::exp(I1 * nodes[n].k * dx[i]) * ker[n]).real();
            out[i * y.size() + j] = s / M_PI;
        }
    }
    return out;
}

// ---------------------------------------------------------------- Heston

cplx heston_log_cf(const FellerParams& p, cplx k) {
    p.validate();
    // E[e^{i k x}] = F_H(t, -k) with F_H the E[e^{-i k x}] transform
    const cplx kk = -k;
    if (imaginary(kk) && kk != 0.0) check_explosion(ExplosionModel::heston, p, kk.imag());
    if (p.T() == 0) return 0;
    const RiccatiRoots rr = heston_roots(p, kk);
    return aug_template(p, rr.mu, rr.product()).log_value;
}

cplx heston_cf(const FellerParams& p, cplx k) { return std::exp(heston_log_cf(p, k)); }

// ---------------------------------------------------------------- explosions

namespace {
RiccatiRoots make_roots(cplx mu, cplx pp) {
    RiccatiRoots r;
    r.mu = mu;
    r.zeta = std::sqrt(mu * mu - pp);
    r.lambda_plus = mu + r.zeta;
    r.lambda_minus = mu - r.zeta;
    return r;
}
} // namespace

RiccatiRoots feller_augmented_roots(const FellerParams& p, cplx k) {
    return make_roots(0.5 * p.kappa, -0.5 * I1 * p.eps * p.eps * k);
}

RiccatiRoots heston_roots(const FellerParams& p, cplx k) {
    return make_roots(0.5 * (p.kappa + I1 * p.rho * p.eps * k), -0.25 * p.eps * p.eps * k * (k - I1));
}

double feller_augmented_p_hat(double kappa, double eps) { return kappa * kappa / (2 * eps * eps); }

std::pair<double, double> heston_moment_bounds(double kappa, double eps, double rho) {
    // rhobar^2 eps^2 p^2 - (eps - 2 kappa rho) eps p - kappa^2 = 0
    const double a = (1 - rho * rho) * eps * eps, b = -(eps - 2 * kappa * rho) * eps, c = -kappa * kappa;
    const double disc = std::sqrt(b * b - 4 * a * c);
    // stable root pair
    const double q = -0.5 * (b + std::copysign(disc, b));
    double r1 = q / a, r2 = c / q;
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

ExplosionResult explosion_time(ExplosionModel model, double pm, const FellerParams& params) {
    // real mu and lambda_+ lambda_- at k = i p
    const RiccatiRoots rr = model == ExplosionModel::feller_augmented ? feller_augmented_roots(params, cplx(0, pm))
                                                                      : heston_roots(params, cplx(0, pm));
    const double mu = rr.mu.real(), pp = rr.product().real();
    ExplosionResult r;
    const auto T = first_zero(mu, mu * mu - pp);
    if (T) {
        r.explodes = true;
        r.T_star = *T;
        r.t_star = params.tau + *T;
    }
    return r;
}

// ---------------------------------------------------------------- PDV

void PDVParams::validate() const {
    if (!(a0 > 0)) throw InvalidModel("pdv: a0 must be positive");
    if (!(a1 < 0)) throw InvalidModel("pdv: a1 must be negative");
    if (!(kappa > 0)) throw InvalidModel("pdv: kappa must be positive");
    if (!(t >= tau)) throw DomainError("pdv: t < tau");
}

KelvinMode pdv_mode(const PDVParams& p, cplx k, cplx l) {
    p.validate();
    const double T = p.T(), a0 = p.a0, a1 = p.a1, ka = p.kappa;
    const cplx mu = 0.25 * (a1 + 2 * ka);
    const cplx z2 = mu * mu + 0.5 * I1 * a1 * ka * (k + l);
    const cplx nu = mu + 0.5 * I1 * a1 * k;  // Omega = E0 (cosh - nu shc)
    auto Obar = [&](double s) {
        const Hyp h = hyp(z2, s);
        return h.c - nu * h.s;
    };
    const Hyp h = hyp(z2, T);
    const cplx lnO = mu * T + h.w * T + tracked_log(Obar, T);
    const cplx den = h.c - nu * h.s;
    if (std::abs(den) < 1e-14 * (std::abs(h.c) + std::abs(nu * h.s)))
        throw Singularity(p.t, "pdv: Omega vanishes");
    const cplx dlnO = mu + (z2 * h.s - nu * h.c) / den;
    const cplx Gam = 2.0 * I1 * dlnO / a1;
    KelvinMode r;
    // the last -2 ln Omega is the divergence term of the forward operator
    r.alpha = I1 * a0 / a1 * (Gam - k) + 2 * a0 * ka / (a1 * a1) * lnO + I1 * a0 * ka / a1 * (k + l) * T +
              (0.5 * a1 + ka) * T - 2.0 * lnO;
    r.upsilon.resize(2);
    r.upsilon << Gam, k + l - Gam;
    r.m.resize(2);
    r.m << k, l;
    return r;
}

cplx pdv_cf(const PDVParams& p, cplx k, cplx l, double y, double z) {
    const KelvinMode r = pdv_mode(p, k, l);
    return r.H((VectorXd(2) << y, z).finished(), (VectorXd(2) << p.theta, p.varrho).finished());
}

// ---------------------------------------------------------------- quadratic OU / Stein-Stein

namespace {
// Shared linearization; q is the source so that Omega'' - 2 mu Omega' - q Omega = 0.
KelvinMode quad_mode(const QuadOUParams& p, cplx k, cplx l, cplx m, cplx mu, cplx q, cplx extra_rate) {
    if (!(p.eps > 0)) throw InvalidModel("quadratic OU: eps must be positive");
    if (!(p.t >= p.tau)) throw DomainError("quadratic OU: t < tau");
    const double T = p.T(), e2 = p.eps * p.eps, chi = p.chi;
    KelvinMode r;
    r.m.resize(3);
    r.m << k, l, m;
    r.upsilon.resize(3);
    if (T == 0) {
        r.alpha = 0;
        r.upsilon = r.m;
        return r;
    }
    const cplx z2 = mu * mu + q;
    const cplx nu = mu + 2.0 * I1 * e2 * m;
    auto Obar = [&](double s) {
        const Hyp h = hyp(z2, s);
        return h.c - nu * h.s;
    };
    const Hyp h = hyp(z2, T);
    const cplx den = h.c - nu * h.s;
    if (std::abs(den) < 1e-14 * (std::abs(h.c) + std::abs(nu * h.s)))
        throw Singularity(p.t, "quadratic OU: Omega vanishes");
    const cplx lnO = mu * T + h.w * T + tracked_log(Obar, T);
    const cplx Xi = I1 * (mu + (z2 * h.s - nu * h.c) / den) / (2 * e2);

    // delta/Omega and lambda/Omega from the exponential ansatz; they are even in zeta but
    // carry 1/zeta^3, so near the double root average two nearby zeta^2.
    auto ratios = [&](cplx zz2, cplx& D, cplx& L) {
        cplx w = std::sqrt(zz2);
        if (w.real() < 0) w = -w;
        const cplx lp = mu + w, lm = mu - w;
        const cplx cp = -(lm + 2.0 * I1 * e2 * m) / (2.0 * w), cm = (lp + 2.0 * I1 * e2 * m) / (2.0 * w);
        const cplx ap = -chi * lp / (e2 * w) * cp, am = chi * lm / (e2 * w) * cm;
        const cplx a0 = -I1 * l - ap - am;
        const cplx b0 = chi * mu / (w * w) * a0;
        const cplx cc = chi * chi * mu * mu / (e2 * w * w * w) * cp * cm;
        const cplx bp = -cp * b0 + e2 / (4.0 * w) * a0 * a0 - cc;
        const cplx bm = -cm * b0 - e2 / (4.0 * w) * a0 * a0 + cc;
        const cplx e1 = std::exp(-w * T), e2x = e1 * e1;
        const cplx om = cp + cm * e2x;
        D = I1 * (a0 * e1 + ap + am * e2x) / om;
        L = (b0 * e1 + bp + bm * e2x) / om;
        return chi * chi * (mu * mu - w * w) / (2 * e2 * w * w);  // g
    };
    const double scale = std::norm(mu) + std::abs(q) + 1e-300;
    cplx Dl, La, g;
    if (std::abs(z2) < 1e-8 * scale) {
        const cplx hstep = 1e-4 * scale;
        cplx D1, L1, D2, L2;
        const cplx g1 = ratios(z2 + hstep, D1, L1), g2 = ratios(z2 - hstep, D2, L2);
        Dl = 0.5 * (D1 + D2);
        La = 0.5 * (L1 + L2);
        g = 0.5 * (g1 + g2);
    } else {
        g = ratios(z2, Dl, La);
    }
    // 1/2 ln Omega from the ansatz, -3 ln Omega from the divergence term of the forward operator
    r.alpha = La + g * T - 2.5 * lnO + 3 * p.kappa * T + extra_rate * T;
    r.upsilon << k, Dl, Xi;
    return r;
}

cplx quad_H(const QuadOUParams& p, const KelvinMode& r, double x, double y, double z) {
    return r.H((VectorXd(3) << x, y, z).finished(), (VectorXd(3) << p.xi, p.theta, p.theta * p.theta).finished());
}
} // namespace

KelvinMode quadratic_ou_mode(const QuadOUParams& p, cplx k, cplx l, cplx m) {
    const double e2 = p.eps * p.eps;
    return quad_mode(p, k, l, m, p.kappa, 2.0 * I1 * e2 * k, 0.0);
}

cplx quadratic_ou_cf(const QuadOUParams& p, cplx k, cplx l, cplx m, double x, double y, double z) {
    return quad_H(p, quadratic_ou_mode(p, k, l, m), x, y, z);
}

KelvinMode stein_stein_mode(const QuadOUParams& p, cplx k, cplx l, cplx m) {
    if (!(std::abs(p.rho) < 1)) throw InvalidModel("stein_stein: |rho| must be below one");
    const double e2 = p.eps * p.eps;
    const cplx mu = p.kappa + I1 * p.rho * p.eps * k;
    // x-row divergence of the correlated loading adds 3 i rho eps k to the alpha rate
    return quad_mode(p, k, l, m, mu, e2 * k * (k - I1), 3.0 * I1 * p.rho * p.eps * k);
}

cplx stein_stein_cf(const QuadOUParams& p, cplx k, cplx l, cplx m, double x, double y, double z) {
    return quad_H(p, stein_stein_mode(p, k, l, m), x, y, z);
}

} // namespace ak
