// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "affine_kelvin/errors.hpp"
#include "affine_kelvin/fluids.hpp"
#include "affine_kelvin/gaussian.hpp"
#include "affine_kelvin/killed.hpp"
#include "affine_kelvin/linalg_ode.hpp"
#include "affine_kelvin/nongaussian.hpp"
#include "affine_kelvin/oracle.hpp"
#include "affine_kelvin/pricing.hpp"
#include "affine_kelvin/quadrature.hpp"
#include "affine_kelvin/transform.hpp"

using namespace ak;
using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

const cplx I1(0, 1);

VectorXd vec(std::initializer_list<double> v) {
    VectorXd r(v.size());
    int i = 0;
    for (double x : v) r(i++) = x;
    return r;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Collects sub-checks; the criterion passes when all do.
struct Ledger {
    bool ok = true;
    std::ostringstream msg;
    void check(bool c, const std::string& what, double value) {
        if (!c) ok = false;
        msg << (c ? "" : "!") << what << "=" << value << " ";
    }
    void mc(const std::vector<OracleReport>& reps) {
        for (const auto& r : reps) {
            const double z = r.std_error > 0 ? std::abs(r.oracle - r.closed_form) / r.std_error : 0;
            check(r.pass, r.statistic + "(z)", z);
        }
    }
};

std::vector<VectorXd> sample_points(const GaussianLaw& law, int n, double w, uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-w, w);
    const MatrixXd C = law.cov.llt().matrixL();
    std::vector<VectorXd> out;
    for (int k = 0; k < n; ++k) {
        VectorXd e(law.mean.size());
        for (int i = 0; i < e.size(); ++i) e(i) = u(g);
        out.push_back(law.mean + C * e);
    }
    return out;
}

FellerParams feller_p(double chi, double kappa, double eps, double theta, double T, bool boundary = false) {
    FellerParams p;
    p.chi = chi, p.kappa = kappa, p.eps = eps, p.theta = theta, p.tau = 0, p.t = T, p.allow_boundary = boundary;
    return p;
}

cplx riccati_cf(const AffineModelSpec& m, const VectorXcd& u, const VectorXd& zeta, double tau, double t) {
    RiccatiOptions o;
    o.form = RiccatiForm::backward_cf;
    o.tol = 1e-12;
    const RiccatiState r = riccati_integrate(m, u, tau, t, o);
    return std::exp(r.alpha + I1 * r.upsilon.cwiseProduct(zeta.cast<cplx>()).sum());
}

double mode_gap(const KelvinMode& km, const AffineModelSpec& m, double tau, double t) {
    const RiccatiState r = riccati_integrate(m, km.m, tau, t, 1e-12);
    return std::max(std::abs(km.alpha - r.alpha), (km.upsilon - r.upsilon).cwiseAbs().maxCoeff());
}

double riccati_blowup(const AffineModelSpec& m, double p, double horizon) {
    VectorXcd u = VectorXcd::Zero(m.dim());
    u(0) = cplx(0, -p);
    RiccatiOptions o;
    o.form = RiccatiForm::backward_cf;
    o.tol = 1e-11;
    o.localize = 1e-9;
    try {
        riccati_integrate(m, u, 0, horizon, o);
    } catch (const Explosion& e) {
        return e.t_star;
    }
    return INFINITY;
}

MCConfig exact(long paths) {
    MCConfig c;
    c.paths = paths;
    c.scheme = MCScheme::exact_ou;
    c.total_steps = 1;
    return c;
}

// ---------------------------------------------------------------- criteria

void c1(Ledger& L) {
    const auto m = models::kolmogorov(1.0, 0.0);
    const GaussianLaw law = gaussian_law(m, vec({0, 0}), 0, 1);
    std::vector<std::pair<double, VectorXd>> pts;
    for (const auto& z : sample_points(law, 50, 2.0, 4)) pts.push_back({1.0, z});
    const VectorXd scale = law.cov.diagonal().cwiseSqrt();
    const auto good = pde_residual([](double t, const VectorXd& z) { return kolmogorov_density(1, 0, 0, 0, 0, t, z(0), z(1)); },
                                   m, pts, scale);
    const auto bad = pde_residual(
        [](double t, const VectorXd& z) { return kolmogorov_original_density(1, 0, 0, 0, 0, t, z(0), z(1)); }, m, pts, scale);
    L.check(good.evaluated == 50, "points", good.evaluated);
    L.check(good.max_rel < 1e-6, "corrected_residual", good.max_rel);
    L.check(bad.max_rel > 0.1, "original_residual", bad.max_rel);
    const double k = 1, T = 1e-3, xi = 0.2, th = 0.1;
    const double sx = std::sqrt(k * k * k * T * T * T / 6), sy = std::sqrt(2 * k * T);
    const double mass = integrate(
        [&](double y) {
            const double c = xi + 0.5 * (y + th) * T;
            return integrate([&](double x) { return kolmogorov_original_density(k, 0, xi, th, 0, T, x, y); }, c - 10 * sx,
                             c + 10 * sx, 1e-12, 1e-10);
        },
        th - 10 * sy, th + 10 * sy, 1e-10, 1e-10);
    L.check(std::abs(mass - 4) < 0.05, "original_mass", mass);
}

void c2(Ledger& L) {
    const auto m = models::kolmogorov(1.0, 0.0);
    const GaussianLaw law = gaussian_law(m, vec({0, 0}), 0, 1);
    L.check(std::abs(law.cov(0, 0) - 1.0 / 3) < 1e-12, "var_x_err", std::abs(law.cov(0, 0) - 1.0 / 3));
    L.check(std::abs(law.cov(1, 1) - 1.0) < 1e-12, "var_y_err", std::abs(law.cov(1, 1) - 1));
    const double rho = law.cov(0, 1) / std::sqrt(law.cov(0, 0) * law.cov(1, 1));
    L.check(std::abs(rho - std::sqrt(3.0) / 2) < 1e-12, "rho_err", std::abs(rho - std::sqrt(3.0) / 2));
    std::vector<Statistic> st;
    st.push_back(stat_moment("mx", [](const PathEnd& e) { return e.z(0); }, 0.0));
    st.push_back(stat_moment("my", [](const PathEnd& e) { return e.z(1); }, 0.0));
    st.push_back(stat_moment("vx", [](const PathEnd& e) { return e.z(0) * e.z(0); }, 1.0 / 3));
    st.push_back(stat_moment("vy", [](const PathEnd& e) { return e.z(1) * e.z(1); }, 1.0));
    st.push_back(stat_moment("cxy", [](const PathEnd& e) { return e.z(0) * e.z(1); }, 0.5));
    L.mc(mc_simulate(m, vec({0, 0}), 0, 1, exact(1000000), st));
}

void c3(Ledger& L) {
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> u(-1, 1);
    const double a = 1.0, b = 0.3;
    double worst = 0;
    for (double lam : {0.5, 2.0})
        for (int k = 0; k < 20; ++k) {
            const double tau = 0.2 * (u(g) + 1), t = tau + 0.5 + 0.5 * (u(g) + 1);
            const double xi = u(g), th = u(g), x = xi + th * (t - tau) + 0.5 * u(g), y = th + u(g);
            const double base = kolmogorov_density(a, b, xi, th, tau, t, x, y);
            const double l2 = lam * lam, l3 = l2 * lam;
            const double scaled = kolmogorov_density(a, b / lam, l3 * xi, lam * th, l2 * tau, l2 * t, l3 * x, lam * y);
            worst = std::max(worst, rel(scaled, base / (l2 * l2)));
        }
    L.check(worst < 1e-10, "max_rel", worst);
}

void c4(Ledger& L) {
    const double eps = 0.6, xi = 0.4, th = -0.3, T = 1.7;
    double worst = 0;
    for (double kappa : {0.5, 2.0}) {
        const GaussianLaw h = harmonic_particle_law(kappa, 1e-8, eps, xi, th, 0, T);
        const GaussianLaw f = augmented_ou_law(0.0, kappa, eps, xi, th, 0, T);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) worst = std::max(worst, rel(h.cov(i, j), f.cov(i, j)));
    }
    L.check(worst < 1e-5, "free_limit_rel", worst);
    std::mt19937_64 g(23);
    std::uniform_real_distribution<double> u(-1, 1);
    const double q = 0.18, beta = 0.9, tau = 0.3, t = 1.8, e2 = std::sqrt(2 * q);
    double wf = 0, wb = 0;
    for (int k = 0; k < 100; ++k) {
        const double rho = u(g), ups = u(g);
        const GaussianLaw f = augmented_ou_law(0.0, beta, e2, rho, ups, tau, t);
        const double r = f.mean(0) + 2 * std::sqrt(f.cov(0, 0)) * u(g), v = f.mean(1) + 2 * std::sqrt(f.cov(1, 1)) * u(g);
        wf = std::max(wf, rel(chandrasekhar_free(q, beta, rho, ups, tau, t, r, v), f.density(vec({r, v}))));
        const GaussianLaw h = harmonic_particle_law(beta, 2.0, e2, rho, ups, tau, t);
        wb = std::max(wb, rel(chandrasekhar_bound(q, beta, 2.0, rho, ups, tau, t, r, v), h.density(vec({r, v}))));
    }
    L.check(wf < 1e-10, "chandrasekhar_free_rel", wf);
    L.check(wb < 1e-10, "chandrasekhar_bound_rel", wb);
}

void c5(Ledger& L) {
    Matrix3d strain = Matrix3d::Zero(), rot = Matrix3d::Zero(), gen;
    strain.diagonal() << 0.3, -0.1, -0.2;
    rot << 0, -0.8, 0.1, 0.8, 0, -0.4, -0.1, 0.4, 0;
    gen << 0.1, 0.5, -0.2, -0.3, 0.05, 0.4, 0.2, -0.6, -0.15;
    const char* names[] = {"strain", "rotation", "generic"};
    int i = 0;
    for (const Matrix3d& Lm : {strain, rot, gen}) {
        KelvinWaveState s0;
        s0.xi = Vector3d(0.3, -0.2, 0.5);
        s0.gamma = Vector3d(1.0, 0.5, -0.4);
        s0.amp = s0.gamma.cross(Vector3d(0.2, 1.0, 0.3));
        const auto tr = kelvin_wave_integrate(MatrixSchedule::constant(Lm), 0.0, s0, 0, 10, 4000);
        const double c0 = s0.gamma.dot(s0.xi);
        double wa = 0, wx = 0;
        for (const auto& s : tr.states) {
            wa = std::max(wa, std::abs(s.gamma.dot(s.amp)));
            wx = std::max(wx, std::abs(s.gamma.dot(s.xi) - c0));
        }
        L.check(wa < 1e-10, std::string(names[i]) + "_gamma.a", wa);
        L.check(wx < 1e-10, std::string(names[i]) + "_gamma.xi", wx);
        ++i;
    }
}

void c6(Ledger& L) {
    const LinearFlow2D f{0.3, 1.0, 0.01};
    const double psi0 = f.stream(0.8, 0.4);
    double ws = 0;
    for (int k = 1; k <= 20; ++k) {
        const GaussianLaw law = vorticity_law(f, 0.8, 0.4, 0, 0.37 * k);
        ws = std::max(ws, std::abs(f.stream(law.mean(0), law.mean(1)) - psi0));
    }
    L.check(ws < 1e-12, "streamline", ws);
    const LinearFlow2D fv{0.3, 1.0, 0.05};
    const auto m = models::vorticity2d(fv.s, fv.w, fv.nu);
    const double T = 1.5;
    const GaussianLaw law = vorticity_law(fv, 0.6, 0.1, 0, T);
    std::vector<std::pair<double, VectorXd>> pts;
    for (const auto& z : sample_points(law, 50, 2.0, 8)) pts.push_back({T, z});
    const auto r = pde_residual([&](double t, const VectorXd& z) { return vorticity_law(fv, 0.6, 0.1, 0, t).density(z); }, m,
                                pts, law.cov.diagonal().cwiseSqrt(), T);
    L.check(r.max_rel < 1e-6 && r.evaluated == 50, "pde_residual", r.max_rel);
    double wp = 0;
    for (double R : {0.5, 1.0, 2.0}) {
        const double h = 1e-2;
        auto F = [](double x) { return rotational_stream_function(x); };
        const double d1 = (F(R - 2 * h) - 8 * F(R - h) + 8 * F(R + h) - F(R + 2 * h)) / (12 * h);
        const double d2 = (-F(R - 2 * h) + 16 * F(R - h) - 30 * F(R) + 16 * F(R + h) - F(R + 2 * h)) / (12 * h * h);
        wp = std::max(wp, std::abs(d2 + d1 / R - std::exp(-0.5 * R * R) / (2 * M_PI)));
    }
    L.check(wp < 1e-8, "poisson", wp);
}

void c7(Ledger& L) {
    const FellerParams p = feller_p(0.15, 1.5, 0.3, 0.1, 1.0);
    const double mass = integrate([&](double y) { return feller_density(p, y); }, 0, 3, 1e-14, 1e-13);
    L.check(std::abs(mass - 1) < 1e-8, "feller_mass_err", std::abs(mass - 1));
    InversionGrid g;
    g.axes = {Axis{0.01, 5 * feller_mean(p), 200}};
    const auto inv = invert_cf_1d([&](cplx u) { return feller_cf(p, u); }, g);
    double w = 0;
    for (size_t i = 0; i < inv.x.size(); ++i) w = std::max(w, std::abs(inv.density[i] - feller_density(p, inv.x[i])));
    L.check(w < 1e-6, "inversion_linf", w);

    const FellerParams pa = feller_p(0.04, 1.5, 0.5, 0.04, 1.0, true);
    const auto ma = models::augmented_feller(pa.chi, pa.kappa, pa.eps);
    double wa = 0;
    for (double k : {-8.0, -2.0, -0.5, 0.5, 2.0, 8.0}) {
        VectorXcd u(2);
        u << -k, 0;
        wa = std::max(wa, std::abs(feller_augmented_cf(pa, k).value - riccati_cf(ma, u, vec({0, pa.theta}), 0, 1)));
    }
    L.check(wa < 1e-8, "feller_augmented", wa);

    FellerParams ph = pa;
    ph.rho = -0.7;
    double wh = 0;
    for (double T : {0.5, 2.0}) {
        ph.t = T;
        const auto mh = models::heston(ph.chi, ph.kappa, ph.eps, ph.rho);
        for (int j = -16; j <= 16; ++j) {
            VectorXcd u(2);
            u << 0.5 * j, 0;
            wh = std::max(wh, std::abs(heston_cf(ph, 0.5 * j) - riccati_cf(mh, u, vec({0, ph.theta}), 0, T)));
        }
    }
    L.check(wh < 1e-8, "heston", wh);

    const PDVParams pd{0.04, -0.1, 2.0, 0.1, 0.05, 0, 1.5};
    const auto md = models::pdv(pd.a0, pd.a1, pd.kappa);
    double wd = 0;
    std::mt19937_64 gd(2);
    std::uniform_real_distribution<double> ud(-2, 2);
    for (int i = 0; i < 6; ++i) wd = std::max(wd, mode_gap(pdv_mode(pd, ud(gd), ud(gd)), md, pd.tau, pd.t));
    L.check(wd < 1e-8, "pdv", wd);

    const QuadOUParams pq{0.1, 1.0, 0.3, 0, 0, 0.2, 0, 1.2};
    const KelvinMode km = quadratic_ou_mode(pq, 0.7, 0.0, 0.2);
    const RiccatiState rq = riccati_integrate(models::quadratic_ou(pq.chi, pq.kappa, pq.eps), km.m, pq.tau, pq.t, 1e-12);
    L.check(std::abs(km.upsilon(2) - rq.upsilon(2)) < 1e-8, "quadratic_ou_Xi", std::abs(km.upsilon(2) - rq.upsilon(2)));
    std::mt19937_64 gq(31);
    std::uniform_real_distribution<double> uq(0, 1);
    double wq = 0;
    for (int i = 0; i < 10; ++i) {
        QuadOUParams q{0.5 * uq(gq), 0.3 + 1.7 * uq(gq), 0.1 + 0.7 * uq(gq), 0, 0, 0, 0, 0.2 + 1.8 * uq(gq)};
        const cplx k = 2 * uq(gq) - 1, l = 2 * uq(gq) - 1, mm = 2 * uq(gq) - 1;
        wq = std::max(wq, mode_gap(quadratic_ou_mode(q, k, l, mm), models::quadratic_ou(q.chi, q.kappa, q.eps), q.tau, q.t));
    }
    L.check(wq < 1e-6, "quadratic_ou", wq);

    const QuadOUParams ps{0.2, 1.0, 0.3, -0.5, 0, 0.2, 0, 1.0};
    double wss = 0;
    for (double rho : {0.0, -0.5}) {
        QuadOUParams q = ps;
        q.rho = rho;
        const auto m = models::stein_stein(q.chi, q.kappa, q.eps, rho);
        for (auto [k, l, mm] : {std::tuple{0.8, -0.3, 0.1}, std::tuple{-1.5, 0.4, -0.2}})
            wss = std::max(wss, mode_gap(stein_stein_mode(q, k, l, mm), m, q.tau, q.t));
    }
    L.check(wss < 1e-6, "stein_stein", wss);
}

void c8(Ledger& L) {
    int combos = 0;
    double worst = 0;
    bool regions = true;
    for (auto [kappa, eps, fs] : {std::tuple{1.0, 0.7, std::vector<double>{1.2, 2.0, 5.0}},
                                  std::tuple{1.5, 0.5, std::vector<double>{1.5, 3.0}}}) {
        const FellerParams p = feller_p(0.3, kappa, eps, 0.1, 1, true);
        const double ph = feller_augmented_p_hat(kappa, eps);
        for (double q : {-1.0, 0.5 * ph, ph}) regions = regions && !explosion_time(ExplosionModel::feller_augmented, q, p).explodes;
        const auto m = models::augmented_feller(p.chi, kappa, eps);
        for (double f : fs) {
            const auto ex = explosion_time(ExplosionModel::feller_augmented, f * ph, p);
            if (!ex.explodes) {
                regions = false;
                continue;
            }
            worst = std::max(worst, rel(riccati_blowup(m, f * ph, 3 * ex.T_star), ex.T_star));
            ++combos;
        }
    }
    for (auto [kappa, eps, rho] : {std::tuple{1.5, 0.5, -0.7}, std::tuple{0.5, 1.0, 0.3}, std::tuple{2.0, 0.2, 0.0}}) {
        const auto [pm, pp] = heston_moment_bounds(kappa, eps, rho);
        regions = regions && pp > 1 && pm < 1;
        FellerParams p = feller_p(0.04, kappa, eps, 0.04, 1, true);
        p.rho = rho;
        for (double q : {pm + 1e-3, 0.0, 0.5, 1.0, pp - 1e-3}) regions = regions && !explosion_time(ExplosionModel::heston, q, p).explodes;
        const auto m = models::heston(p.chi, kappa, eps, rho);
        for (double q : {pm - 2.0, pp + 3.0}) {
            const auto ex = explosion_time(ExplosionModel::heston, q, p);
            if (!ex.explodes) {
                regions = false;
                continue;
            }
            worst = std::max(worst, rel(riccati_blowup(m, q, 3 * ex.T_star), ex.T_star));
            ++combos;
        }
    }
    L.check(combos >= 10, "combinations", combos);
    L.check(worst < 1e-3, "max_rel_T*", worst);
    L.check(regions, "no_explosion_regions", regions);
}

void c9(Ledger& L) {
    // Asian geometric: Euler at 512 steps, with the 256-step run as a Richardson check
    {
        const double s = 100, r = 0.05, sg = 0.2;
        const double closed = asian_geometric_price(s, r, sg, {1, 100, 1}, 0);
        auto st = stat_moment("asian", [&](const PathEnd& e) { return std::exp(-r) * std::max(std::exp(e.z(0)) - 100, 0.0); }, closed);
        MCConfig c;
        c.paths = 1000000;
        c.steps = 512;
        const auto m = models::kolmogorov(sg * sg, r - 0.5 * sg * sg);
        const auto a = mc_simulate(m, vec({0, std::log(s)}), 0, 1, c, {st});
        c.steps = 256;
        c.seed += 1;
        const auto b = mc_simulate(m, vec({0, std::log(s)}), 0, 1, c, {st});
        L.mc(a);
        const double rich = 2 * a[0].oracle - b[0].oracle, se = std::sqrt(4 * a[0].std_error * a[0].std_error + b[0].std_error * b[0].std_error);
        L.check(std::abs(rich - closed) < 3 * se, "asian_richardson(z)", std::abs(rich - closed) / se);
        const double cp = closed - asian_geometric_price(s, r, sg, {-1, 100, 1}, 0);
        const double par = std::exp(-0.5 * (r + sg * sg / 6)) * s - std::exp(-r) * 100;
        L.check(std::abs(cp - par) < 1e-12, "asian_parity", std::abs(cp - par));
        const double bs = black_scholes_price(s, r, sg, {1, 100, 1}, 0) - black_scholes_price(s, r, sg, {-1, 100, 1}, 0);
        L.check(std::abs(bs - (s - std::exp(-r) * 100)) < 1e-12, "bs_parity", std::abs(bs - (s - std::exp(-r) * 100)));
    }
    {
        const double r = 0.02, sh = 5, K = 100;
        const double closed = bachelier_price(100, r, sh, {1, K, 1}, 0);
        L.mc(mc_simulate(models::ou(0, -r, sh), vec({100}), 0, 1, exact(1000000),
                         {stat_moment("bachelier", [&](const PathEnd& e) { return std::exp(-r) * std::max(e.z(0) - K, 0.0); }, closed)}));
        const double cp = closed - bachelier_price(100, r, sh, {-1, K, 1}, 0);
        L.check(std::abs(cp - (100 - std::exp(-r) * K)) < 1e-12, "bachelier_parity", std::abs(cp - (100 - std::exp(-r) * K)));
    }
    {
        const double chi = 0.03, kappa = 0.5, eps = 0.1, th = 0.02;
        const double Zt = vasicek_bond(chi, kappa, eps, th, 0, 1), Zb = vasicek_bond(chi, kappa, eps, th, 0, 3), K = Zb / Zt;
        const double closed = vasicek_bond_option(chi, kappa, eps, th, 0, {1, K, 1, 3});
        auto st = stat_moment("bond_option", [&](const PathEnd& e) {
            return std::exp(-e.z(0)) * std::max(vasicek_bond(chi, kappa, eps, e.z(1), 1, 3) - K, 0.0);
        }, closed);
        L.mc(mc_simulate(models::augmented_ou(chi, kappa, eps), vec({0, th}), 0, 1, exact(1000000), {st}));
        const double cp = closed - vasicek_bond_option(chi, kappa, eps, th, 0, {-1, K, 1, 3});
        L.check(std::abs(cp - (Zb - K * Zt)) < 1e-12, "bond_option_parity", std::abs(cp - (Zb - K * Zt)));
    }
    {
        const double chi = 0.03, kappa = 0.5, eps = 0.1, th = 0.02, T = 5;
        MCConfig c;
        c.paths = 1000000;
        c.total_steps = 512;
        c.scheme = MCScheme::full_truncation_feller;
        L.mc(mc_simulate(models::cir(chi, kappa, eps), vec({th}), 0, T, c,
                         {stat_moment("cir_bond", [](const PathEnd& e) { return e.weight; }, cir_bond(chi, kappa, eps, th, 0, T))}));
    }
    {
        const double chi = 0.03, kappa = 0.5, eps = 0.01, th = 0.02;
        double w = 0;
        for (double T : {1.0, 5.0, 10.0}) {
            const double a = vasicek_bond(chi, kappa, eps, th, 0, T);
            const double b = vasicek_bond_expectation(chi, kappa, eps, th, 0, T);
            const double k = killed_gaussian_law(models::vasicek(chi, kappa, eps), vec({0, th}), 0, T).mass();
            w = std::max({w, std::abs(a - b), std::abs(a - k)});
        }
        L.check(w < 1e-10, "vasicek_routes", w);
    }
}

void c10(Ledger& L) {
    {
        const double chi = 0.1, kappa = 1.2, eps = 0.3, th = 0.25, T = 2;
        const double fair = vol_swap_fair(chi, kappa, th, 0, T);
        const GaussianLaw law = augmented_ou_law(chi, kappa, eps, 0, th, 0, T);
        const CF1D cf = [&](cplx k) { return std::exp(I1 * k * law.mean(0) - 0.5 * k * k * law.cov(0, 0)); };
        L.check(std::abs(cf_moment(cf, 1) / T - fair) < 1e-8, "vol_swap_cf", std::abs(cf_moment(cf, 1) / T - fair));
        L.mc(mc_simulate(models::augmented_ou(chi, kappa, eps), vec({0, th}), 0, T, exact(1000000),
                         {stat_moment("vol_swap", [T](const PathEnd& e) { return e.z(0) / T; }, fair)}));
    }
    {
        const FellerParams p = feller_p(0.15, 1.5, 0.3, 0.05, 2);
        const double fair = var_swap_feller(p.chi, p.kappa, p.theta, 0, 2);
        const CF1D cf = [&](cplx k) { return feller_augmented_cf(p, -k).value; };
        L.check(std::abs(cf_moment(cf, 1) / 2 - fair) < 1e-8, "var_swap_feller_cf", std::abs(cf_moment(cf, 1) / 2 - fair));
        MCConfig c;
        c.paths = 200000;
        c.steps = 256;
        c.scheme = MCScheme::full_truncation_feller;
        L.mc(mc_simulate(models::augmented_feller(p.chi, p.kappa, p.eps), vec({0, p.theta}), 0, 2, c,
                         {stat_moment("var_swap_feller", [](const PathEnd& e) { return e.z(0) / 2; }, fair)}));
    }
    {
        const double chi = 0.3, kappa = 1.5, eps = 0.4, th = 0.35, T = 2;
        const double fair = var_swap_ou_exact(chi, kappa, eps, th, 0, T);
        const auto m = models::quadratic_ou(chi, kappa, eps);
        const VectorXd zeta = vec({0, th, th * th});
        const CF1D cf = [&](cplx k) {
            VectorXcd u = VectorXcd::Zero(3);
            u(0) = k;
            return riccati_cf(m, u, zeta, 0, T);
        };
        L.check(std::abs(cf_moment(cf, 1) / T - fair) < 1e-8, "var_swap_ou_cf", std::abs(cf_moment(cf, 1) / T - fair));
        MCConfig c;
        c.paths = 200000;
        c.steps = 256;
        c.scheme = MCScheme::full_truncation_feller;
        L.mc(mc_simulate(m, zeta, 0, T, c, {stat_moment("var_swap_ou", [T](const PathEnd& e) { return e.z(0) / T; }, fair)}));
        const double gap = var_swap_ou_exact(chi, kappa, eps, th, 0, 1e7) - var_swap_ou(chi, kappa, th, 0, 1e7);
        L.check(std::abs(gap - eps * eps / (2 * kappa)) < 1e-6, "ou_averaged_gap", gap);
    }
    {
        const FellerParams p = feller_p(0.15, 1.5, 0.3, 0.1, 1);
        const double xbar = feller_augmented_mean(p), w = -0.1;
        const double v = var_swaption_price(p, {1, w, 1});
        L.check(std::abs(v - (xbar - w)) < 1e-6, "var_swaption_itm", std::abs(v - (xbar - w)));
    }
}

int run_cli(const std::string& args, std::string& out) {
    FILE* p = popen((std::string(AK_CLI_PATH) + " " + args).c_str(), "r");
    if (!p) return -1;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    const int st = pclose(p);
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

void c11(Ledger& L) {
    for (const char* model : {"kolmogorov", "feller"}) {
        std::string a, b;
        const std::string args = std::string("validate --model ") + model + " --paths 50000 --seed 4242 --format csv";
        const int ra = run_cli(args, a), rb = run_cli(args, b);
        L.check(ra == 0 && rb == 0, std::string(model) + "_exit", ra + rb);
        L.check(!a.empty() && a == b, std::string(model) + "_identical", a == b);
    }
}

} // namespace

int main() {
    struct Crit {
        int id;
        const char* name;
        std::function<void(Ledger&)> f;
        double limit;  // seconds, 0 for none
    };
    const std::vector<Crit> crits = {
        {1, "corrected Kolmogorov validation", c1, 5},
        {2, "Kolmogorov marginals", c2, 30},
        {3, "Kolmogorov scale invariance", c3, 0},
        {4, "harmonic particle limit and Chandrasekhar forms", c4, 0},
        {5, "Kelvin-wave invariants", c5, 5},
        {6, "vorticity blob", c6, 0},
        {7, "Feller and non-Gaussian CFs", c7, 60},
        {8, "explosion times", c8, 0},
        {9, "pricing", c9, 180},
        {10, "variance and volatility swaps", c10, 0},
        {11, "validate determinism", c11, 0},
    };
    int failed = 0;
    for (const auto& c : crits) {
        Ledger L;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.f(L);
        } catch (const std::exception& e) {
            L.ok = false;
            L.msg << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit > 0 && secs > c.limit) {
            L.ok = false;
            L.msg << "!runtime_limit=" << c.limit << " ";
        }
        if (!L.ok) ++failed;
        std::printf("%s criterion %d (%s) [%.1fs]: %s\n", L.ok ? "PASS" : "FAIL", c.id, c.name, secs, L.msg.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(crits.size()) - failed, crits.size());
    return failed ? 1 : 0;
}
