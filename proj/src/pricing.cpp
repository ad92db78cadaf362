#include "affine_kelvin/pricing.hpp"

#include <cmath>

#include "affine_kelvin/errors.hpp"
#include "affine_kelvin/special.hpp"
#include "affine_kelvin/transform.hpp"

namespace ak {

namespace {

const cplx I1(0, 1);

void check_nu(int nu) {
    if (nu != 1 && nu != -1) throw DomainError("option type must be +1 (call) or -1 (put)");
}
double maturity(double tau, double t) {
    if (!(t >= tau)) throw DomainError("maturity before valuation time");
    return t - tau;
}
// (1 - e^{-x})/x
double xi1(double x) { return std::abs(x) < 1e-5 ? 1 - x / 2 + x * x / 6 : -std::expm1(-x) / x; }

} // namespace

std::string instrument_name(const Instrument& inst) {
    static const char* names[] = {"bachelier", "black_scholes", "asian_geometric", "vol_swap", "vol_swaption",
                                  "var_swap_feller", "var_swap_ou", "var_swaption", "bond", "bond_option"};
    return names[inst.index()];
}

double bachelier_vol(double sigma_hat, double r, double T) {
    // sigma_hat sqrt((1 - e^{-2rT})/(2r))
    return sigma_hat * std::sqrt(T * xi1(2 * r * T));
}

double bachelier_price(double s, double r, double sigma_hat, const BachelierOption& o, double tau) {
    check_nu(o.nu);
    if (!(sigma_hat >= 0)) throw DomainError("bachelier: sigma_hat must be non-negative");
    const double T = maturity(tau, o.t);
    const double d = s - std::exp(-r * T) * o.K;
    const double v = bachelier_vol(sigma_hat, r, T);
    if (v == 0) return std::max(o.nu * d, 0.0);
    return o.nu * d * norm_cdf(o.nu * d / v) + v * norm_pdf(d / v);
}

double black_scholes_price(double s, double r, double sigma, const BlackScholesOption& o, double tau) {
    check_nu(o.nu);
    if (!(s > 0) || !(o.K > 0) || !(sigma > 0)) throw DomainError("black_scholes: need s, K, sigma > 0");
    const double T = maturity(tau, o.t);
    if (T == 0) return std::max(o.nu * (s - o.K), 0.0);
    const double th = std::log(s), k = std::log(o.K), sd = sigma * std::sqrt(T);
    const double d1 = (th - k + (r + 0.5 * sigma * sigma) * T) / sd, d2 = d1 - sd;
    return o.nu * (s * norm_cdf(o.nu * d1) - std::exp(-r * T + k) * norm_cdf(o.nu * d2));
}

double asian_geometric_price(double s, double r, double sigma, const AsianGeometric& o, double tau) {
    check_nu(o.nu);
    if (!(s > 0) || !(o.K > 0) || !(sigma > 0)) throw DomainError("asian_geometric: need s, K, sigma > 0");
    const double T = maturity(tau, o.t);
    const double disc = std::exp(-r * T);
    if (T == 0) return std::max(o.nu * (s - o.K), 0.0);
    const double sa = sigma * std::sqrt(T / 3), lsk = std::log(s / o.K);
    const double fwd = std::exp(-0.5 * (r + sigma * sigma / 6) * T) * s;
    const double d1 = (lsk + 0.5 * (r + sigma * sigma / 6) * T) / sa;
    const double d2 = (lsk + 0.5 * (r - sigma * sigma / 2) * T) / sa;
    return o.nu * (fwd * norm_cdf(o.nu * d1) - disc * o.K * norm_cdf(o.nu * d2));
}

double vol_swap_fair(double chi_hat, double kappa, double theta_hat, double tau, double t) {
    if (!(kappa > 0)) throw DomainError("vol_swap: kappa must be positive");
    const double T = maturity(tau, t);
    return chi_hat / kappa + (theta_hat - chi_hat / kappa) * xi1(kappa * T);
}

double vol_swaption_price(const OUParams& p, const VolSwaption& o) {
    check_nu(o.nu);
    if (!(p.kappa > 0)) throw DomainError("vol_swaption: kappa must be positive");
    if (!(o.t > p.tau)) throw DomainError("vol_swaption: need t > tau");
    const GaussianLaw law = augmented_ou_law(p.chi, p.kappa, p.eps, 0.0, p.theta, p.tau, o.t);
    const double m = law.mean(0) - o.varpi_hat, sd = std::sqrt(law.cov(0, 0));
    return o.nu * m * norm_cdf(o.nu * m / sd) + sd * norm_pdf(m / sd);
}

double var_swap_feller(double chi, double kappa, double theta, double tau, double t) {
    if (!(kappa > 0)) throw DomainError("var_swap: kappa must be positive");
    const double T = maturity(tau, t);
    return chi / kappa + (theta - chi / kappa) * xi1(kappa * T);
}

double var_swap_ou(double chi_hat, double kappa, double theta_hat, double tau, double t) {
    if (!(kappa > 0)) throw DomainError("var_swap: kappa must be positive");
    const double T = maturity(tau, t);
    const double k2 = kappa * kappa, g = kappa * theta_hat - chi_hat;
    return chi_hat * chi_hat / k2 + 2 * chi_hat * g / k2 * xi1(kappa * T) + g * g / k2 * xi1(2 * kappa * T);
}

double var_swap_ou_exact(double chi_hat, double kappa, double eps_hat, double theta_hat, double tau, double t) {
    const double T = maturity(tau, t);
    return var_swap_ou(chi_hat, kappa, theta_hat, tau, t) + eps_hat * eps_hat / (2 * kappa) * (1 - xi1(2 * kappa * T));
}

double var_swaption_regularized(const FellerParams& p, const VarSwaption& o, double eps) {
    check_nu(o.nu);
    if (!(eps > 0)) throw DomainError("var_swaption: regularization must be positive");
    FellerParams q = p;
    q.t = o.t;
    q.validate();
    if (!(q.T() > 0)) throw DomainError("var_swaption: need t > tau");
    const double b = o.nu * eps;
    // g(k) = E[exp(-i k (x - varpi))]; g(0) = 1, g'(0) = -i E[x - varpi], g''(0) = -E[(x - varpi)^2]
    auto g = [&](double k) { return feller_augmented_cf(q, k).value * std::polar(1.0, k * o.varpi); };
    const CF1D cf = [&](cplx k) { return feller_augmented_cf(q, -k).value; };
    const double m1 = feller_augmented_mean(q) - o.varpi;
    const double var = cf_moment(cf, 2) - std::pow(feller_augmented_mean(q), 2);
    const double m2 = var + m1 * m1;
    const cplx g1 = -I1 * m1, g2 = -0.5 * m2;
    const double sd = std::sqrt(std::max(var, 0.0));

    // the 1/(ik - b)^2 spike of width b is integrated analytically against the quadratic
    // Taylor part of g on [-K0, K0]; the remainder and the tails are smooth
    const double K0 = 0.5 / (std::abs(m1) + sd + 1e-300);
    const double at = std::atan(K0 / b), den = K0 * K0 + b * b;
    const double I0 = 2 * K0 / den;
    const cplx Ik1 = 2.0 * I1 * (at - b * K0 / den);
    const double Ik2 = -2 * K0 + 4 * b * at - 2 * b * b * K0 / den;
    cplx acc = I0 + g1 * Ik1 + g2 * Ik2;

    auto kern = [&](double k) { return 1.0 / ((I1 * k - b) * (I1 * k - b)); };
    const double osc = M_PI / std::max(std::abs(o.varpi) + std::abs(m1) + sd, 1e-12);
    std::vector<double> k, w;
    gl_panels(0, K0, std::min(K0 / 4, osc), k, w);
    double inner = 0;
    for (size_t j = 0; j < k.size(); ++j) inner += 2 * w[j] * ((g(k[j]) - 1.0 - g1 * k[j] - g2 * k[j] * k[j]) * kern(k[j])).real();

    double Kmax = 2 * K0;
    auto small = [&](double K) { return std::abs(g(K)) / (K * K) < 1e-15; };
    while (!(small(Kmax) && small(2 * Kmax))) {
        Kmax *= 2;
        if (Kmax > 1e8) throw NonIntegrableCF("var_swaption: transform tail does not decay");
    }
    k.clear();
    w.clear();
    gl_panels(K0, Kmax, std::min((Kmax - K0) / 8, osc), k, w);
    double outer = 0;
    for (size_t j = 0; j < k.size(); ++j) outer += 2 * w[j] * (g(k[j]) * kern(k[j])).real();
    const double v = (acc.real() + inner + outer) / (2 * M_PI);
    if (!std::isfinite(v)) throw NonIntegrableCF("var_swaption: non-finite integral");
    return v;
}

double var_swaption_price(const FellerParams& p, const VarSwaption& o) {
    // error linear in eps
    const double v5 = var_swaption_regularized(p, o, 1e-5), v6 = var_swaption_regularized(p, o, 1e-6);
    return (10 * v6 - v5) / 9;
}

VasicekAB vasicek_ab(double chi, double kappa, double eps, double T) {
    if (T < 0) throw DomainError("vasicek: t < tau");
    const double x = kappa * T, e2 = eps * eps;
    double B, BmT_over_k, h0;
    if (std::abs(x) < 1e-4) {
        B = T * (1 - x / 2 + x * x / 6 - x * x * x / 24 + x * x * x * x / 120);
        BmT_over_k = T * T * (-0.5 + x / 6 - x * x / 24 + x * x * x / 120 - x * x * x * x / 720);
        h0 = e2 * T * T * T * (1.0 / 3 - x / 4 + 7 * x * x / 60 - x * x * x / 24 + 31 * x * x * x * x / 2520);
    } else {
        B = -std::expm1(-x) / kappa;
        BmT_over_k = (B - T) / kappa;
        h0 = e2 / (kappa * kappa) * (T - B) - e2 * B * B / (2 * kappa);
    }
    return {chi * BmT_over_k + 0.5 * h0, B, h0};
}

double vasicek_bond(double chi, double kappa, double eps, double theta, double tau, double t) {
    const VasicekAB ab = vasicek_ab(chi, kappa, eps, maturity(tau, t));
    return std::exp(ab.A - ab.B * theta);
}

double vasicek_bond_expectation(double chi, double kappa, double eps, double theta, double tau, double t) {
    if (maturity(tau, t) == 0) return 1;
    const GaussianLaw law = augmented_ou_law(chi, kappa, eps, 0.0, theta, tau, t);
    return std::exp(-law.mean(0) + 0.5 * law.cov(0, 0));
}

double vasicek_bond_option(double chi, double kappa, double eps, double theta, double tau, const BondOption& o) {
    check_nu(o.nu);
    if (!(o.t_bar > o.t)) throw DomainError("bond option: bond maturity must follow option expiry");
    if (!(o.K > 0)) throw DomainError("bond option: strike must be positive");
    const double T = maturity(tau, o.t);
    const double Zb = vasicek_bond(chi, kappa, eps, theta, tau, o.t_bar);
    const double Zt = vasicek_bond(chi, kappa, eps, theta, tau, o.t);
    const double x2 = 2 * kappa * T;
    const double h2 = eps * eps * T * xi1(x2);
    const double Sig = std::sqrt(h2) * vasicek_ab(chi, kappa, eps, o.t_bar - o.t).B;
    if (Sig == 0) return std::max(o.nu * (Zb - Zt * o.K), 0.0);
    const double L = std::log(Zb / (Zt * o.K));
    return o.nu * (Zb * norm_cdf(o.nu * (L / Sig + Sig / 2)) - Zt * o.K * norm_cdf(o.nu * (L / Sig - Sig / 2)));
}

double cir_bond(double chi, double kappa, double eps, double theta, double tau, double t) {
    if (!(eps > 0)) throw InvalidModel("cir: eps must be positive");
    const double T = maturity(tau, t);
    const double e2 = eps * eps, mu = kappa / 2, zeta = std::sqrt(kappa * kappa + 2 * e2) / 2;
    const double lp = mu + zeta, lm = mu - zeta, q = std::exp(-2 * zeta * T);
    // divided through by E+ = e^{zeta T}
    const double den = lp - lm * q;
    const double A = chi * kappa * T / e2 + (2 * chi / e2) * (std::log(2 * zeta / den) - zeta * T);
    const double B = -std::expm1(-2 * zeta * T) / den;
    return std::exp(A - B * theta);
}

double price(const Instrument& inst, const PricingInputs& in) {
    return std::visit(
        [&](const auto& o) -> double {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, BachelierOption>) return bachelier_price(in.s, in.r, in.sigma, o, in.tau);
            else if constexpr (std::is_same_v<T, BlackScholesOption>) return black_scholes_price(in.s, in.r, in.sigma, o, in.tau);
            else if constexpr (std::is_same_v<T, AsianGeometric>) return asian_geometric_price(in.s, in.r, in.sigma, o, in.tau);
            else if constexpr (std::is_same_v<T, VolSwap>) return vol_swap_fair(in.ou.chi, in.ou.kappa, in.ou.theta, in.ou.tau, o.t);
            else if constexpr (std::is_same_v<T, VolSwaption>) return vol_swaption_price(in.ou, o);
            else if constexpr (std::is_same_v<T, VarSwapFeller>)
                return var_swap_feller(in.feller.chi, in.feller.kappa, in.feller.theta, in.feller.tau, o.t);
            else if constexpr (std::is_same_v<T, VarSwapOU>) return var_swap_ou(in.ou.chi, in.ou.kappa, in.ou.theta, in.ou.tau, o.t);
            else if constexpr (std::is_same_v<T, VarSwaption>) return var_swaption_price(in.feller, o);
            else if constexpr (std::is_same_v<T, ZeroBond>) {
                if (o.model == RateModel::vasicek)
                    return vasicek_bond(in.ou.chi, in.ou.kappa, in.ou.eps, in.ou.theta, in.ou.tau, o.t);
                return cir_bond(in.feller.chi, in.feller.kappa, in.feller.eps, in.feller.theta, in.feller.tau, o.t);
            } else return vasicek_bond_option(in.ou.chi, in.ou.kappa, in.ou.eps, in.ou.theta, in.ou.tau, o);
        },
        inst);
}

} // namespace ak
