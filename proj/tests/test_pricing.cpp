#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "affine_kelvin/errors.hpp"
#include "affine_kelvin/killed.hpp"
#include "affine_kelvin/oracle.hpp"
#include "affine_kelvin/pricing.hpp"
#include "affine_kelvin/special.hpp"
#include "affine_kelvin/transform.hpp"
#include "law_checks.hpp"

using namespace ak;
using Eigen::VectorXd;

namespace {
VectorXd vec(std::initializer_list<double> v) {
    VectorXd x(v.size());
    int i = 0;
    for (double a : v) x(i++) = a;
    return x;
}
} // namespace

TEST_CASE("reference prices") {
    CHECK(std::abs(black_scholes_price(100, 0.05, 0.2, {1, 100, 1}, 0) - 10.4505835722) < 1e-9);
    CHECK(std::abs(asian_geometric_price(100, 0.05, 0.2, {1, 100, 1}, 0) - 5.54681863379) < 1e-9);
    CHECK(std::abs(bachelier_price(100, 0.02, 5, {1, 100, 1}, 0) - 3.12091172653) < 1e-9);
}

TEST_CASE("Bachelier") {
    for (int nu : {1, -1}) {
        CHECK(std::abs(bachelier_price(100, 0.02, 0, {nu, 95, 2}, 0) - std::max(nu * (100 - std::exp(-0.04) * 95), 0.0)) < 1e-12);
    }
    CHECK(std::abs(bachelier_vol(5, 1e-9, 2.0) - 5 * std::sqrt(2.0)) < 1e-8);
    const double c = bachelier_price(100, 0.02, 5, {1, 103, 1.5}, 0.5), p = bachelier_price(100, 0.02, 5, {-1, 103, 1.5}, 0.5);
    CHECK(std::abs(c - p - (100 - std::exp(-0.02) * 103)) < 1e-12);
    CHECK_THROWS_AS(bachelier_price(100, 0.02, -1, {1, 100, 1}, 0), DomainError);
    CHECK_THROWS_AS(bachelier_price(100, 0.02, 1, {0, 100, 1}, 0), DomainError);

    // ds = r s dt + sigma_hat dW, sampled exactly
    const double r = 0.02, sh = 5, K = 100;
    MCConfig c0;
    c0.paths = 200000;
    c0.scheme = MCScheme::exact_ou;
    c0.total_steps = 1;
    const auto rep = mc_simulate(models::ou(0, -r, sh), vec({100}), 0, 1, c0,
                                 {stat_moment("bachelier", [&](const PathEnd& e) { return std::exp(-r) * std::max(e.z(0) - K, 0.0); },
                                              bachelier_price(100, r, sh, {1, K, 1}, 0))});
    test_util::check_reports(rep);
}

TEST_CASE("Black-Scholes") {
    const double s = 100, r = 0.05, sg = 0.2;
    const double c = black_scholes_price(s, r, sg, {1, 100, 1}, 0), p = black_scholes_price(s, r, sg, {-1, 100, 1}, 0);
    CHECK(std::abs(c - p - (s - std::exp(-r) * 100)) < 1e-12);
    CHECK(std::abs(black_scholes_price(s, r, 1e-9, {1, 95, 1}, 0) - (s - std::exp(-r) * 95)) < 1e-9);
    // lognormal density against the payoff
    const double m = std::log(s) + (r - 0.5 * sg * sg), sd = sg;
    auto f = [&](double u) { return std::exp(-r) * (std::exp(u) - 100) * std::exp(-0.5 * (u - m) * (u - m) / (sd * sd)) / (sd * std::sqrt(2 * M_PI)); };
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, std::log(100.0), m + 14 * sd, 10, 1e-14);
    CHECK(std::abs(q - c) < 1e-8);
    CHECK_THROWS_AS(black_scholes_price(-1, r, sg, {1, 100, 1}, 0), DomainError);
    CHECK_THROWS_AS(black_scholes_price(s, r, sg, {1, 100, 1}, 2), DomainError);
}

TEST_CASE("Asian geometric") {
    CHECK(std::abs(asian_geometric_price(100, 0, 1e-8, {1, 90, 1}, 0) - 10) < 1e-7);
    const double s = 100, r = 0.05, sg = 0.2, T = 1.5;
    for (double K : {80.0, 100.0, 125.0}) {
        const double c = asian_geometric_price(s, r, sg, {1, K, T}, 0), p = asian_geometric_price(s, r, sg, {-1, K, T}, 0);
        CHECK(std::abs(c - p - (std::exp(-0.5 * (r + sg * sg / 6) * T) * s - std::exp(-r * T) * K)) < 1e-12);
        CHECK(c <= black_scholes_price(s, r, sg, {1, K, T}, 0));
    }
    // log-price y, running integral x; geometric average exp(x/T)
    MCConfig c0;
    c0.paths = 100000;
    c0.steps = 512;
    c0.scheme = MCScheme::euler;
    const double closed = asian_geometric_price(s, r, sg, {1, 100, 1}, 0);
    auto st = stat_moment("asian", [&](const PathEnd& e) { return std::exp(-r) * std::max(std::exp(e.z(0)) - 100, 0.0); }, closed);
    test_util::check_reports(mc_simulate(models::kolmogorov(sg * sg, r - 0.5 * sg * sg), vec({0, std::log(s)}), 0, 1, c0, {st}));
}

TEST_CASE("monotone in strike, non-negative") {
    double prev_c = INFINITY, prev_p = -1;
    for (double K = 60; K <= 140; K += 5) {
        const double c = black_scholes_price(100, 0.03, 0.25, {1, K, 1}, 0), p = black_scholes_price(100, 0.03, 0.25, {-1, K, 1}, 0);
        const double a = asian_geometric_price(100, 0.03, 0.25, {1, K, 1}, 0), b = bachelier_price(100, 0.03, 20, {1, K, 1}, 0);
        CHECK(c <= prev_c);
        CHECK(p >= prev_p);
        CHECK(a >= 0);
        CHECK(b >= 0);
        prev_c = c, prev_p = p;
    }
}

TEST_CASE("volatility swaps") {
    CHECK(std::abs(vol_swap_fair(0.3, 1.5, 0.2, 0, 2) - 0.2) < 1e-15);
    CHECK(std::abs(vol_swap_fair(0.3, 1.5, 0.35, 0, 1e-9) - 0.35) < 1e-9);
    OUParams p{0.3, 1.5, 0.4, 0.25, 0.0};
    const GaussianLaw law = augmented_ou_law(p.chi, p.kappa, p.eps, 0, p.theta, 0, 2);
    const double m = law.mean(0), h0 = law.cov(0, 0);
    CHECK(std::abs(m / 2 - vol_swap_fair(p.chi, p.kappa, p.theta, 0, 2)) < 1e-12);
    const double w = m - 10 * std::sqrt(h0);
    CHECK(std::abs(vol_swaption_price(p, {1, w, 2}) - (m - w)) < 1e-8);
    const double c = vol_swaption_price(p, {1, m, 2}), q = vol_swaption_price(p, {-1, m, 2});
    CHECK(std::abs(c - q) < 1e-14);
    CHECK(std::abs(c - std::sqrt(h0 / (2 * M_PI))) < 1e-12);
}

TEST_CASE("variance swaps") {
    CHECK(std::abs(var_swap_feller(0.15, 1.5, 0.1, 0, 3) - 0.1) < 1e-15);
    CHECK(std::abs(var_swap_feller(0.15, 1.5, 0.4, 0, 1e6) - 0.1) < 1e-6);
    CHECK(std::abs(var_swap_ou(0.3, 1.5, 0.7, 0, 1e6) - 0.04) < 1e-6);
    CHECK(std::abs(var_swap_ou(0.3, 1.5, 0.2, 0, 2) - 0.04) < 1e-15);
    // the exact form is E[(1/T) int y^2] under the OU law
    const double chi = 0.3, kappa = 1.5, eps = 0.4, th = 0.35, T = 2;
    MCConfig c0;
    c0.paths = 100000;
    c0.steps = 256;
    c0.scheme = MCScheme::full_truncation_feller;
    auto st = stat_moment("int y^2", [&](const PathEnd& e) { return e.z(0) / T; }, var_swap_ou_exact(chi, kappa, eps, th, 0, T));
    const auto rep = mc_simulate(models::quadratic_ou(chi, kappa, eps), vec({0, th, th * th}), 0, T, c0, {st});
    test_util::check_reports(rep);
}

TEST_CASE("variance swaption") {
    FellerParams p;
    p.chi = 0.15, p.kappa = 1.5, p.eps = 0.3, p.theta = 0.1, p.t = 1;
    const double xbar = feller_augmented_mean(p);
    // deep in the money: x > 0 always, so a strike below zero leaves only the forward
    CHECK(std::abs(var_swaption_price(p, {1, -0.1, 1}) - (xbar + 0.1)) < 1e-6);
    const double w = 0.1;
    const double c = var_swaption_price(p, {1, w, 1}), q = var_swaption_price(p, {-1, w, 1});
    CHECK(std::abs(c - q - (xbar - w)) < 1e-6);
    CHECK(c > 0);
    CHECK(q > 0);
    // against a transform-free oracle: the joint density integrated over y
    MCConfig c0;
    c0.paths = 100000;
    c0.steps = 512;
    c0.scheme = MCScheme::full_truncation_feller;
    auto st = stat_moment("swaption", [&](const PathEnd& e) { return std::max(e.z(0) - w, 0.0); }, c);
    test_util::check_reports(mc_simulate(models::augmented_feller(p.chi, p.kappa, p.eps), vec({0, p.theta}), 0, 1, c0, {st}));
}

TEST_CASE("Vasicek bonds") {
    const double chi = 0.03, kappa = 0.5, eps = 0.01, th = 0.02;
    for (double T : {1.0, 5.0, 10.0})
        CHECK(std::abs(vasicek_bond(chi, kappa, eps, th, 0, T) - vasicek_bond_expectation(chi, kappa, eps, th, 0, T)) < 1e-12);
    CHECK(vasicek_bond(chi, kappa, eps, th, 1.5, 1.5) == 1.0);
    CHECK(vasicek_bond_expectation(chi, kappa, eps, th, 1.5, 1.5) == 1.0);
    // decreasing in theta; for theta > 0 decreasing in maturity near zero
    double prev = INFINITY;
    for (double t0 = -0.05; t0 <= 0.1; t0 += 0.01) {
        const double b = vasicek_bond(chi, kappa, eps, t0, 0, 3);
        CHECK(b < prev);
        prev = b;
    }
    prev = 1;
    for (double T = 0.01; T <= 0.5; T += 0.01) {
        const double b = vasicek_bond(chi, kappa, eps, th, 0, T);
        CHECK(b < prev);
        prev = b;
    }
    // small kappa branch against the closed form in extended precision
    const double T = 2;
    for (double x : {0.99e-4, 1.01e-4}) {
        const double k = x / T;
        const long double kl = k, Bl = -std::expm1(-(long double)x) / kl;
        const long double h0l = 0.01L / (kl * kl) * (T - Bl) - 0.01L * Bl * Bl / (2 * kl);
        const long double Al = chi * (Bl - T) / kl + 0.5L * h0l;
        const auto a = vasicek_ab(chi, k, 0.1, T);
        CHECK(std::abs(a.B - double(Bl)) < 1e-13);
        CHECK(std::abs(a.h0 - double(h0l)) < 1e-9 * T * T * T);
        CHECK(std::abs(a.A - double(Al)) < 1e-9);
    }
    const auto a0 = vasicek_ab(chi, 0, 0.1, T);
    CHECK(std::abs(a0.B - T) < 1e-15);
    CHECK(std::abs(a0.h0 - 0.01 * T * T * T / 3) < 1e-15);
}

TEST_CASE("Vasicek bond option") {
    const double chi = 0.03, kappa = 0.5, eps = 0.1, th = 0.02;
    const double Zt = vasicek_bond(chi, kappa, eps, th, 0, 1), Zb = vasicek_bond(chi, kappa, eps, th, 0, 3);
    for (double K : {0.85, Zb / Zt, 1.0}) {
        const double c = vasicek_bond_option(chi, kappa, eps, th, 0, {1, K, 1, 3}), p = vasicek_bond_option(chi, kappa, eps, th, 0, {-1, K, 1, 3});
        CHECK(std::abs(c - p - (Zb - K * Zt)) < 1e-12);
        CHECK(c >= 0);
        CHECK(p >= 0);
    }
    CHECK_THROWS_AS(vasicek_bond_option(chi, kappa, eps, th, 0, {1, 0.9, 2, 2}), DomainError);
    // discounted payoff under exact augmented OU transitions, x = int r
    const double K = Zb / Zt;
    MCConfig c0;
    c0.paths = 200000;
    c0.scheme = MCScheme::exact_ou;
    c0.total_steps = 1;
    auto st = stat_moment("bond option", [&](const PathEnd& e) {
        return std::exp(-e.z(0)) * std::max(vasicek_bond(chi, kappa, eps, e.z(1), 1, 3) - K, 0.0);
    }, vasicek_bond_option(chi, kappa, eps, th, 0, {1, K, 1, 3}));
    test_util::check_reports(mc_simulate(models::augmented_ou(chi, kappa, eps), vec({0, th}), 0, 1, c0, {st}));
}

TEST_CASE("CIR bond") {
    const double chi = 0.03, kappa = 0.5, eps = 0.1, th = 0.02;
    CHECK(cir_bond(chi, kappa, eps, th, 2, 2) == doctest::Approx(1.0).epsilon(1e-15));
    for (double T : {0.5, 5.0, 20.0}) {
        FellerParams p;
        p.chi = chi, p.kappa = kappa, p.eps = eps, p.theta = th, p.t = T;
        CHECK(std::abs(std::log(cir_bond(chi, kappa, eps, th, 0, T)) - killed_feller_cf(p, 0.0).real()) < 1e-10);
    }
    MCConfig c0;
    c0.paths = 100000;
    c0.total_steps = 512;
    c0.scheme = MCScheme::full_truncation_feller;
    auto st = stat_moment("cir bond", [](const PathEnd& e) { return std::exp(-e.z(0)); }, cir_bond(chi, kappa, eps, th, 0, 5));
    test_util::check_reports(mc_simulate(models::augmented_feller(chi, kappa, eps), vec({0, th}), 0, 5, c0, {st}));
}

TEST_CASE("dispatch") {
    PricingInputs in;
    in.s = 100, in.r = 0.05, in.sigma = 0.2;
    in.ou = {0.03, 0.5, 0.01, 0.02, 0.0};
    in.feller.chi = 0.03, in.feller.kappa = 0.5, in.feller.eps = 0.1, in.feller.theta = 0.02;
    CHECK(price(BlackScholesOption{1, 100, 1}, in) == black_scholes_price(100, 0.05, 0.2, {1, 100, 1}, 0));
    CHECK(price(ZeroBond{RateModel::vasicek, 5}, in) == vasicek_bond(0.03, 0.5, 0.01, 0.02, 0, 5));
    CHECK(price(ZeroBond{RateModel::cir, 5}, in) == cir_bond(0.03, 0.5, 0.1, 0.02, 0, 5));
    CHECK(instrument_name(VarSwaption{}) == "var_swaption");
}
