#pragma once
#include <string>
#include <variant>

#include "affine_kelvin/gaussian.hpp"
#include "affine_kelvin/nongaussian.hpp"

namespace ak {

// nu = +1 call, -1 put. Maturities are absolute times, the valuation time tau is passed separately.
struct BachelierOption { int nu = 1; double K = 0, t = 1; };
struct BlackScholesOption { int nu = 1; double K = 0, t = 1; };
struct AsianGeometric { int nu = 1; double K = 0, t = 1; };
struct VolSwap { double t = 1; };
// strike on integrated volatility x (not annualized)
struct VolSwaption { int nu = 1; double varpi_hat = 0, t = 1; };
struct VarSwapFeller { double t = 1; };
struct VarSwapOU { double t = 1; };
// strike on integrated variance x = int y
struct VarSwaption { int nu = 1; double varpi = 0, t = 1; };
enum class RateModel { vasicek, cir };
struct ZeroBond { RateModel model = RateModel::vasicek; double t = 1; };
// option expiring at t on the zero bond maturing at t_bar
struct BondOption { int nu = 1; double K = 0, t = 1, t_bar = 2; };

using Instrument = std::variant<BachelierOption, BlackScholesOption, AsianGeometric, VolSwap, VolSwaption,
                                VarSwapFeller, VarSwapOU, VarSwaption, ZeroBond, BondOption>;
std::string instrument_name(const Instrument& inst);

// OU volatility (or short-rate) parameters; hats in the volatility reading. Kept apart from
// FellerParams so volatility (T^{-1/2}) and variance (T^{-1}) inputs cannot be swapped.
struct OUParams {
    double chi = 0, kappa = 0, eps = 0, theta = 0;
    double tau = 0;
};

// Everything any pricer might need; pricers read only their own fields.
struct PricingInputs {
    double s = 100, r = 0, sigma = 0, tau = 0;  // spot, rate, (normal or lognormal) volatility
    OUParams ou;
    FellerParams feller;
};
double price(const Instrument& inst, const PricingInputs& in);

double bachelier_price(double s, double r, double sigma_hat, const BachelierOption& inst, double tau);
// sigma_hat(tau,t), the effective normal vol of the discounted spot
double bachelier_vol(double sigma_hat, double r, double T);
double black_scholes_price(double s, double r, double sigma, const BlackScholesOption& inst, double tau);
double asian_geometric_price(double s, double r, double sigma, const AsianGeometric& inst, double tau);

double vol_swap_fair(double chi_hat, double kappa, double theta_hat, double tau, double t);
double vol_swaption_price(const OUParams& p, const VolSwaption& inst);

double var_swap_feller(double chi, double kappa, double theta, double tau, double t);
// The averaged form drops the eps-dependent term; var_swap_ou_exact keeps it and is E[(1/T) int y^2].
double var_swap_ou(double chi_hat, double kappa, double theta_hat, double tau, double t);
double var_swap_ou_exact(double chi_hat, double kappa, double eps_hat, double theta_hat, double tau, double t);
double var_swaption_price(const FellerParams& p, const VarSwaption& inst);
// Regularized integral at a fixed eps (eps > 0), before extrapolation.
double var_swaption_regularized(const FellerParams& p, const VarSwaption& inst, double eps);

struct VasicekAB {
    double A, B, h0;  // bond = exp(A - B theta); h0 = Var(int r)
};
VasicekAB vasicek_ab(double chi, double kappa, double eps, double T);
double vasicek_bond(double chi, double kappa, double eps, double theta, double tau, double t);
// exp(-p + h0/2) from the augmented OU law of (x, y)
double vasicek_bond_expectation(double chi, double kappa, double eps, double theta, double tau, double t);
double vasicek_bond_option(double chi, double kappa, double eps, double theta, double tau, const BondOption& inst);

double cir_bond(double chi, double kappa, double eps, double theta, double tau, double t);

} // namespace ak
