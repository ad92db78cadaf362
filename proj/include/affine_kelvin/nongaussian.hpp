#pragma once
#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

namespace ak {

using cplx = std::complex<double>;

// dy = (chi - kappa y) dt + eps sqrt(y) dW, y_tau = theta. rho is used only by the
// Heston-type constructions (dx = -y/2 dt + sqrt(y) dW1, dW1 dW = rho dt).
struct FellerParams {
    double chi = 0, kappa = 0, eps = 0, theta = 0;
    double rho = 0;
    double tau = 0, t = 1;
    bool allow_boundary = false;  // permit vartheta <= 0 (zero is reachable; not modelled)

    double vartheta() const { return 2 * chi / (eps * eps) - 1; }
    double rhobar2() const { return 1 - rho * rho; }
    double T() const { return t - tau; }
    // Throws InvalidModel; warns on stderr when vartheta <= 0 is allowed by override.
    void validate() const;
};

// Exponent of a Kelvin mode exp(alpha + i upsilon.z - i m.zeta).
struct KelvinMode {
    cplx alpha;
    Eigen::VectorXcd upsilon;
    Eigen::VectorXcd m;
    cplx H(const Eigen::VectorXd& z, const Eigen::VectorXd& zeta) const;
};

// Transition density of y_t.
double feller_density(const FellerParams& p, double y);
double feller_log_density(const FellerParams& p, double y);
// E[exp(i u y_t)].
cplx feller_cf(const FellerParams& p, cplx u);
// Forward Kelvin mode of the 1-D Feller process with wave number l.
KelvinMode feller_kelvin(const FellerParams& p, cplx l);
double feller_mean(const FellerParams& p);

// Augmented Feller (x = int y). value = E[exp(-i k (x_t - xi))]; S = M + R and Z1 feed the
// Bessel kernel S (y/(Z1 theta))^{vt/2} I_vt(2 S sqrt(y Z1 theta)) exp(-S(y + Z1 theta)).
struct AugFellerCF {
    cplx value, log_value;
    cplx S, Z1, M, Z;
};
AugFellerCF feller_augmented_cf(const FellerParams& p, cplx k);
// Joint density of (x_t - xi, y_t) by a single k-integral over the Bessel kernel.
double feller_augmented_joint_density(const FellerParams& p, double dx, double y, double k_max = 0);
// Same on a tensor grid, row-major [i * y.size() + j]; the k nodes are shared across the grid.
std::vector<double> feller_augmented_joint_grid(const FellerParams& p, const std::vector<double>& dx,
                                                const std::vector<double>& y, double k_max = 0);
// Closed form mean of x_t - xi.
double feller_augmented_mean(const FellerParams& p);

// E[exp(i k (x_t - xi))] for the Heston log-price.
cplx heston_cf(const FellerParams& p, cplx k);
cplx heston_log_cf(const FellerParams& p, cplx k);

// Roots lambda_pm = mu +- zeta of the Riccati quadratic behind the augmented Feller and Heston
// transforms, zeta^2 = mu^2 - lambda_+ lambda_-. k is in the convention E[exp(-i k x)];
// k = i p gives the moment E[exp(p x)].
struct RiccatiRoots {
    cplx mu, zeta, lambda_plus, lambda_minus;
    cplx product() const { return mu * mu - zeta * zeta; }
};
RiccatiRoots feller_augmented_roots(const FellerParams& p, cplx k);
RiccatiRoots heston_roots(const FellerParams& p, cplx k);

enum class ExplosionModel { feller_augmented, heston };
struct ExplosionResult {
    bool explodes = false;
    double t_star = 0;   // absolute time tau + T* when explodes
    double T_star = 0;   // T* = t_star - tau
};
// Blow-up of E[exp(p x_t)] as a function of maturity.
ExplosionResult explosion_time(ExplosionModel model, double p, const FellerParams& params);
// Roots of the Heston zeta^2(p) = 0, p_minus < 0 < 1 <= p_plus.
std::pair<double, double> heston_moment_bounds(double kappa, double eps, double rho);
// Feller-augmented threshold kappa^2/(2 eps^2).
double feller_augmented_p_hat(double kappa, double eps);

// Path-dependent volatility on (y, z); upsilon = (Gamma, Delta).
struct PDVParams {
    double a0 = 0, a1 = 0, kappa = 0;
    double theta = 0, varrho = 0;
    double tau = 0, t = 1;
    double T() const { return t - tau; }
    void validate() const;
    bool admissible(double y, double z) const { return a0 + a1 * (y - z) > 0; }
};
KelvinMode pdv_mode(const PDVParams& p, cplx k, cplx l);
cplx pdv_cf(const PDVParams& p, cplx k, cplx l, double y, double z);

// State (x, y, z = y^2), H = exp(alpha + i k (x - xi) + i Delta y - i l theta + i Xi z - i m theta^2).
struct QuadOUParams {
    double chi = 0, kappa = 0, eps = 0, rho = 0;
    double xi = 0, theta = 0;
    double tau = 0, t = 1;
    double T() const { return t - tau; }
};
KelvinMode quadratic_ou_mode(const QuadOUParams& p, cplx k, cplx l, cplx m);
cplx quadratic_ou_cf(const QuadOUParams& p, cplx k, cplx l, cplx m, double x, double y, double z);
KelvinMode stein_stein_mode(const QuadOUParams& p, cplx k, cplx l, cplx m);
cplx stein_stein_cf(const QuadOUParams& p, cplx k, cplx l, cplx m, double x, double y, double z);

// log f(T) continued from log f(0) along s in [0, T] (unwrapped phase).
cplx tracked_log(const std::function<cplx(double)>& f, double T);

} // namespace ak
