#pragma once
#include <Eigen/Dense>
#include <vector>

#include "affine_kelvin/model.hpp"

namespace ak {

// N(mean, cov) scaled by exp(log_prefactor).
struct GaussianLaw {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double log_prefactor = 0;

    double log_density(const Eigen::VectorXd& z) const;
    double density(const Eigen::VectorXd& z) const;
    GaussianLaw marginal(const std::vector<int>& idx) const;
};

// r = L^{-T}(d + zeta), H = L^{-T} C L^{-1}. Throws DegenerateLaw for t == tau.
GaussianLaw gaussian_law(const AffineModelSpec& model, const Eigen::VectorXd& zeta, double tau, double t);

// Corrected Kolmogorov density for dx = y dt, dy = b dt + sqrt(a) dW.
double kolmogorov_density(double a, double b, double xi, double theta, double tau, double t, double x, double y);
double kolmogorov_density(const ScalarSchedule& a, const ScalarSchedule& b, double xi, double theta, double tau,
                          double t, double x, double y);
// Kolmogorov's original 1934 expression, kept verbatim to demonstrate that it fails.
double kolmogorov_original_density(double k, double f, double xi, double theta, double tau, double t, double x,
                                   double y);

struct OUMoments {
    double mean, var;
};
OUMoments ou_moments(double chi, double kappa, double eps, double theta, double tau, double t);
OUMoments ou_moments(const ScalarSchedule& chi, const ScalarSchedule& kappa, const ScalarSchedule& eps,
                     double theta, double tau, double t);
double ou_density(double chi, double kappa, double eps, double theta, double tau, double t, double y);
double ou_density(const ScalarSchedule& chi, const ScalarSchedule& kappa, const ScalarSchedule& eps, double theta,
                  double tau, double t, double y);

// State (x, y), x = int y.
GaussianLaw augmented_ou_law(double chi, double kappa, double eps, double xi, double theta, double tau, double t);

// State (x, v): dx = v dt, dv = -(kappa v + omega2 x) dt + eps dW.
GaussianLaw harmonic_particle_law(double kappa, double omega2, double eps, double xi, double theta, double tau,
                                  double t);

// Chandrasekhar's 1-D forms with q = eps^2/2, beta = kappa; (rho, upsilon) start, (r, u) end.
double chandrasekhar_free(double q, double beta, double rho, double upsilon, double tau, double t, double r,
                          double u);
double chandrasekhar_bound(double q, double beta, double omega2, double rho, double upsilon, double tau, double t,
                           double r, double u);
struct ChandrasekharFGH {
    double F, G, H;
};
ChandrasekharFGH chandrasekhar_fgh(double q, double beta, double T);

} // namespace ak
