#pragma once
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "affine_kelvin/schedule.hpp"

namespace ak {

// dz = (b + B z) dt + noise with instantaneous covariance A0 + sum_i z_i A_i,
// killed at rate c + cvec.z. All loadings are I x I (zero on drift-only rows).
struct AffineModelSpec {
    std::string name;
    int M = 0;  // drift-only coordinates
    int N = 0;  // driven coordinates
    VectorSchedule b;
    MatrixSchedule B;
    MatrixSchedule A0;
    std::vector<MatrixSchedule> Ai;  // empty for Gaussian models
    ScalarSchedule kill_c;
    VectorSchedule kill_vec;
    std::vector<bool> nonnegative;  // coordinates clipped at zero by full truncation

    int dim() const { return M + N; }
    bool gaussian() const { return Ai.empty(); }
    bool killed() const;
    bool constant_coefficients() const;

    Eigen::MatrixXd covariance(double t, const Eigen::VectorXd& z) const;
    Eigen::VectorXd drift(double t, const Eigen::VectorXd& z) const;
    double kill(double t, const Eigen::VectorXd& z) const;

    // Throws InvalidModel naming the violated invariant.
    void validate() const;

    // Start an unkilled model with zero coefficients of dimension M+N.
    static AffineModelSpec zeros(std::string name, int M, int N);

    // Builder from the volatility parametrization: A0 = S diag(d0) S^T and
    // A_i = S diag(D.col(i)) S^T, with S (N x N) embedded in the last N rows.
    static AffineModelSpec from_sigma(std::string name, int M, int N, const Eigen::VectorXd& b,
                                      const Eigen::MatrixXd& B, const Eigen::MatrixXd& Sigma,
                                      const Eigen::VectorXd& d0, const Eigen::MatrixXd& D);
};

// Registered models. Coordinates are listed per builder.
namespace models {
// (x, y): dx = y dt, dy = b dt + sqrt(a) dW.
AffineModelSpec kolmogorov(double a, double b);
AffineModelSpec kolmogorov(const ScalarSchedule& a, const ScalarSchedule& b);
// y: dy = (chi - kappa y) dt + eps dW.
AffineModelSpec ou(double chi, double kappa, double eps);
// (x, y): dx = y dt with y as in ou.
AffineModelSpec augmented_ou(double chi, double kappa, double eps);
// (x, v): dx = v dt, dv = -(kappa v + omega2 x) dt + eps dW.
AffineModelSpec harmonic_particle(double kappa, double omega2, double eps);
// y: dy = (chi - kappa y) dt + eps sqrt(y) dW.
AffineModelSpec feller(double chi, double kappa, double eps);
// (x, y): dx = y dt, y Feller.
AffineModelSpec augmented_feller(double chi, double kappa, double eps);
// (x, y): dx = -y/2 dt + sqrt(y) dW1, y Feller, corr rho.
AffineModelSpec heston(double chi, double kappa, double eps, double rho);
// (x, y, z = y^2): dx = z dt, y OU.
AffineModelSpec quadratic_ou(double chi, double kappa, double eps);
// (x, y, z = y^2): dx = -z/2 dt + y dW1, y OU, corr rho.
AffineModelSpec stein_stein(double chi, double kappa, double eps, double rho);
// (y, z): dy = -v/2 dt + sqrt(v) dW, v = a0 + a1 (y - z), dz = kappa (y - z) dt.
AffineModelSpec pdv(double a0, double a1, double kappa);
// (x1, x2): dz = B z dt + sqrt(2 nu) dW, B = 1/2 [[s, -w], [w, -s]].
AffineModelSpec vorticity2d(double s, double w, double nu);
// (x, y) augmented OU killed at rate y.
AffineModelSpec vasicek(double chi, double kappa, double eps);
// y Feller killed at rate y.
AffineModelSpec cir(double chi, double kappa, double eps);
} // namespace models

} // namespace ak
