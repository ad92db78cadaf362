#pragma once
#include <Eigen/Dense>
#include <complex>

#include "affine_kelvin/gaussian.hpp"
#include "affine_kelvin/model.hpp"
#include "affine_kelvin/nongaussian.hpp"

namespace ak {

// Sub-probability law of a Gaussian affine process killed at rate c + cvec.z:
// density = exp(law.log_prefactor) N(law.mean, law.cov).
struct KilledGaussianLaw {
    GaussianLaw law;
    Eigen::VectorXd e;      // int_tau^t L^{-1}(tau,s) cvec(s) ds
    Eigen::VectorXd d;      // int L^T (b + A L e)
    Eigen::MatrixXd Cinv;   // int L^T A L
    Eigen::VectorXd q;      // mean before completing the square
    Eigen::MatrixXd L;      // L(tau, t)
    double varpi0 = 0, varpi1 = 0;
    // P(c + cvec.z_t < 0) under the normalized law; above 1% the rate is not a probability of killing.
    double negative_kill_prob = 0;
    bool negative_kill_flag = false;

    double mass() const { return std::exp(law.log_prefactor); }
    // Q(z) of the un-completed form, P = Q(z) N(q, cov); independent of the start state.
    double log_Q(const Eigen::VectorXd& z) const;
};

KilledGaussianLaw killed_gaussian_law(const AffineModelSpec& model, const Eigen::VectorXd& zeta, double tau, double t);

// log E[exp(i m y_t - gamma int y)] for the 1-D Feller process (CIR with gamma = 1).
cplx killed_feller_cf(const FellerParams& p, cplx m, double gamma = 1.0);

} // namespace ak
