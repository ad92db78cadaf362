#pragma once
#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <vector>

#include "affine_kelvin/model.hpp"
#include "affine_kelvin/schedule.hpp"

namespace ak {

using cplx = std::complex<double>;

// L(tau, s) for s in [tau, t], solving L' + B^T L = 0, L(tau, tau) = I.
class FundamentalSolution {
public:
    double tau = 0, t = 0;
    Eigen::MatrixXd L, L_inv;
    double det_log = 0;  // log det L(tau,t) = -int Tr B

    Eigen::MatrixXd at(double s) const;
    // Sub-interval knots (schedule breakpoints inside (tau,t) plus the ends).
    const std::vector<double>& knots() const { return knots_; }

private:
    friend FundamentalSolution fundamental_solution(const MatrixSchedule&, double, double, double);
    struct Segment {
        double t0, t1;
        bool constant;
        Eigen::MatrixXd Bt;                 // -B^T for constant segments
        Eigen::MatrixXd L0;                 // L(tau, t0)
        std::vector<double> ck;             // checkpoints (time-dependent segments)
        std::vector<Eigen::MatrixXd> cL;    // L(tau, ck[i])
    };
    std::vector<Segment> segs_;
    std::vector<double> knots_;
    std::shared_ptr<const MatrixSchedule> B_;
    double rtol_ = 1e-12;
};

FundamentalSolution fundamental_solution(const MatrixSchedule& B, double tau, double t, double rtol = 1e-12);

// Integral of L^T A L over [tau, t].
Eigen::MatrixXd covariance_integral(const FundamentalSolution& L, const MatrixSchedule& A, double tau, double t);

struct DriftIntegral {
    Eigen::VectorXd d;  // int L^T b
    double varpi;       // int Tr B
};
DriftIntegral drift_integral(const FundamentalSolution& L, const VectorSchedule& b, double tau, double t);

// kelvin_forward: alpha(tau)=0, Upsilon(tau)=m, wave exp(alpha + i Upsilon.z) solving the
//   forward (Fokker-Planck) equation; density = (2 pi)^-I int exp(alpha + i Upsilon.z - i m.zeta) dm.
// backward_cf: E_zeta[exp(i m.z_t - int kill)] = exp(alpha + i upsilon.zeta).
enum class RiccatiForm { kelvin_forward, backward_cf };

struct RiccatiState {
    cplx alpha;
    Eigen::VectorXcd upsilon;
    double t;
};

struct RiccatiOptions {
    double tol = 1e-10;
    RiccatiForm form = RiccatiForm::kelvin_forward;
    double guard = 1e12;        // |Upsilon|_inf beyond this is an explosion
    double localize = 1e-6;     // bisection width for the blow-up time
};

RiccatiState riccati_integrate(const AffineModelSpec& model, const Eigen::VectorXcd& m, double tau, double t,
                               const RiccatiOptions& opt = {});
inline RiccatiState riccati_integrate(const AffineModelSpec& model, const Eigen::VectorXcd& m, double tau, double t,
                                      double tol, RiccatiForm form = RiccatiForm::kelvin_forward) {
    RiccatiOptions o;
    o.tol = tol;
    o.form = form;
    return riccati_integrate(model, m, tau, t, o);
}

// Forward exponent reduced to the marginal CF of z_t: solves Upsilon(t; m*) = -u by Newton
// and returns log E[exp(i u.z_t)] = alpha(m*) - i m*.zeta - log det(dUpsilon/dm)(m*).
// Only for models where Upsilon does not depend on alpha (always true).
cplx forward_marginal_log_cf(const AffineModelSpec& model, const Eigen::VectorXcd& u, const Eigen::VectorXd& zeta,
                             double tau, double t, double tol = 1e-11);

} // namespace ak
