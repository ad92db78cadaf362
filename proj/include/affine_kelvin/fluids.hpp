#pragma once
#include <Eigen/Dense>
#include <vector>

#include "affine_kelvin/gaussian.hpp"
#include "affine_kelvin/schedule.hpp"

namespace ak {

// Base flow with stream function (w (x1^2 + x2^2) - 2 s x1 x2) / 4.
struct LinearFlow2D {
    double s = 0;   // strain rate
    double w = 1;   // rotation rate
    double nu = 0;  // kinematic viscosity
    double zeta() const;  // sqrt(w^2 - s^2)/2; throws DomainError unless w^2 > s^2
    double stream(double x1, double x2) const;
};

struct KelvinWaveState {
    Eigen::Vector3d xi, gamma, amp;
    double t = 0;
};

struct KelvinTrajectory {
    std::vector<KelvinWaveState> states;  // initial state plus one per step
    double max_growth = 1;                // max_t |a(t)| / |a0|
    double step_error = 0;                // |final(h) - final(h/2)|, inf-norm over (xi, gamma, amp)
};

// Classical RK4 with `steps` fixed steps for
//   xi' = L xi,  Gamma' = -L^T Gamma,
//   a' = -L a + 2 (L a . Gamma / |Gamma|^2) Gamma - nu |Gamma|^2 a.
// The run is repeated at 2*steps to estimate the step error.
KelvinTrajectory kelvin_wave_integrate(const MatrixSchedule& L, double nu, const KelvinWaveState& init, double tau,
                                       double t, int steps);

// Closed-form law of the vorticity blob, mean and covariance entries (h0, h1, h2).
GaussianLaw vorticity_law(const LinearFlow2D& flow, double xi1, double xi2, double tau, double t);
struct VorticityPsi {
    double psi0, psi1, psi2;
};
VorticityPsi vorticity_psi(const LinearFlow2D& flow, double tau, double t);

// psi(R) = E1(R^2/2)/(4 pi) + ln(R)/(2 pi), the purely rotational stream perturbation.
double rotational_stream_function(double R);

} // namespace ak
