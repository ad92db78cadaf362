#include "affine_kelvin/linalg_ode.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstring>

#include "affine_kelvin/quadrature.hpp"

namespace ak {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
namespace odeint = boost::numeric::odeint;
using rstate = std::vector<double>;
using rkf78 = odeint::runge_kutta_fehlberg78<rstate>;

namespace {

bool piece_constant_on(const MatrixSchedule& B, double a, double b) {
    const double mid = 0.5 * (a + b);
    for (const auto& p : B.pieces())
        if (p.t0 <= mid && mid <= p.t1) return p.poly.size() == 1;
    return false;
}

// L' = -B(s)^T L packed column-major.
void integrate_L(const MatrixSchedule& B, MatrixXd& L, double t0, double t1, double hint, double rtol,
                 std::vector<double>* ck, std::vector<MatrixXd>* cL) {
    const int I = int(L.rows());
    rstate x(L.data(), L.data() + I * I);
    auto rhs = [&](const rstate& y, rstate& dy, double s) {
        Eigen::Map<const MatrixXd> Y(y.data(), I, I);
        Eigen::Map<MatrixXd> D(dy.data(), I, I);
        D = -B.on(s, hint).transpose() * Y;
    };
    auto obs = [&](const rstate& y, double s) {
        if (ck) {
            ck->push_back(s);
            cL->push_back(Eigen::Map<const MatrixXd>(y.data(), I, I));
        }
    };
    odeint::integrate_adaptive(odeint::make_controlled(rtol * 1e-2, rtol, rkf78()), rhs, x, t0, t1,
                               (t1 - t0) / 16, obs);
    L = Eigen::Map<MatrixXd>(x.data(), I, I);
}

} // namespace

FundamentalSolution fundamental_solution(const MatrixSchedule& B, double tau, double t, double rtol) {
    if (t < tau) throw DomainError("fundamental_solution: t < tau");
    if (!B.finite()) throw InvalidModel("fundamental_solution: non-finite drift matrix");
    if (tau < B.t_min() || t > B.t_max()) throw DomainError("fundamental_solution: outside schedule domain");
    FundamentalSolution fs;
    fs.tau = tau;
    fs.t = t;
    fs.rtol_ = rtol;
    fs.B_ = std::make_shared<const MatrixSchedule>(B);
    fs.knots_ = merged_knots(tau, t, B);
    const int I = int(B(tau).rows());
    MatrixXd L = MatrixXd::Identity(I, I);
    for (size_t i = 0; i + 1 < fs.knots_.size(); ++i) {
        FundamentalSolution::Segment sg;
        sg.t0 = fs.knots_[i];
        sg.t1 = fs.knots_[i + 1];
        sg.L0 = L;
        sg.constant = piece_constant_on(B, sg.t0, sg.t1);
        if (sg.constant) {
            sg.Bt = -B(0.5 * (sg.t0 + sg.t1)).transpose();
            L = (sg.Bt * (sg.t1 - sg.t0)).exp() * L;
        } else {
            integrate_L(B, L, sg.t0, sg.t1, 0.5 * (sg.t0 + sg.t1), rtol, &sg.ck, &sg.cL);
        }
        fs.segs_.push_back(std::move(sg));
    }
    if (fs.segs_.empty()) {  // t == tau
        FundamentalSolution::Segment sg{tau, t, true, MatrixXd::Zero(I, I), L, {}, {}};
        fs.segs_.push_back(sg);
    }
    if (!L.allFinite()) throw InvalidModel("fundamental_solution: non-finite result");
    fs.L = L;
    fs.L_inv = L.inverse();
    auto tr = [&](double s) { return B(s).trace(); };
    fs.det_log = -integrate_knots(tr, fs.knots_);
    return fs;
}

MatrixXd FundamentalSolution::at(double s) const {
    if (s < tau - 1e-15 || s > t + 1e-15) throw DomainError("FundamentalSolution::at outside [tau,t]");
    size_t k = 0;
    while (k + 1 < segs_.size() && segs_[k].t1 <= s) ++k;
    const Segment& sg = segs_[k];
    if (sg.constant) return (sg.Bt * (s - sg.t0)).exp() * sg.L0;
    size_t j = 0;
    while (j + 1 < sg.ck.size() && sg.ck[j + 1] <= s) ++j;
    MatrixXd L = sg.cL[j];
    if (s > sg.ck[j]) integrate_L(*B_, L, sg.ck[j], s, 0.5 * (sg.t0 + sg.t1), rtol_, nullptr, nullptr);
    return L;
}

MatrixXd covariance_integral(const FundamentalSolution& L, const MatrixSchedule& A, double tau, double t) {
    if (t < tau) throw DomainError("covariance_integral: t < tau");
    for (const auto& p : A.pieces())
        for (const auto& m : p.poly)
            if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + m.cwiseAbs().maxCoeff()))
                throw InvalidModel("covariance_integral: covariance loading is not symmetric");
    std::vector<double> knots = L.knots();
    for (double k : A.breakpoints(tau, t)) knots.push_back(k);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    auto f = [&](double s) -> MatrixXd {
        MatrixXd l = L.at(s);
        return l.transpose() * A(s) * l;
    };
    MatrixXd C = integrate_knots(f, knots, 1e-16, 1e-14);
    return 0.5 * (C + C.transpose());
}

DriftIntegral drift_integral(const FundamentalSolution& L, const VectorSchedule& b, double tau, double t) {
    std::vector<double> knots = L.knots();
    for (double k : b.breakpoints(tau, t)) knots.push_back(k);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    auto f = [&](double s) -> VectorXd { return L.at(s).transpose() * b(s); };
    return {integrate_knots(f, knots, 1e-16, 1e-14), -L.det_log};
}

// ---------------------------------------------------------------- Riccati

namespace {

struct Coeffs {
    MatrixXd Bt, A0;
    std::vector<MatrixXd> Ai;
    VectorXd b, bhat, cvec;
    double trB = 0, c = 0;
};

class CoeffSource {
public:
    explicit CoeffSource(const AffineModelSpec& m) : m_(m), constant_(m.constant_coefficients()) {
        if (constant_) cache_ = eval(0.0, 0.0);
    }
    // hint: a time inside the current knot interval, selecting the schedule pieces
    const Coeffs& operator()(double s, double hint) {
        if (constant_) return cache_;
        if (s != last_t_ || hint != last_hint_) {
            cache_ = eval(s, hint);
            last_t_ = s;
            last_hint_ = hint;
        }
        return cache_;
    }

private:
    Coeffs eval(double s, double h) const {
        Coeffs k;
        const MatrixXd B = m_.B.on(s, h);
        k.Bt = B.transpose();
        k.trB = B.trace();
        k.A0 = m_.A0.on(s, h);
        k.b = m_.b.on(s, h);
        k.bhat = k.b;
        for (size_t i = 0; i < m_.Ai.size(); ++i) {
            k.Ai.push_back(m_.Ai[i].on(s, h));
            k.bhat -= k.Ai.back().row(i).transpose();  // sum_i (A_i)_{ij}
        }
        k.c = m_.kill_c.on(s, h);
        k.cvec = m_.kill_vec.on(s, h);
        return k;
    }
    const AffineModelSpec& m_;
    bool constant_;
    Coeffs cache_;
    double last_t_ = std::numeric_limits<double>::quiet_NaN(), last_hint_ = last_t_;
};

constexpr cplx I1(0.0, 1.0);

// Packed state: [alpha, upsilon..., (J column-major)...] as re/im pairs.
struct RiccatiSystem {
    const AffineModelSpec& model;
    RiccatiForm form;
    double tau, t;
    bool with_jacobian;
    int n;
    double hint = 0;  // midpoint of the current interval in the integration variable
    mutable CoeffSource coeffs;

    RiccatiSystem(const AffineModelSpec& m, RiccatiForm f, double tau_, double t_, bool jac)
        : model(m), form(f), tau(tau_), t(t_), with_jacobian(jac), n(m.dim()), coeffs(m) {}

    void operator()(const rstate& x, rstate& dx, double s) const {
        const cplx* X = reinterpret_cast<const cplx*>(x.data());
        cplx* D = reinterpret_cast<cplx*>(dx.data());
        Eigen::Map<const VectorXcd> U(X + 1, n);
        Eigen::Map<VectorXcd> dU(D + 1, n);
        const Coeffs& k = form == RiccatiForm::kelvin_forward ? coeffs(s, hint) : coeffs(t - s, t - hint);
        if (form == RiccatiForm::kelvin_forward) {
            const VectorXcd A0U = k.A0.cast<cplx>() * U;
            D[0] = -(0.5 * (U.transpose() * A0U)(0) + I1 * (U.transpose() * k.bhat.cast<cplx>())(0) + k.trB + k.c);
            dU = -k.Bt.cast<cplx>() * U + I1 * k.cvec.cast<cplx>();
            for (size_t i = 0; i < k.Ai.size(); ++i) dU[i] += 0.5 * I1 * (U.transpose() * (k.Ai[i].cast<cplx>() * U))(0);
        } else {
            const VectorXcd A0U = k.A0.cast<cplx>() * U;
            D[0] = (U.transpose() * k.b.cast<cplx>())(0) + 0.5 * (U.transpose() * A0U)(0) - k.c;
            dU = k.Bt.cast<cplx>() * U - k.cvec.cast<cplx>();
            for (size_t i = 0; i < k.Ai.size(); ++i) dU[i] += 0.5 * (U.transpose() * (k.Ai[i].cast<cplx>() * U))(0);
        }
        if (with_jacobian) {
            Eigen::Map<const MatrixXcd> J(X + 1 + n, n, n);
            Eigen::Map<MatrixXcd> dJ(D + 1 + n, n, n);
            const double sg = form == RiccatiForm::kelvin_forward ? -1.0 : 1.0;
            MatrixXcd Df = sg * k.Bt.cast<cplx>();
            const cplx q = form == RiccatiForm::kelvin_forward ? I1 : cplx(1.0);
            for (size_t i = 0; i < k.Ai.size(); ++i) Df.row(i) += q * (k.Ai[i].cast<cplx>() * U).transpose();
            dJ = Df * J;
        }
    }
};

double upsilon_norm(const rstate& x, int n) {
    const cplx* X = reinterpret_cast<const cplx*>(x.data());
    double m = 0;
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(X[1 + i].real()) || !std::isfinite(X[1 + i].imag())) return INFINITY;
        m = std::max(m, std::abs(X[1 + i]));
    }
    if (!std::isfinite(X[0].real()) || !std::isfinite(X[0].imag())) return INFINITY;
    return m;
}

enum class Advance { ok, exploded };

// Integrate x from s0 to s1 (no breakpoints inside). Returns exploded when the guard is
// exceeded; then (s_ok, x_ok) hold the last state that was still below the guard.
Advance advance(RiccatiSystem& sys, rstate& x, double& s, double s1, double tol, double guard, double& dt_hint,
                rstate& x_ok, double& s_ok, double& s_fail) {
    auto stepper = odeint::make_controlled(tol * 1e-2, tol, rkf78());
    double dt = std::min(dt_hint, s1 - s);
    x_ok = x;
    s_ok = s;
    int fails = 0;
    while (s < s1) {
        if (s + dt > s1) dt = s1 - s;
        rstate trial = x;
        double st = s;
        odeint::controlled_step_result r;
        try {
            r = stepper.try_step(std::ref(sys), trial, st, dt);
        } catch (...) {
            r = odeint::fail;
            dt *= 0.5;
        }
        if (r == odeint::success) {
            if (upsilon_norm(trial, sys.n) > guard) {
                s_fail = st;
                return Advance::exploded;
            }
            x = trial;
            s = st;
            x_ok = x;
            s_ok = s;
            fails = 0;
            if (s1 - s < 1e-15 * std::max(1.0, std::abs(s1))) s = s1;
        } else if (++fails > 200 || !(dt > 1e-15 * std::max(1.0, std::abs(s)))) {
            s_fail = s + std::max(dt, 0.0);
            if (upsilon_norm(x, sys.n) > 1e6) return Advance::exploded;
            throw AccuracyError("riccati_integrate: step size underflow");
        }
    }
    dt_hint = dt;
    return Advance::ok;
}

rstate pack(cplx alpha, const VectorXcd& u, bool jac) {
    const int n = int(u.size());
    std::vector<cplx> v(1 + n + (jac ? n * n : 0));
    v[0] = alpha;
    for (int i = 0; i < n; ++i) v[1 + i] = u[i];
    if (jac)
        for (int i = 0; i < n; ++i) v[1 + n + i * n + i] = 1.0;
    rstate x(2 * v.size());
    std::memcpy(x.data(), v.data(), sizeof(double) * x.size());
    return x;
}

rstate run(RiccatiSystem& sys, rstate x, double tau, double t, const RiccatiOptions& opt) {
    const double T = t - tau;
    std::vector<double> knots;
    {
        std::vector<double> k = merged_knots(tau, t, sys.model.B, sys.model.A0, sys.model.b, sys.model.kill_c,
                                             sys.model.kill_vec);
        for (const auto& a : sys.model.Ai)
            for (double v : a.breakpoints(tau, t)) k.push_back(v);
        std::sort(k.begin(), k.end());
        k.erase(std::unique(k.begin(), k.end()), k.end());
        for (double v : k) knots.push_back(sys.form == RiccatiForm::kelvin_forward ? v - tau : t - v);
        std::sort(knots.begin(), knots.end());
    }
    // integration variable s runs over [0, T]; coefficients are looked up at tau+s or t-s
    const double base = sys.form == RiccatiForm::kelvin_forward ? tau : 0.0;
    if (sys.form == RiccatiForm::kelvin_forward)
        for (double& v : knots) v += tau;
    double s = base, dt = std::max(T / 64, 1e-8);
    rstate x_ok;
    double s_ok;
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
        const double s1 = knots[i + 1];
        sys.hint = 0.5 * (knots[i] + s1);
        double s_fail = s1;
        if (advance(sys, x, s, s1, opt.tol, opt.guard, dt, x_ok, s_ok, s_fail) == Advance::exploded) {
            double lo = s_ok, hi = std::max(s_fail, s_ok);
            rstate xl = x_ok;
            while (hi - lo > opt.localize) {
                const double mid = 0.5 * (lo + hi);
                rstate xt = xl, xo;
                double st = lo, so, sf, dth = (mid - lo) / 8;
                if (advance(sys, xt, st, mid, opt.tol, opt.guard, dth, xo, so, sf) == Advance::ok) {
                    lo = mid;
                    xl = xt;
                } else {
                    hi = mid;
                }
            }
            const double tstar = sys.form == RiccatiForm::kelvin_forward ? 0.5 * (lo + hi) : tau + 0.5 * (lo + hi);
            throw Explosion(tstar, "riccati_integrate: solution blows up at t* = " + std::to_string(tstar));
        }
    }
    return x;
}

} // namespace

RiccatiState riccati_integrate(const AffineModelSpec& model, const VectorXcd& m, double tau, double t,
                               const RiccatiOptions& opt) {
    if (!(opt.tol > 0)) throw DomainError("riccati_integrate: tol must be positive");
    if (t < tau) throw DomainError("riccati_integrate: t < tau");
    model.validate();
    if (m.size() != model.dim()) throw DomainError("riccati_integrate: wave vector dimension");
    RiccatiSystem sys(model, opt.form, tau, t, false);
    const VectorXcd u0 = opt.form == RiccatiForm::kelvin_forward ? m : VectorXcd(I1 * m);
    rstate x = run(sys, pack(0.0, u0, false), tau, t, opt);
    const cplx* X = reinterpret_cast<const cplx*>(x.data());
    RiccatiState st;
    st.t = t;
    st.alpha = X[0];
    st.upsilon = Eigen::Map<const VectorXcd>(X + 1, model.dim());
    if (opt.form == RiccatiForm::backward_cf) st.upsilon *= -I1;
    return st;
}

cplx forward_marginal_log_cf(const AffineModelSpec& model, const VectorXcd& u, const VectorXd& zeta, double tau,
                             double t, double tol) {
    model.validate();
    const int n = model.dim();
    RiccatiOptions opt;
    opt.tol = tol;
    RiccatiSystem sys(model, RiccatiForm::kelvin_forward, tau, t, true);
    // linear part Upsilon = L m gives the starting guess
    FundamentalSolution fs = fundamental_solution(model.B, tau, t);
    VectorXcd mstar = -(fs.L_inv.cast<cplx>() * u);
    for (int it = 0; it < 60; ++it) {
        rstate x = run(sys, pack(0.0, mstar, true), tau, t, opt);
        const cplx* X = reinterpret_cast<const cplx*>(x.data());
        Eigen::Map<const VectorXcd> U(X + 1, n);
        Eigen::Map<const MatrixXcd> J(X + 1 + n, n, n);
        const VectorXcd res = U + u;
        const double scale = 1.0 + u.cwiseAbs().maxCoeff();
        if (res.cwiseAbs().maxCoeff() < 1e-13 * scale) {
            const cplx logdet = std::log(J.determinant());
            return X[0] - I1 * (mstar.transpose() * zeta.cast<cplx>())(0) - logdet;
        }
        mstar -= J.partialPivLu().solve(res);
    }
    throw AccuracyError("forward_marginal_log_cf: Newton did not converge");
}

} // namespace ak
