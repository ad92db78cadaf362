#include "affine_kelvin/model.hpp"

#include <cmath>

namespace ak {

using Eigen::MatrixXd;
using Eigen::VectorXd;

bool AffineModelSpec::killed() const {
    for (const auto& p : kill_c.pieces())
        for (double v : p.poly)
            if (v != 0) return true;
    for (const auto& p : kill_vec.pieces())
        for (const auto& v : p.poly)
            if (v.cwiseAbs().maxCoeff() != 0) return true;
    return false;
}

bool AffineModelSpec::constant_coefficients() const {
    if (!(b.is_constant() && B.is_constant() && A0.is_constant() && kill_c.is_constant() && kill_vec.is_constant()))
        return false;
    for (const auto& a : Ai)
        if (!a.is_constant()) return false;
    return true;
}

MatrixXd AffineModelSpec::covariance(double t, const VectorXd& z) const {
    MatrixXd a = A0(t);
    for (size_t i = 0; i < Ai.size(); ++i) a += z[i] * Ai[i](t);
    return a;
}

VectorXd AffineModelSpec::drift(double t, const VectorXd& z) const { return b(t) + B(t) * z; }

double AffineModelSpec::kill(double t, const VectorXd& z) const { return kill_c(t) + kill_vec(t).dot(z); }

void AffineModelSpec::validate() const {
    const int I = dim();
    if (M < 0 || N < 0 || I == 0) throw InvalidModel(name + ": dimensions must be positive");
    if (b.empty() || B.empty() || A0.empty() || kill_c.empty() || kill_vec.empty())
        throw InvalidModel(name + ": missing coefficient schedule");
    auto check_mat = [&](const MatrixSchedule& s, const char* what) {
        if (!s.finite()) throw InvalidModel(name + ": non-finite coefficients in " + what);
        for (const auto& p : s.pieces())
            for (const auto& m : p.poly) {
                if (m.rows() != I || m.cols() != I) throw InvalidModel(name + ": wrong shape of " + what);
                if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + m.cwiseAbs().maxCoeff()) &&
                    std::string(what) != "B")
                    throw InvalidModel(name + ": covariance loading " + what + " is not symmetric");
            }
    };
    check_mat(B, "B");
    check_mat(A0, "A0");
    if (!Ai.empty() && int(Ai.size()) != I) throw InvalidModel(name + ": need one loading per coordinate");
    for (const auto& a : Ai) check_mat(a, "A_i");
    for (const auto& p : b.pieces())
        for (const auto& v : p.poly)
            if (v.size() != I || !v.allFinite()) throw InvalidModel(name + ": bad drift vector");
    for (const auto& p : kill_vec.pieces())
        for (const auto& v : p.poly)
            if (v.size() != I || !v.allFinite()) throw InvalidModel(name + ": bad kill vector");
    if (!kill_c.finite()) throw InvalidModel(name + ": non-finite kill intensity");
    if (!nonnegative.empty() && int(nonnegative.size()) != I) throw InvalidModel(name + ": nonnegative flags size");
}

AffineModelSpec AffineModelSpec::zeros(std::string name, int M, int N) {
    AffineModelSpec s;
    const int I = M + N;
    s.name = std::move(name);
    s.M = M;
    s.N = N;
    s.b = VectorSchedule::constant(VectorXd::Zero(I));
    s.B = MatrixSchedule::constant(MatrixXd::Zero(I, I));
    s.A0 = MatrixSchedule::constant(MatrixXd::Zero(I, I));
    s.kill_c = ScalarSchedule::constant(0.0);
    s.kill_vec = VectorSchedule::constant(VectorXd::Zero(I));
    s.nonnegative.assign(I, false);
    return s;
}

AffineModelSpec AffineModelSpec::from_sigma(std::string name, int M, int N, const VectorXd& b, const MatrixXd& B,
                                            const MatrixXd& Sigma, const VectorXd& d0, const MatrixXd& D) {
    const int I = M + N;
    if (Sigma.rows() != N || Sigma.cols() != N || d0.size() != N || D.rows() != N || D.cols() != I)
        throw InvalidModel(name + ": Sigma/d0/D shapes");
    AffineModelSpec s = zeros(std::move(name), M, N);
    s.b = VectorSchedule::constant(b);
    s.B = MatrixSchedule::constant(B);
    auto embed = [&](const VectorXd& diag) {
        MatrixXd a = MatrixXd::Zero(I, I);
        a.bottomRightCorner(N, N) = Sigma * diag.asDiagonal() * Sigma.transpose();
        return a;
    };
    s.A0 = MatrixSchedule::constant(embed(d0));
    if (D.cwiseAbs().maxCoeff() != 0) {
        for (int i = 0; i < I; ++i) s.Ai.push_back(MatrixSchedule::constant(embed(D.col(i))));
        for (int i = 0; i < I; ++i) s.nonnegative[i] = D.col(i).cwiseAbs().maxCoeff() != 0;
    }
    return s;
}

namespace models {

namespace {
MatrixXd E(int I, int r, int c) {
    MatrixXd m = MatrixXd::Zero(I, I);
    m(r, c) = 1;
    return m;
}
MatrixXd Esym(int I, int r, int c) { return E(I, r, c) + E(I, c, r); }
void set_loadings(AffineModelSpec& s, const std::vector<MatrixXd>& ai) {
    s.Ai.clear();
    for (const auto& a : ai) s.Ai.push_back(MatrixSchedule::constant(a));
}
} // namespace

AffineModelSpec kolmogorov(double a, double b) {
    if (!(a > 0)) throw InvalidModel("kolmogorov: a must be positive");
    return kolmogorov(ScalarSchedule::constant(a), ScalarSchedule::constant(b));
}

AffineModelSpec kolmogorov(const ScalarSchedule& a, const ScalarSchedule& b) {
    auto s = AffineModelSpec::zeros("kolmogorov", 1, 1);
    MatrixXd B = MatrixXd::Zero(2, 2);
    B(0, 1) = 1;
    s.B = MatrixSchedule::constant(B);
    auto lift_vec = [](const ScalarSchedule& f) {
        std::vector<double> knots;
        std::vector<std::vector<VectorXd>> polys;
        for (const auto& p : f.pieces()) {
            knots.push_back(p.t0);
            std::vector<VectorXd> v;
            for (double c : p.poly) v.push_back((VectorXd(2) << 0, c).finished());
            polys.push_back(v);
        }
        knots.push_back(f.pieces().back().t1);
        if (f.pieces().size() == 1 && !std::isfinite(knots[0])) return VectorSchedule::constant(polys[0][0]);
        return VectorSchedule::piecewise(knots, polys);
    };
    auto lift_mat = [](const ScalarSchedule& f) {
        std::vector<double> knots;
        std::vector<std::vector<MatrixXd>> polys;
        for (const auto& p : f.pieces()) {
            if (p.poly[0] <= 0 && p.poly.size() == 1) throw InvalidModel("kolmogorov: a must be positive");
            knots.push_back(p.t0);
            std::vector<MatrixXd> v;
            for (double c : p.poly) {
                MatrixXd m = MatrixXd::Zero(2, 2);
                m(1, 1) = c;
                v.push_back(m);
            }
            polys.push_back(v);
        }
        knots.push_back(f.pieces().back().t1);
        if (f.pieces().size() == 1 && !std::isfinite(knots[0])) return MatrixSchedule::constant(polys[0][0]);
        return MatrixSchedule::piecewise(knots, polys);
    };
    s.b = lift_vec(b);
    s.A0 = lift_mat(a);
    return s;
}

AffineModelSpec ou(double chi, double kappa, double eps) {
    if (!(eps > 0)) throw InvalidModel("ou: eps must be positive");
    auto s = AffineModelSpec::zeros("ou", 0, 1);
    s.b = VectorSchedule::constant(VectorXd::Constant(1, chi));
    s.B = MatrixSchedule::constant(MatrixXd::Constant(1, 1, -kappa));
    s.A0 = MatrixSchedule::constant(MatrixXd::Constant(1, 1, eps * eps));
    return s;
}

AffineModelSpec augmented_ou(double chi, double kappa, double eps) {
    if (!(eps > 0)) throw InvalidModel("augmented_ou: eps must be positive");
    auto s = AffineModelSpec::zeros("augmented_ou", 1, 1);
    s.b = VectorSchedule::constant((VectorXd(2) << 0, chi).finished());
    s.B = MatrixSchedule::constant((MatrixXd(2, 2) << 0, 1, 0, -kappa).finished());
    s.A0 = MatrixSchedule::constant(eps * eps * E(2, 1, 1));
    return s;
}

AffineModelSpec harmonic_particle(double kappa, double omega2, double eps) {
    if (!(eps > 0)) throw InvalidModel("harmonic_particle: eps must be positive");
    if (omega2 < 0) throw InvalidModel("harmonic_particle: omega^2 must be nonnegative");
    auto s = AffineModelSpec::zeros("harmonic_particle", 1, 1);
    s.B = MatrixSchedule::constant((MatrixXd(2, 2) << 0, 1, -omega2, -kappa).finished());
    s.A0 = MatrixSchedule::constant(eps * eps * E(2, 1, 1));
    return s;
}

AffineModelSpec feller(double chi, double kappa, double eps) {
    if (!(eps > 0)) throw InvalidModel("feller: eps must be positive");
    auto s = AffineModelSpec::zeros("feller", 0, 1);
    s.b = VectorSchedule::constant(VectorXd::Constant(1, chi));
    s.B = MatrixSchedule::constant(MatrixXd::Constant(1, 1, -kappa));
    set_loadings(s, {MatrixXd::Constant(1, 1, eps * eps)});
    s.nonnegative = {true};
    return s;
}

AffineModelSpec augmented_feller(double chi, double kappa, double eps) {
    if (!(eps > 0)) throw InvalidModel("augmented_feller: eps must be positive");
    auto s = AffineModelSpec::zeros("augmented_feller", 1, 1);
    s.b = VectorSchedule::constant((VectorXd(2) << 0, chi).finished());
    s.B = MatrixSchedule::constant((MatrixXd(2, 2) << 0, 1, 0, -kappa).finished());
    set_loadings(s, {MatrixXd::Zero(2, 2), eps * eps * E(2, 1, 1)});
    s.nonnegative = {false, true};
    return s;
}

AffineModelSpec heston(double chi, double kappa, double eps, double rho) {
    if (!(eps > 0)) throw InvalidModel("heston: eps must be positive");
    if (!(std::abs(rho) < 1)) throw InvalidModel("heston: |rho| must be below one");
    auto s = AffineModelSpec::zeros("heston", 1, 1);
    s.b = VectorSchedule::constant((VectorXd(2) << 0, chi).finished());
    s.B = MatrixSchedule::constant((MatrixXd(2, 2) << 0, -0.5, 0, -kappa).finished());
    set_loadings(s, {MatrixXd::Zero(2, 2), (MatrixXd(2, 2) << 1, rho * eps, rho * eps, eps * eps).finished()});
    s.nonnegative = {false, true};
    return s;
}

AffineModelSpec quadratic_ou(double chi, double kappa, double eps) {
    if (!(eps > 0)) throw InvalidModel("quadratic_ou: eps must be positive");
    auto s = AffineModelSpec::zeros("quadratic_ou", 1, 2);
    const double e2 = eps * eps;
    s.b = VectorSchedule::constant((VectorXd(3) << 0, chi, e2).finished());
    s.B = MatrixSchedule::constant((MatrixXd(3, 3) << 0, 0, 1, 0, -kappa, 0, 0, 2 * chi, -2 * kappa).finished());
    s.A0 = MatrixSchedule::constant(e2 * E(3, 1, 1));
    set_loadings(s, {MatrixXd::Zero(3, 3), 2 * e2 * Esym(3, 1, 2), 4 * e2 * E(3, 2, 2)});
    s.nonnegative = {false, false, true};
    return s;
}

AffineModelSpec stein_stein(double chi, double kappa, double eps, double rho) {
    if (!(eps > 0)) throw InvalidModel("stein_stein: eps must be positive");
    if (!(std::abs(rho) < 1)) throw InvalidModel("stein_stein: |rho| must be below one");
    auto s = AffineModelSpec::zeros("stein_stein", 1, 2);
    const double e2 = eps * eps;
    s.b = VectorSchedule::constant((VectorXd(3) << 0, chi, e2).finished());
    s.B = MatrixSchedule::constant((MatrixXd(3, 3) << 0, 0, -0.5, 0, -kappa, 0, 0, 2 * chi, -2 * kappa).finished());
    s.A0 = MatrixSchedule::constant(e2 * E(3, 1, 1));
    set_loadings(s, {MatrixXd::Zero(3, 3), rho * eps * Esym(3, 0, 1) + 2 * e2 * Esym(3, 1, 2),
                     E(3, 0, 0) + 2 * rho * eps * Esym(3, 0, 2) + 4 * e2 * E(3, 2, 2)});
    s.nonnegative = {false, false, true};
    return s;
}

AffineModelSpec pdv(double a0, double a1, double kappa) {
    if (!(a0 > 0)) throw InvalidModel("pdv: a0 must be positive");
    if (!(a1 < 0)) throw InvalidModel("pdv: a1 must be negative");
    if (!(kappa > 0)) throw InvalidModel("pdv: kappa must be positive");
    auto s = AffineModelSpec::zeros("pdv", 1, 1);
    s.b = VectorSchedule::constant((VectorXd(2) << -0.5 * a0, 0).finished());
    s.B = MatrixSchedule::constant((MatrixXd(2, 2) << -0.5 * a1, 0.5 * a1, kappa, -kappa).finished());
    s.A0 = MatrixSchedule::constant(a0 * E(2, 0, 0));
    set_loadings(s, {a1 * E(2, 0, 0), -a1 * E(2, 0, 0)});
    return s;
}

AffineModelSpec vorticity2d(double sr, double w, double nu) {
    if (!(nu > 0)) throw InvalidModel("vorticity2d: nu must be positive");
    auto s = AffineModelSpec::zeros("vorticity2d", 0, 2);
    s.B = MatrixSchedule::constant(0.5 * (MatrixXd(2, 2) << sr, -w, w, -sr).finished());
    s.A0 = MatrixSchedule::constant(2 * nu * MatrixXd::Identity(2, 2));
    return s;
}

AffineModelSpec vasicek(double chi, double kappa, double eps) {
    auto s = augmented_ou(chi, kappa, eps);
    s.name = "vasicek";
    s.kill_vec = VectorSchedule::constant((VectorXd(2) << 0, 1).finished());
    return s;
}

AffineModelSpec cir(double chi, double kappa, double eps) {
    auto s = feller(chi, kappa, eps);
    s.name = "cir";
    s.kill_vec = VectorSchedule::constant(VectorXd::Constant(1, 1.0));
    return s;
}

} // namespace models
} // namespace ak
