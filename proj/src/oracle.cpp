#include "affine_kelvin/oracle.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "affine_kelvin/errors.hpp"
#include "affine_kelvin/rng.hpp"

namespace ak {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int worker_count(int requested) {
    int n = requested > 0 ? requested : int(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("AFFINE_KELVIN_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return n;
}

Statistic stat_moment(std::string name, std::function<double(const PathEnd&)> f, double closed_form, double abs_tol) {
    Statistic s;
    s.name = std::move(name);
    s.dim = 1;
    s.eval = [f = std::move(f)](const PathEnd& e, double* out) { out[0] = f(e); };
    if (!std::isnan(closed_form)) s.closed_form = {closed_form};
    s.abs_tol = abs_tol;
    return s;
}

OracleReport make_report(std::string name, double closed, double oracle, double se, double abs_tol, double z) {
    OracleReport r;
    r.statistic = std::move(name);
    r.closed_form = closed;
    r.oracle = oracle;
    r.std_error = se;
    r.tolerance = std::max(abs_tol, z * se);
    r.pass = std::abs(closed - oracle) <= r.tolerance;
    return r;
}

namespace {

// Symmetric square root via eigen-decomposition with negative eigenvalues clipped.
// scale: size of Q before cancellation, so an all-roundoff Q (no noise at all) maps to zero
MatrixXd psd_sqrt(const MatrixXd& Q, double scale) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (Q + Q.transpose()));
    // eigenvalues at roundoff level are dropped so their columns cost no normals
    const double cut = scale > 0 ? 1e-14 * std::max(es.eigenvalues().cwiseAbs().maxCoeff(), scale) : INFINITY;
    VectorXd ev = es.eigenvalues().unaryExpr([cut](double v) { return v > cut ? std::sqrt(v) : 0.0; });
    return es.eigenvectors() * ev.asDiagonal();
}

// Welford per block, Chan's update to merge blocks
struct Accum {
    std::vector<double> mean, m2;
    long n = 0;
};

struct ExactStep {
    MatrixXd Phi;   // (I+2) x (I+2) on (z, kill integral, 1)
    MatrixXd G;     // noise factor
};

ExactStep exact_step(const AffineModelSpec& m, double h) {
    const int I = m.dim(), n = I + 2;
    MatrixXd Ba = MatrixXd::Zero(n, n), Aa = MatrixXd::Zero(n, n);
    Ba.topLeftCorner(I, I) = m.B(0.0);
    Ba.block(0, I + 1, I, 1) = m.b(0.0);
    Ba.block(I, 0, 1, I) = m.kill_vec(0.0).transpose();
    Ba(I, I + 1) = m.kill_c(0.0);
    Aa.topLeftCorner(I, I) = m.A0(0.0);
    // Van Loan: exp([[-B, A],[0, B^T]] h) = [[., F12],[0, F22]], Q = F22^T F12
    MatrixXd VL = MatrixXd::Zero(2 * n, 2 * n);
    VL.topLeftCorner(n, n) = -Ba * h;
    VL.topRightCorner(n, n) = Aa * h;
    VL.bottomRightCorner(n, n) = Ba.transpose() * h;
    const MatrixXd E = VL.exp();
    const MatrixXd F22 = E.bottomRightCorner(n, n), F12 = E.topRightCorner(n, n);
    ExactStep st;
    st.Phi = F22.transpose();
    const double phi = F22.cwiseAbs().maxCoeff();
    st.G = psd_sqrt(F22.transpose() * F12, h * Aa.cwiseAbs().maxCoeff() * phi * phi);
    return st;
}

} // namespace

namespace {

constexpr int kMax = 12;

// Flat copy of the coefficients at one time, row-major.
struct Coef {
    double b[kMax], B[kMax * kMax], A0[kMax * kMax], c, cv[kMax];
    std::vector<std::array<double, kMax * kMax>> Ai;
};

void fill(Coef& k, const AffineModelSpec& m, double s) {
    const int I = m.dim();
    const VectorXd b = m.b(s), cv = m.kill_vec(s);
    const MatrixXd B = m.B(s), A0 = m.A0(s);
    for (int i = 0; i < I; ++i) {
        k.b[i] = b[i];
        k.cv[i] = cv[i];
        for (int j = 0; j < I; ++j) {
            k.B[i * I + j] = B(i, j);
            k.A0[i * I + j] = A0(i, j);
        }
    }
    k.c = m.kill_c(s);
    k.Ai.resize(m.Ai.size());
    for (size_t a = 0; a < m.Ai.size(); ++a) {
        const MatrixXd Aa = m.Ai[a](s);
        for (int i = 0; i < I; ++i)
            for (int j = 0; j < I; ++j) k.Ai[a][i * I + j] = Aa(i, j);
    }
}

// In-place soft Cholesky of a small row-major matrix, lower factor written to G.
void soft_chol_flat(const double* A, double* G, int n) {
    for (int i = 0; i < n * n; ++i) G[i] = 0;
    for (int j = 0; j < n; ++j) {
        double d = A[j * n + j];
        for (int k = 0; k < j; ++k) d -= G[j * n + k] * G[j * n + k];
        if (d <= 1e-300) continue;
        const double s = std::sqrt(d);
        G[j * n + j] = s;
        for (int i = j + 1; i < n; ++i) {
            double v = A[i * n + j];
            for (int k = 0; k < j; ++k) v -= G[i * n + k] * G[j * n + k];
            G[i * n + j] = v / s;
        }
    }
}

} // namespace

std::vector<OracleReport> mc_simulate(const AffineModelSpec& model, const VectorXd& zeta, double tau, double t,
                                      const MCConfig& cfg, const std::vector<Statistic>& stats) {
    model.validate();
    if (cfg.paths < 2) throw ConfigError("mc_simulate: need at least two paths");
    if (cfg.steps < 1 && cfg.total_steps < 1) throw ConfigError("mc_simulate: need at least one step per unit time");
    if (!(t > tau)) throw ConfigError("mc_simulate: need t > tau");
    if (zeta.size() != model.dim()) throw ConfigError("mc_simulate: start state dimension");
    if (!model.gaussian() && cfg.scheme != MCScheme::full_truncation_feller)
        throw ConfigError("mc_simulate: state-dependent covariance needs the full_truncation_feller scheme");
    if (cfg.scheme == MCScheme::exact_ou && !model.constant_coefficients())
        throw ConfigError("mc_simulate: exact_ou needs a constant-coefficient Gaussian model");
    if (cfg.antithetic && cfg.paths % 2) throw ConfigError("mc_simulate: antithetic runs need an even path count");
    const int I = model.dim();
    if (I + 2 > kMax) throw ConfigError("mc_simulate: state dimension too large");

    const double T = t - tau;
    const int nsteps = cfg.total_steps > 0 ? cfg.total_steps : std::max(1, int(std::ceil(cfg.steps * T - 1e-9)));
    const double h = T / nsteps, sqh = std::sqrt(h);
    int total_dim = 0;
    for (const auto& s : stats) total_dim += s.dim;

    // rows that carry noise anywhere in the schedule
    std::vector<int> driven;
    std::vector<bool> is_driven(I, false);
    {
        auto mark = [&](const MatrixSchedule& a) {
            for (const auto& p : a.pieces())
                for (const auto& c : p.poly)
                    for (int i = 0; i < I; ++i)
                        if (c.row(i).cwiseAbs().maxCoeff() != 0) is_driven[i] = true;
        };
        mark(model.A0);
        for (const auto& a : model.Ai) mark(a);
        for (int i = 0; i < I; ++i)
            if (is_driven[i]) driven.push_back(i);
    }
    std::vector<bool> clip = model.nonnegative;
    clip.resize(I, false);
    if (cfg.scheme != MCScheme::full_truncation_feller) std::fill(clip.begin(), clip.end(), false);
    const bool constant = model.constant_coefficients();
    const bool killed = model.killed();

    Coef cconst;
    if (constant) fill(cconst, model, tau);
    double Gconst[kMax * kMax];
    if (constant && model.gaussian()) {
        soft_chol_flat(cconst.A0, Gconst, I);
        for (int i = 0; i < I * I; ++i) Gconst[i] *= sqh;
    }

    // exact transition on (z, kill integral, 1)
    const int n = I + 2;
    std::vector<double> Phi, Gx;
    std::vector<int> gcols;
    if (cfg.scheme == MCScheme::exact_ou) {
        ExactStep ex = exact_step(model, h);
        Phi.resize(n * n);
        Gx.resize(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Phi[i * n + j] = ex.Phi(i, j);
                Gx[i * n + j] = ex.G(i, j);
            }
        for (int j = 0; j < n; ++j)
            if (ex.G.col(j).cwiseAbs().maxCoeff() > 0) gcols.push_back(j);
    }

    const Philox4x32 gen(cfg.seed);
    const long units = cfg.antithetic ? cfg.paths / 2 : cfg.paths;
    const long block = 4096;
    const long nblocks = (units + block - 1) / block;
    std::vector<Accum> acc(nblocks);

    auto run_path = [&](long path, double sign, std::vector<double>& out) {
        PathNormals nrm(gen, uint64_t(path));
        double z[kMax], zc[kMax], zn[kMax], mu[kMax], mu1[kMax], eps[kMax], A[kMax * kMax], Gl[kMax * kMax];
        Coef c0, c1;
        double kill_int = 0;
        for (int i = 0; i < I; ++i) z[i] = zeta[i];
        if (cfg.scheme == MCScheme::exact_ou) {
            double za[kMax], zb[kMax];
            for (int i = 0; i < I; ++i) za[i] = z[i];
            za[I] = 0;
            za[I + 1] = 1;
            for (int k = 0; k < nsteps; ++k) {
                for (int i = 0; i < n; ++i) {
                    double v = 0;
                    for (int j = 0; j < n; ++j) v += Phi[i * n + j] * za[j];
                    zb[i] = v;
                }
                for (int j : gcols) {
                    const double e = sign * nrm.next();
                    for (int i = 0; i < n; ++i) zb[i] += Gx[i * n + j] * e;
                }
                std::copy(zb, zb + n, za);
            }
            for (int i = 0; i < I; ++i) z[i] = za[i];
            kill_int = za[I];
        } else {
            if (!constant) fill(c0, model, tau);
            for (int k = 0; k < nsteps; ++k) {
                const double s = tau + k * h;
                const Coef& k0 = constant ? cconst : c0;
                if (!constant) fill(c1, model, s + h);
                const Coef& k1 = constant ? cconst : c1;
                for (int i = 0; i < I; ++i) zc[i] = clip[i] ? std::max(z[i], 0.0) : z[i];
                for (int i = 0; i < I; ++i) {
                    double v = k0.b[i];
                    for (int j = 0; j < I; ++j) v += k0.B[i * I + j] * zc[j];
                    mu[i] = v;
                }
                const double* G = Gconst;
                if (!(constant && model.gaussian())) {
                    for (int i = 0; i < I * I; ++i) A[i] = k0.A0[i];
                    for (size_t a = 0; a < k0.Ai.size(); ++a)
                        if (zc[a] != 0)
                            for (int i = 0; i < I * I; ++i) A[i] += zc[a] * k0.Ai[a][i];
                    soft_chol_flat(A, Gl, I);
                    for (int i = 0; i < I * I; ++i) Gl[i] *= sqh;
                    G = Gl;
                }
                for (int j : driven) eps[j] = sign * nrm.next();
                for (int i = 0; i < I; ++i) {
                    if (!is_driven[i]) {
                        zn[i] = z[i];
                        continue;
                    }
                    double v = z[i] + mu[i] * h;
                    for (int j : driven)
                        if (j <= i) v += G[i * I + j] * eps[j];
                    zn[i] = v;
                }
                // drift-only rows: trapezoid with the updated driven rows
                if (int(driven.size()) < I) {
                    for (int i = 0; i < I; ++i) zc[i] = clip[i] ? std::max(zn[i], 0.0) : zn[i];
                    for (int i = 0; i < I; ++i) {
                        if (is_driven[i]) continue;
                        double v = k1.b[i];
                        for (int j = 0; j < I; ++j) v += k1.B[i * I + j] * zc[j];
                        mu1[i] = v;
                    }
                    for (int i = 0; i < I; ++i)
                        if (!is_driven[i]) zn[i] = z[i] + 0.5 * (mu[i] + mu1[i]) * h;
                }
                if (killed) {
                    double ka = k0.c, kb = k1.c;
                    for (int i = 0; i < I; ++i) {
                        ka += k0.cv[i] * (clip[i] ? std::max(z[i], 0.0) : z[i]);
                        kb += k1.cv[i] * (clip[i] ? std::max(zn[i], 0.0) : zn[i]);
                    }
                    kill_int += 0.5 * (ka + kb) * h;
                }
                std::copy(zn, zn + I, z);
                if (!constant) std::swap(c0, c1);
            }
        }
        PathEnd e;
        e.z = Eigen::Map<VectorXd>(z, I);
        e.weight = std::exp(-kill_int);
        int off = 0;
        for (const auto& st : stats) {
            st.eval(e, out.data() + off);
            off += st.dim;
        }
    };

    std::atomic<long> next{0};
    auto worker = [&]() {
        std::vector<double> v(total_dim), w(total_dim);
        for (long bi; (bi = next.fetch_add(1)) < nblocks;) {
            Accum& a = acc[bi];
            a.mean.assign(total_dim, 0.0);
            a.m2.assign(total_dim, 0.0);
            const long u1 = std::min(units, (bi + 1) * block);
            for (long u = bi * block; u < u1; ++u) {
                if (cfg.antithetic) {
                    run_path(u, 1.0, v);
                    run_path(u, -1.0, w);
                    for (int j = 0; j < total_dim; ++j) v[j] = 0.5 * (v[j] + w[j]);
                } else {
                    run_path(u, 1.0, v);
                }
                ++a.n;
                for (int j = 0; j < total_dim; ++j) {
                    const double d = v[j] - a.mean[j];
                    a.mean[j] += d / a.n;
                    a.m2[j] += d * (v[j] - a.mean[j]);
                }
            }
        }
    };
    const int nt = std::min<long>(worker_count(cfg.threads), nblocks);
    std::vector<std::thread> pool;
    for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<double> mean_all(total_dim, 0.0), m2_all(total_dim, 0.0);
    long count = 0;
    for (const auto& a : acc) {  // fixed order: bit-identical for any thread count
        if (a.n == 0) continue;
        const double na = double(count), nb = double(a.n), nn = na + nb;
        for (int j = 0; j < total_dim; ++j) {
            const double d = a.mean[j] - mean_all[j];
            mean_all[j] += d * nb / nn;
            m2_all[j] += a.m2[j] + d * d * na * nb / nn;
        }
        count += a.n;
    }
    std::vector<OracleReport> out;
    int off = 0;
    for (const auto& st : stats) {
        for (int j = 0; j < st.dim; ++j) {
            const double mean = mean_all[off + j];
            const double var = m2_all[off + j] / (count - 1.0);
            const double se = std::sqrt(var / count);
            const std::string nm = st.dim == 1 ? st.name : st.name + "[" + std::to_string(j) + "]";
            const double cf = j < int(st.closed_form.size()) ? st.closed_form[j] : NAN;
            OracleReport r = make_report(nm, cf, mean, se, st.abs_tol);
            if (std::isnan(cf)) r.pass = true;  // nothing to compare against
            out.push_back(r);
        }
        off += st.dim;
    }
    return out;
}

ResidualReport pde_residual(const std::function<double(double, const VectorXd&)>& density,
                            const AffineModelSpec& model, const std::vector<std::pair<double, VectorXd>>& points,
                            const VectorXd& scale_in, double time_scale, double rel_step) {
    model.validate();
    const int I = model.dim();
    const VectorXd scale = scale_in.size() == I ? scale_in : VectorXd::Ones(I);
    static const double c1[4] = {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12};  // offsets -2,-1,1,2
    static const int o1[4] = {-2, -1, 1, 2};
    ResidualReport rep;
    double total = 0;
    for (size_t pi = 0; pi < points.size(); ++pi) {
        const double t = points[pi].first;
        const VectorXd& z = points[pi].second;
        const double P = density(t, z);
        if (!(std::abs(P) > 1e-300)) {
            rep.rejected.push_back(int(pi));
            continue;
        }
        const double ht = rel_step * time_scale;
        double Pt = 0;
        for (int k = 0; k < 4; ++k) Pt += c1[k] * density(t + o1[k] * ht, z);
        Pt /= ht;
        VectorXd grad(I);
        MatrixXd hess(I, I);
        for (int i = 0; i < I; ++i) {
            const double hi = rel_step * scale[i];
            VectorXd e = VectorXd::Zero(I);
            e[i] = hi;
            const double fm2 = density(t, z - 2 * e), fm1 = density(t, z - e), fp1 = density(t, z + e),
                         fp2 = density(t, z + 2 * e);
            grad[i] = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * hi);
            hess(i, i) = (-fm2 + 16 * fm1 - 30 * P + 16 * fp1 - fp2) / (12 * hi * hi);
            for (int j = 0; j < i; ++j) {
                const double hj = rel_step * scale[j];
                double v = 0;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) {
                        VectorXd zz = z;
                        zz[i] += o1[a] * hi;
                        zz[j] += o1[b] * hj;
                        v += c1[a] * c1[b] * density(t, zz);
                    }
                hess(i, j) = hess(j, i) = v / (hi * hj);
            }
        }
        const MatrixXd A = model.covariance(t, z);
        const VectorXd mu = model.drift(t, z);
        VectorXd g = VectorXd::Zero(I);
        for (size_t i = 0; i < model.Ai.size(); ++i) g += model.Ai[i](t).row(i).transpose();
        const double LP = Pt - 0.5 * (A.cwiseProduct(hess)).sum() - g.dot(grad) + mu.dot(grad) +
                          (model.B(t).trace() + model.kill(t, z)) * P;
        const double rel = std::abs(LP) / std::abs(P);
        rep.max_rel = std::max(rep.max_rel, rel);
        total += rel;
        ++rep.evaluated;
    }
    rep.mean_rel = rep.evaluated ? total / rep.evaluated : 0;
    return rep;
}

} // namespace ak
