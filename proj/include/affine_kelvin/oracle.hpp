#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "affine_kelvin/model.hpp"

namespace ak {

enum class MCScheme { euler, exact_ou, full_truncation_feller };

struct MCConfig {
    long paths = 100000;
    int steps = 512;        // per unit time
    int total_steps = 0;    // if positive, overrides steps for the whole horizon
    uint64_t seed = 20240601;
    MCScheme scheme = MCScheme::euler;
    bool antithetic = false;
    int threads = 0;  // 0: hardware concurrency capped by AFFINE_KELVIN_THREADS
};

// What a statistic sees at the end of one path.
struct PathEnd {
    Eigen::VectorXd z;   // state at t
    double weight = 1;   // exp(-int kill)
};

struct Statistic {
    std::string name;
    int dim = 1;
    std::function<void(const PathEnd&, double* out)> eval;
    std::vector<double> closed_form;  // optional, one per component
    double abs_tol = 0;
};

struct OracleReport {
    std::string statistic;
    double closed_form = 0;
    double oracle = 0;
    double std_error = 0;  // MC standard error, or residual norm for PDE checks
    double tolerance = 0;  // threshold |delta| was compared against
    bool pass = false;
};

// Convenience statistic builders.
Statistic stat_moment(std::string name, std::function<double(const PathEnd&)> f, double closed_form = NAN,
                      double abs_tol = 0);

// pass <=> |closed - oracle| <= max(abs_tol, z * se)
OracleReport make_report(std::string name, double closed, double oracle, double se, double abs_tol, double z = 3);

std::vector<OracleReport> mc_simulate(const AffineModelSpec& model, const Eigen::VectorXd& zeta, double tau, double t,
                                      const MCConfig& cfg, const std::vector<Statistic>& stats);

int worker_count(int requested = 0);

struct ResidualReport {
    double max_rel = 0, mean_rel = 0;
    int evaluated = 0;
    std::vector<int> rejected;  // indices of points too far in the tails
};

// Forward (Fokker-Planck, with kill) operator applied to density(t, z) by 4th-order
// central differences; h = rel_step * scale per axis and rel_step * time_scale in t.
ResidualReport pde_residual(const std::function<double(double, const Eigen::VectorXd&)>& density,
                            const AffineModelSpec& model, const std::vector<std::pair<double, Eigen::VectorXd>>& points,
                            const Eigen::VectorXd& scale = Eigen::VectorXd(), double time_scale = 1.0,
                            double rel_step = 1e-4);

} // namespace ak
