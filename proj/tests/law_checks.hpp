#pragma once
// Shared helpers for the Monte Carlo and finite-difference checks of Gaussian laws.
#include <doctest.h>

#include <string>
#include <vector>

#include "affine_kelvin/gaussian.hpp"
#include "affine_kelvin/oracle.hpp"

namespace test_util {

// Mean and covariance statistics (centred at the closed-form mean), compared at 3 s.e.
inline std::vector<ak::Statistic> law_statistics(const ak::GaussianLaw& law) {
    std::vector<ak::Statistic> st;
    const int I = int(law.mean.size());
    for (int i = 0; i < I; ++i)
        st.push_back(ak::stat_moment("mean" + std::to_string(i), [i](const ak::PathEnd& e) { return e.z(i); },
                                     law.mean(i)));
    for (int i = 0; i < I; ++i)
        for (int j = i; j < I; ++j) {
            const double mi = law.mean(i), mj = law.mean(j);
            st.push_back(ak::stat_moment("cov" + std::to_string(i) + std::to_string(j),
                                         [=](const ak::PathEnd& e) { return (e.z(i) - mi) * (e.z(j) - mj); },
                                         law.cov(i, j)));
        }
    return st;
}

inline void check_reports(const std::vector<ak::OracleReport>& reps) {
    for (const auto& r : reps) {
        INFO(r.statistic << " closed " << r.closed_form << " mc " << r.oracle << " se " << r.std_error);
        CHECK(r.pass);
    }
}

inline void check_law_mc(const ak::AffineModelSpec& m, const Eigen::VectorXd& zeta, double tau, double t,
                         const ak::GaussianLaw& law, long paths = 1000000, uint64_t seed = 20240601) {
    ak::MCConfig cfg;
    cfg.paths = paths;
    cfg.scheme = ak::MCScheme::exact_ou;
    cfg.total_steps = 1;
    cfg.seed = seed;
    check_reports(ak::mc_simulate(m, zeta, tau, t, cfg, law_statistics(law)));
}

} // namespace test_util
