#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "affine_kelvin/errors.hpp"

namespace ak {

namespace detail {
inline bool all_finite(double v) { return std::isfinite(v); }
template <class D>
bool all_finite(const Eigen::MatrixBase<D>& m) { return m.allFinite(); }
template <class T>
T zero_like(const T& v) {
    if constexpr (std::is_arithmetic_v<T>) return T(0);
    else return T::Zero(v.rows(), v.cols());
}
} // namespace detail

// Piecewise polynomial coefficient function of time. Piece i covers [t_i, t_{i+1});
// the last piece is closed on the right. Inside piece i the value is
// sum_j poly[j] * (t - t_i)^j.
template <class T>
class Schedule {
public:
    struct Piece {
        double t0, t1;
        std::vector<T> poly;
    };

    Schedule() = default;

    static Schedule constant(const T& v) {
        Schedule s;
        s.pieces_.push_back({-inf(), inf(), {v}});
        return s;
    }

    // Breakpoints t_0 < ... < t_n with one polynomial per interval.
    static Schedule piecewise(const std::vector<double>& knots, const std::vector<std::vector<T>>& polys) {
        if (knots.size() < 2 || polys.size() + 1 != knots.size())
            throw InvalidModel("schedule: need n+1 knots for n pieces");
        Schedule s;
        for (size_t i = 0; i + 1 < knots.size(); ++i) {
            if (!(knots[i] < knots[i + 1])) throw InvalidModel("schedule: knots must increase");
            if (polys[i].empty()) throw InvalidModel("schedule: empty polynomial");
            for (const auto& c : polys[i])
                if (!detail::all_finite(c)) throw InvalidModel("schedule: non-finite coefficient");
            s.pieces_.push_back({knots[i], knots[i + 1], polys[i]});
        }
        return s;
    }

    bool empty() const { return pieces_.empty(); }
    bool is_constant() const { return pieces_.size() == 1 && pieces_[0].poly.size() == 1; }
    double t_min() const { return pieces_.front().t0; }
    double t_max() const { return pieces_.back().t1; }
    const std::vector<Piece>& pieces() const { return pieces_; }

    T operator()(double t) const { return on(t, t); }

    // Polynomial of the piece containing `hint`, evaluated at t. ODE right-hand sides pass the
    // midpoint of the current interval so a stage landing on a right-hand knot stays on its piece.
    T on(double t, double hint) const {
        if (pieces_.empty()) throw InvalidModel("schedule: evaluated empty schedule");
        if (t < t_min() || t > t_max()) throw DomainError("schedule: time outside domain");
        hint = std::clamp(hint, t_min(), t_max());
        size_t lo = 0, hi = pieces_.size();
        while (hi - lo > 1) {
            size_t mid = (lo + hi) / 2;
            if (pieces_[mid].t0 <= hint) lo = mid; else hi = mid;
        }
        const Piece& p = pieces_[lo];
        const double dt = std::isfinite(p.t0) ? t - p.t0 : 0.0;
        T acc = p.poly.back();
        for (size_t j = p.poly.size() - 1; j-- > 0;) acc = T(acc * dt + p.poly[j]);
        return acc;
    }

    // Interior breakpoints strictly inside (a, b), sorted.
    std::vector<double> breakpoints(double a, double b) const {
        std::vector<double> out;
        for (size_t i = 1; i < pieces_.size(); ++i)
            if (pieces_[i].t0 > a && pieces_[i].t0 < b) out.push_back(pieces_[i].t0);
        return out;
    }

    bool finite() const {
        for (const auto& p : pieces_)
            for (const auto& c : p.poly)
                if (!detail::all_finite(c)) return false;
        return true;
    }

private:
    static double inf() { return std::numeric_limits<double>::infinity(); }
    std::vector<Piece> pieces_;
};

using ScalarSchedule = Schedule<double>;
using VectorSchedule = Schedule<Eigen::VectorXd>;
using MatrixSchedule = Schedule<Eigen::MatrixXd>;

// Union of breakpoints of several schedules inside (a,b), plus the end points.
template <class... S>
std::vector<double> merged_knots(double a, double b, const S&... s) {
    std::vector<double> k{a, b};
    (([&] { auto v = s.breakpoints(a, b); k.insert(k.end(), v.begin(), v.end()); })(), ...);
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
}

} // namespace ak
