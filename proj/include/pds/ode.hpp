#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <type_traits>
#include <utility>

#include "pds/errors.hpp"

namespace pds {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-12;
    double h_init = 1e-2;
    double h_max = std::numeric_limits<double>::infinity();
    std::uint64_t max_steps = 200'000'000;
};

namespace detail {

// Dormand-Prince 5(4) tableau and dense-output coefficients (Hairer,
// Norsett & Wanner, Solving ODEs I, DOPRI5).
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                        e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0,
                        d7 = 69997945.0 / 29380423.0;

} // namespace detail

/// Adaptive Dormand-Prince 5(4) integrator with 4th-order dense output.
///
/// Rhs must be callable as rhs(double t, const double* y, double* dydt).
/// State dimension is bounded by 6 (the largest model in this project).
template <typename Rhs>
class Dopri5 {
  public:
    static constexpr std::size_t max_dim = 6;

    Dopri5(Rhs rhs, std::size_t n, OdeOptions opts = {})
        : rhs_(rhs), n_(n), opts_(opts) {}

    /// Integrate from t0 to t1 calling observer(t, y) at the output times
    /// t_out0 + k*dt_out that fall inside [t0, t1]. Observer returning false
    /// stops the integration early. y is updated in place to the state at
    /// the end of the last committed step.
    template <typename Observer>
    double integrate_sampled(double* y, double t0, double t1, double dt_out,
                             Observer&& observer, double t_out0) {
        double t = t0;
        double t_next_out = t_out0;
        while (t_next_out < t0 - 1e-12) t_next_out += dt_out;
        if (t_next_out <= t0 + 1e-12 * std::max(1.0, std::abs(t0))) {
            if (!emit(observer, t_next_out, y)) return t0;
            t_next_out += dt_out;
        }
        double h = std::min({opts_.h_init, opts_.h_max, t1 - t0});
        rhs_(t, y, k1_);
        std::uint64_t steps = 0;
        while (t < t1) {
            if (++steps > opts_.max_steps)
                throw IntegratorFailure("Dopri5: step budget exhausted");
            h = std::min({h, opts_.h_max, t1 - t});
            if (!(h > std::abs(t) * 1e-14 + 1e-300))
                throw IntegratorFailure("Dopri5: step size underflow");
            const double err = attempt_step(t, y, h);
            if (err <= 1.0) {
                // accepted: serve dense output inside (t, t+h]
                while (t_next_out <= t + h + 1e-12 * std::abs(t + h) &&
                       t_next_out <= t1) {
                    double yi[max_dim];
                    dense_eval((t_next_out - t) / h, h, yi);
                    if (!emit(observer, t_next_out, yi)) {
                        finish_step(y);
                        return t_next_out;
                    }
                    t_next_out += dt_out;
                }
                t += h;
                finish_step(y);
                h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            } else {
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            }
        }
        return t1;
    }

    template <typename Observer>
    double integrate_sampled(double* y, double t0, double t1, double dt_out,
                             Observer&& observer) {
        return integrate_sampled(y, t0, t1, dt_out,
                                 std::forward<Observer>(observer), t0);
    }

    /// Integrate from t0 to t1 without intermediate output.
    double integrate_to(double* y, double t0, double t1) {
        return integrate_sampled(y, t0, t1, 2 * (t1 - t0) + 1.0,
                                 [](double, const double*) { return true; });
    }

  private:
    template <typename Observer>
    static bool emit(Observer&& obs, double t, const double* y) {
        if constexpr (std::is_void_v<decltype(obs(t, y))>) {
            obs(t, y);
            return true;
        } else {
            return obs(t, y);
        }
    }

    // One trial step of size h from (t, y); returns the scaled error norm.
    // On success (err <= 1) the caller commits via finish_step().
    double attempt_step(double t, const double* y, double h) {
        using namespace detail;
        double tmp[max_dim];
        for (std::size_t i = 0; i < n_; ++i) tmp[i] = y[i] + h * a21 * k1_[i];
        rhs_(t + h / 5, tmp, k2_);
        for (std::size_t i = 0; i < n_; ++i)
            tmp[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        rhs_(t + 3 * h / 10, tmp, k3_);
        for (std::size_t i = 0; i < n_; ++i)
            tmp[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        rhs_(t + 4 * h / 5, tmp, k4_);
        for (std::size_t i = 0; i < n_; ++i)
            tmp[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] +
                                 a54 * k4_[i]);
        rhs_(t + 8 * h / 9, tmp, k5_);
        for (std::size_t i = 0; i < n_; ++i)
            tmp[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] +
                                 a64 * k4_[i] + a65 * k5_[i]);
        rhs_(t + h, tmp, k6_);
        for (std::size_t i = 0; i < n_; ++i)
            ynew_[i] = y[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] +
                                   b5 * k5_[i] + b6 * k6_[i]);
        rhs_(t + h, ynew_, k7_);

        double err = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] +
                                  e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
            const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y[i]),
                                                                 std::abs(ynew_[i]));
            err += (e / sc) * (e / sc);
        }
        prepare_dense(y, h);
        return std::sqrt(err / n_);
    }

    void prepare_dense(const double* y, double h) {
        using namespace detail;
        for (std::size_t i = 0; i < n_; ++i) {
            const double ydiff = ynew_[i] - y[i];
            const double bspl = h * k1_[i] - ydiff;
            rc1_[i] = y[i];
            rc2_[i] = ydiff;
            rc3_[i] = bspl;
            rc4_[i] = ydiff - h * k7_[i] - bspl;
            rc5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] +
                           d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
        }
    }

    void dense_eval(double theta, double /*h*/, double* out) const {
        const double th1 = 1.0 - theta;
        for (std::size_t i = 0; i < n_; ++i)
            out[i] = rc1_[i] +
                     theta * (rc2_[i] +
                              th1 * (rc3_[i] +
                                     theta * (rc4_[i] + th1 * rc5_[i])));
    }

    void finish_step(double* y) {
        for (std::size_t i = 0; i < n_; ++i) {
            y[i] = ynew_[i];
            k1_[i] = k7_[i];  // FSAL
        }
    }

    Rhs rhs_;
    std::size_t n_;
    OdeOptions opts_;
    double k1_[max_dim]{}, k2_[max_dim]{}, k3_[max_dim]{}, k4_[max_dim]{},
        k5_[max_dim]{}, k6_[max_dim]{}, k7_[max_dim]{}, ynew_[max_dim]{};
    double rc1_[max_dim]{}, rc2_[max_dim]{}, rc3_[max_dim]{}, rc4_[max_dim]{},
        rc5_[max_dim]{};
};

template <typename Rhs, typename Observer>
double integrate_sampled(Rhs&& rhs, double* y, std::size_t n, double t0,
                         double t1, double dt_out, Observer&& observer,
                         OdeOptions opts = {}) {
    Dopri5<Rhs&> solver(rhs, n, opts);
    return solver.integrate_sampled(y, t0, t1, dt_out, observer, t0);
}

template <typename Rhs>
void integrate_to(Rhs&& rhs, double* y, std::size_t n, double t0, double t1,
                  OdeOptions opts = {}) {
    Dopri5<Rhs&> solver(rhs, n, opts);
    solver.integrate_to(y, t0, t1);
}

} // namespace pds
