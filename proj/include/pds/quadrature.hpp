#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pds/errors.hpp"

namespace pds {

/// Frequency window and tolerance for the spectral moment integrals.
struct FrequencyGrid {
    double omega_min = 1e-3;
    double omega_max = 20.0;
    double tolerance = 1e-8;   // absolute + relative
    std::size_t max_intervals = 4000;

    void validate() const {
        if (!(omega_min > 0.0) || !(omega_min < omega_max))
            throw ConfigError("FrequencyGrid: need 0 < omega_min < omega_max");
        if (!(tolerance > 0.0))
            throw ConfigError("FrequencyGrid: tolerance must be positive");
    }
};

namespace detail {

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
inline constexpr double kron_x[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kron_w[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double gauss_w[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct GK15Result {
    double value;
    double error;
};

template <typename F>
GK15Result gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double resk = kron_w[7] * f(c);
    double resg = gauss_w[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double fsum = f(c - h * kron_x[i]) + f(c + h * kron_x[i]);
        resk += kron_w[i] * fsum;
        if (i % 2 == 1) resg += gauss_w[i / 2] * fsum;
    }
    return {resk * h, std::abs((resk - resg) * h)};
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b].
///
/// Bisects the interval with the worst error estimate until the summed
/// error estimate drops below tol * max(1, |result|). Throws NonConverged
/// when the interval budget runs out first.
template <typename F>
double integrate(const F& f, double a, double b, double tol = 1e-8,
                 std::size_t max_intervals = 4000) {
    if (a == b) return 0.0;
    struct Interval {
        double a, b, value, error;
    };
    std::vector<Interval> stack;
    stack.reserve(64);
    auto r0 = detail::gk15(f, a, b);
    stack.push_back({a, b, r0.value, r0.error});

    for (std::size_t iter = 0; iter < max_intervals; ++iter) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < stack.size(); ++i) {
            total += stack[i].value;
            err += stack[i].error;
            if (stack[i].error > stack[worst].error) worst = i;
        }
        if (err <= tol * std::max(1.0, std::abs(total))) return total;
        Interval w = stack[worst];
        const double m = 0.5 * (w.a + w.b);
        if (m == w.a || m == w.b)
            throw NonConverged("integrate: interval underflow");
        auto rl = detail::gk15(f, w.a, m);
        auto rr = detail::gk15(f, m, w.b);
        stack[worst] = {w.a, m, rl.value, rl.error};
        stack.push_back({m, w.b, rr.value, rr.error});
    }
    throw NonConverged("integrate: interval budget exhausted");
}

/// Same as integrate() but pre-split at the given interior breakpoints
/// (used to isolate the support edge of a shifted spectrum).
template <typename F>
double integrate_split(const F& f, double a, double b,
                       const std::vector<double>& breaks, double tol = 1e-8,
                       std::size_t max_intervals = 4000) {
    double lo = a, total = 0.0;
    for (double s : breaks) {
        if (s > a && s < b) {
            total += integrate(f, lo, s, tol, max_intervals);
            lo = s;
        }
    }
    total += integrate(f, lo, b, tol, max_intervals);
    return total;
}

} // namespace pds
