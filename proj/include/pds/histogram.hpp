#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pds/errors.hpp"

namespace pds {

/// Piecewise-constant density on uniform bins.
struct Density {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> values;  // density per bin

    std::size_t bins() const { return values.size(); }
    double bin_width() const { return (hi - lo) / values.size(); }
    double center(std::size_t i) const {
        return lo + (i + 0.5) * bin_width();
    }

    /// Density at x (0 outside the support).
    double operator()(double x) const {
        if (x < lo || x >= hi || values.empty()) return 0.0;
        const auto i = static_cast<std::size_t>((x - lo) / bin_width());
        return values[i < values.size() ? i : values.size() - 1];
    }

    double integral() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * bin_width();
    }

    void normalize() {
        const double s = integral();
        if (s > 0.0)
            for (double& v : values) v /= s;
    }

    /// Probability mass on [a, b], exact for the piecewise-constant form.
    double mass(double a, double b) const {
        if (values.empty() || !(b > a)) return 0.0;
        const double w = bin_width();
        auto i0 = static_cast<std::ptrdiff_t>(std::floor((a - lo) / w));
        auto i1 = static_cast<std::ptrdiff_t>(std::floor((b - lo) / w));
        i0 = std::max<std::ptrdiff_t>(i0, 0);
        i1 = std::min<std::ptrdiff_t>(i1, values.size() - 1);
        double s = 0.0;
        for (std::ptrdiff_t i = i0; i <= i1; ++i) {
            const double l = std::max(a, lo + i * w);
            const double r = std::min(b, lo + (i + 1) * w);
            if (r > l) s += values[static_cast<std::size_t>(i)] * (r - l);
        }
        return s;
    }

    /// Numeric moment of order k over the support.
    double moment(unsigned k) const {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            s += std::pow(center(i), static_cast<int>(k)) * values[i];
        return s * bin_width();
    }
};

/// Normalized histogram density of the samples on [lo, hi].
/// Out-of-range samples are clamped into the end bins.
inline Density histogram_density(const std::vector<double>& samples,
                                 std::size_t nbins, double lo, double hi) {
    if (!(hi > lo) || nbins == 0)
        throw GridMismatch("histogram_density: empty range");
    Density d;
    d.lo = lo;
    d.hi = hi;
    d.values.assign(nbins, 0.0);
    const double w = d.bin_width();
    for (double x : samples) {
        auto i = static_cast<std::ptrdiff_t>((x - lo) / w);
        if (i < 0) i = 0;
        if (i >= static_cast<std::ptrdiff_t>(nbins)) i = nbins - 1;
        d.values[static_cast<std::size_t>(i)] += 1.0;
    }
    const double norm = static_cast<double>(samples.size()) * w;
    if (norm > 0.0)
        for (double& v : d.values) v /= norm;
    return d;
}

/// Total variation distance between two densities on a common probe grid.
inline double total_variation(const Density& a, const Density& b,
                              std::size_t probes = 4096) {
    const double lo = std::min(a.lo, b.lo);
    const double hi = std::max(a.hi, b.hi);
    const double w = (hi - lo) / probes;
    double tv = 0.0;
    for (std::size_t i = 0; i < probes; ++i) {
        const double x = lo + (i + 0.5) * w;
        tv += std::abs(a(x) - b(x)) * w;
    }
    return 0.5 * tv;
}

} // namespace pds
