#pragma once

#include <cmath>
#include <functional>

#include "pds/errors.hpp"
#include "pds/quadrature.hpp"

namespace pds {

/// Pierson-Moskowitz base-motion spectrum, optionally shifted in frequency:
/// S(w) = q * (w - shift)^-5 * exp(-(w - shift)^-4) for w > shift, else 0.
struct BackgroundSpectrum {
    double q = 1.582e-4;  // magnitude scale
    double shift = 0.0;   // frequency offset, >= 0

    void validate() const {
        if (!(q > 0.0)) throw ConfigError("BackgroundSpectrum: q must be > 0");
        if (shift < 0.0) throw ConfigError("BackgroundSpectrum: shift must be >= 0");
    }

    double density(double omega) const {
        const double w = omega - shift;
        if (w <= 0.0) return 0.0;
        const double inv = 1.0 / w;
        const double inv2 = inv * inv;
        const double inv4 = inv2 * inv2;
        return q * inv4 * inv * std::exp(-inv4);
    }

    /// Default quadrature window for this spectrum. The PM tail decays as
    /// w^-5 so everything beyond shift + 20 is negligible at the q scales
    /// of interest.
    FrequencyGrid default_grid() const {
        FrequencyGrid g;
        g.omega_min = shift + 1e-3;
        g.omega_max = shift + 20.0;
        return g;
    }
};

/// Displacement / velocity / acceleration variances of the base motion.
struct SpectralMoments {
    double sigma2_h;     // displacement variance
    double sigma2_hdot;  // velocity variance (w^2 weight)
    double sigma2_hddot; // acceleration variance (w^4 weight)
};

/// Integrate a real spectral density over the grid window. Checks that the
/// window brackets the effective support before integrating.
double integrate_spectrum(const std::function<double(double)>& f,
                          const FrequencyGrid& grid);

/// Variances of h, h', h'' for the background spectrum.
SpectralMoments moment_integrals(const BackgroundSpectrum& spec,
                                 const FrequencyGrid& grid);

inline SpectralMoments moment_integrals(const BackgroundSpectrum& spec) {
    return moment_integrals(spec, spec.default_grid());
}

} // namespace pds
