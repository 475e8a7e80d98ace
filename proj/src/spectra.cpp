#include "pds/spectra.hpp"

#include <algorithm>

namespace pds {

double integrate_spectrum(const std::function<double(double)>& f,
                          const FrequencyGrid& grid) {
    grid.validate();
    return integrate(f, grid.omega_min, grid.omega_max, grid.tolerance,
                     grid.max_intervals);
}

SpectralMoments moment_integrals(const BackgroundSpectrum& spec,
                                 const FrequencyGrid& grid) {
    spec.validate();
    grid.validate();

    // The window must bracket the effective support of the density itself;
    // the w^4-weighted acceleration integrand is truncated on purpose.
    double peak = 0.0;
    const int probes = 256;
    for (int i = 0; i <= probes; ++i) {
        const double w =
            grid.omega_min + (grid.omega_max - grid.omega_min) * i / probes;
        peak = std::max(peak, spec.density(w));
    }
    const double edge =
        std::max(spec.density(grid.omega_min), spec.density(grid.omega_max));
    if (!(peak > 0.0) || edge > 1e-5 * peak)
        throw SupportNotBracketed(
            "moment_integrals: window does not bracket the spectrum support");

    SpectralMoments m{};
    m.sigma2_h = integrate_spectrum(
        [&](double w) { return spec.density(w); }, grid);
    m.sigma2_hdot = integrate_spectrum(
        [&](double w) { return w * w * spec.density(w); }, grid);
    m.sigma2_hddot = integrate_spectrum(
        [&](double w) { return w * w * w * w * spec.density(w); }, grid);
    return m;
}

} // namespace pds
