#pragma once

#include <cmath>

#include "pds/spectra.hpp"
#include "pds/systems.hpp"

namespace pds {

/// Combined broadband + rare-impulse excitation model.
///
/// The base acceleration is the background h'' plus a Poisson train of
/// velocity impulses with mean inter-arrival time T_alpha and Gaussian
/// magnitudes N(mu_alpha, sigma_alpha^2).
struct ForcingModel {
    BackgroundSpectrum spectrum;
    double T_alpha = 5000.0;
    double mu_alpha = 0.1;
    double sigma_alpha = 0.0141;
    ImpulsePattern pattern = ImpulsePattern::primary_only;

    double rate() const { return 1.0 / T_alpha; }

    void validate() const {
        spectrum.validate();
        if (!(T_alpha > 0)) throw ConfigError("ForcingModel: T_alpha must be > 0");
        if (!(sigma_alpha >= 0))
            throw ConfigError("ForcingModel: sigma_alpha must be >= 0");
    }

    /// Construct from the severity ratio beta: mu_alpha = beta * sigma_hdot,
    /// sigma_alpha = sigma_hdot.
    static ForcingModel from_beta(const BackgroundSpectrum& spectrum,
                                  double T_alpha, double beta,
                                  ImpulsePattern pattern) {
        if (!(beta > 1.0))
            throw ConfigError("ForcingModel: beta must exceed 1");
        const double sigma_hdot =
            std::sqrt(moment_integrals(spectrum).sigma2_hdot);
        ForcingModel f;
        f.spectrum = spectrum;
        f.T_alpha = T_alpha;
        f.mu_alpha = beta * sigma_hdot;
        f.sigma_alpha = sigma_hdot;
        f.pattern = pattern;
        f.validate();
        return f;
    }
};

} // namespace pds
