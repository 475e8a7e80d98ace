#pragma once

#include <array>
#include <complex>
#include <cstddef>

#include "pds/spectra.hpp"
#include "pds/systems.hpp"

namespace pds {

using Complex = std::complex<double>;

/// Second-order closure moments of the attachment-coupled pair: the primary
/// DOF (x for the seat, y for the deck-seat) and the attachment v.
struct ClosureMoments {
    double sigma2_p = 0.0;  // primary displacement variance
    double sigma_pv = 0.0;  // primary/attachment covariance
    double sigma2_v = 0.0;  // attachment displacement variance

    void validate() const {
        if (sigma2_p < 0 || sigma2_v < 0)
            throw NegativeVariance("ClosureMoments: negative variance");
        if (sigma_pv * sigma_pv > sigma2_p * sigma2_v * (1.0 + 1e-9))
            throw NegativeVariance("ClosureMoments: Cauchy-Schwarz violated");
    }
};

/// Equivalent stiffness increment of the Gaussian (Isserlis) closure,
/// c_a * (3 s_p^2 - 6 s_pv + 3 s_v^2).
double closure_increment(const SystemModel& model, const ClosureMoments& m);

struct Operators2Dof {
    Complex A, B, C;
};
struct Operators3Dof {
    Complex A, B, C, D, E;
};

Operators2Dof transfer_operators_2dof(const SystemModel& model, double omega,
                                      const ClosureMoments& m);
Operators3Dof transfer_operators_3dof(const SystemModel& model, double omega,
                                      const ClosureMoments& m);

/// Base-motion-to-response transfer functions: Z_i(w) = H_i(w) * H(w) for
/// each relative displacement. Index matches the model's DOF ordering.
std::array<Complex, 3> response_transfers(const SystemModel& model,
                                          double omega,
                                          const ClosureMoments& m);

/// Cross-spectral values between the DOF displacements and the base motion.
/// S_zz[i] = |H_i|^2 S_hh, S_zh[i] = H_i S_hh.
struct SpectraSample {
    std::array<double, 3> S_zz{};
    std::array<Complex, 3> S_zh{};
    double S_pv = 0.0;  // real part of the primary/attachment cross-spectrum
};

SpectraSample response_spectra(const SystemModel& model,
                               const BackgroundSpectrum& spectrum, double omega,
                               const ClosureMoments& m);

/// Converged statistical-linearization solution: closure moments, background
/// standard deviation of every quantity, and covariances with the base.
struct LinearizationSolution {
    Topology topology = Topology::seat2dof;
    ClosureMoments moments;
    double kappa = 0.0;  // equivalent stiffness increment actually used

    // sigma[dof][deriv]: background std of the relative quantity
    // (deriv 0 = displacement, 1 = velocity, 2 = acceleration)
    std::array<std::array<double, 3>, 3> sigma{};
    // cov_base[dof][deriv]: covariance of z^(d) with h^(d)
    std::array<std::array<double, 3>, 3> cov_base{};
    SpectralMoments base{};       // sigma^2 of h, h', h''
    double sigma_zeta = 0.0;      // std of the attachment-relative displacement
    double residual = 0.0;        // relative fixed-point residual
    std::size_t iterations = 0;

    /// Variance of the absolute quantity z^(d) + h^(d).
    double absolute_variance(std::size_t dof, std::size_t deriv) const {
        const double base_var = deriv == 0   ? base.sigma2_h
                                : deriv == 1 ? base.sigma2_hdot
                                             : base.sigma2_hddot;
        const double s = sigma[dof][deriv];
        const double var = s * s + base_var + 2.0 * cov_base[dof][deriv];
        if (var < 0)
            throw NegativeVariance("absolute_variance: inconsistent covariances");
        return var;
    }
};

struct StatlinOptions {
    double damping = 0.5;        // Picard damping factor
    double tol = 1e-8;           // relative residual bound
    std::size_t max_iter = 200;
};

LinearizationSolution solve_fixed_point(const SystemModel& model,
                                        const BackgroundSpectrum& spectrum,
                                        const FrequencyGrid& grid,
                                        const StatlinOptions& opts = {});

inline LinearizationSolution solve_fixed_point(
    const SystemModel& model, const BackgroundSpectrum& spectrum,
    const StatlinOptions& opts = {}) {
    return solve_fixed_point(model, spectrum, spectrum.default_grid(), opts);
}

} // namespace pds
