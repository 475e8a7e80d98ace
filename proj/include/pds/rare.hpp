#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pds/errors.hpp"
#include "pds/forcing.hpp"
#include "pds/histogram.hpp"
#include "pds/statlin.hpp"
#include "pds/systems.hpp"

namespace pds {

/// Gaussian law of the net velocity jump seen by the primary mass when an
/// impulse arrives: the prescribed jump plus the background base velocity.
struct EtaDistribution {
    double mean = 0.0;
    double variance = 0.0;

    double stddev() const { return std::sqrt(variance); }
    double pdf(double n) const;
    void validate() const;
};

/// Combines the impulse magnitude law with the background velocity of the
/// primary DOF taken from a converged linearization.
EtaDistribution eta_from(const ForcingModel& forcing,
                         const LinearizationSolution& lin);

struct RareOptions {
    std::size_t eta_nodes = 101;     // quadrature nodes over the jump law
    double eta_span = 4.0;           // grid half width, in stddev units
    double rho_c = 0.1;              // decay threshold for effective duration
    double dt_out = 0.05;            // sampling step of transient responses
    double rtol = 1e-8;              // integrator relative tolerance
    std::size_t bins_per_impulse = 201;
    std::size_t mixture_bins = 401;
    double horizon_periods = 200.0;  // hard cap, in primary natural periods
    double energy_cutoff = 1e-6;     // early stop at this fraction of E(0)
    std::vector<Quantity> quantities;  // restrict the set; empty means all

    void validate() const;
};

/// Effective duration of a decaying sampled signal: the last time at which
/// |z| still reaches rho_c times its peak. Throws NoDecay when that level
/// is still being crossed in the final 5 percent of the window.
double rare_duration(const std::vector<double>& samples, double dt,
                     double rho_c);

/// Free decay from a single velocity jump, sampled uniformly in time.
/// series is indexed like all_quantities(): dof * 3 + derivative.
struct ImpulseResponse {
    double dt = 0.0;
    std::vector<std::vector<double>> series;
};

ImpulseResponse simulate_impulse(const SystemModel& model, double n,
                                 ImpulsePattern pattern,
                                 const RareOptions& options);

/// Conditional response law of one quantity given that an impulse regime is
/// active, together with the duration and probability of that regime.
struct RareEventProfile {
    Quantity quantity;
    Density pdf;          // conditional density, integrates to 1
    double tau_e = 0.0;   // jump-law averaged effective duration
    double p_r = 0.0;     // probability mass of the rare regime
};

/// Profiles for every (dof, derivative) pair, from one sweep of transient
/// simulations over the jump-magnitude grid.
struct RareSet {
    std::vector<Quantity> quantities;
    std::vector<RareEventProfile> profiles;

    const RareEventProfile& of(Quantity q) const;
};

RareSet rare_pdf_simulated(const SystemModel& model,
                           const ForcingModel& forcing,
                           const EtaDistribution& eta,
                           const RareOptions& options = {});

/// Slowly varying stiffness and damping that a linear oscillator would need
/// to mimic the transient decay from a jump of size n, extracted from
/// mean-square envelopes of the primary displacement and velocity.
struct EffectiveMeasures {
    double k_eff = 0.0;
    double lambda_eff = 0.0;
    double tau = 0.0;  // duration window the envelopes were averaged over
};

EffectiveMeasures effective_measures(const SystemModel& model, double n,
                                     const RareOptions& options = {});

/// Rare-regime profile of a primary-DOF quantity built from the closed-form
/// decay of the effective linear oscillator instead of direct simulation.
/// quantity.dof must be 0.
RareEventProfile rare_pdf_effective(const SystemModel& model,
                                    const ForcingModel& forcing,
                                    const EtaDistribution& eta,
                                    Quantity quantity,
                                    const RareOptions& options = {});

} // namespace pds
