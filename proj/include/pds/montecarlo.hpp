#pragma once

#include <cstdint>
#include <vector>

#include "pds/forcing.hpp"
#include "pds/histogram.hpp"
#include "pds/systems.hpp"

namespace pds {

struct ImpulseEvent {
    double time = 0.0;
    double magnitude = 0.0;
};

/// One realization of the combined excitation: tabulated background base
/// motion on a uniform grid plus a train of velocity impulses.
struct ExcitationRealization {
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<float> h, hdot, hddot;
    std::vector<ImpulseEvent> impulses;

    double duration() const {
        return h.empty() ? 0.0 : (h.size() - 1) * dt;
    }
    /// Base motion derivative (0, 1, 2) at time t, linearly interpolated.
    double base(std::size_t deriv, double t) const;
    void validate() const;
};

/// Stationary Gaussian background built as a superposition of cosines with
/// spectrum-matched amplitudes and pseudo-random phases keyed by the seed.
/// The returned grid is a power of two of at least T / dt samples.
ExcitationRealization generate_background(const BackgroundSpectrum& spectrum,
                                          double T, double dt,
                                          std::uint64_t seed,
                                          std::size_t frequency_bins = 2000);

/// Poisson train on (0, T]: exponential inter-arrivals with mean T_alpha,
/// Gaussian magnitudes.
std::vector<ImpulseEvent> generate_impulse_train(const ForcingModel& forcing,
                                                 double T, std::uint64_t seed);

struct SimulationOptions {
    double dt_out = 0.1;
    double rtol = 1e-6;
    double atol = 1e-12;
};

/// Uniformly sampled response of every quantity, in both frames.
struct ResponseSeries {
    double dt_out = 0.0;
    std::vector<Quantity> quantities;
    std::vector<std::vector<double>> relative;  // [quantity][sample]
    std::vector<std::vector<double>> absolute;
};

/// Integrates the model through one realization, restarting at each impulse
/// with the pattern-selected velocity jump.
ResponseSeries simulate_realization(const SystemModel& model,
                                    const ExcitationRealization& realization,
                                    ImpulsePattern pattern,
                                    const SimulationOptions& options = {});

/// Count histogram on a fixed range; out-of-range samples land in the end
/// bins so totals are preserved.
struct McHistogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    void add(double x);
    Density density() const;
    /// Coarser histogram trimmed to the occupied extent. bins must divide
    /// into the current bin count evenly after trimming; the extent is
    /// rounded outward to whole source bins.
    McHistogram rebinned(std::size_t bins) const;
};

struct MonteCarloOptions {
    std::size_t realizations = 10;
    std::size_t impulses_each = 100;  // 0 disables the impulse train
    double dt = 0.015;                // background table step
    std::size_t frequency_bins = 2000;
    double min_duration = 0.0;        // floor on the post-trim length
    std::size_t provisional_bins = 16384;
    SimulationOptions sim;
};

/// Pooled transient-trimmed response statistics over independent
/// realizations. Identical seeds give identical histograms.
struct McEnsemble {
    std::vector<Quantity> quantities;
    std::vector<McHistogram> relative, absolute;
    std::vector<double> variance_rel, variance_abs;  // pooled second moments
    double trim = 0.0;      // discarded leading time per realization
    double duration = 0.0;  // total length of each realization

    const McHistogram& rel_of(Quantity q) const;
    const McHistogram& abs_of(Quantity q) const;
};

McEnsemble ensemble_pdf(const SystemModel& model, const ForcingModel& forcing,
                        std::uint64_t seed,
                        const MonteCarloOptions& options = {});

} // namespace pds
