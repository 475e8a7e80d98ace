#pragma once

#include <cstddef>
#include <vector>

#include "pds/forcing.hpp"
#include "pds/rare.hpp"
#include "pds/synthesis.hpp"
#include "pds/systems.hpp"

namespace pds {

/// What the attachment couples through: a linear spring (tuned mass damper)
/// or an essentially nonlinear cubic spring (nonlinear energy sink).
enum class AttachmentFamily { tmd, cubic_nes };

/// Which response moment a design is scored on.
struct DesignObjective {
    Quantity quantity{0, 0};
    Frame frame = Frame::absolute;
    unsigned order = 4;
};

struct AxisSpec {
    double min = 0.0;
    double max = 1.0;
    std::size_t count = 41;
    bool log_spaced = false;

    std::vector<double> values() const;
    void validate() const;
};

/// Dense objective surface over a two-parameter design grid. Cells whose
/// pipeline failed hold NaN; the argmin skips them.
struct OptimizationResult {
    std::vector<double> axis1, axis2;
    std::vector<double> surface;  // row-major, axis1 outer
    std::size_t arg1 = 0, arg2 = 0;
    double best_objective = 0.0;
    double baseline = 0.0;  // objective of the reference design
    double gamma = 0.0;     // best_objective / baseline

    double at(std::size_t i, std::size_t j) const {
        return surface[i * axis2.size() + j];
    }
    double best1() const { return axis1[arg1]; }
    double best2() const { return axis2[arg2]; }
};

/// Model with the attachment stripped: the seat problem reduces to its bare
/// oscillator, the deck-seat problem to a deck plus linearly mounted seat.
SystemModel baseline_model(const SystemModel& model);

/// Full decomposition-synthesis moment of one quantity.
double objective(const SystemModel& model, const ForcingModel& forcing,
                 const DesignObjective& obj, const RareOptions& rare = {});

struct GridSearchOptions {
    AxisSpec lambda{1e-3, 1.0, 41, true};
    AxisSpec coupling{1e-3, 10.0, 41, true};  // k_a (tmd) or c_a (cubic_nes)
    bool refine = false;  // one 2x zoom pass around the coarse argmin
    RareOptions rare = optimization_rare_defaults();

    /// Coarser jump-magnitude grid: surface scans tolerate ~1% moment noise.
    static RareOptions optimization_rare_defaults() {
        RareOptions r;
        r.eta_nodes = 41;
        return r;
    }
};

/// Scans (lambda_a, k_a or c_a); ties break toward smaller lambda_a, then
/// smaller coupling. The gamma denominator is the attachment-free baseline.
OptimizationResult grid_search(const SystemModel& base,
                               const ForcingModel& forcing,
                               AttachmentFamily family,
                               const DesignObjective& obj,
                               const GridSearchOptions& options = {});

struct PiecewiseDesignOptions {
    AxisSpec alpha_pos{0.0, 5.0, 51, false};
    AxisSpec alpha_neg{0.0, 5.0, 51, false};
    RareOptions rare = GridSearchOptions::optimization_rare_defaults();
};

/// Scans the outer slopes of a piecewise-linear attachment spring built on
/// top of a tuned linear design: center slope k_o from the given model's
/// spring, knee at 4 sigma_zeta of its background response. The gamma
/// denominator is the tuned linear design itself, so gamma here is the
/// paper-style additional suppression factor.
OptimizationResult design_piecewise(const SystemModel& tuned_model,
                                    const ForcingModel& forcing,
                                    const DesignObjective& obj,
                                    const PiecewiseDesignOptions& options = {});

} // namespace pds
