#pragma once

#include <cmath>
#include <vector>

#include "pds/errors.hpp"
#include "pds/histogram.hpp"
#include "pds/rare.hpp"
#include "pds/statlin.hpp"

namespace pds {

/// Whether a response quantity is measured relative to the base or in the
/// fixed frame (response plus base motion).
enum class Frame { relative, absolute };

/// Zero-mean Gaussian law.
struct GaussianLaw {
    double variance = 0.0;

    double stddev() const { return std::sqrt(variance); }
    double pdf(double r) const;
    /// Central moment of the given order (0 for odd orders).
    double moment(unsigned order) const;
};

/// Gaussian law of the absolute background quantity z + h, built from the
/// response variance, the base variance, and their cross-covariance.
GaussianLaw absolute_background(const LinearizationSolution& lin, Quantity q);

/// Two-regime response law: Gaussian background with weight 1 - p_r plus the
/// rare-event density with weight p_r, sampled on a symmetric point grid.
struct ResponsePdf {
    Quantity quantity;
    Frame frame = Frame::relative;
    double p_r = 0.0;
    GaussianLaw background;
    Density rare;  // conditional rare density, kept for exact moments

    std::vector<double> grid;
    std::vector<double> density;
    std::vector<double> background_component;  // already weighted by 1 - p_r
    std::vector<double> rare_component;        // already weighted by p_r

    /// Mixture density at r, evaluated from the components, not the grid.
    double operator()(double r) const;
};

struct SynthesisOptions {
    std::size_t grid_points = 2001;
    double background_span = 8.0;  // half extent in background sigmas
    double rare_margin = 1.1;      // half extent as multiple of rare support
};

ResponsePdf synthesize(const LinearizationSolution& lin,
                       const RareEventProfile& rare, Quantity quantity,
                       Frame frame, const SynthesisOptions& options = {});

/// Moment of order k: analytic Gaussian part plus the numeric rare part, so
/// the tails are not truncated by the output grid.
double moment(const ResponsePdf& pdf, unsigned order);

} // namespace pds
