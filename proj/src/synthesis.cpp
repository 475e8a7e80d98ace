#include "pds/synthesis.hpp"

#include <algorithm>
#include <numbers>

namespace pds {

double GaussianLaw::pdf(double r) const {
    if (!(variance > 0.0))
        throw NegativeVariance("GaussianLaw: variance must be > 0");
    return std::exp(-r * r / (2.0 * variance)) /
           std::sqrt(2.0 * std::numbers::pi * variance);
}

double GaussianLaw::moment(unsigned order) const {
    if (order % 2 == 1) return 0.0;
    // sigma^k (k-1)!!
    double m = 1.0;
    for (unsigned j = 1; j < order; j += 2) m *= j * variance;
    return m;
}

GaussianLaw absolute_background(const LinearizationSolution& lin, Quantity q) {
    return {lin.absolute_variance(q.dof, q.deriv)};
}

double ResponsePdf::operator()(double r) const {
    return (1.0 - p_r) * background.pdf(r) + p_r * rare(r);
}

ResponsePdf synthesize(const LinearizationSolution& lin,
                       const RareEventProfile& rare, Quantity quantity,
                       Frame frame, const SynthesisOptions& options) {
    if (!(rare.quantity == quantity))
        throw GridMismatch("synthesize: rare profile is for another quantity");
    if (rare.p_r < 0.0 || rare.p_r >= 1.0)
        throw PrOutOfRange("synthesize: rare regime weight outside [0, 1)");
    if (options.grid_points < 3)
        throw ConfigError("synthesize: need at least 3 grid points");

    ResponsePdf out;
    out.quantity = quantity;
    out.frame = frame;
    out.p_r = rare.p_r;
    // In the impulse regime the base is quiescent, so the rare component is
    // the same in both frames; only the background Gaussian widens.
    out.rare = rare.pdf;
    const double s = lin.sigma[quantity.dof][quantity.deriv];
    out.background = frame == Frame::relative
                         ? GaussianLaw{s * s}
                         : absolute_background(lin, quantity);
    if (!(out.background.variance > 0.0))
        throw NegativeVariance("synthesize: background variance must be > 0");

    const double support =
        std::max(std::abs(out.rare.lo), std::abs(out.rare.hi));
    const double extent =
        std::max(options.background_span * out.background.stddev(),
                 options.rare_margin * support);
    if (!(extent > 0.0))
        throw GridMismatch("synthesize: degenerate value grid");

    const std::size_t n = options.grid_points;
    out.grid.resize(n);
    out.density.resize(n);
    out.background_component.resize(n);
    out.rare_component.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = -extent + 2.0 * extent * i / (n - 1);
        out.grid[i] = r;
        out.background_component[i] = (1.0 - out.p_r) * out.background.pdf(r);
        out.rare_component[i] = out.p_r * out.rare(r);
        out.density[i] = out.background_component[i] + out.rare_component[i];
    }
    return out;
}

double moment(const ResponsePdf& pdf, unsigned order) {
    return (1.0 - pdf.p_r) * pdf.background.moment(order) +
           pdf.p_r * pdf.rare.moment(order);
}

} // namespace pds
