#include "pds/optimize.hpp"

#include <cmath>
#include <limits>

#include "pds/statlin.hpp"

namespace pds {
namespace {

SystemModel with_attachment(const SystemModel& base, AttachmentFamily family,
                            double lambda_a, double coupling) {
    SystemModel m = base;
    m.lambda_a = lambda_a;
    m.spring = family == AttachmentFamily::tmd ? SpringLaw::linear(coupling)
                                               : SpringLaw::cubic(0.0, coupling);
    return m;
}

struct SurfaceScan {
    std::vector<double> surface;
    std::size_t arg1 = 0, arg2 = 0;
    double best = std::numeric_limits<double>::quiet_NaN();
};

template <typename Eval>
SurfaceScan scan_grid(const std::vector<double>& a1,
                      const std::vector<double>& a2, Eval&& eval) {
    SurfaceScan s;
    s.surface.assign(a1.size() * a2.size(), 0.0);
    bool found = false;
    for (std::size_t i = 0; i < a1.size(); ++i)
        for (std::size_t j = 0; j < a2.size(); ++j) {
            double v;
            try {
                v = eval(a1[i], a2[j]);
            } catch (const Error&) {
                v = std::numeric_limits<double>::quiet_NaN();
            }
            s.surface[i * a2.size() + j] = v;
            // strict comparison in scan order breaks ties toward the
            // smaller first axis value, then the smaller second
            if (std::isfinite(v) && (!found || v < s.best)) {
                found = true;
                s.best = v;
                s.arg1 = i;
                s.arg2 = j;
            }
        }
    if (!found) throw AllCellsFailed("grid scan: every cell failed");
    return s;
}

} // namespace

std::vector<double> AxisSpec::values() const {
    validate();
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double f = double(i) / (count - 1);
        v[i] = log_spaced ? min * std::pow(max / min, f)
                          : min + f * (max - min);
    }
    return v;
}

void AxisSpec::validate() const {
    if (count < 2 || !(max > min))
        throw ConfigError("AxisSpec: need count >= 2 and max > min");
    if (log_spaced && !(min > 0))
        throw ConfigError("AxisSpec: log spacing needs min > 0");
}

SystemModel baseline_model(const SystemModel& model) {
    SystemModel b;
    switch (model.topology) {
        case Topology::sdof:
            b = model;
            break;
        case Topology::seat2dof:
            b.topology = Topology::sdof;
            b.m_s = model.m_s;
            b.lambda_s = model.lambda_s;
            b.k_s = model.k_s;
            break;
        case Topology::deckseat3dof:
            // the seat stays, linearly mounted on the bare deck
            b.topology = Topology::seat2dof;
            b.m_s = model.m_h;
            b.lambda_s = model.lambda_h;
            b.k_s = model.k_h;
            b.m_a = model.m_s;
            b.lambda_a = model.lambda_s;
            b.spring = SpringLaw::linear(model.k_s);
            break;
    }
    b.m_a = model.topology == Topology::seat2dof ? 0.0 : b.m_a;
    b.validate();
    return b;
}

double objective(const SystemModel& model, const ForcingModel& forcing,
                 const DesignObjective& obj, const RareOptions& rare) {
    const auto lin = solve_fixed_point(model, forcing.spectrum);
    const auto eta = eta_from(forcing, lin);
    RareOptions ro = rare;
    ro.quantities = {obj.quantity};
    const auto set = rare_pdf_simulated(model, forcing, eta, ro);
    const auto pdf = synthesize(lin, set.profiles[0], obj.quantity, obj.frame);
    return moment(pdf, obj.order);
}

OptimizationResult grid_search(const SystemModel& base,
                               const ForcingModel& forcing,
                               AttachmentFamily family,
                               const DesignObjective& obj,
                               const GridSearchOptions& options) {
    if (!(base.m_a > 0))
        throw ConfigError("grid_search: base model needs an attachment mass");
    const auto a1 = options.lambda.values();
    const auto a2 = options.coupling.values();
    const double baseline =
        objective(baseline_model(base), forcing, obj, options.rare);

    auto scan = scan_grid(a1, a2, [&](double l, double c) {
        return objective(with_attachment(base, family, l, c), forcing, obj,
                         options.rare);
    });

    OptimizationResult r;
    r.axis1 = a1;
    r.axis2 = a2;
    r.surface = std::move(scan.surface);
    r.arg1 = scan.arg1;
    r.arg2 = scan.arg2;
    r.best_objective = scan.best;
    r.baseline = baseline;
    r.gamma = scan.best / baseline;

    if (options.refine) {
        auto zoom = [](const std::vector<double>& axis, std::size_t i,
                       bool log_spaced) {
            AxisSpec a;
            a.min = axis[i > 0 ? i - 1 : 0];
            a.max = axis[std::min(i + 1, axis.size() - 1)];
            a.count = axis.size();
            a.log_spaced = log_spaced;
            return a;
        };
        GridSearchOptions fine = options;
        fine.refine = false;
        fine.lambda = zoom(a1, scan.arg1, options.lambda.log_spaced);
        fine.coupling = zoom(a2, scan.arg2, options.coupling.log_spaced);
        auto refined = grid_search(base, forcing, family, obj, fine);
        if (refined.best_objective < r.best_objective) return refined;
    }
    return r;
}

OptimizationResult design_piecewise(const SystemModel& tuned_model,
                                    const ForcingModel& forcing,
                                    const DesignObjective& obj,
                                    const PiecewiseDesignOptions& options) {
    if (tuned_model.spring.kind != SpringLaw::Kind::linear)
        throw ConfigError("design_piecewise: start from a linear design");
    const double k_o = tuned_model.spring.k;
    const auto lin = solve_fixed_point(tuned_model, forcing.spectrum);
    const double knee = 4.0 * lin.sigma_zeta;
    if (!(knee > 0))
        throw ConfigError("design_piecewise: degenerate background band");

    const auto a1 = options.alpha_pos.values();
    const auto a2 = options.alpha_neg.values();
    const double baseline = objective(tuned_model, forcing, obj, options.rare);

    auto scan = scan_grid(a1, a2, [&](double ap, double an) {
        SystemModel m = tuned_model;
        m.spring = SpringLaw::piecewise(k_o, ap, an, knee);
        return objective(m, forcing, obj, options.rare);
    });

    OptimizationResult r;
    r.axis1 = a1;
    r.axis2 = a2;
    r.surface = std::move(scan.surface);
    r.arg1 = scan.arg1;
    r.arg2 = scan.arg2;
    r.best_objective = scan.best;
    r.baseline = baseline;
    r.gamma = scan.best / baseline;
    return r;
}

} // namespace pds
