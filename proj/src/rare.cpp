#include "pds/rare.hpp"

#include <algorithm>
#include <cmath>
using std::isnan;  // boost/math/interpolators expects an unqualified isnan
#include <boost/math/interpolators/pchip.hpp>
#include <complex>
#include <numbers>

#include "pds/ode.hpp"

namespace pds {
namespace {

constexpr double kPi = std::numbers::pi;

struct EtaGrid {
    std::vector<double> nodes;
    std::vector<double> weights;  // sum to 1
};

EtaGrid eta_grid(const EtaDistribution& eta, const RareOptions& opt) {
    const double s = eta.stddev();
    const double lo = eta.mean - opt.eta_span * s;
    const double hi = eta.mean + opt.eta_span * s;
    const std::size_t m = opt.eta_nodes;
    EtaGrid g;
    g.nodes.resize(m);
    g.weights.resize(m);
    if (m == 1) {
        g.nodes[0] = eta.mean;
        g.weights[0] = 1.0;
        return g;
    }
    const double dn = (hi - lo) / (m - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        g.nodes[i] = lo + i * dn;
        const double c = (i == 0 || i + 1 == m) ? 0.5 : 1.0;
        g.weights[i] = c * dn * eta.pdf(g.nodes[i]);
        sum += g.weights[i];
    }
    for (double& w : g.weights) w /= sum;
    return g;
}

// Conditional histogram of one decaying trace over its effective duration.
struct NodeHistogram {
    Density pdf;
    double tau = 0.0;
};

NodeHistogram node_histogram(const std::vector<double>& z, double dt,
                             const RareOptions& opt) {
    NodeHistogram out;
    out.tau = rare_duration(z, dt, opt.rho_c);
    const auto count =
        std::min(z.size(), static_cast<std::size_t>(out.tau / dt) + 1);
    double zmax = 0.0;
    for (std::size_t i = 0; i < count; ++i) zmax = std::max(zmax, std::abs(z[i]));
    if (zmax <= 0.0) zmax = 1e-12;
    std::vector<double> window(z.begin(), z.begin() + count);
    out.pdf = histogram_density(window, opt.bins_per_impulse, -zmax, zmax);
    return out;
}

// Probability mixture of per-node conditional histograms on a common grid.
// Each node is additionally weighted by its own effective duration: a state
// with a longer transient occupies a correspondingly larger share of the
// total rare-regime time, so the time-conditional density is
// sum_k w_k tau_k hist_k / sum_k w_k tau_k.
Density mix_histograms(const std::vector<NodeHistogram>& nodes,
                       const std::vector<double>& weights,
                       std::size_t bins) {
    double zmax = 0.0;
    for (const auto& n : nodes)
        zmax = std::max(zmax, std::max(std::abs(n.pdf.lo), std::abs(n.pdf.hi)));
    Density d;
    d.lo = -zmax;
    d.hi = zmax;
    d.values.assign(bins, 0.0);
    const double w = d.bin_width();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        for (std::size_t j = 0; j < bins; ++j) {
            const double a = d.lo + j * w;
            d.values[j] +=
                weights[k] * nodes[k].tau * nodes[k].pdf.mass(a, a + w) / w;
        }
    }
    d.normalize();
    return d;
}

double horizon(const SystemModel& model, const RareOptions& opt) {
    const double wn =
        std::sqrt(model.primary_stiffness() / model.primary_mass());
    return opt.horizon_periods * 2.0 * kPi / wn;
}

// Mean-square envelope through the local maxima of z^2. include_origin adds
// (0, z(0)^2) as a boundary peak, which is exact for the velocity trace.
std::vector<double> envelope_ms(const std::vector<double>& z, double dt,
                                bool include_origin) {
    std::vector<double> tp, vp;
    if (include_origin) {
        tp.push_back(0.0);
        vp.push_back(z[0] * z[0]);
    }
    for (std::size_t i = 1; i + 1 < z.size(); ++i) {
        const double a = z[i - 1] * z[i - 1];
        const double b = z[i] * z[i];
        const double c = z[i + 1] * z[i + 1];
        if (b >= a && b > c && (tp.empty() || i * dt > tp.back())) {
            tp.push_back(i * dt);
            vp.push_back(b);
        }
    }
    if (tp.size() < 4) throw NotOscillatory("envelope_ms: too few peaks");
    // The envelope halves the peak value of a narrowband squared signal.
    for (double& v : vp) v *= 0.5;
    auto t2 = tp;
    auto v2 = vp;
    boost::math::interpolators::pchip<std::vector<double>> env(std::move(t2),
                                                               std::move(v2));
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double t = i * dt;
        if (t <= tp.front())
            out[i] = vp.front();
        else if (t >= tp.back())
            out[i] = vp.back();
        else
            out[i] = std::max(0.0, env(t));
    }
    return out;
}

double trapezoid(const std::vector<double>& y, double dt, std::size_t count) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < count; ++i) s += 0.5 * (y[i] + y[i + 1]);
    return s * dt;
}

// Closed-form free decay of a linear oscillator after a unit-mass velocity
// jump n, valid in both damping regimes through complex arithmetic.
std::vector<double> linear_decay(double m, double k, double lambda, double n,
                                 std::size_t deriv, double dt,
                                 std::size_t count) {
    using C = std::complex<double>;
    const double wn = std::sqrt(k / m);
    const double zeta = lambda / (2.0 * m * wn);
    const C wo = wn * std::sqrt(C(zeta * zeta - 1.0, 0.0));
    const C s1 = -zeta * wn + wo;
    const C s2 = -zeta * wn - wo;
    std::vector<double> z(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = i * dt;
        const C a = std::pow(s1, static_cast<double>(deriv)) * std::exp(s1 * t);
        const C b = std::pow(s2, static_cast<double>(deriv)) * std::exp(s2 * t);
        z[i] = (n / (2.0 * wo) * (a - b)).real();
    }
    return z;
}

} // namespace

double EtaDistribution::pdf(double n) const {
    const double s2 = variance;
    return std::exp(-(n - mean) * (n - mean) / (2.0 * s2)) /
           std::sqrt(2.0 * kPi * s2);
}

void EtaDistribution::validate() const {
    if (!(variance > 0.0))
        throw ConfigError("EtaDistribution: variance must be > 0");
}

EtaDistribution eta_from(const ForcingModel& forcing,
                         const LinearizationSolution& lin) {
    EtaDistribution eta;
    eta.mean = forcing.mu_alpha;
    const double sb = lin.sigma[0][1];
    eta.variance = sb * sb + forcing.sigma_alpha * forcing.sigma_alpha;
    eta.validate();
    return eta;
}

void RareOptions::validate() const {
    if (eta_nodes < 1 || !(eta_span > 0))
        throw ConfigError("RareOptions: bad eta grid");
    if (!(rho_c > 0 && rho_c < 1))
        throw ConfigError("RareOptions: rho_c must be in (0, 1)");
    if (!(dt_out > 0) || !(horizon_periods > 0))
        throw ConfigError("RareOptions: bad time grid");
    if (bins_per_impulse < 3 || mixture_bins < 3)
        throw ConfigError("RareOptions: too few bins");
}

double rare_duration(const std::vector<double>& samples, double dt,
                     double rho_c) {
    if (samples.empty()) return 0.0;
    double peak = 0.0;
    for (double s : samples) peak = std::max(peak, std::abs(s));
    if (peak <= 0.0) return 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (std::abs(samples[i]) >= rho_c * peak) last = i;
    if (samples.size() > 1 &&
        last >= static_cast<std::size_t>(0.95 * (samples.size() - 1)))
        throw NoDecay("rare_duration: signal has not decayed in the window");
    return last * dt;
}

ImpulseResponse simulate_impulse(const SystemModel& model, double n,
                                 ImpulsePattern pattern,
                                 const RareOptions& options) {
    model.validate();
    options.validate();
    const std::size_t nq = 3 * model.n_dof();
    ImpulseResponse out;
    out.dt = options.dt_out;
    out.series.resize(nq);

    State s{};
    s = apply_impulse(model, s, n, pattern);
    const double e0 = mechanical_energy(model, s.u.data());
    if (e0 <= 0.0) {
        for (auto& v : out.series) v.assign(1, 0.0);
        return out;
    }
    const double cutoff = options.energy_cutoff * e0;
    const double t_end = horizon(model, options);

    auto f = [&](double, const double* u, double* du) { rhs(model, u, 0.0, du); };
    auto observe = [&](double, const double* u) {
        const auto acc = accelerations(model, u, 0.0);
        for (std::size_t dof = 0; dof < model.n_dof(); ++dof) {
            out.series[3 * dof + 0].push_back(u[2 * dof]);
            out.series[3 * dof + 1].push_back(u[2 * dof + 1]);
            out.series[3 * dof + 2].push_back(acc[dof]);
        }
        return mechanical_energy(model, u) > cutoff;
    };
    OdeOptions opts;
    opts.rtol = options.rtol;
    integrate_sampled(f, s.u.data(), model.state_size(), 0.0, t_end,
                      options.dt_out, observe, opts);
    return out;
}

const RareEventProfile& RareSet::of(Quantity q) const {
    for (std::size_t i = 0; i < quantities.size(); ++i)
        if (quantities[i] == q) return profiles[i];
    throw GridMismatch("RareSet: unknown quantity");
}

RareSet rare_pdf_simulated(const SystemModel& model,
                           const ForcingModel& forcing,
                           const EtaDistribution& eta,
                           const RareOptions& options) {
    forcing.validate();
    eta.validate();
    options.validate();
    const auto grid = eta_grid(eta, options);
    auto qs = options.quantities.empty() ? all_quantities(model)
                                         : options.quantities;
    for (const auto& q : qs)
        if (q.dof >= model.n_dof() || q.deriv > 2)
            throw GridMismatch("rare_pdf_simulated: quantity out of range");

    std::vector<std::vector<NodeHistogram>> hist(qs.size());
    for (auto& h : hist) h.reserve(grid.nodes.size());
    for (double n : grid.nodes) {
        const auto resp = simulate_impulse(model, n, forcing.pattern, options);
        for (std::size_t q = 0; q < qs.size(); ++q)
            hist[q].push_back(node_histogram(
                resp.series[3 * qs[q].dof + qs[q].deriv], resp.dt, options));
    }

    RareSet set;
    set.quantities = qs;
    for (std::size_t q = 0; q < qs.size(); ++q) {
        RareEventProfile prof;
        prof.quantity = qs[q];
        prof.pdf = mix_histograms(hist[q], grid.weights, options.mixture_bins);
        prof.tau_e = 0.0;
        for (std::size_t k = 0; k < grid.nodes.size(); ++k)
            prof.tau_e += grid.weights[k] * hist[q][k].tau;
        prof.p_r = forcing.rate() * prof.tau_e;
        if (prof.p_r >= 1.0)
            throw PrOutOfRange("rare_pdf_simulated: impulse regime "
                               "probability reached 1");
        set.profiles.push_back(std::move(prof));
    }
    return set;
}

EffectiveMeasures effective_measures(const SystemModel& model, double n,
                                     const RareOptions& options) {
    const auto resp =
        simulate_impulse(model, n, ImpulsePattern::primary_only, options);
    const auto& x = resp.series[0];
    const auto& xd = resp.series[1];
    const double dt = resp.dt;

    EffectiveMeasures em;
    em.tau = rare_duration(x, dt, options.rho_c);
    const auto count =
        std::min(x.size(), static_cast<std::size_t>(em.tau / dt) + 1);
    if (count < 8) throw NotOscillatory("effective_measures: trace too short");

    const auto ex2 = envelope_ms(x, dt, false);
    const auto exd2 = envelope_ms(xd, dt, true);
    const double ix2 = trapezoid(ex2, dt, count);
    const double ixd2 = trapezoid(exd2, dt, count);
    const double m = model.primary_mass();
    em.k_eff = m * ixd2 / ix2;
    em.lambda_eff = -m * (exd2[count - 1] - 0.5 * n * n) / ixd2;
    return em;
}

RareEventProfile rare_pdf_effective(const SystemModel& model,
                                    const ForcingModel& forcing,
                                    const EtaDistribution& eta,
                                    Quantity quantity,
                                    const RareOptions& options) {
    if (quantity.dof != 0)
        throw ConfigError("rare_pdf_effective: primary DOF only");
    forcing.validate();
    eta.validate();
    options.validate();
    const auto grid = eta_grid(eta, options);

    // Effective stiffness and damping vary slowly with the jump size, so a
    // coarse sweep plus linear interpolation covers the full grid.
    const std::size_t coarse = std::min<std::size_t>(21, grid.nodes.size());
    std::vector<double> cn(coarse), ck(coarse), cl(coarse);
    for (std::size_t i = 0; i < coarse; ++i) {
        const double f = coarse == 1 ? 0.0 : double(i) / (coarse - 1);
        cn[i] = grid.nodes.front() + f * (grid.nodes.back() - grid.nodes.front());
        const auto em = effective_measures(model, cn[i], options);
        ck[i] = em.k_eff;
        cl[i] = em.lambda_eff;
    }
    auto interp = [&](const std::vector<double>& cv, double n) {
        if (coarse == 1) return cv[0];
        const double f = (n - cn.front()) / (cn.back() - cn.front());
        const double p = std::clamp(f, 0.0, 1.0) * (coarse - 1);
        const auto i = std::min(static_cast<std::size_t>(p), coarse - 2);
        return cv[i] + (p - i) * (cv[i + 1] - cv[i]);
    };

    const double m = model.primary_mass();
    const auto count =
        static_cast<std::size_t>(horizon(model, options) / options.dt_out) + 1;
    std::vector<NodeHistogram> hist;
    hist.reserve(grid.nodes.size());
    for (double n : grid.nodes) {
        const auto z = linear_decay(m, interp(ck, n), interp(cl, n), n,
                                    quantity.deriv, options.dt_out, count);
        hist.push_back(node_histogram(z, options.dt_out, options));
    }

    RareEventProfile prof;
    prof.quantity = quantity;
    prof.pdf = mix_histograms(hist, grid.weights, options.mixture_bins);
    for (std::size_t k = 0; k < grid.nodes.size(); ++k)
        prof.tau_e += grid.weights[k] * hist[k].tau;
    prof.p_r = forcing.rate() * prof.tau_e;
    if (prof.p_r >= 1.0)
        throw PrOutOfRange("rare_pdf_effective: impulse regime "
                           "probability reached 1");
    return prof;
}

} // namespace pds
