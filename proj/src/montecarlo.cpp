#include "pds/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <fftw3.h>

#include "pds/ode.hpp"
#include "pds/statlin.hpp"

namespace pds {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream));
}

double u01(std::uint64_t bits) {
    return (bits >> 11) * 0x1.0p-53;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Shared integration loop: walks the impulse list, applies velocity jumps,
// and hands samples on the global grid k*dt_out to the consumer.
template <typename Consumer>
void stream_response(const SystemModel& model,
                     const ExcitationRealization& real, ImpulsePattern pattern,
                     const SimulationOptions& options, Consumer&& consume) {
    auto f = [&](double t, const double* u, double* du) {
        rhs(model, u, real.base(2, t), du);
    };
    OdeOptions oo;
    oo.rtol = options.rtol;
    oo.atol = options.atol;
    Dopri5<decltype(f)&> solver(f, model.state_size(), oo);

    long long next_k = 0;
    auto observer = [&](double t, const double* u) {
        const auto k = std::llround(t / options.dt_out);
        if (k != next_k) return true;  // segment joins may repeat a sample
        ++next_k;
        consume(t, u);
        return true;
    };

    State s{};
    double t0 = 0.0;
    const double t_end = real.duration();
    for (const auto& ev : real.impulses) {
        if (ev.time <= t0 || ev.time > t_end)
            throw ConfigError("stream_response: impulse outside (0, T]");
        solver.integrate_sampled(s.u.data(), t0, ev.time, options.dt_out,
                                 observer, 0.0);
        s = apply_impulse(model, s, ev.magnitude, pattern);
        t0 = ev.time;
    }
    solver.integrate_sampled(s.u.data(), t0, t_end, options.dt_out, observer,
                             0.0);
}

} // namespace

double ExcitationRealization::base(std::size_t deriv, double t) const {
    const auto& tab = deriv == 0 ? h : deriv == 1 ? hdot : hddot;
    if (tab.empty()) return 0.0;
    const double p = std::clamp(t / dt, 0.0, double(tab.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(p), tab.size() - 2);
    const double f = p - i;
    return (1.0 - f) * tab[i] + f * tab[i + 1];
}

void ExcitationRealization::validate() const {
    if (!(dt > 0) || h.size() < 2 || h.size() != hdot.size() ||
        h.size() != hddot.size())
        throw ConfigError("ExcitationRealization: inconsistent tables");
    double prev = 0.0;
    for (const auto& ev : impulses) {
        if (!(ev.time > prev) || ev.time > duration())
            throw ConfigError(
                "ExcitationRealization: impulse times must increase in (0, T]");
        prev = ev.time;
    }
}

ExcitationRealization generate_background(const BackgroundSpectrum& spectrum,
                                          double T, double dt,
                                          std::uint64_t seed,
                                          std::size_t frequency_bins) {
    if (spectrum.q < 0 || spectrum.shift < 0)
        throw ConfigError("generate_background: bad spectrum");
    const auto grid = spectrum.default_grid();
    if (!(T > 0) || !(dt > 0) || frequency_bins < 2)
        throw ConfigError("generate_background: bad arguments");
    if (dt > kTwoPi / (10.0 * grid.omega_max))
        throw ConfigError("generate_background: dt too coarse for the "
                          "spectrum support");

    const std::size_t n = next_pow2(std::max<std::size_t>(
        4096, static_cast<std::size_t>(std::ceil(T / dt)) + 1));
    const double dw_fft = kTwoPi / (n * dt);

    ExcitationRealization out;
    out.dt = dt;
    out.seed = seed;

    std::vector<std::complex<float>> coef(n / 2 + 1, {0.0f, 0.0f});
    const double dw = (grid.omega_max - grid.omega_min) / frequency_bins;
    for (std::size_t k = 0; k < frequency_bins; ++k) {
        const double w = grid.omega_min + (k + 0.5) * dw;
        const double amp = std::sqrt(2.0 * spectrum.density(w) * dw);
        if (amp <= 0.0) continue;
        const double phase = kTwoPi * u01(mix(seed, k));
        auto j = static_cast<std::size_t>(std::llround(w / dw_fft));
        j = std::clamp<std::size_t>(j, 1, n / 2 - 1);
        coef[j] += std::complex<float>(
            static_cast<float>(0.5 * amp * std::cos(phase)),
            static_cast<float>(0.5 * amp * std::sin(phase)));
    }

    auto* in = static_cast<fftwf_complex*>(
        fftwf_malloc(sizeof(fftwf_complex) * (n / 2 + 1)));
    auto* buf = static_cast<float*>(fftwf_malloc(sizeof(float) * n));
    if (!in || !buf) throw ConfigError("generate_background: fftw alloc failed");
    fftwf_plan plan = fftwf_plan_dft_c2r_1d(static_cast<int>(n), in, buf,
                                            FFTW_ESTIMATE);

    auto synth = [&](std::vector<float>& dest, std::size_t deriv) {
        for (std::size_t j = 0; j <= n / 2; ++j) {
            std::complex<double> c(coef[j].real(), coef[j].imag());
            const std::complex<double> iw(0.0, j * dw_fft);
            for (std::size_t d = 0; d < deriv; ++d) c *= iw;
            in[j][0] = static_cast<float>(c.real());
            in[j][1] = static_cast<float>(c.imag());
        }
        fftwf_execute(plan);
        dest.assign(buf, buf + n);
    };
    synth(out.h, 0);
    synth(out.hdot, 1);
    synth(out.hddot, 2);

    fftwf_destroy_plan(plan);
    fftwf_free(in);
    fftwf_free(buf);
    return out;
}

std::vector<ImpulseEvent> generate_impulse_train(const ForcingModel& forcing,
                                                 double T, std::uint64_t seed) {
    forcing.validate();
    if (!(T > 0)) throw ConfigError("generate_impulse_train: T must be > 0");
    std::mt19937_64 gen(seed);
    std::exponential_distribution<double> gap(forcing.rate());
    std::normal_distribution<double> mag(forcing.mu_alpha, forcing.sigma_alpha);
    std::vector<ImpulseEvent> events;
    double t = gap(gen);
    while (t <= T) {
        events.push_back({t, mag(gen)});
        t += gap(gen);
    }
    return events;
}

ResponseSeries simulate_realization(const SystemModel& model,
                                    const ExcitationRealization& realization,
                                    ImpulsePattern pattern,
                                    const SimulationOptions& options) {
    model.validate();
    realization.validate();
    ResponseSeries out;
    out.dt_out = options.dt_out;
    out.quantities = all_quantities(model);
    out.relative.resize(out.quantities.size());
    out.absolute.resize(out.quantities.size());

    stream_response(model, realization, pattern, options,
                    [&](double t, const double* u) {
                        const auto acc = accelerations(
                            model, u, realization.base(2, t));
                        for (std::size_t dof = 0; dof < model.n_dof(); ++dof) {
                            const double rel[3] = {u[2 * dof], u[2 * dof + 1],
                                                   acc[dof]};
                            for (std::size_t d = 0; d < 3; ++d) {
                                out.relative[3 * dof + d].push_back(rel[d]);
                                out.absolute[3 * dof + d].push_back(
                                    rel[d] + realization.base(d, t));
                            }
                        }
                    });
    return out;
}

void McHistogram::add(double x) {
    const double w = (hi - lo) / counts.size();
    auto i = static_cast<std::ptrdiff_t>((x - lo) / w);
    i = std::clamp<std::ptrdiff_t>(i, 0, counts.size() - 1);
    ++counts[static_cast<std::size_t>(i)];
    ++total;
}

Density McHistogram::density() const {
    Density d;
    d.lo = lo;
    d.hi = hi;
    d.values.resize(counts.size());
    const double w = (hi - lo) / counts.size();
    for (std::size_t i = 0; i < counts.size(); ++i)
        d.values[i] = total ? counts[i] / (total * w) : 0.0;
    return d;
}

McHistogram McHistogram::rebinned(std::size_t bins) const {
    if (bins == 0 || total == 0)
        throw GridMismatch("McHistogram: nothing to rebin");
    std::size_t i0 = 0, i1 = counts.size() - 1;
    while (i0 < i1 && counts[i0] == 0) ++i0;
    while (i1 > i0 && counts[i1] == 0) --i1;
    const std::size_t span = i1 - i0 + 1;
    const std::size_t group = (span + bins - 1) / bins;
    const std::size_t out_bins = (span + group - 1) / group;
    const double w = (hi - lo) / counts.size();

    McHistogram out;
    out.lo = lo + i0 * w;
    out.hi = lo + (i0 + out_bins * group) * w;
    out.counts.assign(out_bins, 0);
    for (std::size_t i = i0; i <= i1; ++i)
        out.counts[(i - i0) / group] += counts[i];
    out.total = total;
    return out;
}

const McHistogram& McEnsemble::rel_of(Quantity q) const {
    for (std::size_t i = 0; i < quantities.size(); ++i)
        if (quantities[i] == q) return relative[i];
    throw GridMismatch("McEnsemble: unknown quantity");
}

const McHistogram& McEnsemble::abs_of(Quantity q) const {
    for (std::size_t i = 0; i < quantities.size(); ++i)
        if (quantities[i] == q) return absolute[i];
    throw GridMismatch("McEnsemble: unknown quantity");
}

McEnsemble ensemble_pdf(const SystemModel& model, const ForcingModel& forcing,
                        std::uint64_t seed,
                        const MonteCarloOptions& options) {
    model.validate();
    forcing.validate();
    if (options.realizations < 1)
        throw ConfigError("ensemble_pdf: need at least one realization");

    McEnsemble ens;
    ens.quantities = all_quantities(model);
    ens.trim = 10.0 * model.primary_mass() / model.primary_damping();
    const double T = std::max(options.min_duration,
                              options.impulses_each * forcing.T_alpha) +
                     ens.trim;
    const std::size_t nq = ens.quantities.size();

    // Bin ranges from the linearized background plus impulse headroom. The
    // linearization only sets the provisional extent, never the counts.
    const double wn =
        std::sqrt(model.primary_stiffness() / model.primary_mass());
    const double dweight[3] = {1.0 / wn, 1.0, wn};
    std::vector<double> sig_rel(nq), sig_abs(nq);
    try {
        const auto lin = solve_fixed_point(model, forcing.spectrum);
        for (std::size_t i = 0; i < nq; ++i) {
            const auto q = ens.quantities[i];
            sig_rel[i] = lin.sigma[q.dof][q.deriv];
            sig_abs[i] = std::sqrt(lin.absolute_variance(q.dof, q.deriv));
        }
    } catch (const Error&) {
        const auto base = moment_integrals(forcing.spectrum);
        const double sh = std::sqrt(base.sigma2_h);
        for (std::size_t i = 0; i < nq; ++i) {
            sig_rel[i] = 10.0 * sh * dweight[ens.quantities[i].deriv];
            sig_abs[i] = sig_rel[i];
        }
    }
    const double n_hi =
        options.impulses_each
            ? std::abs(forcing.mu_alpha) + 5.0 * forcing.sigma_alpha
            : 0.0;
    for (std::size_t i = 0; i < nq; ++i) {
        const double head = 8.0 * n_hi * dweight[ens.quantities[i].deriv];
        McHistogram hr, ha;
        hr.hi = 12.0 * sig_rel[i] + head;
        hr.lo = -hr.hi;
        hr.counts.assign(options.provisional_bins, 0);
        ha.hi = 12.0 * sig_abs[i] + head;
        ha.lo = -ha.hi;
        ha.counts.assign(options.provisional_bins, 0);
        ens.relative.push_back(std::move(hr));
        ens.absolute.push_back(std::move(ha));
    }

    std::vector<double> sum_rel(nq, 0.0), sq_rel(nq, 0.0);
    std::vector<double> sum_abs(nq, 0.0), sq_abs(nq, 0.0);
    std::uint64_t kept = 0;

    for (std::size_t r = 0; r < options.realizations; ++r) {
        auto real = generate_background(forcing.spectrum, T, options.dt,
                                        mix(seed, 1000 + r),
                                        options.frequency_bins);
        if (options.impulses_each > 0) {
            // Condition the Poisson train on the requested impulse count.
            for (std::uint64_t attempt = 0;; ++attempt) {
                if (attempt > 10000)
                    throw NonConverged(
                        "ensemble_pdf: impulse count never matched");
                auto ev = generate_impulse_train(
                    forcing, real.duration(),
                    mix(seed, 2'000'000 + r * 100'000 + attempt));
                if (ev.size() == options.impulses_each) {
                    real.impulses = std::move(ev);
                    break;
                }
            }
        }
        ens.duration = real.duration();

        stream_response(
            model, real, forcing.pattern, options.sim,
            [&](double t, const double* u) {
                if (t < ens.trim) return;
                ++kept;
                const auto acc = accelerations(model, u, real.base(2, t));
                for (std::size_t dof = 0; dof < model.n_dof(); ++dof) {
                    const double rel[3] = {u[2 * dof], u[2 * dof + 1],
                                           acc[dof]};
                    for (std::size_t d = 0; d < 3; ++d) {
                        const std::size_t i = 3 * dof + d;
                        const double a = rel[d] + real.base(d, t);
                        ens.relative[i].add(rel[d]);
                        ens.absolute[i].add(a);
                        sum_rel[i] += rel[d];
                        sq_rel[i] += rel[d] * rel[d];
                        sum_abs[i] += a;
                        sq_abs[i] += a * a;
                    }
                }
            });
    }

    ens.variance_rel.resize(nq);
    ens.variance_abs.resize(nq);
    for (std::size_t i = 0; i < nq; ++i) {
        const double mr = sum_rel[i] / kept;
        const double ma = sum_abs[i] / kept;
        ens.variance_rel[i] = sq_rel[i] / kept - mr * mr;
        ens.variance_abs[i] = sq_abs[i] / kept - ma * ma;
    }
    return ens;
}

} // namespace pds
