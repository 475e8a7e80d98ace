#include "pds/statlin.hpp"

#include <cmath>

namespace pds {

namespace {

constexpr Complex J{0.0, 1.0};

void check_denominator(const Complex& den, const char* what) {
    if (std::abs(den) < 1e-14) throw SingularTransfer(what);
}

} // namespace

double closure_increment(const SystemModel& model, const ClosureMoments& m) {
    const double c = model.spring.background_cubic();
    return c * (3.0 * m.sigma2_p - 6.0 * m.sigma_pv + 3.0 * m.sigma2_v);
}

Operators2Dof transfer_operators_2dof(const SystemModel& model, double omega,
                                      const ClosureMoments& m) {
    const double ka = model.spring.background_stiffness();
    const double kap = closure_increment(model, m);
    Operators2Dof op;
    op.A = -model.m_s * omega * omega +
           (model.lambda_s + model.lambda_a) * (J * omega) + model.k_s + ka +
           kap;
    op.B = model.lambda_a * (J * omega) + ka + kap;
    op.C = -model.m_a * omega * omega + model.lambda_a * (J * omega) + ka + kap;
    return op;
}

Operators3Dof transfer_operators_3dof(const SystemModel& model, double omega,
                                      const ClosureMoments& m) {
    const double ka = model.spring.background_stiffness();
    const double kap = closure_increment(model, m);
    Operators3Dof op;
    op.A = -model.m_h * omega * omega +
           (model.lambda_h + model.lambda_s + model.lambda_a) * (J * omega) +
           model.k_h + model.k_s + ka + kap;
    op.B = model.lambda_a * (J * omega) + ka + kap;
    op.C = -model.m_a * omega * omega + model.lambda_a * (J * omega) + ka + kap;
    op.D = model.lambda_s * (J * omega) + model.k_s;
    op.E = -model.m_s * omega * omega + model.lambda_s * (J * omega) + model.k_s;
    return op;
}

std::array<Complex, 3> response_transfers(const SystemModel& model,
                                          double omega,
                                          const ClosureMoments& m) {
    const double w2 = omega * omega;
    std::array<Complex, 3> H{};
    switch (model.topology) {
        case Topology::sdof: {
            const Complex den = -model.m_s * w2 + model.lambda_s * (J * omega) +
                                model.k_s;
            check_denominator(den, "response_transfers: sdof denominator");
            H[0] = model.m_s * w2 / den;
            break;
        }
        case Topology::seat2dof: {
            const auto op = transfer_operators_2dof(model, omega, m);
            check_denominator(op.C, "response_transfers: C(w) = 0");
            const Complex den = op.A - op.B * op.B / op.C;
            check_denominator(den, "response_transfers: 2dof denominator");
            H[0] = (model.m_s + model.m_a * op.B / op.C) * w2 / den;
            H[1] = (op.B * H[0] + model.m_a * w2) / op.C;
            break;
        }
        case Topology::deckseat3dof: {
            const auto op = transfer_operators_3dof(model, omega, m);
            check_denominator(op.C, "response_transfers: C(w) = 0");
            check_denominator(op.E, "response_transfers: E(w) = 0");
            const Complex den =
                op.A - op.D * op.D / op.E - op.B * op.B / op.C;
            check_denominator(den, "response_transfers: 3dof denominator");
            H[0] = (model.m_h + model.m_s * op.D / op.E +
                    model.m_a * op.B / op.C) *
                   w2 / den;
            H[1] = (op.D * H[0] + model.m_s * w2) / op.E;
            H[2] = (op.B * H[0] + model.m_a * w2) / op.C;
            break;
        }
    }
    return H;
}

SpectraSample response_spectra(const SystemModel& model,
                               const BackgroundSpectrum& spectrum, double omega,
                               const ClosureMoments& m) {
    const double S = spectrum.density(omega);
    SpectraSample out;
    if (S == 0.0) return out;
    const auto H = response_transfers(model, omega, m);
    const std::size_t n = model.n_dof();
    for (std::size_t i = 0; i < n; ++i) {
        out.S_zz[i] = std::norm(H[i]) * S;
        out.S_zh[i] = H[i] * S;
    }
    const std::size_t att = n - 1;
    out.S_pv = std::real(H[0] * std::conj(H[att])) * S;
    return out;
}

namespace {

// One application of the fixed-point map: integrate the response spectra at
// the current moments.
ClosureMoments apply_map(const SystemModel& model,
                         const BackgroundSpectrum& spectrum,
                         const FrequencyGrid& grid, const ClosureMoments& m) {
    const std::size_t att = model.n_dof() - 1;
    ClosureMoments out;
    out.sigma2_p = integrate_spectrum(
        [&](double w) { return response_spectra(model, spectrum, w, m).S_zz[0]; },
        grid);
    out.sigma2_v = integrate_spectrum(
        [&](double w) {
            return response_spectra(model, spectrum, w, m).S_zz[att];
        },
        grid);
    out.sigma_pv = integrate_spectrum(
        [&](double w) { return response_spectra(model, spectrum, w, m).S_pv; },
        grid);
    return out;
}

double rel_residual(const ClosureMoments& a, const ClosureMoments& b) {
    const double num = std::hypot(a.sigma2_p - b.sigma2_p,
                                  a.sigma_pv - b.sigma_pv,
                                  a.sigma2_v - b.sigma2_v);
    const double den =
        std::max(1e-300, std::hypot(a.sigma2_p, a.sigma_pv, a.sigma2_v));
    return num / den;
}

bool feasible(const ClosureMoments& m) {
    return m.sigma2_p >= 0 && m.sigma2_v >= 0 &&
           m.sigma_pv * m.sigma_pv <= m.sigma2_p * m.sigma2_v * (1.0 + 1e-9);
}

} // namespace

LinearizationSolution solve_fixed_point(const SystemModel& model,
                                        const BackgroundSpectrum& spectrum,
                                        const FrequencyGrid& grid,
                                        const StatlinOptions& opts) {
    model.validate();
    spectrum.validate();

    LinearizationSolution sol;
    sol.topology = model.topology;

    // Initial iterate: the c_a = 0 linear solution (exact when the spring is
    // linear in the background band).
    ClosureMoments m = apply_map(model, spectrum, grid, ClosureMoments{});
    const bool nonlinear = model.spring.background_cubic() != 0.0 &&
                           model.topology != Topology::sdof;

    std::size_t iters = 1;
    double residual = 0.0;
    if (nonlinear) {
        double damping = opts.damping;
        for (;; ++iters) {
            if (iters > opts.max_iter)
                throw NonConverged("solve_fixed_point: max iterations reached");
            const ClosureMoments mapped = apply_map(model, spectrum, grid, m);
            residual = rel_residual(m, mapped);
            if (residual < opts.tol) break;
            ClosureMoments next;
            double d = damping;
            for (;;) {
                next.sigma2_p = (1 - d) * m.sigma2_p + d * mapped.sigma2_p;
                next.sigma_pv = (1 - d) * m.sigma_pv + d * mapped.sigma_pv;
                next.sigma2_v = (1 - d) * m.sigma2_v + d * mapped.sigma2_v;
                if (feasible(next)) break;
                d *= 0.5;
                if (d < 1.0 / 64)
                    throw NegativeVariance(
                        "solve_fixed_point: iterate left the feasible cone");
            }
            m = next;
        }
    } else {
        residual = 0.0;
    }

    sol.moments = m;
    sol.kappa = closure_increment(model, m);
    sol.residual = residual;
    sol.iterations = iters;
    sol.base = moment_integrals(spectrum, grid);

    const std::size_t n = model.n_dof();
    for (std::size_t dof = 0; dof < n; ++dof) {
        for (std::size_t d = 0; d < 3; ++d) {
            const auto weight = [d](double w) {
                double ww = 1.0;
                for (std::size_t k = 0; k < d; ++k) ww *= w * w;
                return ww;
            };
            const double var = integrate_spectrum(
                [&](double w) {
                    return weight(w) *
                           response_spectra(model, spectrum, w, m).S_zz[dof];
                },
                grid);
            sol.sigma[dof][d] = std::sqrt(std::max(0.0, var));
            sol.cov_base[dof][d] = integrate_spectrum(
                [&](double w) {
                    return weight(w) *
                           std::real(
                               response_spectra(model, spectrum, w, m).S_zh[dof]);
                },
                grid);
        }
    }

    if (n > 1) {
        const double z2 = m.sigma2_p - 2.0 * m.sigma_pv + m.sigma2_v;
        sol.sigma_zeta = std::sqrt(std::max(0.0, z2));
    }
    return sol;
}

} // namespace pds
