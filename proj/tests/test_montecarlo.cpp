#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "approx.hpp"

#include <cmath>

#include "pds/montecarlo.hpp"
#include "pds/statlin.hpp"

using namespace pds;

namespace {

const BackgroundSpectrum spectrum{1.582e-4, 1.0};

SystemModel sdof(double lambda = 0.01) {
    SystemModel m;
    m.topology = Topology::sdof;
    m.m_s = 1.0;
    m.lambda_s = lambda;
    m.k_s = 1.0;
    return m;
}

ExcitationRealization quiet_base(double dt, std::size_t n) {
    ExcitationRealization r;
    r.dt = dt;
    r.h.assign(n, 0.0f);
    r.hdot.assign(n, 0.0f);
    r.hddot.assign(n, 0.0f);
    return r;
}

double sample_variance(const std::vector<float>& x) {
    double s = 0.0, s2 = 0.0;
    for (float v : x) {
        s += v;
        s2 += double(v) * v;
    }
    const double m = s / x.size();
    return s2 / x.size() - m * m;
}

double analytic_x(double n, double lambda, double t) {
    const double zeta = lambda / 2.0;
    const double wd = std::sqrt(1.0 - zeta * zeta);
    return n / wd * std::exp(-zeta * t) * std::sin(wd * t);
}

} // namespace

TEST_CASE("background realization reproduces the spectrum variances") {
    const auto r = generate_background(spectrum, 2e4, 0.015, 42);
    CHECK(r.h.size() >= std::size_t(2e4 / 0.015));
    const auto m = moment_integrals(spectrum);
    CHECK(sample_variance(r.h) == rel(m.sigma2_h, 0.05));
    CHECK(sample_variance(r.hdot) ==
          rel(m.sigma2_hdot, 0.05));
    CHECK(sample_variance(r.hddot) ==
          rel(m.sigma2_hddot, 0.05));
    // zero mean
    double s = 0.0;
    for (float v : r.h) s += v;
    CHECK(std::abs(s / r.h.size()) < 0.1 * std::sqrt(m.sigma2_h));
}

TEST_CASE("zero spectrum magnitude gives an identically zero series") {
    const auto r = generate_background({0.0, 1.0}, 100.0, 0.015, 7);
    for (float v : r.h) CHECK(v == 0.0f);
    for (float v : r.hddot) CHECK(v == 0.0f);
}

TEST_CASE("background generation is seed deterministic") {
    const auto a = generate_background(spectrum, 500.0, 0.015, 9);
    const auto b = generate_background(spectrum, 500.0, 0.015, 9);
    const auto c = generate_background(spectrum, 500.0, 0.015, 10);
    CHECK(a.h == b.h);
    CHECK(a.hddot == b.hddot);
    CHECK(a.h != c.h);
}

TEST_CASE("background generation rejects a coarse time step") {
    CHECK_THROWS_AS(generate_background(spectrum, 100.0, 1.0, 1), ConfigError);
}

TEST_CASE("impulse train: Poisson count, Gaussian magnitudes, determinism") {
    ForcingModel f;
    f.spectrum = spectrum;
    f.T_alpha = 50.0;

    const auto ev = generate_impulse_train(f, 5000.0, 3);
    CHECK(ev.size() > 70);
    CHECK(ev.size() < 130);
    for (std::size_t i = 1; i < ev.size(); ++i)
        CHECK(ev[i].time > ev[i - 1].time);

    double mean = 0.0;
    for (const auto& e : ev) mean += e.magnitude;
    mean /= ev.size();
    CHECK(mean == rel(f.mu_alpha, 0.2));

    ForcingModel sharp = f;
    sharp.sigma_alpha = 0.0;
    for (const auto& e : generate_impulse_train(sharp, 500.0, 5))
        CHECK(e.magnitude == f.mu_alpha);

    CHECK(generate_impulse_train(f, 1000.0, 11).size() ==
          generate_impulse_train(f, 1000.0, 11).size());
}

TEST_CASE("quiet base and no impulses stay at rest") {
    const auto series =
        simulate_realization(sdof(), quiet_base(0.015, 4096),
                             ImpulsePattern::primary_only);
    for (const auto& q : series.relative)
        for (double v : q) CHECK(v == 0.0);
}

TEST_CASE("a single impulse on a quiet base follows the closed-form decay") {
    auto real = quiet_base(0.015, 1 << 15);  // ~490 time units
    real.impulses = {{1.0, 0.1}};
    const auto series =
        simulate_realization(sdof(), real, ImpulsePattern::primary_only);
    const auto& x = series.relative[0];
    const auto& xd = series.relative[1];
    const double dt = series.dt_out;

    // before the event: quiescent; after: analytic free decay
    CHECK(x[5] == 0.0);
    for (std::size_t i : {std::size_t(50), std::size_t(500), std::size_t(3000)}) {
        const double t = i * dt - 1.0;
        CHECK(x[i] == rel(analytic_x(0.1, 0.01, t), 1e-4));
    }
    // velocity jump equals the impulse magnitude
    const auto k = static_cast<std::size_t>(1.0 / dt);
    CHECK(xd[k + 1] - xd[k] == rel(0.1, 0.05));
    // absolute equals relative when the base is quiet
    CHECK(series.absolute[0] == series.relative[0]);
}

TEST_CASE("count histogram: clamping, density, rebinning") {
    McHistogram h;
    h.lo = -1.0;
    h.hi = 1.0;
    h.counts.assign(100, 0);
    for (double x : {-2.0, -0.99, -0.5, 0.0, 0.3, 0.31, 0.99, 5.0}) h.add(x);
    CHECK(h.total == 8);
    CHECK(h.counts.front() == 2);  // clamped low outlier shares the end bin
    CHECK(h.counts.back() == 2);

    const auto d = h.density();
    CHECK(d.integral() == rel(1.0, 1e-5));

    McHistogram s;
    s.lo = 0.0;
    s.hi = 10.0;
    s.counts = {0, 0, 1, 2, 3, 4, 0, 0, 0, 0};
    s.total = 10;
    const auto r = s.rebinned(2);
    CHECK(r.total == 10);
    CHECK(r.lo == rel(2.0, 1e-5));
    CHECK(r.counts.size() == 2);
    CHECK(r.counts[0] == 3);
    CHECK(r.counts[1] == 7);
}

TEST_CASE("pooled ensemble matches linear theory and is reproducible") {
    ForcingModel f;
    f.spectrum = spectrum;
    f.T_alpha = 500.0;
    const auto model = sdof(0.05);

    MonteCarloOptions opt;
    opt.realizations = 2;
    opt.impulses_each = 0;  // background only: the Gaussian regime
    opt.min_duration = 20000.0;

    const auto ens = ensemble_pdf(model, f, 123, opt);
    const auto lin = solve_fixed_point(model, spectrum);

    // tolerance is sampling noise: 2e4 time units per realization against a
    // response correlation time of about 1/(2 zeta wn) = 20
    const double s2 = lin.sigma[0][0] * lin.sigma[0][0];
    CHECK(ens.variance_rel[0] == rel(s2, 0.10));
    CHECK(ens.variance_rel[1] == rel(lin.sigma[0][1] * lin.sigma[0][1], 0.10));
    CHECK(ens.rel_of({0, 0}).density().integral() == rel(1.0, 1e-5));
    CHECK(ens.abs_of({0, 2}).total == ens.rel_of({0, 0}).total);

    // switching the impulse train on fattens the pooled distribution
    MonteCarloOptions with_imp = opt;
    with_imp.min_duration = 0.0;
    with_imp.impulses_each = 10;
    const auto imp = ensemble_pdf(model, f, 123, with_imp);
    CHECK(imp.variance_rel[0] > 1.5 * ens.variance_rel[0]);

    const auto again = ensemble_pdf(model, f, 123, opt);
    CHECK(again.rel_of({0, 0}).counts == ens.rel_of({0, 0}).counts);
    CHECK(again.abs_of({0, 1}).counts == ens.abs_of({0, 1}).counts);
}
