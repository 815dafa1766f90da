#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gf/flows.hpp"

using namespace gf;
using Family = FinslerMetricSpec::Family;

namespace {

MatrixField const_metric(const ChartGrid& g, int r, double scale = 1.0) {
    MatrixField h(g, r);
    for (int i = 0; i < r; ++i)
        for (std::size_t p = 0; p < g.points(); ++p) h.entry(i, i, p) = scale;
    return h;
}

MatrixField fs_metric1(const ChartGrid& g) {
    MatrixField f(g, 1);
    int mi[2];
    for (std::size_t p = 0; p < g.points(); ++p) {
        g.unravel(p, mi);
        f.entry(0, 0, p) = 1.0 / sqr(1.0 + std::norm(g.zof(mi, 0)));
    }
    return f;
}

double rel_diff(const MatrixField& a, const MatrixField& b) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        num = std::max(num, std::abs(a.data[i] - b.data[i]));
        den = std::max(den, std::abs(b.data[i]));
    }
    return num / den;
}

} // namespace

TEST_CASE("hym flow: flat closed form e^{-t}") {
    ChartGrid g = make_torus_chart(1, 16, "t16");
    HymFlow flow(g, const_metric(g, 2));
    const double dt = 1e-3;
    while (flow.t < 0.5 - 1e-12) flow.step(dt, Scheme::Rk4);
    MatrixField want = const_metric(g, 2, std::exp(-flow.t));
    CHECK(rel_diff(flow.h, want) < 1e-8);
    // flat curvature: griffiths min identically zero
    auto rep = flow.probe();
    CHECK(rep.min_value == 0.0);
}

TEST_CASE("hym flow: dt = 0 is the identity") {
    ChartGrid g = make_torus_chart(1, 16, "t16b");
    HymFlow flow(g, const_metric(g, 2));
    MatrixField before = flow.h;
    flow.step(0.0, Scheme::Rk4);
    for (std::size_t i = 0; i < before.data.size(); ++i)
        CHECK(flow.h.data[i] == before.data[i]);
}

TEST_CASE("hym flow: two identical line bundles stay identical") {
    ChartGrid g = make_torus_chart(1, 32, "t32s");
    MatrixField h(g, 2);
    int mi[2];
    for (std::size_t p = 0; p < g.points(); ++p) {
        g.unravel(p, mi);
        const double phi = 0.05 * std::cos(2 * M_PI * g.coord(0, mi[0]));
        h.entry(0, 0, p) = std::exp(-phi);
        h.entry(1, 1, p) = std::exp(-phi);
    }
    HymFlow flow(g, h);
    for (int s = 0; s < 50; ++s) flow.step(2e-4, Scheme::Rk4);
    double worst = 0;
    for (std::size_t p = 0; p < g.points(); ++p) {
        worst = std::max(worst, std::abs(flow.h.entry(0, 0, p) - flow.h.entry(1, 1, p)));
        worst = std::max(worst, std::abs(flow.h.entry(0, 1, p)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("kr flow: flat torus closed form e^{-(n-1)t}") {
    ChartGrid g = make_torus_chart(2, 8, "t2f");
    KrFlow flow({&g}, {const_metric(g, 2)});
    const double dt = 1e-3;
    while (flow.t < 0.5 - 1e-12) flow.step(dt, Scheme::Rk4);
    MatrixField want = const_metric(g, 2, std::exp(-flow.t));
    CHECK(rel_diff(flow.g[0], want) < 1e-6);
}

TEST_CASE("kr flow: dt = 0 is the identity") {
    ChartGrid g = make_torus_chart(2, 8, "t2i");
    KrFlow flow({&g}, {const_metric(g, 2)});
    MatrixField before = flow.g[0];
    flow.step(0.0, Scheme::Rk4);
    for (std::size_t i = 0; i < before.data.size(); ++i)
        CHECK(flow.g[0].data[i] == before.data[i]);
}

TEST_CASE("kr flow on CP1: omega(t) = (1-2t) omega_FS") {
    CP1Atlas at = make_cp1_atlas(49, 2);
    KrFlow flow({at.chart0.get(), at.chart1.get()},
                {fs_metric1(*at.chart0), fs_metric1(*at.chart1)}, &at.stitch);
    const double dt = 1.2e-4;  // within the 1/g-weighted diffusive limit to t=0.2
    while (flow.t < 0.2 - 1e-12) flow.step(dt, Scheme::Rk4);
    double worst = 0;
    int mi[2];
    for (int c = 0; c < 2; ++c) {
        const ChartGrid& g = *flow.charts[c];
        for (std::size_t p = 0; p < g.points(); ++p) {
            g.unravel(p, mi);
            if (!g.owned(mi)) continue;
            const double want = (1.0 - 2.0 * flow.t) / sqr(1.0 + std::norm(g.zof(mi, 0)));
            worst = std::max(worst,
                             std::abs(flow.g[c].entry(0, 0, p).real() - want) / want);
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("kr flow on CP1 detects collapse near t = 1/2") {
    CP1Atlas at = make_cp1_atlas(17, 2);
    KrFlow flow({at.chart0.get(), at.chart1.get()},
                {fs_metric1(*at.chart0), fs_metric1(*at.chart1)}, &at.stitch);
    const double dt = 2e-5;
    bool collapsed = false;
    double tstop = 0;
    try {
        while (flow.t < 0.6 - 1e-12) flow.step(dt, Scheme::Rk4);
    } catch (const FlowHalt& h) {
        collapsed = true;
        tstop = h.t;
        CHECK(h.reason == "collapse");
    }
    CHECK(collapsed);
    CHECK(std::abs(tstop - 0.5) < 0.02);
}

TEST_CASE("rk4 convergence order on the flat KR closed form") {
    auto run = [&](double dt) {
        ChartGrid g = make_torus_chart(2, 8, "t2o");
        KrFlow flow({&g}, {const_metric(g, 2)});
        while (flow.t < 0.5 - 1e-12) flow.step(dt, Scheme::Rk4);
        return std::abs(flow.g[0].entry(0, 0, 0).real() - std::exp(-flow.t));
    };
    const double e0 = run(0.05), e1 = run(0.025);
    CHECK(e0 / e1 > 15.0);
}

TEST_CASE("euler step forward then backward returns to O(dt^2)") {
    ChartGrid g = make_torus_chart(1, 32, "t32r");
    MatrixField m(g, 1);
    int mi[2];
    for (std::size_t p = 0; p < g.points(); ++p) {
        g.unravel(p, mi);
        m.entry(0, 0, p) = std::exp(0.1 * std::cos(2 * M_PI * g.coord(0, mi[0])));
    }
    auto roundtrip = [&](double dt) {
        KrFlow flow({&g}, {m});
        MatrixField before = flow.g[0];
        flow.step(dt, Scheme::Euler);
        flow.step(-dt, Scheme::Euler);
        double worst = 0;
        for (std::size_t i = 0; i < before.data.size(); ++i)
            worst = std::max(worst, std::abs(flow.g[0].data[i] - before.data[i]));
        return worst;
    };
    const double r1 = roundtrip(1e-3), r2 = roundtrip(5e-4);
    CHECK(r1 < 5e-5);
    CHECK(r1 / r2 > 3.0);  // O(dt^2)
    CHECK(r1 / r2 < 5.0);
}

namespace {

struct BundleSetup {
    std::unique_ptr<ChartGrid> base;
    std::unique_ptr<ChartGrid> b0, b1;
    std::unique_ptr<Stitch> stitch;
    std::unique_ptr<FinslerMetricSpec> spec;
    BundleSetup(int nbase, int nfiber, double amp, double off, double twist) {
        base = std::make_unique<ChartGrid>(make_torus_chart(1, nbase, "fbase"));
        b0 = std::make_unique<ChartGrid>(make_bundle_chart(nbase, 1.25, nfiber, 2, "P0"));
        b1 = std::make_unique<ChartGrid>(make_bundle_chart(nbase, 1.25, nfiber, 2, "P1"));
        stitch = std::make_unique<Stitch>(make_bundle_stitch(*b0, *b1));
        MatrixField h(*base, 2);
        int mi[2];
        for (std::size_t p = 0; p < base->points(); ++p) {
            base->unravel(p, mi);
            const double x = base->coord(0, mi[0]);
            const double y = base->coord(1, mi[1]);
            const double phi = amp * std::cos(2 * M_PI * x);
            h.entry(0, 0, p) = std::exp(-phi);
            h.entry(1, 1, p) = std::exp(phi);
            h.entry(0, 1, p) = off * std::sin(2 * M_PI * y);
            h.entry(1, 0, p) = std::conj(h.entry(0, 1, p));
        }
        spec = std::make_unique<FinslerMetricSpec>(
            make_finsler_spec(Family::HermitianInduced, *base, std::move(h), 0.0, twist));
    }
};

} // namespace

TEST_CASE("finsler flow: flat data gives u(t) = t") {
    BundleSetup bs(16, 16, 0.0, 0.0, 0.0);
    FinslerFlow flow(*bs.spec, *bs.b0, *bs.b1, *bs.stitch);
    const double dt = 5e-4;
    for (int s = 0; s < 200; ++s) flow.step(dt, Scheme::Rk4);
    double worst = 0;
    int mi[4];
    for (int c = 0; c < 2; ++c)
        for (std::size_t p = 0; p < bs.b0->points(); ++p) {
            flow.chart[c]->unravel(p, mi);
            if (!flow.chart[c]->owned(mi)) continue;
            worst = std::max(worst, std::abs(flow.u[c][p] - flow.t));
        }
    CHECK(worst / flow.t < 1e-6);
    CHECK(flow.stitching_inconsistency() < 1e-12);
    // Psi = 0 persists: pencil min stays 0 (up to FD roundoff)
    auto rep = flow.probe();
    CHECK(std::abs(rep.min_value) < 1e-10);
}

TEST_CASE("finsler flow: dt = 0 is the identity") {
    BundleSetup bs(16, 12, 0.01, 0.0, 0.12);
    FinslerFlow flow(*bs.spec, *bs.b0, *bs.b1, *bs.stitch);
    std::vector<double> before = flow.u[0];
    flow.step(0.0, Scheme::Rk4);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(flow.u[0][i] == before[i]);
}

TEST_CASE("finsler flow tracks the HYM reduction") {
    BundleSetup bs(16, 24, 0.01, 0.002, 0.12);
    FinslerFlow flow(*bs.spec, *bs.b0, *bs.b1, *bs.stitch);
    HymFlow hym(*bs.base, bs.spec->h, bs.spec->twist);
    const double dt = 5e-4;
    for (int s = 0; s < 200; ++s) {
        flow.step(dt, Scheme::Rk4);
        hym.step(dt, Scheme::Rk4);
    }
    CHECK(flow.t == doctest::Approx(hym.t));
    CHECK(flow.compare_to_hym(hym.h) < 2e-5);
    CHECK(flow.quadratic_fit_residual(7) < 1e-5);
    CHECK(flow.stitching_inconsistency() < 1e-4);
}

TEST_CASE("max principle simulator") {
    ChartGrid g = make_torus_chart(2, 12, "mp");
    const std::size_t np = g.points();
    auto psi0 = [&](std::size_t p) {
        int mi[4];
        g.unravel(p, mi);
        return 1.0 - 0.25 * (std::cos(2 * M_PI * g.coord(0, mi[0])) +
                             std::cos(2 * M_PI * g.coord(1, mi[1])) +
                             std::cos(2 * M_PI * g.coord(2, mi[2])) +
                             std::cos(2 * M_PI * g.coord(3, mi[3])));
    };

    SUBCASE("constant eta with sigma = 0 is stationary") {
        MatrixField eta = const_metric(g, 2, 0.7);
        MaxPrincipleFlow flow(g, eta, SigmaSpec{});
        for (int s = 0; s < 100; ++s) flow.step(1e-3, Scheme::Rk4);
        auto rep = flow.probe();
        CHECK(rep.min_value == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("touching-zero data stays nonnegative and matches the scalar oracle") {
        MatrixField eta(g, 2);
        MatrixField psi(g, 1);
        for (std::size_t p = 0; p < np; ++p) {
            const double v = psi0(p);
            eta.entry(0, 0, p) = v;
            eta.entry(1, 1, p) = v;
            psi.entry(0, 0, p) = v;
        }
        MaxPrincipleFlow flow(g, eta, SigmaSpec{});
        MaxPrincipleFlow oracle(g, psi, SigmaSpec{});
        for (int s = 0; s < 150; ++s) {
            flow.step(1e-3, Scheme::Rk4);
            oracle.step(1e-3, Scheme::Rk4);
        }
        auto rep = flow.probe();
        auto orep = oracle.probe();
        CHECK(rep.min_value >= -1e-6);
        CHECK(std::abs(rep.min_value - orep.min_value) < 1e-5);
    }
    SUBCASE("sigma = eta grows where positive") {
        MatrixField eta(g, 2);
        MatrixField psi(g, 1);
        for (std::size_t p = 0; p < np; ++p) {
            const double v = psi0(p);
            eta.entry(0, 0, p) = v;
            eta.entry(1, 1, p) = v;
            psi.entry(0, 0, p) = v;
        }
        SigmaSpec sg;
        sg.kind = SigmaSpec::Kind::ScaleField;
        sg.c = Field(g, 1);
        for (std::size_t p = 0; p < np; ++p) sg.c.at(0, p) = 1.0;
        MaxPrincipleFlow flow(g, eta, sg);
        MaxPrincipleFlow oracle(g, psi, sg);
        double prev_mean = 0;
        for (int s = 0; s < 150; ++s) {
            flow.step(1e-3, Scheme::Rk4);
            oracle.step(1e-3, Scheme::Rk4);
        }
        auto rep = flow.probe();
        CHECK(rep.min_value >= -1e-6);
        CHECK(std::abs(rep.min_value - oracle.probe().min_value) < 1e-5);
        (void)prev_mean;
    }
    SUBCASE("sigma = A eta A^dagger keeps nonnegativity") {
        MatrixField eta(g, 2);
        for (std::size_t p = 0; p < np; ++p) {
            const double v = psi0(p);
            eta.entry(0, 0, p) = v;
            eta.entry(1, 1, p) = v;
        }
        SigmaSpec sg;
        sg.kind = SigmaSpec::Kind::Conjugation;
        sg.A = MatrixField(g, 2);
        int mi[4];
        for (std::size_t p = 0; p < np; ++p) {
            g.unravel(p, mi);
            sg.A.entry(0, 0, p) = 1.0;
            sg.A.entry(1, 1, p) = 1.0;
            sg.A.entry(0, 1, p) = 0.3 * std::exp(cplx{0, 2 * M_PI * g.coord(0, mi[0])});
        }
        MaxPrincipleFlow flow(g, eta, sg);
        for (int s = 0; s < 150; ++s) flow.step(1e-3, Scheme::Rk4);
        CHECK(flow.probe().min_value >= -1e-6);
    }
}
