#include "gf/suites.hpp"

#include <chrono>

namespace gf {
namespace {

using clock_t_ = std::chrono::steady_clock;

struct RowTimer {
    SuiteResult& out;
    std::string name;
    double tol;
    clock_t_::time_point t0 = clock_t_::now();
    void done(double residual, bool invert = false) {
        SuiteRow r;
        r.name = name;
        r.residual = residual;
        r.tolerance = tol;
        r.pass = invert ? residual > tol : residual < tol;
        r.seconds = std::chrono::duration<double>(clock_t_::now() - t0).count();
        out.rows.push_back(r);
    }
};

MatrixField curved_h2(const ChartGrid& g, double amp, double off) {
    MatrixField h(g, 2);
    int mi[2];
    for (std::size_t p = 0; p < g.points(); ++p) {
        g.unravel(p, mi);
        const double x = g.coord(0, mi[0]);
        const double y = g.coord(1, mi[1]);
        const double phi = amp * std::cos(2 * M_PI * x);
        const cplx psi = off * cplx{std::cos(2 * M_PI * y), std::sin(2 * M_PI * x)};
        h.entry(0, 0, p) = std::exp(-phi);
        h.entry(1, 1, p) = std::exp(phi);
        h.entry(0, 1, p) = psi;
        h.entry(1, 0, p) = std::conj(psi);
    }
    return h;
}

MatrixField flat_h(const ChartGrid& g, int r) {
    MatrixField h(g, r);
    for (int i = 0; i < r; ++i)
        for (std::size_t p = 0; p < g.points(); ++p) h.entry(i, i, p) = 1.0;
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

// Kaehler metric on the 2-torus from the potential amp cos(2pi x1) cos(2pi y2)
MatrixField potential_metric2(const ChartGrid& g, double amp) {
    MatrixField m(g, 2);
    int mi[4];
    for (std::size_t p = 0; p < g.points(); ++p) {
        g.unravel(p, mi);
        const double c1 = std::cos(2 * M_PI * g.coord(0, mi[0]));
        const double s1 = std::sin(2 * M_PI * g.coord(0, mi[0]));
        const double c2 = std::cos(2 * M_PI * g.coord(3, mi[3]));
        const double s2 = std::sin(2 * M_PI * g.coord(3, mi[3]));
        const double pi2 = sqr(M_PI);
        m.entry(0, 0, p) = 1.0 - pi2 * amp * c1 * c2;
        m.entry(1, 1, p) = 1.0 - pi2 * amp * c1 * c2;
        m.entry(0, 1, p) = cplx{0, pi2 * amp * s1 * s2};
        m.entry(1, 0, p) = std::conj(m.entry(0, 1, p));
    }
    return m;
}

} // namespace

SuiteFixtures make_suite_fixtures(double epsilon) {
    using Family = FinslerMetricSpec::Family;
    SuiteFixtures f;
    f.epsilon = epsilon;
    f.torus = std::make_unique<ChartGrid>(make_torus_chart(1, 128, "suite-torus128"));
    f.h_curved = std::make_unique<MatrixField>(curved_h2(*f.torus, 0.1, 0.05));
    f.flat = std::make_unique<FinslerMetricSpec>(
        make_finsler_spec(Family::HermitianInduced, *f.torus, flat_h(*f.torus, 2)));
    f.curved = std::make_unique<FinslerMetricSpec>(
        make_finsler_spec(Family::HermitianInduced, *f.torus, *f.h_curved));
    f.pert = std::make_unique<FinslerMetricSpec>(
        make_finsler_spec(Family::PerturbedHermitian, *f.torus, *f.h_curved, epsilon));
    return f;
}

SuiteResult identity_suite(double epsilon, uint64_t seed) {
    SuiteResult out;
    out.id = "identities";
    SuiteFixtures fx = make_suite_fixtures(epsilon);
    const std::size_t np = fx.torus->points();

    {
        RowTimer row{out, "homogeneity (Lemma identities, 100 samples/family)", 1e-8};
        Rng rng(seed);
        double worst = 0;
        for (const FinslerMetricSpec* spec : {fx.curved.get(), fx.pert.get()}) {
            for (int s = 0; s < 100; ++s) {
                const std::size_t idx = rng.next() % np;
                const VectorXcd v = random_fiber_vector(2, rng);
                const FinslerJet J = jet(*spec, idx, v);
                worst = std::max(worst, std::abs((J.Gi.transpose() * v)(0, 0) - J.G));
                worst = std::max(worst, std::abs(pair_form(J.Gv, v, v) - J.G));
                MatrixXcd C = MatrixXcd::Zero(2, 2);
                for (int k = 0; k < 2; ++k) C += v(k) * J.Gvk[k];
                worst = std::max(worst, max_abs(C));
                const cplx l{rng.uniform(0.3, 1.8), rng.uniform(-0.8, 0.8)};
                const FinslerJet Js = jet(*spec, idx, VectorXcd(l * v));
                worst = std::max(worst,
                                 std::abs(Js.G - std::norm(l) * J.G) / (std::norm(l) * J.G));
                worst = std::max(worst, (Js.Gi - std::conj(l) * J.Gi).norm());
            }
        }
        row.done(worst);
    }
    {
        RowTimer row{out, "decomposition ddbar log G = -Psi + omega_FS (100 pts/family)",
                     1e-5};
        Rng rng(seed + 1);
        double worst = 0;
        for (const FinslerMetricSpec* spec : {fx.curved.get(), fx.pert.get()})
            for (int s = 0; s < 100; ++s)
                worst = std::max(worst,
                                 decomposition_residual(
                                     *spec, project(rng.next() % np,
                                                    random_fiber_vector(2, rng))));
        row.done(worst);
    }
    {
        RowTimer row{out, "pullback q* omega_FS = omega_V (50 samples)", 1e-5};
        Rng rng(seed + 2);
        double worst = 0;
        for (int s = 0; s < 50; ++s)
            worst = std::max(
                worst, pullback_residual(*fx.pert, rng.next() % np,
                                         VectorXcd(random_fiber_vector(2, rng) *
                                                   rng.uniform(0.5, 2.0)))
                           .residual);
        row.done(worst);
    }
    {
        RowTimer row{out, "Euler degeneracy omega_V(T, Tbar) (50 samples)", 1e-8};
        Rng rng(seed + 2);
        double worst = 0;
        for (int s = 0; s < 50; ++s)
            worst = std::max(
                worst, pullback_residual(*fx.pert, rng.next() % np,
                                         VectorXcd(random_fiber_vector(2, rng) *
                                                   rng.uniform(0.5, 2.0)))
                           .euler);
        row.done(worst);
    }
    {
        RowTimer row{out, "vertical Laplacian of Psi identity (20 pts)", 1e-4};
        Rng rng(seed + 3);
        double worst = 0;
        for (int s = 0; s < 20; ++s)
            worst = std::max(worst,
                             lemma_vertical_psi_residual(
                                 *fx.curved,
                                 project(rng.next() % np, random_fiber_vector(2, rng)), 0, 0));
        row.done(worst);
    }
    {
        RowTimer row{out, "Psi: jet route vs dual-metric route (50 samples)", 1e-6};
        Rng rng(seed + 4);
        ChernCurvatureField R = chern_curvature(fx.curved->h);
        double worst = 0;
        for (int s = 0; s < 50; ++s) {
            const std::size_t idx = rng.next() % np;
            const VectorXcd v = random_fiber_vector(2, rng);
            const MatrixXcd Psi = kobayashi_curvature(*fx.curved, idx, v);
            // dual: (-Psi) = R(X, Xbar)/G with X = conj(h^{-1} v)
            MatrixXcd Hm(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) Hm(i, j) = fx.curved->h.entry(i, j, idx);
            const MatrixXcd K = Hm.inverse();
            const VectorXcd X = (K * v).conjugate();
            const double G = std::real((v.adjoint() * K * v)(0, 0));
            const cplx dual = pair_form(R.at(idx, 0, 0), X, X) / G;
            worst = std::max(worst, std::abs(-Psi(0, 0) - dual));
        }
        row.done(worst);
    }
    {
        RowTimer row{out, "(-Psi) = f_zz - f_zw f^{-1} f_wz (jet algebra, 50 pts)", 1e-6};
        Rng rng(seed + 5);
        double worst = 0;
        for (int s = 0; s < 50; ++s) {
            const ProjectivePoint pt = project(rng.next() % np, random_fiber_vector(2, rng));
            const DecompositionForms F = decomposition_forms(*fx.pert, pt);
            const MatrixXcd W = F.fs.inverse();
            MatrixXcd rhs = F.f_zz;
            for (int al = 0; al < 1; ++al)
                for (int be = 0; be < 1; ++be) {
                    cplx acc{0, 0};
                    for (int d = 0; d < 1; ++d)
                        for (int c = 0; c < 1; ++c)
                            acc += F.f_zw(al, d) * W(d, c) * std::conj(F.f_zw(be, c));
                    rhs(al, be) -= acc;
                }
            worst = std::max(worst, max_abs(MatrixXcd(rhs + F.psi)));
        }
        row.done(worst);
    }
    {
        RowTimer row{out, "vertical Laplacian: log G -> r-1, both routes", 1e-6};
        ProjectivePoint pt;
        pt.base_idx = 5;
        pt.pivot = 1;
        pt.w = VectorXcd(1);
        pt.w << cplx{0.3, -0.2};
        const double v1 = vertical_laplacian(*fx.pert, pt, [&](const VectorXcd& w) {
            ProjectivePoint q = pt;
            q.w = w;
            return std::log(G_value(*fx.pert, pt.base_idx, q.embed()));
        });
        const double v2 = vertical_laplacian_eo(
            *fx.pert, pt.base_idx, pt.embed(),
            [&](const VectorXcd& v) { return std::log(G_value(*fx.pert, pt.base_idx, v)); });
        row.done(std::max(std::abs(v1 - 1.0), std::abs(v2 - 1.0)));
    }
    {
        RowTimer row{out, "strong pseudoconvexity scan (min eigen > 0.1)", 0.1};
        row.done(pseudoconvexity_scan(*fx.pert, 1000, seed), /*invert=*/true);
    }
    return out;
}

SuiteResult positivity_suite(uint64_t seed) {
    using Family = FinslerMetricSpec::Family;
    SuiteResult out;
    out.id = "positivity";
    SuiteFixtures fx = make_suite_fixtures(0.05);
    const std::size_t np = fx.torus->points();

    {
        RowTimer row{out, "Prop-equivalence: pseudoconvex metric has fiberwise positive FS",
                     0.0};
        Rng rng(seed);
        double mn = 1e300;
        for (int s = 0; s < 60; ++s) {
            const auto F = decomposition_forms(
                *fx.pert, project(rng.next() % np, random_fiber_vector(2, rng)));
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(F.fs, Eigen::EigenvaluesOnly);
            mn = std::min(mn, es.eigenvalues()(0));
        }
        row.done(mn, /*invert=*/true);
    }
    {
        RowTimer row{out, "Prop-equivalence: broken pseudoconvexity breaks fiberwise FS",
                     0.0};
        // epsilon far beyond the admissible range
        SuiteFixtures bad = make_suite_fixtures(0.6);
        const double scan = pseudoconvexity_scan(*bad.pert, 400, seed);
        Rng rng(seed);
        double fsmin = 1e300;
        for (int s = 0; s < 400 && fsmin > 0; ++s) {
            const ProjectivePoint pt =
                project(rng.next() % np, random_fiber_vector(2, rng));
            try {
                const auto F = decomposition_forms(*bad.pert, pt);
                Eigen::SelfAdjointEigenSolver<MatrixXcd> es(F.fs, Eigen::EigenvaluesOnly);
                fsmin = std::min(fsmin, es.eigenvalues()(0));
            } catch (const Error&) {
                fsmin = -1;  // forms constructor rejected the point: positivity lost
            }
        }
        // both sides of the equivalence must fail together
        row.done((scan <= 0 && fsmin <= 0) ? -1.0 : 1.0);
    }
    {
        RowTimer row{out, "sign agreement griffiths vs oneone (positive twisted preset)",
                     0.0};
        MatrixField h = curved_h2(*fx.torus, 0.02, 0.0);
        const double twist = 0.4;
        auto spec = make_finsler_spec(Family::HermitianInduced, *fx.torus, h, 0.0, twist);
        auto rep = oneone_min_eigen_field(spec, MatrixXcd::Identity(1, 1), 4, seed);
        ChernCurvatureField R = chern_curvature(h);
        add_twist(R, h, twist);
        auto grep = griffiths_min(R, h, flat_h(*fx.torus, 1));
        row.done(std::min(rep.min_value, grep.min_value), /*invert=*/true);
    }
    {
        RowTimer row{out, "sign agreement griffiths vs oneone (mixed-sign preset)", 0.0};
        MatrixField h = curved_h2(*fx.torus, 0.1, 0.0);
        auto spec = make_finsler_spec(Family::HermitianInduced, *fx.torus, h);
        auto rep = oneone_min_eigen_field(spec, MatrixXcd::Identity(1, 1), 4, seed);
        ChernCurvatureField R = chern_curvature(h);
        auto grep = griffiths_min(R, h, flat_h(*fx.torus, 1));
        row.done(std::max(rep.min_value, grep.min_value));  // both strictly negative
    }
    {
        RowTimer row{out, "Mok terms: contraction vs basis (100 samples)", 1e-8};
        ChartGrid g2 = make_torus_chart(2, 12, "mok-t2");
        MatrixField m = potential_metric2(g2, 0.04);
        ChernCurvatureField R = chern_curvature(m);
        Rng rng(seed + 7);
        double worst = 0;
        for (int s = 0; s < 100; ++s) {
            const std::size_t p = rng.next() % g2.points();
            const auto rep = mok_terms_tm(m, R, p, random_fiber_vector(2, rng),
                                          random_fiber_vector(2, rng));
            worst = std::max(worst, std::abs(rep.term_A - rep.term_A_basis));
            worst = std::max(worst, std::abs(rep.term_B - rep.term_B_basis));
        }
        row.done(worst);
    }
    {
        RowTimer row{out, "Bando-Mok: t_value >= 0 on the FS preset (100 samples)", 0.0};
        ChartGrid g = make_disk_chart(1.25, 129, 2, "mok-fs");
        MatrixField m = fs_metric1(g);
        ChernCurvatureField R = chern_curvature(m);
        Rng rng(seed + 8);
        double worst = 1e300;
        int mi[2];
        int taken = 0;
        while (taken < 100) {
            const std::size_t p = rng.next() % g.points();
            g.unravel(p, mi);
            if (!g.owned(mi)) continue;
            ++taken;
            VectorXcd v(1), u(1);
            v << rng.cgaussian();
            u << rng.cgaussian();
            const auto rep = mok_terms_tm(m, R, p, v, u);
            const double scale = std::max(std::abs(rep.term_A), std::abs(rep.term_B));
            worst = std::min(worst, rep.t_value + 1e-6 * scale);
        }
        row.done(worst, /*invert=*/true);
    }
    {
        RowTimer row{out, "griffiths rescale h->2h, g->3g scales min by 1/6", 1e-10};
        MatrixField h = curved_h2(*fx.torus, 0.08, 0.03);
        MatrixField gb = flat_h(*fx.torus, 1);
        ChernCurvatureField R = chern_curvature(h);
        auto rep1 = griffiths_min(R, h, gb);
        MatrixField h2 = h, gb3 = gb;
        field_axpby(2.0, h, 0.0, h2);
        field_axpby(3.0, gb, 0.0, gb3);
        auto rep2 = griffiths_min(R, h2, gb3);
        row.done(std::abs(rep2.min_value - rep1.min_value / 6.0));
    }
    {
        RowTimer row{out, "argmin re-evaluation reproduces min (1e-12)", 1e-12};
        MatrixField h = curved_h2(*fx.torus, 0.1, 0.0);
        ChernCurvatureField R = chern_curvature(h);
        auto rep = griffiths_min(R, h, flat_h(*fx.torus, 1));
        row.done(std::abs(reevaluate_griffiths(R, rep) - rep.min_value));
    }
    return out;
}

SuiteResult reductions_suite(uint64_t seed) {
    SuiteResult out;
    out.id = "reductions";
    (void)seed;

    {
        RowTimer row{out, "flat-torus KR tracks e^{-(n-1)t} (t=0.5, rel)", 1e-6};
        ChartGrid g = make_torus_chart(2, 8, "red-t2");
        MatrixField m(g, 2);
        for (int i = 0; i < 2; ++i)
            for (std::size_t p = 0; p < g.points(); ++p) m.entry(i, i, p) = 1.0;
        KrFlow flow({&g}, {m});
        while (flow.t < 0.5 - 1e-12) flow.step(1e-3, Scheme::Rk4);
        double worst = 0;
        const double want = std::exp(-flow.t);
        for (std::size_t i = 0; i < flow.g[0].data.size(); ++i) {
            const cplx expect = (i / g.points() == 0 || i / g.points() == 3) ? want : 0.0;
            worst = std::max(worst, std::abs(flow.g[0].data[i] - expect) / want);
        }
        row.done(worst);
    }
    {
        RowTimer row{out, "flat HYM tracks e^{-t} (t=0.5, rel)", 1e-8};
        ChartGrid g = make_torus_chart(1, 16, "red-hym");
        MatrixField m(g, 2);
        for (int i = 0; i < 2; ++i)
            for (std::size_t p = 0; p < g.points(); ++p) m.entry(i, i, p) = 1.0;
        HymFlow flow(g, m);
        while (flow.t < 0.5 - 1e-12) flow.step(1e-3, Scheme::Rk4);
        double worst = 0;
        const double want = std::exp(-flow.t);
        for (std::size_t p = 0; p < g.points(); ++p)
            for (int i = 0; i < 2; ++i)
                worst = std::max(worst, std::abs(flow.h.entry(i, i, p) - want) / want);
        row.done(worst);
    }
    {
        RowTimer row{out, "CP1 KR tracks (1-2t) FS (t=0.2, rel)", 1e-4};
        CP1Atlas at = make_cp1_atlas(49, 2);
        KrFlow flow({at.chart0.get(), at.chart1.get()},
                    {fs_metric1(*at.chart0), fs_metric1(*at.chart1)}, &at.stitch);
        while (flow.t < 0.2 - 1e-12) flow.step(1.2e-4, Scheme::Rk4);
        double worst = 0;
        int mi[2];
        for (int c = 0; c < 2; ++c)
            for (std::size_t p = 0; p < flow.g[c].npts(); ++p) {
                flow.charts[c]->unravel(p, mi);
                if (!flow.charts[c]->owned(mi)) continue;
                const double want = (1.0 - 2.0 * flow.t) /
                                    sqr(1.0 + std::norm(flow.charts[c]->zof(mi, 0)));
                worst = std::max(worst,
                                 std::abs(flow.g[c].entry(0, 0, p).real() - want) / want);
            }
        row.done(worst);
    }
    {
        RowTimer row{out, "CP1 KR collapse detected at 0.5 (+-0.02)", 0.02};
        CP1Atlas at = make_cp1_atlas(17, 2);
        KrFlow flow({at.chart0.get(), at.chart1.get()},
                    {fs_metric1(*at.chart0), fs_metric1(*at.chart1)}, &at.stitch);
        double tstop = -1;
        try {
            while (flow.t < 0.6) flow.step(2e-5, Scheme::Rk4);
        } catch (const FlowHalt& h) {
            if (h.reason == "collapse") tstop = h.t;
        }
        row.done(tstop < 0 ? 1.0 : std::abs(tstop - 0.5));
    }
    {
        RowTimer row{out, "RK4 order on the flat KR closed form (>= 15x)", 15.0};
        auto run = [&](double dt) {
            ChartGrid g = make_torus_chart(2, 8, "red-ord");
            MatrixField m(g, 2);
            for (int i = 0; i < 2; ++i)
                for (std::size_t p = 0; p < g.points(); ++p) m.entry(i, i, p) = 1.0;
            KrFlow flow({&g}, {m});
            while (flow.t < 0.5 - 1e-12) flow.step(dt, Scheme::Rk4);
            return std::abs(flow.g[0].entry(0, 0, 0).real() - std::exp(-flow.t));
        };
        row.done(run(0.05) / run(0.025), /*invert=*/true);
    }
    {
        RowTimer row{out, "Euler forward-backward returns to O(dt^2)", 5e-5};
        ChartGrid g = make_torus_chart(1, 32, "red-rev");
        MatrixField m(g, 1);
        int mi[2];
        for (std::size_t p = 0; p < g.points(); ++p) {
            g.unravel(p, mi);
            m.entry(0, 0, p) = std::exp(0.1 * std::cos(2 * M_PI * g.coord(0, mi[0])));
        }
        KrFlow flow({&g}, {m});
        MatrixField before = flow.g[0];
        flow.step(1e-3, Scheme::Euler);
        flow.step(-1e-3, Scheme::Euler);
        double worst = 0;
        for (std::size_t i = 0; i < before.data.size(); ++i)
            worst = std::max(worst, std::abs(flow.g[0].data[i] - before.data[i]));
        row.done(worst);
    }
    {
        RowTimer row{out, "Finsler flow tracks the HYM reduction (t=0.1)", 2e-5};
        auto base = make_torus_chart(1, 16, "red-fb");
        auto b0 = make_bundle_chart(16, 1.25, 24, 2, "red-P0");
        auto b1 = make_bundle_chart(16, 1.25, 24, 2, "red-P1");
        auto st = make_bundle_stitch(b0, b1);
        MatrixField h0 = semipositive_h2(base, 0.01, 0.002);
        const double twist = semipositive_twist(base, h0, 5e-4);
        auto spec = make_finsler_spec(FinslerMetricSpec::Family::HermitianInduced, base, h0,
                                      0.0, twist);
        FinslerFlow flow(spec, b0, b1, st);
        HymFlow hym(base, spec.h, twist);
        const double dt = 5e-4;
        for (int s = 0; s < 200; ++s) {
            flow.step(dt, Scheme::Rk4);
            hym.step(dt, Scheme::Rk4);
        }
        row.done(flow.compare_to_hym(hym.h));
    }
    return out;
}

SuiteResult run_suite(const std::string& id, double epsilon, uint64_t seed) {
    if (id == "identities") return identity_suite(epsilon, seed);
    if (id == "positivity") return positivity_suite(seed);
    if (id == "reductions") return reductions_suite(seed);
    fail("unknown suite id '" + id + "' (identities | positivity | reductions)");
}

} // namespace gf
