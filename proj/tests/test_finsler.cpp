#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gf/fd.hpp"
#include "gf/finsler.hpp"

using namespace gf;
using Family = FinslerMetricSpec::Family;

namespace {

// rank-2 curved Hermitian field over the torus curve:
// h = [[e^{-phi}, psi], [conj(psi), e^{phi}]], phi = amp*cos(2 pi x)
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

struct Fixtures {
    ChartGrid torus = make_torus_chart(1, 96, "torus96");
    ChartGrid torus_fine = make_torus_chart(1, 128, "torus128");
    FinslerMetricSpec flat =
        make_finsler_spec(Family::HermitianInduced, torus, flat_h(torus, 2));
    FinslerMetricSpec curved =
        make_finsler_spec(Family::HermitianInduced, torus, curved_h2(torus, 0.1, 0.05));
    FinslerMetricSpec pert = make_finsler_spec(Family::PerturbedHermitian, torus,
                                               curved_h2(torus, 0.1, 0.05), 0.05);
    FinslerMetricSpec pert_fine = make_finsler_spec(Family::PerturbedHermitian, torus_fine,
                                                    curved_h2(torus_fine, 0.1, 0.05), 0.05);
};
Fixtures& fx() {
    static Fixtures f;
    return f;
}

constexpr double kC1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};

template <class F>
cplx num_dz(F&& f, cplx at, double h, int sign) {
    cplx dx{0, 0}, dy{0, 0};
    for (int k = -2; k <= 2; ++k) {
        if (kC1[k + 2] == 0.0) continue;
        dx += kC1[k + 2] * f(at + cplx{k * h, 0});
        dy += kC1[k + 2] * f(at + cplx{0, k * h});
    }
    dx /= 12 * h;
    dy /= 12 * h;
    return 0.5 * (dx + cplx{0, 1} * static_cast<double>(sign) * dy);
}

} // namespace

TEST_CASE("flat jet matches hand values") {
    auto& f = fx();
    VectorXcd v(2);
    v << 1.0, 0.0;
    const FinslerJet J = jet(f.flat, 7, v);
    CHECK(J.G == doctest::Approx(1.0));
    CHECK(max_abs(J.Gv - MatrixXcd::Identity(2, 2)) < 1e-14);
    CHECK(J.Gz.norm() < 1e-13);
    CHECK(max_abs(J.Gzz) < 1e-13);
    CHECK(max_abs(J.Gvz[0]) < 1e-13);
}

TEST_CASE("perturbed flat value example") {
    ChartGrid g = make_torus_chart(1, 16, "t16");
    auto spec = make_finsler_spec(Family::PerturbedHermitian, g, flat_h(g, 2), 0.05);
    VectorXcd v(2);
    v << 1.0, 1.0;
    // G = H + eps Q/H = 2 + 0.05 * 2/2
    CHECK(G_value(spec, 3, v) == doctest::Approx(2.05).epsilon(1e-12));
}

TEST_CASE("homogeneity identities (Lemma-style properties)") {
    auto& f = fx();
    Rng rng(101);
    for (const FinslerMetricSpec* spec : {&f.curved, &f.pert}) {
        for (int s = 0; s < 100; ++s) {
            const std::size_t idx = rng.next() % spec->base->points();
            const VectorXcd v = random_fiber_vector(2, rng);
            const FinslerJet J = jet(*spec, idx, v);
            // G_i v^i = G, G_{i jbar} v^i vbar^j = G
            CHECK(std::abs((J.Gi.transpose() * v)(0, 0) - J.G) < 1e-8);
            CHECK(std::abs(pair_form(J.Gv, v, v) - J.G) < 1e-8);
            // third-derivative contractions vanish
            MatrixXcd C1 = MatrixXcd::Zero(2, 2), C2 = MatrixXcd::Zero(2, 2);
            for (int k = 0; k < 2; ++k) C1 += v(k) * J.Gvk[k];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int k = 0; k < 2; ++k) C2(j, k) += v(i) * J.Gvk[k](i, j);
            CHECK(max_abs(C1) < 1e-8);
            CHECK(max_abs(C2) < 1e-8);

            // scaling: G(z, lv) = |l|^2 G, G_i(z, lv) = conj(l) G_i, Gv invariant
            const cplx l{rng.uniform(0.2, 2.0), rng.uniform(-1.0, 1.0)};
            const FinslerJet Js = jet(*spec, idx, VectorXcd(l * v));
            CHECK(std::abs(Js.G - std::norm(l) * J.G) < 1e-12 * std::norm(l) * J.G);
            CHECK((Js.Gi - std::conj(l) * J.Gi).norm() < 1e-10);
            CHECK(max_abs(Js.Gv - J.Gv) < 1e-10);
            CHECK(max_abs(MatrixXcd(hermitize(Js.Gv) - Js.Gv)) < 1e-14);
        }
    }
}

TEST_CASE("jet fiber derivatives match numeric differentiation") {
    auto& f = fx();
    Rng rng(7);
    const double h = 1e-3;
    for (int trial = 0; trial < 4; ++trial) {
        const std::size_t idx = rng.next() % f.pert.base->points();
        VectorXcd v = random_fiber_vector(2, rng) * rng.uniform(0.7, 1.5);
        const FinslerJet J = jet(f.pert, idx, v);
        for (int i = 0; i < 2; ++i) {
            const cplx gi = num_dz(
                [&](cplx vi) {
                    VectorXcd vv = v;
                    vv(i) = vi;
                    return cplx{G_value(f.pert, idx, vv), 0};
                },
                v(i), h, -1);
            CHECK(std::abs(gi - J.Gi(i)) < 1e-8);
            for (int j = 0; j < 2; ++j) {
                const cplx gv = num_dz(
                    [&](cplx vj) {
                        VectorXcd vv = v;
                        vv(j) = vj;
                        return jet(f.pert, idx, vv).Gi(i);
                    },
                    v(j), h, +1);
                CHECK(std::abs(gv - J.Gv(i, j)) < 1e-7);
                for (int k = 0; k < 2; ++k) {
                    const cplx gvk = num_dz(
                        [&](cplx vk) {
                            VectorXcd vv = v;
                            vv(k) = vk;
                            return jet(f.pert, idx, vv).Gv(i, j);
                        },
                        v(k), h, -1);
                    CHECK(std::abs(gvk - J.Gvk[k](i, j)) < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("jet base derivatives match nested node differentiation") {
    // fine grid so the chain-rule path and direct nested FD of G agree closely
    auto& f = fx();
    const FinslerMetricSpec& spec = f.pert_fine;
    const ChartGrid& g = *spec.base;
    Rng rng(19);
    auto shift = [&](std::size_t idx, int axis, int k) {
        int mi[2];
        g.unravel(idx, mi);
        mi[axis] = (mi[axis] + k + g.axes[axis].n) % g.axes[axis].n;
        return g.ravel(mi);
    };
    auto node_d1 = [&](std::size_t idx, int axis, auto&& fn) {
        cplx acc{0, 0};
        for (int k = -2; k <= 2; ++k)
            if (kC1[k + 2] != 0.0) acc += kC1[k + 2] * fn(shift(idx, axis, k));
        return acc / (12.0 * g.axes[axis].h);
    };
    auto node_dz1 = [&](std::size_t idx, int sign, auto&& fn) {
        return 0.5 * (node_d1(idx, 0, fn) +
                      cplx{0, 1} * static_cast<double>(sign) * node_d1(idx, 1, fn));
    };
    for (int trial = 0; trial < 3; ++trial) {
        const std::size_t idx = rng.next() % g.points();
        const VectorXcd v = random_fiber_vector(2, rng);
        const FinslerJet J = jet(spec, idx, v);
        const cplx gz =
            node_dz1(idx, -1, [&](std::size_t q) { return cplx{G_value(spec, q, v), 0}; });
        CHECK(std::abs(gz - J.Gz(0)) < 1e-6);
        const cplx gzz = node_dz1(idx, -1, [&](std::size_t qa) {
            return node_dz1(qa, +1,
                            [&](std::size_t qb) { return cplx{G_value(spec, qb, v), 0}; });
        });
        CHECK(std::abs(gzz - J.Gzz(0, 0)) < 1e-5);
        for (int i = 0; i < 2; ++i) {
            const cplx giz =
                node_dz1(idx, -1, [&](std::size_t q) { return jet(spec, q, v).Gi(i); });
            CHECK(std::abs(giz - J.Giz(i, 0)) < 1e-6);
            const cplx gzj = node_dz1(idx, -1, [&](std::size_t q) {
                return std::conj(jet(spec, q, v).Gi(i));
            });
            CHECK(std::abs(gzj - J.Gzj(0, i)) < 1e-6);
            for (int j = 0; j < 2; ++j) {
                const cplx gvz =
                    node_dz1(idx, -1, [&](std::size_t q) { return jet(spec, q, v).Gv(i, j); });
                CHECK(std::abs(gvz - J.Gvz[0](i, j)) < 1e-6);
                const cplx gvzz = node_dz1(idx, -1, [&](std::size_t qa) {
                    return node_dz1(qa, +1,
                                    [&](std::size_t qb) { return jet(spec, qb, v).Gv(i, j); });
                });
                CHECK(std::abs(gvzz - J.Gvzz[0](i, j)) < 1e-5);
            }
        }
    }
}

TEST_CASE("kobayashi curvature of a line bundle over the torus") {
    // Input field h = e^{-phi} on E gives G = e^{phi}|v|^2 on E*; horizontally
    // -Psi = ddbar log G, so Psi_{z zbar} = -d2 phi/dz dzbar, independent of v.
    ChartGrid g = make_torus_chart(1, 96, "t96lb");
    MatrixField h(g, 1);
    int mi[2];
    for (std::size_t p = 0; p < g.points(); ++p) {
        g.unravel(p, mi);
        h.entry(0, 0, p) = std::exp(-0.1 * std::cos(2 * M_PI * g.coord(0, mi[0])));
    }
    auto spec = make_finsler_spec(Family::HermitianInduced, g, h);
    Rng rng(3);
    for (int s = 0; s < 20; ++s) {
        const std::size_t idx = rng.next() % g.points();
        g.unravel(idx, mi);
        const double phizz = -0.1 * sqr(M_PI) * std::cos(2 * M_PI * g.coord(0, mi[0]));
        VectorXcd v(1);
        v << rng.cgaussian();
        const MatrixXcd Psi = kobayashi_curvature(spec, idx, v);
        CHECK(std::abs(Psi(0, 0) - (-phizz)) < 1e-5);
    }
}

TEST_CASE("decomposition residual") {
    auto& f = fx();
    Rng rng(23);

    SUBCASE("flat metric: both sides reduce to the fiber FS form") {
        for (int s = 0; s < 5; ++s) {
            const std::size_t idx = rng.next() % f.flat.base->points();
            const ProjectivePoint pt = project(idx, random_fiber_vector(2, rng));
            CHECK(decomposition_residual(f.flat, pt) < 1e-8);
        }
    }
    SUBCASE("curved + perturbed metrics") {
        for (const FinslerMetricSpec* spec : {&f.curved, &f.pert}) {
            double worst = 0;
            for (int s = 0; s < 10; ++s) {
                const std::size_t idx = rng.next() % spec->base->points();
                const ProjectivePoint pt = project(idx, random_fiber_vector(2, rng));
                worst = std::max(worst, decomposition_residual(*spec, pt));
            }
            CHECK(worst < 1e-5);
        }
    }
    SUBCASE("rank-1 bundle: residual reduces to the horizontal identity") {
        ChartGrid g = make_torus_chart(1, 96, "t96r1");
        MatrixField h(g, 1);
        int mi[2];
        for (std::size_t p = 0; p < g.points(); ++p) {
            g.unravel(p, mi);
            h.entry(0, 0, p) = std::exp(-0.1 * std::cos(2 * M_PI * g.coord(0, mi[0])));
        }
        auto spec = make_finsler_spec(Family::HermitianInduced, g, h);
        for (int s = 0; s < 5; ++s) {
            ProjectivePoint pt;
            pt.base_idx = rng.next() % g.points();
            pt.pivot = 0;
            pt.w = VectorXcd(0);
            CHECK(decomposition_residual(spec, pt) < 1e-5);
        }
    }
}

TEST_CASE("pullback residual and Euler degeneracy") {
    auto& f = fx();
    Rng rng(29);
    SUBCASE("flat") {
        for (int s = 0; s < 5; ++s) {
            const auto res =
                pullback_residual(f.flat, rng.next() % f.flat.base->points(),
                                  VectorXcd(random_fiber_vector(2, rng) * rng.uniform(0.5, 2.0)));
            CHECK(res.residual < 1e-10);
            CHECK(res.euler < 1e-8);
        }
    }
    SUBCASE("perturbed, 50 random samples") {
        double worst = 0, worst_euler = 0;
        for (int s = 0; s < 50; ++s) {
            const auto res =
                pullback_residual(f.pert, rng.next() % f.pert.base->points(),
                                  VectorXcd(random_fiber_vector(2, rng) * rng.uniform(0.5, 2.0)));
            worst = std::max(worst, res.residual);
            worst_euler = std::max(worst_euler, res.euler);
        }
        CHECK(worst < 1e-5);
        CHECK(worst_euler < 1e-8);
    }
}

TEST_CASE("vertical laplacian") {
    auto& f = fx();
    ProjectivePoint pt;
    pt.base_idx = 5;
    pt.pivot = 1;
    pt.w = VectorXcd(1);
    pt.w << cplx{0.3, -0.2};

    SUBCASE("log G gives r - 1") {
        const double val = vertical_laplacian(f.pert, pt, [&](const VectorXcd& w) {
            ProjectivePoint q = pt;
            q.w = w;
            return std::log(G_value(f.pert, pt.base_idx, q.embed()));
        });
        CHECK(val == doctest::Approx(1.0).epsilon(1e-6));
        const VectorXcd v0 = pt.embed();
        const double val_eo = vertical_laplacian_eo(
            f.pert, pt.base_idx, v0,
            [&](const VectorXcd& v) { return std::log(G_value(f.pert, pt.base_idx, v)); });
        CHECK(val_eo == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("constant gives 0") {
        CHECK(vertical_laplacian(f.curved, pt, [](const VectorXcd&) { return 2.5; }) ==
              doctest::Approx(0.0).epsilon(1e-10));
    }
    SUBCASE("FS potential at the origin of a flat fiber") {
        ProjectivePoint o = pt;
        o.w(0) = cplx{0, 0};
        const double val = vertical_laplacian(f.flat, o, [](const VectorXcd& w) {
            const double n2 = w.squaredNorm();
            return n2 / (1.0 + n2);
        });
        CHECK(val == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("vertical-Laplacian-of-Psi identity") {
    auto& f = fx();
    Rng rng(31);
    SUBCASE("flat: both sides vanish") {
        ProjectivePoint pt;
        pt.base_idx = 11;
        pt.pivot = 0;
        pt.w = VectorXcd(1);
        pt.w << cplx{0.4, 0.1};
        CHECK(lemma_vertical_psi_residual(f.flat, pt, 0, 0) < 1e-9);
    }
    SUBCASE("curved rank-2") {
        double worst = 0;
        for (int s = 0; s < 5; ++s) {
            const ProjectivePoint pt =
                project(rng.next() % f.curved.base->points(), random_fiber_vector(2, rng));
            worst = std::max(worst, lemma_vertical_psi_residual(f.curved, pt, 0, 0));
        }
        CHECK(worst < 1e-4);
    }
    SUBCASE("rank-1: identically zero") {
        ChartGrid g = make_torus_chart(1, 16, "t16r1");
        auto spec = make_finsler_spec(Family::HermitianInduced, g, flat_h(g, 1));
        ProjectivePoint pt;
        pt.base_idx = 0;
        pt.pivot = 0;
        pt.w = VectorXcd(0);
        CHECK(lemma_vertical_psi_residual(spec, pt, 0, 0) == 0.0);
    }
}

TEST_CASE("pseudoconvexity scan thresholds") {
    auto& f = fx();
    CHECK(pseudoconvexity_scan(f.pert, 1000, 12345) > 0.1);
}
