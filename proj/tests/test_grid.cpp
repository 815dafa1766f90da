#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gf/atlas.hpp"
#include "gf/fd.hpp"
#include "gf/grid.hpp"
#include "gf/linalg.hpp"
#include "gf/snapshot.hpp"

#include <cstdio>

using namespace gf;

namespace {

double max_err_first_derivative(int n) {
    ChartGrid g = make_torus_chart(1, n, "t");
    Field f(g, 1);
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            f.at(0, g.ravel(std::array<int, 2>{ix, iy}.data())) =
                std::sin(2 * M_PI * g.coord(0, ix));
    Field d = fd_axis(f, 0, 1);
    double err = 0;
    for (int ix = 0; ix < n; ++ix) {
        const double expect = 2 * M_PI * std::cos(2 * M_PI * g.coord(0, ix));
        const int mi[2] = {ix, 0};
        err = std::max(err, std::abs(d.at(0, g.ravel(mi)) - expect));
    }
    return err;
}

} // namespace

TEST_CASE("fd derivative of a constant field vanishes") {
    ChartGrid g = make_torus_chart(1, 16, "t");
    Field f(g, 2);
    for (auto& v : f.data) v = cplx{3.5, -1.25};
    for (int order : {1, 2})
        for (int axis : {0, 1}) {
            Field d = fd_axis(f, axis, order);
            CHECK(field_max_abs(d) < 1e-12);
        }
}

TEST_CASE("fd derivative converges at fourth order on sin") {
    const double e0 = max_err_first_derivative(16);
    const double e1 = max_err_first_derivative(32);
    const double e2 = max_err_first_derivative(64);
    CHECK(e0 / e1 > 15.0);
    CHECK(e1 / e2 > 15.0);
    // C h^4 bound with C = f^(5)/30 estimated from the coarse runs
    const double C = e0 * std::pow(16.0, 4);
    CHECK(e2 < 1.5 * C * std::pow(1.0 / 64, 4));
}

TEST_CASE("holomorphic derivative of z^2 on a disk chart") {
    ChartGrid g = make_disk_chart(1.25, 97, 2, "d");
    Field f(g, 1);
    int mi[2];
    for (std::size_t p = 0; p < g.points(); ++p) {
        g.unravel(p, mi);
        const cplx z = g.zof(mi, 0);
        f.at(0, p) = z * z;
    }
    Field d = dz(f, 0);
    Field db = dzbar(f, 0);
    // nearest node to 0.3 + 0.1i
    const int ix = static_cast<int>(std::lround((0.3 - g.axes[0].x0) / g.axes[0].h));
    const int iy = static_cast<int>(std::lround((0.1 - g.axes[1].x0) / g.axes[1].h));
    const int at[2] = {ix, iy};
    const cplx z0 = g.zof(at, 0);
    CHECK(std::abs(d.at(0, g.ravel(at)) - 2.0 * z0) < 1e-6);
    // Cauchy-Riemann residual of the holomorphic field
    CHECK(std::abs(db.at(0, g.ravel(at))) < 1e-6);
}

TEST_CASE("periodic axes wrap exactly") {
    ChartGrid g = make_torus_chart(1, 12, "t");
    Field f(g, 1);
    Rng rng(7);
    for (auto& v : f.data) v = rng.cgaussian();
    Field d = fd_axis(f, 0, 1);
    // derivative at row 0 must equal the stencil applied with wrapped rows
    const int n = 12;
    for (int iy = 0; iy < n; ++iy) {
        const int i0[2] = {0, iy};
        cplx expect = (f.at(0, g.ravel(std::array<int, 2>{n - 2, iy}.data())) -
                       8.0 * f.at(0, g.ravel(std::array<int, 2>{n - 1, iy}.data())) +
                       8.0 * f.at(0, g.ravel(std::array<int, 2>{1, iy}.data())) -
                       f.at(0, g.ravel(std::array<int, 2>{2, iy}.data()))) /
                      (12.0 * g.axes[0].h);
        CHECK(std::abs(d.at(0, g.ravel(i0)) - expect) < 1e-13);
    }
}

TEST_CASE("non-finite values abort with the offending index") {
    ChartGrid g = make_torus_chart(1, 8, "t");
    Field f(g, 1);
    f.at(0, 13) = cplx{1.0, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_WITH_AS(f.check_finite("test op"),
                         doctest::Contains("non-finite"), Error);
}

TEST_CASE("min_eigen_pencil examples") {
    MatrixXcd I2 = MatrixXcd::Identity(2, 2);
    CHECK(min_eigen_pencil(I2, I2) == doctest::Approx(1.0));
    CHECK(min_eigen_pencil(MatrixXcd::Zero(2, 2), I2) == doctest::Approx(0.0));
    MatrixXcd A = MatrixXcd::Zero(2, 2), M = MatrixXcd::Zero(2, 2);
    A(0, 0) = 2;
    A(1, 1) = -1;
    M(0, 0) = 1;
    M(1, 1) = 2;
    CHECK(min_eigen_pencil(A, M) == doctest::Approx(-0.5));
    MatrixXcd NotPd = -I2;
    CHECK_THROWS_AS(min_eigen_pencil(A, NotPd), Error);
}

TEST_CASE("min_eigen_pencil congruence invariance") {
    Rng rng(11);
    for (int trial = 0; trial < 12; ++trial) {
        MatrixXcd A(4, 4), M(4, 4), S(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                A(i, j) = rng.cgaussian();
                M(i, j) = rng.cgaussian();
                S(i, j) = rng.cgaussian();
            }
        A = hermitize(A);
        M = MatrixXcd(M * M.adjoint()) + 0.5 * MatrixXcd::Identity(4, 4);
        const double l0 = min_eigen_pencil(A, M);
        const double l1 = min_eigen_pencil(S.adjoint() * A * S, S.adjoint() * M * S);
        CHECK(std::abs(l0 - l1) < 1e-10 * (1.0 + std::abs(l0)));
    }
}

TEST_CASE("cp1 atlas transition consistency") {
    // F([v]) = Re(w)/(1+|w|^2) has the same chart expression in both charts
    auto fill = [](Field& f) {
        int mi[2];
        for (std::size_t p = 0; p < f.grid->points(); ++p) {
            f.grid->unravel(p, mi);
            const cplx w = f.grid->zof(mi, 0);
            f.at(0, p) = w.real() / (1.0 + std::norm(w));
        }
    };

    SUBCASE("exact transition at band points via interpolation") {
        CP1Atlas at = make_cp1_atlas(160, 2);
        Field f0(*at.chart0, 1), f1(*at.chart1, 1);
        fill(f0);
        fill(f1);
        // overlap band 0.8 <= |w| <= 1.25: chart-0 values must agree with the
        // partner evaluated at 1/w
        Rng rng(3);
        for (int k = 0; k < 40; ++k) {
            const double r = rng.uniform(0.8, 1.25);
            const double th = rng.uniform(0, 2 * M_PI);
            const cplx w = std::polar(r, th);
            const cplx own = interp_at(f0, 0, 0, w);
            const cplx other = interp_at(f1, 0, 0, 1.0 / w);
            CHECK(std::abs(own - other) < 1e-8 * std::max(1.0, std::abs(own)));
        }
    }

    SUBCASE("ghost fill from partner") {
        CP1Atlas at = make_cp1_atlas(256, 2);
        Field f0(*at.chart0, 1), f1(*at.chart1, 1);
        fill(f0);
        fill(f1);
        Field f0ref = f0;
        // poison ghosts, then sync back
        int mi[2];
        for (std::size_t p = 0; p < at.chart0->points(); ++p) {
            at.chart0->unravel(p, mi);
            if (!at.chart0->owned(mi)) f0.at(0, p) = cplx{1e9, -1e9};
        }
        at.stitch.sync(f0, f1);
        double err = 0;
        for (std::size_t p = 0; p < at.chart0->points(); ++p)
            err = std::max(err, std::abs(f0.at(0, p) - f0ref.at(0, p)));
        CHECK(err / field_max_abs(f0ref) < 1e-8);
    }

    SUBCASE("tensor sync applies transition weights") {
        CP1Atlas at = make_cp1_atlas(192, 2);
        // g = (1+|w|^2)^{-2} is the FS metric coefficient in both charts and
        // transforms with |dw/dw'|^2
        Field g0(*at.chart0, 1), g1(*at.chart1, 1);
        auto fs = [](Field& f) {
            int mi[2];
            for (std::size_t p = 0; p < f.grid->points(); ++p) {
                f.grid->unravel(p, mi);
                f.at(0, p) = 1.0 / sqr(1.0 + std::norm(f.grid->zof(mi, 0)));
            }
        };
        fs(g0);
        fs(g1);
        Field ref = g0;
        int mi[2];
        for (std::size_t p = 0; p < at.chart0->points(); ++p) {
            at.chart0->unravel(p, mi);
            if (!at.chart0->owned(mi)) g0.at(0, p) = cplx{0, 0};
        }
        at.stitch.sync(g0, g1, 1, 1);
        double err = 0;
        for (std::size_t p = 0; p < at.chart0->points(); ++p)
            err = std::max(err, std::abs(g0.at(0, p) - ref.at(0, p)));
        CHECK(err / field_max_abs(ref) < 1e-7);
    }
}

TEST_CASE("snapshot roundtrip") {
    ChartGrid g = make_torus_chart(1, 8, "t");
    Field f(g, 3);
    Rng rng(5);
    for (auto& v : f.data) v = rng.cgaussian();
    const std::string path = "/tmp/gf_snapshot_test.bin";
    save_snapshot(path, {{"field", "ij~", &f}});
    Field back(g, 3);
    load_snapshot(path, {"field"}, {&back});
    for (std::size_t i = 0; i < f.data.size(); ++i) CHECK(f.data[i] == back.data[i]);
    std::remove(path.c_str());
}
