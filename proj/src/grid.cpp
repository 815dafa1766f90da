#include "gf/grid.hpp"
#include "gf/kernels.hpp"

#include <Eigen/Dense>

namespace gf {

ChartGrid make_torus_chart(int m, int n, const std::string& id) {
    if (n < 8) fail("torus chart: resolution " + std::to_string(n) + " < 8");
    ChartGrid g;
    g.id = id;
    g.m = m;
    g.axes.assign(2 * m, AxisSpec{n, 1.0 / n, 0.0, Topology::Periodic});
    return g;
}

ChartGrid make_disk_chart(double owned_r, int n, int halo, const std::string& id) {
    if (n < 8) fail("disk chart: resolution " + std::to_string(n) + " < 8");
    if (n - 1 - 2 * halo <= 0) fail("disk chart: halo too wide for resolution");
    const double L = owned_r * (n - 1) / static_cast<double>(n - 1 - 2 * halo);
    ChartGrid g;
    g.id = id;
    g.m = 1;
    g.owned_radius = owned_r;
    g.axes.assign(2, AxisSpec{n, 2 * L / (n - 1), -L, Topology::Bounded});
    return g;
}

ChartGrid make_bundle_chart(int nbase, double owned_r, int nfiber, int halo,
                            const std::string& id) {
    ChartGrid g;
    g.id = id;
    g.m = 2;
    g.owned_radius = owned_r;
    const double L = owned_r * (nfiber - 1) / static_cast<double>(nfiber - 1 - 2 * halo);
    g.axes = {AxisSpec{nbase, 1.0 / nbase, 0.0, Topology::Periodic},
              AxisSpec{nbase, 1.0 / nbase, 0.0, Topology::Periodic},
              AxisSpec{nfiber, 2 * L / (nfiber - 1), -L, Topology::Bounded},
              AxisSpec{nfiber, 2 * L / (nfiber - 1), -L, Topology::Bounded}};
    return g;
}

void Field::check_finite(const std::string& what) const {
    const auto& k = kernels::active();
    const std::size_t bad = k.find_nonfinite(reinterpret_cast<const double*>(data.data()),
                                             data.size() * 2);
    if (bad != kernels::npos) {
        const std::size_t idx = (bad / 2) % npts();
        const int c = static_cast<int>((bad / 2) / npts());
        std::vector<int> mi(grid->axes.size());
        grid->unravel(idx, mi.data());
        std::string loc;
        for (int v : mi) loc += std::to_string(v) + ",";
        fail(what + ": non-finite value at chart '" + grid->id + "' index (" + loc +
             ") component " + std::to_string(c));
    }
}

void MatrixField::hermitize() {
    const std::size_t np = npts();
    for (int i = 0; i < r; ++i)
        for (int j = i; j < r; ++j) {
            cplx* a = comp(i * r + j);
            cplx* b = comp(j * r + i);
            if (i == j) {
                for (std::size_t p = 0; p < np; ++p) a[p] = {a[p].real(), 0.0};
            } else {
                for (std::size_t p = 0; p < np; ++p) {
                    const cplx v = 0.5 * (a[p] + std::conj(b[p]));
                    a[p] = v;
                    b[p] = std::conj(v);
                }
            }
        }
}

double MatrixField::min_eigenvalue(bool required_pd, const std::string& what) const {
    const std::size_t np = npts();
    std::vector<int> mi(grid->axes.size());
    double mn = std::numeric_limits<double>::infinity();
    Eigen::MatrixXcd H(r, r);
    for (std::size_t p = 0; p < np; ++p) {
        grid->unravel(p, mi.data());
        if (!grid->owned(mi.data())) continue;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) H(i, j) = entry(i, j, p);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
        const double lam = es.eigenvalues()(0);
        if (lam < mn) mn = lam;
        if (required_pd && lam <= 0.0) {
            std::string loc;
            for (int v : mi) loc += std::to_string(v) + ",";
            fail(what + ": matrix not positive definite (min eigenvalue " +
                 std::to_string(lam) + ") at chart '" + grid->id + "' index (" + loc + ")");
        }
    }
    return mn;
}

void field_axpy(double a, const Field& x, Field& y) {
    kernels::active().axpy(a, reinterpret_cast<const double*>(x.data.data()),
                           reinterpret_cast<double*>(y.data.data()), 2 * x.data.size());
}

void field_axpby(double a, const Field& x, double b, Field& y) {
    kernels::active().axpby(a, reinterpret_cast<const double*>(x.data.data()), b,
                            reinterpret_cast<double*>(y.data.data()), 2 * x.data.size());
}

double field_max_abs(const Field& f) {
    return std::sqrt(kernels::active().max_abs2(
        reinterpret_cast<const double*>(f.data.data()), f.data.size()));
}

} // namespace gf
