#pragma once

#include "gf/core.hpp"

#include <array>
#include <limits>
#include <memory>
#include <span>

namespace gf {

enum class Topology { Periodic, Bounded };

struct AxisSpec {
    int n = 0;          ///< point count
    double h = 0.0;     ///< spacing
    double x0 = 0.0;    ///< coordinate of index 0
    Topology topo = Topology::Periodic;
};

/// Discretized chart of a complex m-dimensional coordinate patch. Real axes
/// come in pairs (x_a, y_a) per complex coordinate, the last axis fastest in
/// memory. Bounded pairs (CP^1-style charts) own the disk |w| <= owned_radius;
/// points outside it are ghosts filled from the partner chart.
struct ChartGrid {
    std::string id;
    int m = 0;
    std::vector<AxisSpec> axes;                     // size 2m
    double owned_radius = std::numeric_limits<double>::infinity();

    std::size_t points() const {
        std::size_t p = 1;
        for (const auto& a : axes) p *= static_cast<std::size_t>(a.n);
        return p;
    }
    std::ptrdiff_t stride(int axis) const {
        std::ptrdiff_t s = 1;
        for (int a = static_cast<int>(axes.size()) - 1; a > axis; --a) s *= axes[a].n;
        return s;
    }
    void unravel(std::size_t idx, int* out) const {
        for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
            out[a] = static_cast<int>(idx % axes[a].n);
            idx /= axes[a].n;
        }
    }
    std::size_t ravel(const int* mi) const {
        std::size_t idx = 0;
        for (std::size_t a = 0; a < axes.size(); ++a)
            idx = idx * axes[a].n + static_cast<std::size_t>(mi[a]);
        return idx;
    }
    double coord(int axis, int i) const { return axes[axis].x0 + axes[axis].h * i; }
    /// complex coordinate of pair c at a multi-index
    cplx zof(const int* mi, int c) const {
        return {coord(2 * c, mi[2 * c]), coord(2 * c + 1, mi[2 * c + 1])};
    }
    bool bounded_pair(int c) const { return axes[2 * c].topo == Topology::Bounded; }
    /// a point is owned iff every bounded complex pair lies in the owned disk
    bool owned(const int* mi) const {
        for (int c = 0; c < m; ++c)
            if (bounded_pair(c) && std::abs(zof(mi, c)) > owned_radius + 1e-12) return false;
        return true;
    }
};

/// periodic unit-torus chart of complex dimension m with n points per real axis
ChartGrid make_torus_chart(int m, int n, const std::string& id = "torus");

/// bounded square chart for one complex coordinate, sized so that the owned
/// disk keeps `halo` stencil points inside the square: half-width
/// L = owned_r * (n-1) / (n-1-2*halo).
ChartGrid make_disk_chart(double owned_r, int n, int halo, const std::string& id);

/// product chart: periodic torus base (complex dim 1) x bounded fiber square
ChartGrid make_bundle_chart(int nbase, double owned_r, int nfiber, int halo,
                            const std::string& id);

/// Complex multi-component field over one chart; component-major storage so
/// each component is one contiguous plane (kernel-friendly).
struct Field {
    const ChartGrid* grid = nullptr;
    int ncomp = 1;
    std::vector<cplx> data;

    Field() = default;
    Field(const ChartGrid& g, int nc) : grid(&g), ncomp(nc), data(g.points() * nc, cplx{0, 0}) {}
    std::size_t npts() const { return grid->points(); }
    cplx* comp(int c) { return data.data() + static_cast<std::size_t>(c) * npts(); }
    const cplx* comp(int c) const { return data.data() + static_cast<std::size_t>(c) * npts(); }
    cplx& at(int c, std::size_t idx) { return data[static_cast<std::size_t>(c) * npts() + idx]; }
    cplx at(int c, std::size_t idx) const { return data[static_cast<std::size_t>(c) * npts() + idx]; }

    /// abort with the offending index if any entry is non-finite
    void check_finite(const std::string& what) const;
};

/// rank-r Hermitian-matrix field; component (i,j) is plane i*r+j
struct MatrixField : Field {
    int r = 0;
    MatrixField() = default;
    MatrixField(const ChartGrid& g, int rank) : Field(g, rank * rank), r(rank) {}
    cplx entry(int i, int j, std::size_t idx) const { return at(i * r + j, idx); }
    cplx& entry(int i, int j, std::size_t idx) { return at(i * r + j, idx); }
    /// H <- (H + H^dagger)/2 pointwise
    void hermitize();
    /// smallest eigenvalue over owned points; fails if not positive definite
    /// when `required` is set, naming the first offending point.
    double min_eigenvalue(bool required_pd, const std::string& what) const;
};

/// in-place linear update y <- y + a*x over whole planes
void field_axpy(double a, const Field& x, Field& y);
/// y <- a*x + b*y
void field_axpby(double a, const Field& x, double b, Field& y);
double field_max_abs(const Field& f);

} // namespace gf
