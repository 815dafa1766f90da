#include "gf/fd.hpp"
#include "gf/kernels.hpp"

#include <array>
#include <cstring>

namespace gf {
namespace {

struct Stencil {
    std::array<int, 5> rel;    // relative row offsets
    std::array<double, 5> c;   // coefficients (already divided by h powers)
    int k;
};

Stencil make_stencil(int order, double h) {
    if (order == 1)
        return {{-2, -1, 1, 2, 0},
                {1.0 / (12 * h), -8.0 / (12 * h), 8.0 / (12 * h), -1.0 / (12 * h), 0.0},
                4};
    if (order == 2) {
        // center weight balanced so the rounded coefficients sum to exactly
        // zero: constants differentiate to exact zero
        const double c0 = -1.0 / (12 * h * h), c1 = 16.0 / (12 * h * h);
        return {{-2, -1, 0, 1, 2}, {c0, c1, -2.0 * (c0 + c1), c1, c0}, 5};
    }
    fail("fd_axis: order must be 1 or 2");
}

} // namespace

void fd_axis(const Field& in, Field& out, int axis, int order) {
    const ChartGrid& g = *in.grid;
    if (axis < 0 || axis >= static_cast<int>(g.axes.size()))
        fail("fd_axis: axis " + std::to_string(axis) + " out of range for chart '" + g.id + "'");
    const AxisSpec& ax = g.axes[axis];
    if (ax.n < 8) fail("fd_axis: resolution " + std::to_string(ax.n) + " too small for stencil");
    const Stencil st = make_stencil(order, ax.h);
    const std::ptrdiff_t s = g.stride(axis);            // complex units
    const std::size_t npts = g.points();
    const std::size_t block = static_cast<std::size_t>(ax.n) * s;
    const std::size_t nblocks = npts / block;
    const auto& K = kernels::active();

    for (int comp = 0; comp < in.ncomp; ++comp) {
        const double* src = reinterpret_cast<const double*>(in.comp(comp));
        double* dst = reinterpret_cast<double*>(out.comp(comp));
        for (std::size_t b = 0; b < nblocks; ++b) {
            const std::size_t base = b * block;
            // interior rows [2, n-3]: uniform offsets, one contiguous run
            {
                std::ptrdiff_t off[5];
                double c[5];
                for (int j = 0; j < st.k; ++j) {
                    off[j] = 2 * st.rel[j] * s;
                    c[j] = st.c[j];
                }
                const std::size_t start = base + 2 * s;
                const std::size_t count = static_cast<std::size_t>(ax.n - 4) * s;
                K.combine(src + 2 * start, dst + 2 * start, 2 * count, off, c, st.k);
            }
            // edge rows
            for (int i : {0, 1, ax.n - 2, ax.n - 1}) {
                const std::size_t start = base + static_cast<std::size_t>(i) * s;
                if (ax.topo == Topology::Periodic) {
                    std::ptrdiff_t off[5];
                    double c[5];
                    for (int j = 0; j < st.k; ++j) {
                        const int iw = (i + st.rel[j] + ax.n) % ax.n;
                        off[j] = 2 * static_cast<std::ptrdiff_t>(iw - i) * s;
                        c[j] = st.c[j];
                    }
                    K.combine(src + 2 * start, dst + 2 * start,
                              2 * static_cast<std::size_t>(s), off, c, st.k);
                } else {
                    std::memset(dst + 2 * start, 0, sizeof(double) * 2 * s);
                }
            }
        }
    }
}

Field fd_axis(const Field& in, int axis, int order) {
    Field out(*in.grid, in.ncomp);
    fd_axis(in, out, axis, order);
    return out;
}

Field dz(const Field& in, int cpair) {
    Field fx = fd_axis(in, 2 * cpair, 1);
    Field fy = fd_axis(in, 2 * cpair + 1, 1);
    Field out(*in.grid, in.ncomp);
    kernels::active().holo_combine(reinterpret_cast<const double*>(fx.data.data()),
                                   reinterpret_cast<const double*>(fy.data.data()),
                                   reinterpret_cast<double*>(out.data.data()),
                                   out.data.size(), -1);
    return out;
}

Field dzbar(const Field& in, int cpair) {
    Field fx = fd_axis(in, 2 * cpair, 1);
    Field fy = fd_axis(in, 2 * cpair + 1, 1);
    Field out(*in.grid, in.ncomp);
    kernels::active().holo_combine(reinterpret_cast<const double*>(fx.data.data()),
                                   reinterpret_cast<const double*>(fy.data.data()),
                                   reinterpret_cast<double*>(out.data.data()),
                                   out.data.size(), +1);
    return out;
}

Field dzdzbar_same(const Field& in, int cpair) {
    Field fxx = fd_axis(in, 2 * cpair, 2);
    Field fyy = fd_axis(in, 2 * cpair + 1, 2);
    Field out(*in.grid, in.ncomp);
    field_axpy(0.25, fxx, out);
    field_axpy(0.25, fyy, out);
    return out;
}

} // namespace gf
