#pragma once

#include "gf/grid.hpp"

#include <array>

namespace gf {

/// Two-chart stitching across the transition w' = 1/w. Ghost points (outside
/// the owned disk) of each chart are filled from the partner by bicubic
/// Lagrange interpolation; covariant tensor components pick up the factor
/// (dw'/dw)^p * conj(dw'/dw)^q = (-1/w^2)^p * conj(-1/w^2)^q.
struct Stitch {
    struct Entry {
        std::size_t local;                 // ghost index (fiber-local in fiber mode)
        std::array<std::size_t, 16> node;  // partner interpolation nodes
        std::array<double, 16> wgt;
        cplx w;                            // ghost's own complex coordinate
    };
    const ChartGrid* chart[2] = {nullptr, nullptr};
    std::vector<Entry> ghosts[2];          // ghosts[c]: fill chart c from partner
    bool fiber_mode = false;               // entries indexed within the fiber plane
    std::size_t base_count = 1;            // number of base points (fiber mode)
    std::size_t plane = 1;                 // fiber plane size (fiber mode)

    /// fill ghosts of both charts; p/q = holomorphic/antiholomorphic covariant
    /// index counts of each component (0,0 for scalars)
    void sync(Field& f0, Field& f1, int p = 0, int q = 0) const;
};

/// bicubic Lagrange interpolation of one component at an arbitrary coordinate
/// of a bounded pair (complex pair `cpair`); fails near the chart edge
cplx interp_at(const Field& f, int comp, int cpair, cplx w);

/// stitch two m=1 disk charts (CP^1 base atlas)
Stitch make_cp1_stitch(const ChartGrid& a, const ChartGrid& b);
/// stitch the fiber planes of two torus x disk product charts (P(E*) grid)
Stitch make_bundle_stitch(const ChartGrid& a, const ChartGrid& b);

/// CP^1 atlas bundled with its stitch tables. Charts live on the heap so that
/// fields and stitch tables can hold stable pointers.
struct CP1Atlas {
    std::unique_ptr<ChartGrid> chart0, chart1;
    Stitch stitch;
};
CP1Atlas make_cp1_atlas(int n, int halo = 2, double owned_r = 1.25);

} // namespace gf
