#include "gf/atlas.hpp"

namespace gf {
namespace {

// Lagrange cubic weights at fraction s in [0,1) relative to node 0 of {-1,0,1,2}
std::array<double, 4> lagrange4(double s) {
    return {-s * (s - 1) * (s - 2) / 6.0, (s + 1) * (s - 1) * (s - 2) / 2.0,
            -(s + 1) * s * (s - 2) / 2.0, (s + 1) * s * (s - 1) / 6.0};
}

// build interpolation entry for target complex coordinate wp on a 2d bounded
// pair of `partner` starting at axis `ax0`, with indices local to that plane
bool interp_entry(const ChartGrid& partner, int ax0, cplx wp, Stitch::Entry& e) {
    const AxisSpec& ax = partner.axes[ax0];
    const AxisSpec& ay = partner.axes[ax0 + 1];
    const double u = (wp.real() - ax.x0) / ax.h;
    const double v = (wp.imag() - ay.x0) / ay.h;
    const int iu = static_cast<int>(std::floor(u));
    const int iv = static_cast<int>(std::floor(v));
    if (iu - 1 < 0 || iu + 2 >= ax.n || iv - 1 < 0 || iv + 2 >= ay.n) return false;
    const auto wu = lagrange4(u - iu);
    const auto wv = lagrange4(v - iv);
    int k = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b, ++k) {
            e.node[k] = static_cast<std::size_t>(iu - 1 + a) * ay.n +
                        static_cast<std::size_t>(iv - 1 + b);
            e.wgt[k] = wu[a] * wv[b];
        }
    return true;
}

} // namespace

cplx interp_at(const Field& f, int comp, int cpair, cplx w) {
    const ChartGrid& g = *f.grid;
    Stitch::Entry e;
    if (!interp_entry(g, 2 * cpair, w, e))
        fail("interp_at: coordinate too close to edge of chart '" + g.id + "'");
    // entries are local to the bounded plane; for m=1 charts that is the whole
    // chart, which is the only use here
    if (g.m != 1) fail("interp_at: only m=1 charts supported");
    cplx acc{0, 0};
    const cplx* s = f.comp(comp);
    for (int k = 0; k < 16; ++k) acc += e.wgt[k] * s[e.node[k]];
    return acc;
}

Stitch make_cp1_stitch(const ChartGrid& a, const ChartGrid& b) {
    Stitch st;
    st.chart[0] = &a;
    st.chart[1] = &b;
    const ChartGrid* charts[2] = {&a, &b};
    for (int c = 0; c < 2; ++c) {
        const ChartGrid& g = *charts[c];
        const ChartGrid& partner = *charts[1 - c];
        int mi[2];
        for (std::size_t idx = 0; idx < g.points(); ++idx) {
            g.unravel(idx, mi);
            if (g.owned(mi)) continue;
            Stitch::Entry e;
            e.local = idx;
            e.w = g.zof(mi, 0);
            if (!interp_entry(partner, 0, 1.0 / e.w, e))
                fail("cp1 stitch: ghost |w|=" + std::to_string(std::abs(e.w)) +
                     " maps outside partner chart '" + partner.id + "'");
            st.ghosts[c].push_back(e);
        }
    }
    return st;
}

Stitch make_bundle_stitch(const ChartGrid& a, const ChartGrid& b) {
    Stitch st;
    st.chart[0] = &a;
    st.chart[1] = &b;
    st.fiber_mode = true;
    st.plane = static_cast<std::size_t>(a.axes[2].n) * a.axes[3].n;
    st.base_count = a.points() / st.plane;
    const ChartGrid* charts[2] = {&a, &b};
    for (int c = 0; c < 2; ++c) {
        const ChartGrid& g = *charts[c];
        const ChartGrid& partner = *charts[1 - c];
        for (int iwx = 0; iwx < g.axes[2].n; ++iwx)
            for (int iwy = 0; iwy < g.axes[3].n; ++iwy) {
                const cplx w{g.coord(2, iwx), g.coord(3, iwy)};
                if (std::abs(w) <= g.owned_radius + 1e-12) continue;
                Stitch::Entry e;
                e.local = static_cast<std::size_t>(iwx) * g.axes[3].n + iwy;
                e.w = w;
                if (!interp_entry(partner, 2, 1.0 / w, e))
                    fail("bundle stitch: fiber ghost maps outside partner chart");
                st.ghosts[c].push_back(e);
            }
    }
    return st;
}

void Stitch::sync(Field& f0, Field& f1, int p, int q) const {
    Field* fs[2] = {&f0, &f1};
    for (int c = 0; c < 2; ++c) {
        Field& dst = *fs[c];
        const Field& src = *fs[1 - c];
        for (const Entry& e : ghosts[c]) {
            cplx factor{1.0, 0.0}; // (dw'/dw)^p conj(dw'/dw)^q at the ghost
            if (p != 0 || q != 0) {
                const cplx dwp = -1.0 / (e.w * e.w);
                for (int i = 0; i < p; ++i) factor *= dwp;
                for (int i = 0; i < q; ++i) factor *= std::conj(dwp);
            }
            for (int comp = 0; comp < dst.ncomp; ++comp) {
                const cplx* s = src.comp(comp);
                cplx* d = dst.comp(comp);
                if (!fiber_mode) {
                    cplx acc{0, 0};
                    for (int k = 0; k < 16; ++k) acc += e.wgt[k] * s[e.node[k]];
                    d[e.local] = factor * acc;
                } else {
                    for (std::size_t bp = 0; bp < base_count; ++bp) {
                        const std::size_t off = bp * plane;
                        cplx acc{0, 0};
                        for (int k = 0; k < 16; ++k) acc += e.wgt[k] * s[off + e.node[k]];
                        d[off + e.local] = factor * acc;
                    }
                }
            }
        }
    }
}

CP1Atlas make_cp1_atlas(int n, int halo, double owned_r) {
    CP1Atlas at;
    at.chart0 = std::make_unique<ChartGrid>(make_disk_chart(owned_r, n, halo, "cp1-U0"));
    at.chart1 = std::make_unique<ChartGrid>(make_disk_chart(owned_r, n, halo, "cp1-U1"));
    at.stitch = make_cp1_stitch(*at.chart0, *at.chart1);
    return at;
}

} // namespace gf
