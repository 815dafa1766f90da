#include "gf/flows.hpp"
#include "gf/fd.hpp"
#include "gf/kernels.hpp"

#include <Eigen/Dense>

namespace gf {
namespace {

MatrixXcd matrix_at(const MatrixField& f, std::size_t idx) {
    MatrixXcd M(f.r, f.r);
    for (int i = 0; i < f.r; ++i)
        for (int j = 0; j < f.r; ++j) M(i, j) = f.entry(i, j, idx);
    return M;
}

cplx det_at(const MatrixField& f, std::size_t idx) {
    if (f.r == 1) return f.entry(0, 0, idx);
    if (f.r == 2)
        return f.entry(0, 0, idx) * f.entry(1, 1, idx) -
               f.entry(0, 1, idx) * f.entry(1, 0, idx);
    return matrix_at(f, idx).determinant();
}

// ---- real-array fourth-order stencils for the P(E*) flow ------------------

struct RealGridOps {
    const ChartGrid* g;
    // differenced 5-point pass along one axis on a flat double array
    void pass(const std::vector<double>& in, std::vector<double>& out, int axis,
              int order) const {
        const AxisSpec& ax = g->axes[axis];
        const std::ptrdiff_t s = g->stride(axis);
        const std::size_t block = static_cast<std::size_t>(ax.n) * s;
        const std::size_t nblocks = in.size() / block;
        const auto& K = kernels::active();
        double c[5];
        int rel[5], k;
        if (order == 1) {
            const double d = 1.0 / (12 * ax.h);
            c[0] = d; c[1] = -8 * d; c[2] = 8 * d; c[3] = -d;
            rel[0] = -2; rel[1] = -1; rel[2] = 1; rel[3] = 2;
            k = 4;
        } else {
            const double c0 = -1.0 / (12 * ax.h * ax.h), c1 = 16.0 / (12 * ax.h * ax.h);
            c[0] = c0; c[1] = c1; c[2] = -2.0 * (c0 + c1); c[3] = c1; c[4] = c0;
            rel[0] = -2; rel[1] = -1; rel[2] = 0; rel[3] = 1; rel[4] = 2;
            k = 5;
        }
        for (std::size_t b = 0; b < nblocks; ++b) {
            const std::size_t base = b * block;
            std::ptrdiff_t off[5];
            for (int j = 0; j < k; ++j) off[j] = rel[j] * s;
            K.combine(in.data() + base + 2 * s, out.data() + base + 2 * s,
                      static_cast<std::size_t>(ax.n - 4) * s, off, c, k);
            for (int i : {0, 1, ax.n - 2, ax.n - 1}) {
                const std::size_t start = base + static_cast<std::size_t>(i) * s;
                if (ax.topo == Topology::Periodic) {
                    std::ptrdiff_t offw[5];
                    for (int j = 0; j < k; ++j)
                        offw[j] = static_cast<std::ptrdiff_t>((i + rel[j] + ax.n) % ax.n - i) * s;
                    K.combine(in.data() + start, out.data() + start,
                              static_cast<std::size_t>(s), offw, c, k);
                } else {
                    std::fill(out.begin() + start, out.begin() + start + s, 0.0);
                }
            }
        }
    }
};

void state_axpy(double a, const std::vector<MatrixField>& x, std::vector<MatrixField>& y) {
    for (std::size_t c = 0; c < x.size(); ++c) field_axpy(a, x[c], y[c]);
}

// generic RK4/Euler over a vector<MatrixField> state
template <class RHS, class POST>
void advance(std::vector<MatrixField>& y, double dt, Scheme s, RHS&& rhs, POST&& post) {
    const std::size_t nc = y.size();
    std::vector<MatrixField> k1 = y, tmp = y;
    if (s == Scheme::Euler) {
        rhs(y, k1);
        state_axpy(dt, k1, y);
        post(y);
        return;
    }
    std::vector<MatrixField> k2 = y, k3 = y, k4 = y;
    rhs(y, k1);
    tmp = y;
    state_axpy(0.5 * dt, k1, tmp);
    post(tmp);
    rhs(tmp, k2);
    tmp = y;
    state_axpy(0.5 * dt, k2, tmp);
    post(tmp);
    rhs(tmp, k3);
    tmp = y;
    state_axpy(dt, k3, tmp);
    post(tmp);
    rhs(tmp, k4);
    state_axpy(dt / 6.0, k1, y);
    state_axpy(dt / 3.0, k2, y);
    state_axpy(dt / 3.0, k3, y);
    state_axpy(dt / 6.0, k4, y);
    post(y);
    (void)nc;
}

} // namespace

// ---- HYM ------------------------------------------------------------------

HymFlow::HymFlow(const ChartGrid& g, MatrixField h0, double twist_c, double gc)
    : base(&g), h(std::move(h0)), twist(twist_c), gconst(gc) {
    if (g.m != 1) fail("HymFlow: base must be a curve");
    h.hermitize();
    h.min_eigenvalue(true, "HymFlow(h0)");
}

void HymFlow::rhs(const MatrixField& y, MatrixField& out) const {
    ChernCurvatureField R = chern_curvature(y);
    add_twist(R, y, twist);
    const int r = y.r;
    const std::size_t np = y.npts();
    for (std::size_t p = 0; p < np; ++p)
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                out.entry(i, j, p) = -R.data.at(((0 * 1 + 0) * r + i) * r + j, p) / gconst -
                                     static_cast<double>(r - 1) * y.entry(i, j, p);
}

void HymFlow::step(double dt, Scheme s) {
    std::vector<MatrixField> y{h};
    advance(
        y, dt, s,
        [&](const std::vector<MatrixField>& yy, std::vector<MatrixField>& out) {
            rhs(yy[0], out[0]);
        },
        [&](std::vector<MatrixField>& yy) { yy[0].hermitize(); });
    h = std::move(y[0]);
    t += dt;
    ++steps;
    h.check_finite("HymFlow::step");
    const double mn = h.min_eigenvalue(false, "");
    if (mn <= 0.0)
        throw FlowHalt{"positivity_lost", t,
                       "metric eigenvalue " + std::to_string(mn) + " at t=" + std::to_string(t)};
}

PositivityReport HymFlow::probe() const {
    ChernCurvatureField R = chern_curvature(h);
    add_twist(R, h, twist);
    MatrixField gb(*base, 1);
    for (std::size_t p = 0; p < gb.npts(); ++p) gb.entry(0, 0, p) = gconst;
    PositivityReport rep = griffiths_min(R, h, gb);
    rep.time = t;
    return rep;
}

// ---- KR -------------------------------------------------------------------

KrFlow::KrFlow(std::vector<const ChartGrid*> ch, std::vector<MatrixField> g0, const Stitch* st)
    : charts(std::move(ch)), stitch(st), g(std::move(g0)) {
    det0.resize(g.size());
    for (std::size_t c = 0; c < g.size(); ++c) {
        g[c].hermitize();
        g[c].min_eigenvalue(true, "KrFlow(g0)");
        double mn = std::numeric_limits<double>::infinity();
        std::vector<int> mi(charts[c]->axes.size());
        for (std::size_t p = 0; p < g[c].npts(); ++p) {
            charts[c]->unravel(p, mi.data());
            if (!charts[c]->owned(mi.data())) continue;
            mn = std::min(mn, std::real(det_at(g[c], p)));
        }
        det0[c] = mn;
    }
}

void KrFlow::rhs(const std::vector<MatrixField>& y, std::vector<MatrixField>& out) const {
    const int n = charts[0]->m;
    for (std::size_t c = 0; c < y.size(); ++c) {
        Field ric = ricci_form(y[c]);
        const std::size_t np = y[c].npts();
        for (std::size_t p = 0; p < np; ++p)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    out[c].entry(a, b, p) =
                        -ric.at(a * n + b, p) - static_cast<double>(n - 1) * y[c].entry(a, b, p);
    }
}

void KrFlow::step(double dt, Scheme s) {
    try {
        advance(
            g, dt, s,
            [&](const std::vector<MatrixField>& yy, std::vector<MatrixField>& out) {
                rhs(yy, out);
            },
            [&](std::vector<MatrixField>& yy) {
                for (auto& f : yy) f.hermitize();
                if (stitch && yy.size() == 2) stitch->sync(yy[0], yy[1], 1, 1);
            });
    } catch (const Error& e) {
        // a stage determinant crossing zero while the accepted state is deep
        // in the shrink is the collapse making the explicit scheme break down
        if (min_det_ratio() < 0.05)
            throw FlowHalt{"collapse", t, std::string("stage breakdown: ") + e.what()};
        throw;
    }
    t += dt;
    ++steps;
    for (auto& f : g) f.check_finite("KrFlow::step");
    const double ratio = min_det_ratio();
    if (ratio < det_ratio_halt)
        throw FlowHalt{"collapse", t,
                       "min det ratio " + std::to_string(ratio) + " at t=" + std::to_string(t)};
}

double KrFlow::min_det_ratio() const {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < g.size(); ++c) {
        std::vector<int> mi(charts[c]->axes.size());
        for (std::size_t p = 0; p < g[c].npts(); ++p) {
            charts[c]->unravel(p, mi.data());
            if (!charts[c]->owned(mi.data())) continue;
            worst = std::min(worst, std::real(det_at(g[c], p)) / det0[c]);
        }
    }
    return worst;
}

PositivityReport KrFlow::probe() const {
    PositivityReport rep;
    for (std::size_t c = 0; c < g.size(); ++c) {
        ChernCurvatureField R = chern_curvature(g[c]);
        PositivityReport r1 = griffiths_min(R, g[c], g[c]);
        r1.probe = "bisectional";
        r1.argmin_chart = static_cast<int>(c);
        rep = (c == 0) ? r1 : merge_reports(rep, r1);
    }
    rep.probe = "bisectional";
    rep.time = t;
    return rep;
}

// ---- Finsler flow on P(E*) --------------------------------------------------

FinslerFlow::FinslerFlow(const FinslerMetricSpec& s0, const ChartGrid& c0, const ChartGrid& c1,
                         const Stitch& st, double gc)
    : spec0(&s0), stitch(&st), gconst(gc) {
    chart[0] = &c0;
    chart[1] = &c1;
    if (s0.rank != 2) fail("FinslerFlow: rank-2 bundles only");
    if (s0.family != FinslerMetricSpec::Family::HermitianInduced)
        fail("FinslerFlow: initial data must be Hermitian-induced");
    for (int c = 0; c < 2; ++c) {
        const ChartGrid& ch = *chart[c];
        const std::size_t np = ch.points();
        u[c].assign(np, 0.0);
        logG0[c].resize(np);
        const std::size_t nbase = spec0->base->points();
        const std::size_t plane = static_cast<std::size_t>(ch.axes[2].n) * ch.axes[3].n;
        if (np != nbase * plane)
            fail("FinslerFlow: bundle chart base does not match the spec base grid");
        int mi[4];
        for (std::size_t p = 0; p < np; ++p) {
            ch.unravel(p, mi);
            const int bmi[2] = {mi[0], mi[1]};
            const std::size_t bidx = spec0->base->ravel(bmi);
            const cplx w = ch.zof(mi, 1);
            VectorXcd v(2);
            // chart 0: pivot slot 0 (v = (1, w)); chart 1: pivot slot 1 (v = (w, 1))
            if (c == 0) {
                v << cplx{1, 0}, w;
            } else {
                v << w, cplx{1, 0};
            }
            logG0[c][p] = std::log(G_value(*spec0, bidx, v));
        }
        const int nwx = ch.axes[2].n, nwy = ch.axes[3].n;
        plane_class[c].assign(static_cast<std::size_t>(nwx) * nwy, 0);
        for (int iwx = 2; iwx <= nwx - 3; ++iwx)
            for (int iwy = 2; iwy <= nwy - 3; ++iwy) {
                const cplx w{ch.coord(2, iwx), ch.coord(3, iwy)};
                plane_class[c][static_cast<std::size_t>(iwx) * nwy + iwy] =
                    (std::abs(w) <= ch.owned_radius + 1e-12) ? 2 : 1;
            }
        for (int k = 0; k < 4; ++k) kbuf[c][k].assign(np, 0.0);
        tbuf[c].assign(np, 0.0);
    }
}

namespace {

// fused stencil sweep for the P(E*) flow: second derivatives along all four
// real axes plus the fiber first derivatives in one pass, then the mixed
// base-fiber block, then the pointwise assembly. Differenced stencils keep
// z-independent fields exactly flat.
struct BundleWork {
    std::vector<double> f, fzz, fww, fwre, fwim, zwre, zwim;
};

void bundle_analyze(const ChartGrid& ch, const std::vector<double>& u,
                    const std::vector<double>& logG0, const uint8_t* plane_cls,
                    double twist, double gconst, double t_now, BundleWork& wk,
                    std::vector<double>* rhs_out, PositivityReport* rep, int chart_id) {
    const int nx = ch.axes[0].n, ny = ch.axes[1].n;
    const int nwx = ch.axes[2].n, nwy = ch.axes[3].n;
    const std::ptrdiff_t sx = ch.stride(0), sy = ch.stride(1), swx = ch.stride(2);
    const std::size_t np = ch.points();
    const double hx = ch.axes[0].h, hw = ch.axes[2].h;
    // base spacing equal per axis, fiber spacing equal per axis (constructed so)

    wk.f.resize(np);
    for (std::size_t p = 0; p < np; ++p) wk.f[p] = u[p] + logG0[p];
    // only fiber-interior entries of the derivative planes are ever read
    wk.fzz.resize(np);
    wk.fww.resize(np);
    wk.fwre.resize(np);
    wk.fwim.resize(np);

    // wrapped offsets for the periodic base axes
    std::vector<std::ptrdiff_t> xo(5 * nx), yo(5 * ny);
    for (int i = 0; i < nx; ++i)
        for (int k = -2; k <= 2; ++k) xo[5 * i + k + 2] = ((i + k + nx) % nx - i) * sx;
    for (int i = 0; i < ny; ++i)
        for (int k = -2; k <= 2; ++k) yo[5 * i + k + 2] = ((i + k + ny) % ny - i) * sy;

    const double* f = wk.f.data();
    const auto& KK = kernels::active();
    for (int ix = 0; ix < nx; ++ix) {
        const std::ptrdiff_t* ox = &xo[5 * ix];
        for (int iy = 0; iy < ny; ++iy) {
            const std::ptrdiff_t* oy = &yo[5 * iy];
            const std::size_t rowz = (static_cast<std::size_t>(ix) * ny + iy) *
                                     static_cast<std::size_t>(nwx) * nwy;
            for (int iwx = 2; iwx <= nwx - 3; ++iwx) {
                const std::size_t p0 = rowz + static_cast<std::size_t>(iwx) * swx + 2;
                KK.bundle_sweep1(f + p0, wk.fzz.data() + p0, wk.fww.data() + p0,
                                 wk.fwre.data() + p0, wk.fwim.data() + p0,
                                 static_cast<std::size_t>(nwy - 4), ox, oy, swx, hx, hw);
            }
        }
    }
    // mixed block: f_{z wbar} = dzbar f_w (base axes periodic, full extent)
    wk.zwre.resize(np);
    wk.zwim.resize(np);
    for (int ix = 0; ix < nx; ++ix) {
        const std::ptrdiff_t* ox = &xo[5 * ix];
        for (int iy = 0; iy < ny; ++iy) {
            const std::ptrdiff_t* oy = &yo[5 * iy];
            const std::size_t rowz = (static_cast<std::size_t>(ix) * ny + iy) *
                                     static_cast<std::size_t>(nwx) * nwy;
            for (int iwx = 2; iwx <= nwx - 3; ++iwx) {
                const std::size_t p0 = rowz + static_cast<std::size_t>(iwx) * swx + 2;
                KK.bundle_sweep2(wk.fwre.data() + p0, wk.fwim.data() + p0,
                                 wk.zwre.data() + p0, wk.zwim.data() + p0,
                                 static_cast<std::size_t>(nwy - 4), ox, oy, hx);
            }
        }
    }
    // assembly: rhs and/or pencil probe over owned points
    const double halt_floor = 1e-12;
    double fww_min = std::numeric_limits<double>::infinity();
    const std::size_t plane = static_cast<std::size_t>(nwx) * nwy;
    const std::size_t nplanes = np / plane;
    for (std::size_t bp = 0; bp < nplanes; ++bp) {
        const std::size_t off = bp * plane;
        for (std::size_t q = 0; q < plane; ++q) {
            const uint8_t cls = plane_cls[q];
            if (cls == 0) continue;  // never written: k-buffers stay zero there
            const std::size_t p = off + q;
            const bool own = cls == 2;
            if (own && wk.fww[p] < fww_min) fww_min = wk.fww[p];
            if (wk.fww[p] <= halt_floor) {
                if (rhs_out) (*rhs_out)[p] = 0.0;
                continue;
            }
            const double neg_psi =
                twist + wk.fzz[p] -
                (wk.zwre[p] * wk.zwre[p] + wk.zwim[p] * wk.zwim[p]) / wk.fww[p];
            if (rhs_out) (*rhs_out)[p] = neg_psi / gconst + 1.0;
            if (rep && own) {
                const double lam = std::min(neg_psi / gconst, 1.0);
                ++rep->samples;
                rep->field_scale =
                    std::max({rep->field_scale, std::abs(neg_psi), wk.fww[p]});
                if (lam < rep->min_value) {
                    rep->min_value = lam;
                    rep->argmin_chart = chart_id;
                    rep->argmin_index = p;
                }
            }
        }
    }
    if (fww_min <= 0.0)
        throw FlowHalt{"pseudoconvexity_lost", t_now,
                       "omega_FS eigenvalue " + std::to_string(fww_min) + " on chart " + ch.id};
}

} // namespace

void FinslerFlow::rhs(const std::vector<double> y[2], std::vector<double> out[2]) const {
    static thread_local BundleWork wk;
    for (int c = 0; c < 2; ++c)
        bundle_analyze(*chart[c], y[c], logG0[c], plane_class[c].data(), spec0->twist,
                       gconst, t, wk, &out[c], nullptr, c);
}

void FinslerFlow::step(double dt, Scheme s) {
    const auto sync = [&](std::vector<double> y[2]) {
        // ghosts of u are plain scalar interpolations of the partner chart;
        // base-plane-major order keeps both fiber planes L1-resident
        for (int c = 0; c < 2; ++c) {
            const std::vector<double>& src = y[1 - c];
            std::vector<double>& dst = y[c];
            for (std::size_t bp = 0; bp < stitch->base_count; ++bp) {
                const std::size_t off = bp * stitch->plane;
                const double* sp = src.data() + off;
                double* dp = dst.data() + off;
                for (const Stitch::Entry& e : stitch->ghosts[c]) {
                    double acc = 0;
                    for (int k = 0; k < 16; ++k) acc += e.wgt[k] * sp[e.node[k]];
                    dp[e.local] = acc;
                }
            }
        }
    };
    const std::size_t n0 = u[0].size(), n1 = u[1].size();
    const auto& K = kernels::active();
    if (s == Scheme::Euler) {
        std::vector<double> kk[2] = {std::move(kbuf[0][0]), std::move(kbuf[1][0])};
        rhs(u, kk);
        K.axpy(dt, kk[0].data(), u[0].data(), n0);
        K.axpy(dt, kk[1].data(), u[1].data(), n1);
        kbuf[0][0] = std::move(kk[0]);
        kbuf[1][0] = std::move(kk[1]);
        sync(u);
    } else {
        std::vector<double> k1[2] = {std::move(kbuf[0][0]), std::move(kbuf[1][0])};
        std::vector<double> k2[2] = {std::move(kbuf[0][1]), std::move(kbuf[1][1])};
        std::vector<double> k3[2] = {std::move(kbuf[0][2]), std::move(kbuf[1][2])};
        std::vector<double> k4[2] = {std::move(kbuf[0][3]), std::move(kbuf[1][3])};
        std::vector<double> tmp[2] = {std::move(tbuf[0]), std::move(tbuf[1])};
        rhs(u, k1);
        for (int c = 0; c < 2; ++c) {
            tmp[c].assign(u[c].begin(), u[c].end());
            K.axpy(0.5 * dt, k1[c].data(), tmp[c].data(), tmp[c].size());
        }
        sync(tmp);
        rhs(tmp, k2);
        for (int c = 0; c < 2; ++c) {
            tmp[c].assign(u[c].begin(), u[c].end());
            K.axpy(0.5 * dt, k2[c].data(), tmp[c].data(), tmp[c].size());
        }
        sync(tmp);
        rhs(tmp, k3);
        for (int c = 0; c < 2; ++c) {
            tmp[c].assign(u[c].begin(), u[c].end());
            K.axpy(dt, k3[c].data(), tmp[c].data(), tmp[c].size());
        }
        sync(tmp);
        rhs(tmp, k4);
        for (int c = 0; c < 2; ++c) {
            K.axpy(dt / 6.0, k1[c].data(), u[c].data(), u[c].size());
            K.axpy(dt / 3.0, k2[c].data(), u[c].data(), u[c].size());
            K.axpy(dt / 3.0, k3[c].data(), u[c].data(), u[c].size());
            K.axpy(dt / 6.0, k4[c].data(), u[c].data(), u[c].size());
        }
        sync(u);
        for (int c = 0; c < 2; ++c) {
            kbuf[c][0] = std::move(k1[c]);
            kbuf[c][1] = std::move(k2[c]);
            kbuf[c][2] = std::move(k3[c]);
            kbuf[c][3] = std::move(k4[c]);
            tbuf[c] = std::move(tmp[c]);
        }
    }
    t += dt;
    ++steps;
    for (int c = 0; c < 2; ++c)
        if (kernels::active().find_nonfinite(u[c].data(), u[c].size()) != kernels::npos)
            fail("FinslerFlow::step: non-finite u on chart " + chart[c]->id);
}

PositivityReport FinslerFlow::probe() const {
    PositivityReport rep;
    rep.probe = "oneone_form";
    rep.time = t;
    static thread_local BundleWork wk;
    for (int c = 0; c < 2; ++c)
        bundle_analyze(*chart[c], u[c], logG0[c], plane_class[c].data(), spec0->twist,
                       gconst, t, wk, nullptr, &rep, c);
    return rep;
}

double FinslerFlow::stitching_inconsistency() const {
    // compare u on chart-0 band points against the partner value at 1/w
    double worst = 0;
    const ChartGrid& ch = *chart[0];
    const ChartGrid& pa = *chart[1];
    int mi[4];
    for (std::size_t p = 0; p < ch.points(); ++p) {
        ch.unravel(p, mi);
        const cplx w = ch.zof(mi, 1);
        const double r = std::abs(w);
        if (r < 0.8 || r > 1.25) continue;
        if ((mi[0] + mi[1]) % 7 != 0) continue;  // subsample the band
        const cplx wp = 1.0 / w;
        const double uq = (pa.axes[2].x0 + 0) * 0;  // silence unused warnings
        (void)uq;
        // bicubic interpolation of the partner fiber plane at this base point
        const AxisSpec& ax = pa.axes[2];
        const AxisSpec& ay = pa.axes[3];
        const double uu = (wp.real() - ax.x0) / ax.h;
        const double vv = (wp.imag() - ay.x0) / ay.h;
        const int iu = static_cast<int>(std::floor(uu));
        const int iv = static_cast<int>(std::floor(vv));
        if (iu - 1 < 0 || iu + 2 >= ax.n || iv - 1 < 0 || iv + 2 >= ay.n) continue;
        const double su = uu - iu, sv = vv - iv;
        const auto lag = [](double s, int k) {
            switch (k) {
                case 0: return -s * (s - 1) * (s - 2) / 6.0;
                case 1: return (s + 1) * (s - 1) * (s - 2) / 2.0;
                case 2: return -(s + 1) * s * (s - 2) / 2.0;
                default: return (s + 1) * s * (s - 1) / 6.0;
            }
        };
        const std::size_t plane = static_cast<std::size_t>(ax.n) * ay.n;
        const std::size_t bp = (static_cast<std::size_t>(mi[0]) * ch.axes[1].n + mi[1]) * plane;
        double acc = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                acc += lag(su, a) * lag(sv, b) *
                       u[1][bp + static_cast<std::size_t>(iu - 1 + a) * ay.n + (iv - 1 + b)];
        worst = std::max(worst, std::abs(u[0][p] - acc));
    }
    return worst;
}

double FinslerFlow::compare_to_hym(const MatrixField& ht) const {
    const std::size_t nbase = spec0->base->points();
    std::vector<MatrixXcd> Kt(nbase);
    for (std::size_t b = 0; b < nbase; ++b) Kt[b] = matrix_at(ht, b).inverse();
    double worst = 0;
    int mi[4];
    for (int c = 0; c < 2; ++c) {
        const ChartGrid& ch = *chart[c];
        for (std::size_t p = 0; p < ch.points(); ++p) {
            ch.unravel(p, mi);
            if (!ch.owned(mi)) continue;
            const int bmi[2] = {mi[0], mi[1]};
            const std::size_t bidx = spec0->base->ravel(bmi);
            const cplx w = ch.zof(mi, 1);
            VectorXcd v(2);
            if (c == 0) {
                v << cplx{1, 0}, w;
            } else {
                v << w, cplx{1, 0};
            }
            const double Gt = std::real((v.adjoint() * Kt[bidx] * v)(0, 0));
            const double u_hym = std::log(Gt) - logG0[c][p];
            worst = std::max(worst, std::abs(u[c][p] - u_hym));
        }
    }
    return worst;
}

double FinslerFlow::quadratic_fit_residual(std::size_t base_node) const {
    // least squares fit of e^u G0 on the chart-1 fiber (v = (w,1)) by
    // v^dag M v with Hermitian M: unknowns (M00, M11, Re M01, Im M01)
    const ChartGrid& ch = *chart[1];
    const std::size_t plane = static_cast<std::size_t>(ch.axes[2].n) * ch.axes[3].n;
    const std::size_t off = base_node * plane;
    Eigen::Matrix4d AtA = Eigen::Matrix4d::Zero();
    Eigen::Vector4d Atb = Eigen::Vector4d::Zero();
    int mi[4];
    std::vector<std::pair<std::size_t, Eigen::Vector4d>> rows;
    for (std::size_t q = 0; q < plane; ++q) {
        const std::size_t p = off + q;
        ch.unravel(p, mi);
        if (!ch.owned(mi)) continue;
        const cplx w = ch.zof(mi, 1);
        Eigen::Vector4d row;
        row << std::norm(w), 1.0, 2.0 * w.real(), 2.0 * w.imag();
        const double target = std::exp(u[1][p] + logG0[1][p]);
        AtA += row * row.transpose();
        Atb += row * target;
        rows.emplace_back(p, row);
    }
    const Eigen::Vector4d m = AtA.ldlt().solve(Atb);
    double worst = 0, scale = 0;
    for (const auto& [p, row] : rows) {
        const double target = std::exp(u[1][p] + logG0[1][p]);
        scale = std::max(scale, std::abs(target));
        worst = std::max(worst, std::abs(row.dot(m) - target));
    }
    return worst / scale;
}

// ---- maximum-principle simulator -------------------------------------------

MaxPrincipleFlow::MaxPrincipleFlow(const ChartGrid& g, MatrixField eta0, SigmaSpec sg)
    : base(&g), eta(std::move(eta0)), sigma(std::move(sg)) {
    eta.hermitize();
}

void MaxPrincipleFlow::rhs(const MatrixField& y, MatrixField& out) const {
    const int n = base->m, r = y.r;
    const std::size_t np = y.npts();
    for (auto& v : out.data) v = cplx{0, 0};
    for (int a = 0; a < n; ++a) {
        Field lap = dzdzbar_same(y, a);
        field_axpy(1.0, lap, out);
    }
    switch (sigma.kind) {
        case SigmaSpec::Kind::None:
            break;
        case SigmaSpec::Kind::ScaleField:
            for (std::size_t p = 0; p < np; ++p) {
                const double c = sigma.c.at(0, p).real();
                for (int i = 0; i < r * r; ++i) out.at(i, p) += c * y.at(i, p);
            }
            break;
        case SigmaSpec::Kind::Conjugation:
            for (std::size_t p = 0; p < np; ++p) {
                const MatrixXcd A = matrix_at(sigma.A, p);
                const MatrixXcd S = A * matrix_at(y, p) * A.adjoint();
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j) out.entry(i, j, p) += S(i, j);
            }
            break;
    }
}

void MaxPrincipleFlow::step(double dt, Scheme s) {
    std::vector<MatrixField> y{eta};
    advance(
        y, dt, s,
        [&](const std::vector<MatrixField>& yy, std::vector<MatrixField>& out) {
            rhs(yy[0], out[0]);
        },
        [&](std::vector<MatrixField>& yy) { yy[0].hermitize(); });
    eta = std::move(y[0]);
    t += dt;
    ++steps;
    eta.check_finite("MaxPrincipleFlow::step");
}

PositivityReport MaxPrincipleFlow::probe() const {
    PositivityReport rep;
    rep.probe = "oneone_form";
    rep.time = t;
    const std::size_t np = eta.npts();
    for (std::size_t p = 0; p < np; ++p) {
        const MatrixXcd M = matrix_at(eta, p);
        rep.field_scale = std::max(rep.field_scale, max_abs(M));
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(M, Eigen::ComputeEigenvectors);
        const double lam = es.eigenvalues()(0);
        ++rep.samples;
        if (lam < rep.min_value) {
            rep.min_value = lam;
            rep.argmin_index = p;
            rep.argmin_Y = es.eigenvectors().col(0);
        }
    }
    return rep;
}

} // namespace gf
