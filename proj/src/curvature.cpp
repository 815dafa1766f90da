#include "gf/curvature.hpp"
#include "gf/fd.hpp"

#include <json.hpp>

namespace gf {
namespace {

cplx det_at(const MatrixField& f, std::size_t idx) {
    if (f.r == 1) return f.entry(0, 0, idx);
    if (f.r == 2)
        return f.entry(0, 0, idx) * f.entry(1, 1, idx) -
               f.entry(0, 1, idx) * f.entry(1, 0, idx);
    MatrixXcd M(f.r, f.r);
    for (int i = 0; i < f.r; ++i)
        for (int j = 0; j < f.r; ++j) M(i, j) = f.entry(i, j, idx);
    return M.determinant();
}

MatrixXcd matrix_at(const MatrixField& f, std::size_t idx) {
    MatrixXcd M(f.r, f.r);
    for (int i = 0; i < f.r; ++i)
        for (int j = 0; j < f.r; ++j) M(i, j) = f.entry(i, j, idx);
    return M;
}

// Halton-driven unit vector in C^r, normalized against the Q-form metric H
VectorXcd halton_direction(int r, uint64_t k, int prime_offset, const MatrixXcd& H) {
    static const uint32_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    VectorXcd x(r);
    for (int i = 0; i < r; ++i) {
        const double u1 = std::max(halton(k, primes[(prime_offset + 2 * i) % 8]), 1e-12);
        const double u2 = halton(k, primes[(prime_offset + 2 * i + 1) % 8]);
        const double rr = std::sqrt(-2.0 * std::log(u1));
        x(i) = cplx{rr * std::cos(2 * M_PI * u2), rr * std::sin(2 * M_PI * u2)};
    }
    const double nr = std::sqrt(std::real(pair_form(H, x, x)));
    return x / nr;
}

} // namespace

ChernCurvatureField chern_curvature(const MatrixField& h) {
    const ChartGrid& g = *h.grid;
    const int r = h.r, n = g.m;
    const std::size_t np = g.points();
    h.check_finite("chern_curvature(h)");
    h.min_eigenvalue(true, "chern_curvature(h)");

    // pointwise inverse
    MatrixField K(g, r);
    if (r == 2) {
        for (std::size_t p = 0; p < np; ++p) {
            const cplx a = h.entry(0, 0, p), b = h.entry(0, 1, p);
            const cplx cc = h.entry(1, 0, p), d = h.entry(1, 1, p);
            const cplx det = a * d - b * cc;
            K.entry(0, 0, p) = d / det;
            K.entry(0, 1, p) = -b / det;
            K.entry(1, 0, p) = -cc / det;
            K.entry(1, 1, p) = a / det;
        }
    } else if (r == 1) {
        for (std::size_t p = 0; p < np; ++p) K.entry(0, 0, p) = 1.0 / h.entry(0, 0, p);
    } else {
        for (std::size_t p = 0; p < np; ++p) {
            const MatrixXcd Kp = matrix_at(h, p).inverse();
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j) K.entry(i, j, p) = Kp(i, j);
        }
    }
    std::vector<Field> dh(n), dhb(n);
    for (int a = 0; a < n; ++a) {
        dh[a] = dz(h, a);
        dhb[a] = dzbar(h, a);
    }

    ChernCurvatureField R;
    R.grid = &g;
    R.r = r;
    R.n = n;
    R.data = Field(g, r * r * n * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Field dd = (a == b) ? dzdzbar_same(h, a) : dzbar(dh[a], b);
            for (std::size_t p = 0; p < np; ++p) {
                MatrixXcd dH(r, r), dHb(r, r), dDH(r, r);
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j) {
                        dH(i, j) = dh[a].at(i * r + j, p);
                        dHb(i, j) = dhb[b].at(i * r + j, p);
                        dDH(i, j) = dd.at(i * r + j, p);
                    }
                const MatrixXcd Rab = -dDH + dH * matrix_at(K, p) * dHb;
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j)
                        R.data.at(((a * n + b) * r + i) * r + j, p) = Rab(i, j);
            }
        }
    // enforce R_{i jbar a bbar} = conj(R_{j ibar b abar}) by averaging
    for (std::size_t p = 0; p < np; ++p)
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b)
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j) {
                        if (a == b && j < i) continue;
                        const int c1 = ((a * n + b) * r + i) * r + j;
                        const int c2 = ((b * n + a) * r + j) * r + i;
                        const cplx v = 0.5 * (R.data.at(c1, p) + std::conj(R.data.at(c2, p)));
                        R.data.at(c1, p) = v;
                        R.data.at(c2, p) = std::conj(v);
                    }
    R.data.check_finite("chern_curvature");
    return R;
}

void add_twist(ChernCurvatureField& R, const MatrixField& h, double c) {
    if (c == 0.0) return;
    const std::size_t np = h.npts();
    for (int a = 0; a < R.n; ++a)
        for (std::size_t p = 0; p < np; ++p)
            for (int i = 0; i < R.r; ++i)
                for (int j = 0; j < R.r; ++j)
                    R.data.at(((a * R.n + a) * R.r + i) * R.r + j, p) += c * h.entry(i, j, p);
}

Field ricci_form(const MatrixField& g) {
    const ChartGrid& gr = *g.grid;
    const int n = gr.m;
    const std::size_t np = gr.points();
    Field logdet(gr, 1);
    for (std::size_t p = 0; p < np; ++p) {
        const double det = std::real(det_at(g, p));
        if (!(det > 1e-300)) {
            std::vector<int> mi(gr.axes.size());
            gr.unravel(p, mi.data());
            std::string loc;
            for (int v : mi) loc += std::to_string(v) + ",";
            fail("ricci_form: determinant underflow (collapse, det=" + std::to_string(det) +
                 ") at chart '" + gr.id + "' index (" + loc + ")");
        }
        logdet.at(0, p) = std::log(det);
    }
    Field ric(gr, n * n);
    for (int a = 0; a < n; ++a) {
        const Field da = dz(logdet, a);
        for (int b = 0; b < n; ++b) {
            Field dd = (a == b) ? dzdzbar_same(logdet, a) : dzbar(da, b);
            for (std::size_t p = 0; p < np; ++p) ric.at(a * n + b, p) = -dd.at(0, p);
        }
    }
    return ric;
}

Field gaussian_curvature(const Field& g) {
    const ChartGrid& gr = *g.grid;
    if (gr.m != 1) fail("gaussian_curvature: defined on curves only");
    const std::size_t np = gr.points();
    Field lg(gr, 1);
    for (std::size_t p = 0; p < np; ++p) {
        const double v = g.at(0, p).real();
        if (!(v > 0)) fail("gaussian_curvature: metric not positive");
        lg.at(0, p) = std::log(v);
    }
    Field dd = dzdzbar_same(lg, 0);
    Field K(gr, 1);
    for (std::size_t p = 0; p < np; ++p)
        K.at(0, p) = -dd.at(0, p).real() / g.at(0, p).real();
    return K;
}

namespace {

double grif_value(const ChernCurvatureField& R, std::size_t p, const VectorXcd& X,
                  const VectorXcd& Y) {
    cplx acc{0, 0};
    for (int a = 0; a < R.n; ++a)
        for (int b = 0; b < R.n; ++b)
            acc += pair_form(R.at(p, a, b), X, X) * Y(a) * std::conj(Y(b));
    return std::real(acc);
}

// min over h-unit X at fixed Y of the Griffiths pairing: a Q-form pencil
std::pair<double, VectorXcd> min_over_fiber(const ChernCurvatureField& R, std::size_t p,
                                            const MatrixXcd& H, const VectorXcd& Y) {
    MatrixXcd M = MatrixXcd::Zero(R.r, R.r);
    for (int a = 0; a < R.n; ++a)
        for (int b = 0; b < R.n; ++b) M += R.at(p, a, b) * Y(a) * std::conj(Y(b));
    M = hermitize(M);
    // Q-form pencil (M, H): pass transposes to the standard Hermitian solver
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> es(M.transpose(), H.transpose());
    VectorXcd x = es.eigenvectors().col(0).conjugate();
    x /= std::sqrt(std::real(pair_form(H, x, x)));
    return {es.eigenvalues()(0), x};
}

} // namespace

PositivityReport griffiths_min(const ChernCurvatureField& R, const MatrixField& h,
                               const MatrixField& g, const SampleCfg& cfg) {
    const ChartGrid& gr = *R.grid;
    const int r = R.r, n = R.n;
    PositivityReport rep;
    rep.probe = "griffiths";
    if (field_max_abs(R.data) == 0.0) {
        // exactly flat curvature: the pairing vanishes for every direction
        rep.min_value = 0.0;
        rep.samples = static_cast<int>(gr.points());
        rep.argmin_X = VectorXcd::Zero(r);
        rep.argmin_Y = VectorXcd::Zero(n);
        rep.argmin_X(0) = 1.0 / std::sqrt(std::real(matrix_at(h, 0)(0, 0)));
        rep.argmin_Y(0) = 1.0 / std::sqrt(std::real(matrix_at(g, 0)(0, 0)));
        return rep;
    }
    std::vector<int> mi(gr.axes.size());
    std::size_t visit = 0;
    for (std::size_t p = 0; p < gr.points(); ++p) {
        gr.unravel(p, mi.data());
        if (!gr.owned(mi.data())) continue;
        if ((visit++ % static_cast<std::size_t>(cfg.point_stride)) != 0) continue;
        const MatrixXcd H = matrix_at(h, p);
        const MatrixXcd Gm = matrix_at(g, p);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                rep.field_scale = std::max(rep.field_scale, max_abs(R.at(p, a, b)));

        double best;
        VectorXcd bx, by;
        if (n == 1) {
            VectorXcd Y(1);
            Y << 1.0 / std::sqrt(std::real(Gm(0, 0)));
            auto [val, x] = min_over_fiber(R, p, H, Y);
            best = val;
            bx = x;
            by = Y;
        } else if (r == 1) {
            // swap roles: minimize over base directions with X fixed scalar
            MatrixXcd M(n, n);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) M(a, b) = R.at(p, a, b)(0, 0) / std::real(H(0, 0));
            Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> es(hermitize(M).transpose(),
                                                                   Gm.transpose());
            VectorXcd y = es.eigenvectors().col(0).conjugate();
            y /= std::sqrt(std::real(pair_form(Gm, y, y)));
            best = es.eigenvalues()(0);
            bx = VectorXcd(1);
            bx << 1.0 / std::sqrt(std::real(H(0, 0)));
            by = y;
        } else {
            // low-discrepancy sampling over both spheres + refinement of the best
            best = std::numeric_limits<double>::infinity();
            const int nf = cfg.fiber_dirs, nb = cfg.base_dirs;
            for (int kb = 0; kb < nb; ++kb) {
                const VectorXcd Y = halton_direction(n, kb, 4, Gm);
                auto [val, x] = min_over_fiber(R, p, H, Y);
                if (val < best) {
                    best = val;
                    bx = x;
                    by = Y;
                }
            }
            (void)nf;
            // projected gradient descent on the base direction
            double step = cfg.refine_step;
            for (int it = 0; it < cfg.refine_iters; ++it) {
                VectorXcd WY = VectorXcd::Zero(n);
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        WY(b) += pair_form(R.at(p, a, b), bx, bx) * by(a);
                VectorXcd d = -WY.conjugate();
                const cplx along = pair_form(Gm, d, by);
                d -= along * by;
                VectorXcd Yn = by + step * d;
                Yn /= std::sqrt(std::real(pair_form(Gm, Yn, Yn)));
                auto [val, x] = min_over_fiber(R, p, H, Yn);
                if (val < best - 1e-15) {
                    best = val;
                    bx = x;
                    by = Yn;
                } else {
                    step *= 0.5;
                }
            }
        }
        ++rep.samples;
        if (best < rep.min_value) {
            rep.min_value = best;
            rep.argmin_index = p;
            rep.argmin_X = bx;
            rep.argmin_Y = by;
        }
    }
    return rep;
}

PositivityReport merge_reports(const PositivityReport& a, const PositivityReport& b) {
    PositivityReport m = (a.min_value <= b.min_value) ? a : b;
    if (b.min_value < a.min_value) m.argmin_chart = 1;
    m.samples = a.samples + b.samples;
    m.field_scale = std::max(a.field_scale, b.field_scale);
    return m;
}

double reevaluate_griffiths(const ChernCurvatureField& R, const PositivityReport& rep) {
    return grif_value(R, rep.argmin_index, rep.argmin_X, rep.argmin_Y);
}

PositivityReport oneone_min_eigen_field(const FinslerMetricSpec& spec, const MatrixXcd& g_base,
                                        int fiber_samples, uint64_t seed) {
    const ChartGrid& gr = *spec.base;
    const int n = spec.n(), r = spec.rank;
    const int dim = n + r - 1;
    PositivityReport rep;
    rep.probe = "oneone_form";
    Rng rng(seed);
    const MatrixXcd I = MatrixXcd::Identity(r, r);
    for (std::size_t p = 0; p < gr.points(); ++p) {
        for (int s = 0; s < fiber_samples; ++s) {
            const VectorXcd v = random_fiber_vector(r, rng);
            const ProjectivePoint pt = project(p, v);
            const DecompositionForms F = decomposition_forms(spec, pt);
            MatrixXcd M = MatrixXcd::Zero(dim, dim), Om = MatrixXcd::Zero(dim, dim);
            const int m1 = r - 1;
            for (int al = 0; al < n; ++al)
                for (int be = 0; be < n; ++be) {
                    cplx nn{0, 0};
                    for (int c = 0; c < m1; ++c)
                        for (int d = 0; d < m1; ++d)
                            nn += F.conn(c, al) * F.fs(c, d) * std::conj(F.conn(d, be));
                    M(al, be) = -F.psi(al, be) + nn;
                    Om(al, be) = g_base(al, be) + nn;
                }
            for (int al = 0; al < n; ++al)
                for (int b = 0; b < m1; ++b) {
                    cplx t{0, 0};
                    for (int c = 0; c < m1; ++c) t += F.conn(c, al) * F.fs(c, b);
                    M(al, n + b) = t;
                    M(n + b, al) = std::conj(t);
                    Om(al, n + b) = t;
                    Om(n + b, al) = std::conj(t);
                }
            for (int a = 0; a < m1; ++a)
                for (int b = 0; b < m1; ++b) {
                    M(n + a, n + b) = F.fs(a, b);
                    Om(n + a, n + b) = F.fs(a, b);
                }
            // Q-form pencil min eigenvalue (transpose to the standard problem)
            Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> es(
                hermitize(M).transpose(), hermitize(Om).transpose());
            const double lam = es.eigenvalues()(0);
            rep.field_scale = std::max(rep.field_scale, max_abs(M));
            ++rep.samples;
            if (lam < rep.min_value) {
                rep.min_value = lam;
                rep.argmin_index = p;
                rep.argmin_X = v;
                rep.argmin_Y = es.eigenvectors().col(0).conjugate();
            }
        }
        (void)I;
    }
    return rep;
}

MokTermReport mok_terms_tm(const MatrixField& g, const ChernCurvatureField& R,
                           std::size_t idx, const VectorXcd& v, const VectorXcd& u) {
    const int n = R.n;
    MokTermReport out;
    out.base_idx = idx;
    out.v = v;
    out.u = u;
    const MatrixXcd H = matrix_at(g, idx);
    const MatrixXcd K = H.inverse();
    const MatrixXcd KT = K.transpose();
    const VectorXcd X = (K * v).conjugate();
    const double G = std::real((v.adjoint() * K * v)(0, 0));
    const VectorXcd V = X / std::sqrt(G);

    MatrixXcd negPsi(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) negPsi(a, b) = pair_form(R.at(idx, a, b), X, X) / G;

    // term A: (-Psi)_{a dbar} g^{a bbar} g^{c dbar} R_{c bbar s tbar} u^s ubar^t
    cplx tA{0, 0};
    for (int a = 0; a < n; ++a)
        for (int d = 0; d < n; ++d)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int s = 0; s < n; ++s)
                        for (int t = 0; t < n; ++t)
                            tA += negPsi(a, d) * KT(a, b) * KT(c, d) *
                                  R.at(idx, s, t)(c, b) * u(s) * std::conj(u(t));
    out.term_A = std::real(tA);

    // term B: T(l,t) = R_{m lbar s tbar} V^m u^s, contracted with two inverse metrics
    MatrixXcd Tm(n, n);
    for (int l = 0; l < n; ++l)
        for (int t = 0; t < n; ++t) {
            cplx acc{0, 0};
            for (int m = 0; m < n; ++m)
                for (int s = 0; s < n; ++s) acc += R.at(idx, s, t)(m, l) * V(m) * u(s);
            Tm(l, t) = acc;
        }
    cplx tB{0, 0};
    for (int l = 0; l < n; ++l)
        for (int t = 0; t < n; ++t)
            for (int lp = 0; lp < n; ++lp)
                for (int tp = 0; tp < n; ++tp)
                    tB += Tm(l, t) * std::conj(Tm(lp, tp)) * K(l, lp) * K(t, tp);
    out.term_B = std::real(tB);

    // orthonormal-basis re-expressions
    const MatrixXcd E = orthonormal_rows(H);
    const auto Rq = [&](const VectorXcd& A, const VectorXcd& B, const VectorXcd& C,
                        const VectorXcd& D) {
        cplx acc{0, 0};
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) acc += pair_form(R.at(idx, a, b), A, B) * C(a) * std::conj(D(b));
        return acc;
    };
    cplx tAb{0, 0};
    double tBb = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const VectorXcd ea = E.row(a).transpose();
            const VectorXcd eb = E.row(b).transpose();
            tAb += Rq(V, V, ea, eb) * Rq(eb, ea, u, u);
            tBb += std::norm(Rq(V, ea, u, eb));
        }
    out.term_A_basis = std::real(tAb);
    out.term_B_basis = tBb;
    out.t_value = out.term_A - out.term_B;
    return out;
}

CurveTForm t_form_curve(const FinslerMetricSpec& spec, double g_base, double Rg_zzzz,
                        const ProjectivePoint& pt, cplx u) {
    const int m1 = spec.rank - 1;
    const DecompositionForms F = decomposition_forms(spec, pt);
    CurveTForm out;
    const double u2 = std::norm(u);
    out.i_u_psi = std::abs(F.psi(0, 0)) * std::abs(u);
    out.term_A = std::real(-F.psi(0, 0)) / sqr(g_base) * Rg_zzzz * u2;

    // fiber derivative of Psi_{z zbar} by finite differences in w
    const double hw = 1e-3 * (1.0 + pt.w.norm());
    constexpr double kC1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
    VectorXcd dpsi(m1);
    for (int a = 0; a < m1; ++a) {
        cplx dx{0, 0}, dy{0, 0};
        for (int k = -2; k <= 2; ++k) {
            if (kC1[k + 2] == 0.0) continue;
            ProjectivePoint q = pt;
            q.w(a) += cplx{k * hw, 0};
            dx += kC1[k + 2] * kobayashi_curvature(spec, pt.base_idx, q.embed())(0, 0);
            q = pt;
            q.w(a) += cplx{0, k * hw};
            dy += kC1[k + 2] * kobayashi_curvature(spec, pt.base_idx, q.embed())(0, 0);
        }
        dpsi(a) = 0.5 * (dx - cplx{0, 1} * dy) / (12 * hw);
    }
    const MatrixXcd W = F.fs.inverse();
    cplx tB{0, 0};
    for (int a = 0; a < m1; ++a)
        for (int b = 0; b < m1; ++b) tB += W(b, a) * dpsi(a) * std::conj(dpsi(b));
    out.term_B = std::real(tB) * u2 / g_base;
    out.t_value = out.term_A - out.term_B;
    return out;
}

double kahler_residual(const MatrixField& g) {
    const ChartGrid& gr = *g.grid;
    const int n = gr.m;
    if (n == 1) return 0.0;  // curves are Kaehler automatically
    std::vector<Field> dg(n);
    for (int a = 0; a < n; ++a) dg[a] = dz(g, a);
    double res = 0;
    std::vector<int> mi(gr.axes.size());
    for (std::size_t p = 0; p < gr.points(); ++p) {
        gr.unravel(p, mi.data());
        if (!gr.owned(mi.data())) continue;
        for (int a = 0; a < n; ++a)
            for (int c = 0; c < n; ++c)
                for (int b = 0; b < n; ++b)
                    res = std::max(res, std::abs(dg[a].at(c * n + b, p) - dg[c].at(a * n + b, p)));
    }
    return res;
}

std::string PositivityReport::to_json() const {
    nlohmann::json j;
    j["probe"] = probe;
    j["samples"] = samples;
    j["min_value"] = min_value;
    j["field_scale"] = field_scale;
    j["argmin_chart"] = argmin_chart;
    j["argmin_index"] = argmin_index;
    j["time"] = time;
    auto vec = [](const VectorXcd& v) {
        nlohmann::json a = nlohmann::json::array();
        for (int i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
        return a;
    };
    j["argmin_X"] = vec(argmin_X);
    j["argmin_Y"] = vec(argmin_Y);
    return j.dump();
}

} // namespace gf
