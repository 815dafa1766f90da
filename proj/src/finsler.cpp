#include "gf/finsler.hpp"
#include "gf/fd.hpp"

namespace gf {
namespace {

MatrixXcd matrix_at(const MatrixField& f, std::size_t idx) {
    MatrixXcd M(f.r, f.r);
    for (int i = 0; i < f.r; ++i)
        for (int j = 0; j < f.r; ++j) M(i, j) = f.entry(i, j, idx);
    return M;
}

// value and first fiber derivatives of the sesquilinear map v -> v^dag M v
struct HJet {
    cplx s;
    VectorXcd si, sj;  // d/dv_i, d/dvbar_j
};
HJet hjet(const MatrixXcd& M, const VectorXcd& v) {
    HJet h;
    h.si = (v.adjoint() * M).transpose();
    h.sj = M * v;
    h.s = (v.adjoint() * M * v)(0, 0);
    return h;
}

std::size_t shift_node(const ChartGrid& g, std::size_t idx, int axis, int k) {
    std::vector<int> mi(g.axes.size());
    g.unravel(idx, mi.data());
    if (g.axes[axis].topo != Topology::Periodic)
        fail("finsler: base chart must be periodic for node-shift differentiation");
    mi[axis] = (mi[axis] + k % g.axes[axis].n + g.axes[axis].n) % g.axes[axis].n;
    return g.ravel(mi.data());
}

constexpr double kC1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};     // /(12h)
constexpr double kC2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0}; // /(12h^2)

template <class F>
cplx node_d(const ChartGrid& g, std::size_t idx, int axis, int order, F&& f) {
    const double h = g.axes[axis].h;
    cplx acc{0, 0};
    const double* c = (order == 1) ? kC1 : kC2;
    for (int k = -2; k <= 2; ++k) {
        if (c[k + 2] == 0.0) continue;
        acc += c[k + 2] * f(shift_node(g, idx, axis, k));
    }
    return acc / (order == 1 ? 12.0 * h : 12.0 * h * h);
}

// holomorphic (sign=-1) / antiholomorphic (sign=+1) node derivative
template <class F>
cplx node_dz(const ChartGrid& g, std::size_t idx, int cpair, int sign, F&& f) {
    const cplx dx = node_d(g, idx, 2 * cpair, 1, f);
    const cplx dy = node_d(g, idx, 2 * cpair + 1, 1, f);
    return 0.5 * (dx + cplx{0, 1} * static_cast<double>(sign) * dy);
}

template <class F>
cplx node_dzdzbar(const ChartGrid& g, std::size_t idx, int cpair, F&& f) {
    return 0.25 * (node_d(g, idx, 2 * cpair, 2, f) + node_d(g, idx, 2 * cpair + 1, 2, f));
}

// complex-step derivatives of a function of one complex variable
template <class F>
cplx wd(int axis /*0=x,1=y*/, int order, double h, cplx w, F&& f) {
    cplx acc{0, 0};
    const double* c = (order == 1) ? kC1 : kC2;
    for (int k = -2; k <= 2; ++k) {
        if (c[k + 2] == 0.0) continue;
        const cplx ww = w + (axis == 0 ? cplx{k * h, 0} : cplx{0, k * h});
        acc += c[k + 2] * f(ww);
    }
    return acc / (order == 1 ? 12.0 * h : 12.0 * h * h);
}
template <class F>
cplx wdz(cplx w, double h, F&& f) {
    return 0.5 * (wd(0, 1, h, w, f) - cplx{0, 1} * wd(1, 1, h, w, f));
}
template <class F>
cplx wdzbar(cplx w, double h, F&& f) {
    return 0.5 * (wd(0, 1, h, w, f) + cplx{0, 1} * wd(1, 1, h, w, f));
}
template <class F>
cplx wdzdzbar(cplx w, double h, F&& f) {
    return 0.25 * (wd(0, 2, h, w, f) + wd(1, 2, h, w, f));
}

MatrixXcd kobayashi_from_jet(const FinslerJet& J, const VectorXcd& v, double twist) {
    const int n = J.n;
    const MatrixXcd Wv = J.Gv.inverse();
    MatrixXcd Psi(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const MatrixXcd R = -J.Gvzz[a * n + b] + J.Gvz[a] * Wv * J.Gvz_bar(b);
            Psi(a, b) = pair_form(R, v, v) / J.G;
        }
    for (int a = 0; a < n; ++a) Psi(a, a) -= twist;
    return hermitize(Psi);
}

} // namespace

FinslerMetricSpec make_finsler_spec(FinslerMetricSpec::Family fam, const ChartGrid& base,
                                    MatrixField h, double epsilon, double twist) {
    for (const auto& ax : base.axes)
        if (ax.topo != Topology::Periodic)
            fail("make_finsler_spec: base chart must be a torus");
    FinslerMetricSpec s;
    s.family = fam;
    s.rank = h.r;
    s.epsilon = (fam == FinslerMetricSpec::Family::PerturbedHermitian) ? epsilon : 0.0;
    s.twist = twist;
    s.base = &base;
    h.hermitize();
    h.check_finite("make_finsler_spec(h)");
    h.min_eigenvalue(true, "make_finsler_spec(h)");
    s.h = h;
    const int n = base.m;
    const std::size_t np = base.points();
    MatrixField K(base, s.h.r);
    for (std::size_t p = 0; p < np; ++p) {
        const MatrixXcd Kp = matrix_at(s.h, p).inverse();
        for (int i = 0; i < s.h.r; ++i)
            for (int j = 0; j < s.h.r; ++j) K.entry(i, j, p) = Kp(i, j);
    }
    s.K = std::move(K);
    for (int a = 0; a < n; ++a) {
        MatrixField mf(base, s.h.r);
        Field d = dz(s.K, a);
        mf.data = std::move(d.data);
        s.dK.push_back(std::move(mf));
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            MatrixField mf(base, s.h.r);
            Field d = dzbar(s.dK[a], b);
            mf.data = std::move(d.data);
            s.ddK.push_back(std::move(mf));
        }
    return s;
}

double G_value(const FinslerMetricSpec& spec, std::size_t idx, const VectorXcd& v) {
    if (v.norm() == 0.0) fail("G_value: v = 0");
    const MatrixXcd K = matrix_at(spec.K, idx);
    const double H = std::real((v.adjoint() * K * v)(0, 0));
    if (spec.epsilon == 0.0) return H;
    double Q = 0;
    for (int i = 0; i < spec.rank; ++i) Q += sqr(std::norm(v(i)));
    return H + spec.epsilon * Q / H;
}

FinslerJet jet(const FinslerMetricSpec& spec, std::size_t idx, const VectorXcd& v) {
    if (v.norm() == 0.0) fail("jet: v = 0");
    const int r = spec.rank, n = spec.n();
    FinslerJet J;
    J.r = r;
    J.n = n;

    const MatrixXcd K0 = matrix_at(spec.K, idx);
    std::vector<MatrixXcd> A(n), Ab(n);
    for (int a = 0; a < n; ++a) {
        A[a] = matrix_at(spec.dK[a], idx);
        Ab[a] = A[a].adjoint();  // dK/dzbar for a Hermitian field
    }
    std::vector<MatrixXcd> B(n * n);
    for (int a = 0; a < n * n; ++a) B[a] = matrix_at(spec.ddK[a], idx);

    const HJet hK = hjet(K0, v);
    std::vector<HJet> hA(n), hAb(n), hB(n * n);
    for (int a = 0; a < n; ++a) {
        hA[a] = hjet(A[a], v);
        hAb[a] = hjet(Ab[a], v);
    }
    for (int a = 0; a < n * n; ++a) hB[a] = hjet(B[a], v);

    // Hermitian-induced part
    const double H = std::real(hK.s);
    const VectorXcd& Hi = hK.si;
    const VectorXcd& Hjb = hK.sj;
    const MatrixXcd Hv = K0.transpose();

    J.G = H;
    J.Gi = Hi;
    J.Gv = Hv;
    J.Gvk.assign(r, MatrixXcd::Zero(r, r));
    J.Gz = VectorXcd(n);
    J.Gzz = MatrixXcd(n, n);
    J.Giz = MatrixXcd(r, n);
    J.Gzj = MatrixXcd(n, r);
    J.Gvz.resize(n);
    J.Gvzz.resize(n * n);
    for (int a = 0; a < n; ++a) {
        J.Gz(a) = hA[a].s;
        J.Giz.col(a) = hA[a].si;
        J.Gzj.row(a) = hA[a].sj.transpose();
        J.Gvz[a] = A[a].transpose();
        for (int b = 0; b < n; ++b) {
            J.Gzz(a, b) = hB[a * n + b].s;
            J.Gvzz[a * n + b] = B[a * n + b].transpose();
        }
    }

    const double eps = spec.epsilon;
    if (eps == 0.0) return J;

    // quartic perturbation phi = Q/H
    double Q = 0;
    VectorXcd Qi(r), Qjb(r);
    for (int i = 0; i < r; ++i) {
        Q += sqr(std::norm(v(i)));
        Qi(i) = 2.0 * v(i) * std::conj(v(i)) * std::conj(v(i));
        Qjb(i) = std::conj(Qi(i));
    }
    const double H2 = H * H, H3 = H2 * H, H4 = H3 * H, H5 = H4 * H;
    const auto Qv = [&](int i, int j) -> cplx {
        return (i == j) ? cplx{4.0 * std::norm(v(i)), 0} : cplx{0, 0};
    };

    J.G += eps * Q / H;
    for (int i = 0; i < r; ++i) J.Gi(i) += eps * (Qi(i) / H - Q * Hi(i) / H2);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            J.Gv(i, j) += eps * (Qv(i, j) / H - Qi(i) * Hjb(j) / H2 - Hi(i) * Qjb(j) / H2 -
                                 Q * Hv(i, j) / H2 + 2.0 * Q * Hi(i) * Hjb(j) / H3);

    for (int k = 0; k < r; ++k) {
        const cplx Hk = Hi(k);
        const cplx Qk = Qi(k);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                const cplx Qvk = (i == j && j == k) ? 4.0 * std::conj(v(i)) : cplx{0, 0};
                const cplx Qik = (i == k) ? 2.0 * std::conj(v(i)) * std::conj(v(i)) : cplx{0, 0};
                const cplx Qjbk = (j == k) ? cplx{4.0 * std::norm(v(j)), 0} : cplx{0, 0};
                cplx t = Qvk / H - Qv(i, j) * Hk / H2;
                t += -Qik * Hjb(j) / H2 - Qi(i) * Hv(k, j) / H2 + 2.0 * Qi(i) * Hjb(j) * Hk / H3;
                t += -Hi(i) * Qjbk / H2 + 2.0 * Hi(i) * Qjb(j) * Hk / H3;
                t += -Qk * Hv(i, j) / H2 + 2.0 * Q * Hv(i, j) * Hk / H3;
                t += 2.0 * Qk * Hi(i) * Hjb(j) / H3 + 2.0 * Q * Hi(i) * Hv(k, j) / H3 -
                     6.0 * Q * Hi(i) * Hjb(j) * Hk / H4;
                J.Gvk[k](i, j) = eps * t;
            }
    }

    for (int a = 0; a < n; ++a) {
        const cplx Ha = hA[a].s;
        J.Gz(a) += eps * (-Q * Ha / H2);
        for (int i = 0; i < r; ++i)
            J.Giz(i, a) += eps * (-(Qi(i) * Ha + Q * hA[a].si(i)) / H2 + 2.0 * Q * Ha * Hi(i) / H3);
        for (int j = 0; j < r; ++j)
            J.Gzj(a, j) += eps * (-(Qjb(j) * Ha + Q * hA[a].sj(j)) / H2 + 2.0 * Q * Ha * Hjb(j) / H3);
        const MatrixXcd Hav = A[a].transpose();
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                cplx t = -Qv(i, j) * Ha / H2;
                t += -Qi(i) * hA[a].sj(j) / H2 + 2.0 * Qi(i) * Hjb(j) * Ha / H3;
                t += -Qjb(j) * hA[a].si(i) / H2 + 2.0 * Qjb(j) * Hi(i) * Ha / H3;
                t += -Q * Hav(i, j) / H2 + 2.0 * Q * Hv(i, j) * Ha / H3;
                t += 2.0 * Q * (hA[a].si(i) * Hjb(j) + Hi(i) * hA[a].sj(j)) / H3 -
                     6.0 * Q * Hi(i) * Hjb(j) * Ha / H4;
                J.Gvz[a](i, j) += eps * t;
            }
        for (int b = 0; b < n; ++b) {
            const cplx Hbb = hAb[b].s;
            const cplx Hab = hB[a * n + b].s;
            J.Gzz(a, b) += eps * (-Q * (Hab / H2 - 2.0 * Ha * Hbb / H3));
            const MatrixXcd Habv = B[a * n + b].transpose();
            const MatrixXcd Hbv = Ab[b].transpose();
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j) {
                    const cplx Hai = hA[a].si(i), Haj = hA[a].sj(j);
                    const cplx Hbi = hAb[b].si(i), Hbj = hAb[b].sj(j);
                    const cplx Habi = hB[a * n + b].si(i), Habj = hB[a * n + b].sj(j);
                    cplx t = -Qv(i, j) * Hab / H2 + 2.0 * Qv(i, j) * Ha * Hbb / H3;
                    t += -Qi(i) * Habj / H2 + 2.0 * Qi(i) * Haj * Hbb / H3;
                    t += 2.0 * Qi(i) * (Hbj * Ha + Hjb(j) * Hab) / H3 -
                         6.0 * Qi(i) * Hjb(j) * Ha * Hbb / H4;
                    t += -Qjb(j) * Habi / H2 + 2.0 * Qjb(j) * Hai * Hbb / H3;
                    t += 2.0 * Qjb(j) * (Hbi * Ha + Hi(i) * Hab) / H3 -
                         6.0 * Qjb(j) * Hi(i) * Ha * Hbb / H4;
                    t += -Q * Habv(i, j) / H2 + 2.0 * Q * Hav(i, j) * Hbb / H3;
                    t += 2.0 * Q * (Hbv(i, j) * Ha + Hv(i, j) * Hab) / H3 -
                         6.0 * Q * Hv(i, j) * Ha * Hbb / H4;
                    t += 2.0 * Q * (Habi * Hjb(j) + Hai * Hbj) / H3 -
                         6.0 * Q * Hai * Hjb(j) * Hbb / H4;
                    t += 2.0 * Q * (Hbi * Haj + Hi(i) * Habj) / H3 -
                         6.0 * Q * Hi(i) * Haj * Hbb / H4;
                    t += -6.0 * Q * (Hbi * Hjb(j) + Hi(i) * Hbj) * Ha / H4 -
                         6.0 * Q * Hi(i) * Hjb(j) * Hab / H4 +
                         24.0 * Q * Hi(i) * Hjb(j) * Ha * Hbb / H5;
                    J.Gvzz[a * n + b](i, j) += eps * t;
                }
        }
    }
    return J;
}

VectorXcd ProjectivePoint::embed() const {
    const int r = static_cast<int>(w.size()) + 1;
    VectorXcd v(r);
    int a = 0;
    for (int i = 0; i < r; ++i) v(i) = (i == pivot) ? cplx{1, 0} : w(a++);
    return v;
}

ProjectivePoint project(std::size_t base_idx, const VectorXcd& v) {
    int pivot = 0;
    for (int i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(pivot))) pivot = i;
    ProjectivePoint pt;
    pt.base_idx = base_idx;
    pt.pivot = pivot;
    pt.w = VectorXcd(v.size() - 1);
    int a = 0;
    for (int i = 0; i < v.size(); ++i)
        if (i != pivot) pt.w(a++) = v(i) / v(pivot);
    return pt;
}

MatrixXcd kobayashi_curvature(const FinslerMetricSpec& spec, std::size_t idx,
                              const VectorXcd& v) {
    const FinslerJet J = jet(spec, idx, v);
    if (std::abs(J.Gv.determinant()) < 1e-14)
        fail("kobayashi_curvature: fiber Hessian singular");
    return kobayashi_from_jet(J, v, spec.twist);
}

DecompositionForms decomposition_forms(const FinslerMetricSpec& spec, const ProjectivePoint& pt) {
    const int r = spec.rank, n = spec.n();
    const VectorXcd v = pt.embed();
    const FinslerJet J = jet(spec, pt.base_idx, v);
    const double G = J.G, G2 = G * G;

    std::vector<int> slot;
    for (int i = 0; i < r; ++i)
        if (i != pt.pivot) slot.push_back(i);

    DecompositionForms F;
    F.G = G;
    F.fs = MatrixXcd(r - 1, r - 1);
    for (int a = 0; a < r - 1; ++a)
        for (int b = 0; b < r - 1; ++b)
            F.fs(a, b) =
                (G * J.Gv(slot[a], slot[b]) - J.Gi(slot[a]) * std::conj(J.Gi(slot[b]))) / G2;
    F.fs = hermitize(F.fs);
    F.f_zw = MatrixXcd(n, r - 1);
    for (int al = 0; al < n; ++al)
        for (int b = 0; b < r - 1; ++b)
            F.f_zw(al, b) = (G * J.Gzj(al, slot[b]) - J.Gz(al) * std::conj(J.Gi(slot[b]))) / G2;
    F.f_zz = MatrixXcd(n, n);
    for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be)
            F.f_zz(al, be) = (G * J.Gzz(al, be) - J.Gz(al) * std::conj(J.Gz(be))) / G2;

    if (r > 1) {
        Eigen::LLT<MatrixXcd> llt(F.fs);
        if (llt.info() != Eigen::Success)
            fail("decomposition_forms: omega_FS not positive definite "
                 "(pseudoconvexity failure)");
    }
    const MatrixXcd W = (r > 1) ? MatrixXcd(F.fs.inverse()) : MatrixXcd(0, 0);
    F.conn = MatrixXcd::Zero(r - 1, n);
    for (int a = 0; a < r - 1; ++a)
        for (int al = 0; al < n; ++al) {
            cplx acc{0, 0};
            for (int b = 0; b < r - 1; ++b) acc += F.f_zw(al, b) * W(b, a);
            F.conn(a, al) = acc;
        }
    F.psi = kobayashi_from_jet(J, v, spec.twist);
    return F;
}

double decomposition_residual(const FinslerMetricSpec& spec, const ProjectivePoint& pt) {
    const int r = spec.rank, n = spec.n();
    const ChartGrid& g = *spec.base;
    const DecompositionForms F = decomposition_forms(spec, pt);
    const int m1 = r - 1;
    const double hw = 1e-2;

    const auto embed_at = [&](const VectorXcd& w) {
        ProjectivePoint q = pt;
        q.w = w;
        return q.embed();
    };
    const auto lg = [&](std::size_t node, const VectorXcd& w) {
        return cplx{std::log(G_value(spec, node, embed_at(w))), 0.0};
    };

    // oracle: direct finite differences of log G in (z, w)
    MatrixXcd Fzz(n, n), Fzw(n, std::max(m1, 1)), Fww(std::max(m1, 1), std::max(m1, 1));
    for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be) {
            if (al == be)
                Fzz(al, be) =
                    node_dzdzbar(g, pt.base_idx, al, [&](std::size_t q) { return lg(q, pt.w); });
            else
                Fzz(al, be) = node_dz(g, pt.base_idx, al, -1, [&](std::size_t qa) {
                    return node_dz(g, qa, be, +1, [&](std::size_t qb) { return lg(qb, pt.w); });
                });
        }
    for (int al = 0; al < n; ++al)
        for (int b = 0; b < m1; ++b)
            Fzw(al, b) = wdzbar(pt.w(b), hw, [&](cplx wb) {
                VectorXcd w = pt.w;
                w(b) = wb;
                return node_dz(g, pt.base_idx, al, -1, [&](std::size_t q) { return lg(q, w); });
            });
    for (int a = 0; a < m1; ++a)
        for (int b = 0; b < m1; ++b) {
            if (a == b)
                Fww(a, b) = wdzdzbar(pt.w(a), hw, [&](cplx wa) {
                    VectorXcd w = pt.w;
                    w(a) = wa;
                    return lg(pt.base_idx, w);
                });
            else
                Fww(a, b) = wdz(pt.w(a), hw, [&](cplx wa) {
                    return wdzbar(pt.w(b), hw, [&](cplx wb) {
                        VectorXcd w = pt.w;
                        w(a) = wa;
                        w(b) = wb;
                        return lg(pt.base_idx, w);
                    });
                });
        }
    for (int al = 0; al < n; ++al) Fzz(al, al) += spec.twist;

    // assembled side: -Psi + omega_FS pushed from {delta/dz, d/dw} to the
    // coordinate frame with N^a_alpha
    MatrixXcd Azz = -F.psi;
    for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be) {
            cplx acc{0, 0};
            for (int c = 0; c < m1; ++c)
                for (int d = 0; d < m1; ++d)
                    acc += F.conn(c, al) * F.fs(c, d) * std::conj(F.conn(d, be));
            Azz(al, be) += acc;
        }
    MatrixXcd Azw = MatrixXcd::Zero(n, std::max(m1, 1));
    for (int al = 0; al < n; ++al)
        for (int b = 0; b < m1; ++b) {
            cplx acc{0, 0};
            for (int c = 0; c < m1; ++c) acc += F.conn(c, al) * F.fs(c, b);
            Azw(al, b) = acc;
        }

    double res = max_abs(Fzz - Azz);
    if (m1 > 0) {
        res = std::max(res, max_abs(Fzw - Azw));
        res = std::max(res, max_abs(Fww - F.fs));
    }
    return res;
}

PullbackResidual pullback_residual(const FinslerMetricSpec& spec, std::size_t idx,
                                   const VectorXcd& v) {
    const int r = spec.rank;
    const FinslerJet J = jet(spec, idx, v);
    const double G = J.G, G2 = G * G;
    MatrixXcd Ov(r, r);  // omega_V coefficients: the full fiber log-Hessian
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            Ov(i, j) = (G * J.Gv(i, j) - J.Gi(i) * std::conj(J.Gi(j))) / G2;

    const ProjectivePoint pt = project(idx, v);
    const int k = pt.pivot;
    std::vector<int> slot;
    for (int i = 0; i < r; ++i)
        if (i != k) slot.push_back(i);
    const cplx vk = v(k);
    // restriction identity: d2 log G / dw^a dwbar^b = |v_k|^2 d2 log G / dv_a dvbar_b
    MatrixXcd Mw(r - 1, r - 1);
    for (int a = 0; a < r - 1; ++a)
        for (int b = 0; b < r - 1; ++b) Mw(a, b) = std::norm(vk) * Ov(slot[a], slot[b]);
    // q*(delta w^a) = (1/v_k) delta v^a - (v_a/v_k^2) delta v^k
    MatrixXcd Jmat = MatrixXcd::Zero(r - 1, r);
    for (int a = 0; a < r - 1; ++a) {
        Jmat(a, slot[a]) = 1.0 / vk;
        Jmat(a, k) = -v(slot[a]) / (vk * vk);
    }
    const MatrixXcd Qv = Jmat.transpose() * Mw * Jmat.conjugate();

    PullbackResidual out;
    out.residual = max_abs(Ov - Qv);
    out.euler = std::abs(pair_form(Ov, v, v));
    return out;
}

double vertical_laplacian(const FinslerMetricSpec& spec, const ProjectivePoint& pt,
                          const std::function<double(const VectorXcd&)>& f_of_w) {
    const DecompositionForms F = decomposition_forms(spec, pt);
    const int m1 = spec.rank - 1;
    const double hw = 1e-3 * (1.0 + pt.w.norm());
    const MatrixXcd W = F.fs.inverse();
    const auto fw = [&](const VectorXcd& w) { return cplx{f_of_w(w), 0.0}; };
    cplx acc{0, 0};
    for (int a = 0; a < m1; ++a)
        for (int b = 0; b < m1; ++b) {
            cplx hess;
            if (a == b)
                hess = wdzdzbar(pt.w(a), hw, [&](cplx wa) {
                    VectorXcd w = pt.w;
                    w(a) = wa;
                    return fw(w);
                });
            else
                hess = wdz(pt.w(a), hw, [&](cplx wa) {
                    return wdzbar(pt.w(b), hw, [&](cplx wb) {
                        VectorXcd w = pt.w;
                        w(a) = wa;
                        w(b) = wb;
                        return fw(w);
                    });
                });
            acc += W(b, a) * hess;
        }
    return std::real(acc);
}

double vertical_laplacian_eo(const FinslerMetricSpec& spec, std::size_t idx,
                             const VectorXcd& v,
                             const std::function<double(const VectorXcd&)>& f_of_v) {
    const FinslerJet J = jet(spec, idx, v);
    const int r = spec.rank;
    const double hv = 1e-3 * (1.0 + v.norm());
    const MatrixXcd Wv = J.Gv.inverse();
    const auto fv = [&](const VectorXcd& vv) { return cplx{f_of_v(vv), 0.0}; };
    cplx acc{0, 0};
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            cplx hess;
            if (i == j)
                hess = wdzdzbar(v(i), hv, [&](cplx vi) {
                    VectorXcd vv = v;
                    vv(i) = vi;
                    return fv(vv);
                });
            else
                hess = wdz(v(i), hv, [&](cplx vi) {
                    return wdzbar(v(j), hv, [&](cplx vj) {
                        VectorXcd vv = v;
                        vv(i) = vi;
                        vv(j) = vj;
                        return fv(vv);
                    });
                });
            acc += Wv(j, i) * hess;
        }
    return J.G * std::real(acc);
}

double lemma_vertical_psi_residual(const FinslerMetricSpec& spec, const ProjectivePoint& pt,
                                   int alpha, int beta) {
    const int r = spec.rank;
    if (r == 1) return 0.0;  // empty fiber index range: both sides vanish
    const int m1 = r - 1;
    const ChartGrid& g = *spec.base;
    const double hw = 2e-2;

    const auto forms_at = [&](std::size_t node, const VectorXcd& w) {
        ProjectivePoint q = pt;
        q.base_idx = node;
        q.w = w;
        return decomposition_forms(spec, q);
    };
    const DecompositionForms F0 = forms_at(pt.base_idx, pt.w);
    const MatrixXcd W = F0.fs.inverse();

    // left: fiber Laplacian of (-Psi)_{alpha betabar}
    const auto negpsi = [&](const VectorXcd& w) -> cplx {
        ProjectivePoint q = pt;
        q.w = w;
        const VectorXcd v = q.embed();
        return -kobayashi_from_jet(jet(spec, pt.base_idx, v), v, spec.twist)(alpha, beta);
    };
    cplx lhs{0, 0};
    for (int a = 0; a < m1; ++a)
        for (int b = 0; b < m1; ++b) {
            cplx hess;
            if (a == b)
                hess = wdzdzbar(pt.w(a), hw, [&](cplx wa) {
                    VectorXcd w = pt.w;
                    w(a) = wa;
                    return negpsi(w);
                });
            else
                hess = wdz(pt.w(a), hw, [&](cplx wa) {
                    return wdzbar(pt.w(b), hw, [&](cplx wb) {
                        VectorXcd w = pt.w;
                        w(a) = wa;
                        w(b) = wb;
                        return negpsi(w);
                    });
                });
            lhs += W(b, a) * hess;
        }

    // right, first term: ddbar log det(f_ab) evaluated on the horizontal frame
    const auto lam = [&](std::size_t node, const VectorXcd& w) -> cplx {
        return std::log(std::real(forms_at(node, w).fs.determinant()));
    };
    const cplx lam_zz =
        (alpha == beta)
            ? node_dzdzbar(g, pt.base_idx, alpha, [&](std::size_t q) { return lam(q, pt.w); })
            : node_dz(g, pt.base_idx, alpha, -1, [&](std::size_t qa) {
                  return node_dz(g, qa, beta, +1, [&](std::size_t qb) { return lam(qb, pt.w); });
              });
    VectorXcd lam_wzbar(m1);  // d/dw^a dzbar^beta
    for (int a = 0; a < m1; ++a)
        lam_wzbar(a) = wdz(pt.w(a), hw, [&](cplx wa) {
            VectorXcd w = pt.w;
            w(a) = wa;
            return node_dz(g, pt.base_idx, beta, +1, [&](std::size_t q) { return lam(q, w); });
        });
    VectorXcd lam_zwbar(m1);  // dz^alpha dwbar^b
    for (int b = 0; b < m1; ++b)
        lam_zwbar(b) = wdzbar(pt.w(b), hw, [&](cplx wb) {
            VectorXcd w = pt.w;
            w(b) = wb;
            return node_dz(g, pt.base_idx, alpha, -1, [&](std::size_t q) { return lam(q, w); });
        });
    MatrixXcd lam_ww(m1, m1);
    for (int a = 0; a < m1; ++a)
        for (int b = 0; b < m1; ++b) {
            if (a == b)
                lam_ww(a, b) = wdzdzbar(pt.w(a), hw, [&](cplx wa) {
                    VectorXcd w = pt.w;
                    w(a) = wa;
                    return lam(pt.base_idx, w);
                });
            else
                lam_ww(a, b) = wdz(pt.w(a), hw, [&](cplx wa) {
                    return wdzbar(pt.w(b), hw, [&](cplx wb) {
                        VectorXcd w = pt.w;
                        w(a) = wa;
                        w(b) = wb;
                        return lam(pt.base_idx, w);
                    });
                });
        }
    cplx t1 = lam_zz;
    for (int a = 0; a < m1; ++a) t1 -= F0.conn(a, alpha) * lam_wzbar(a);
    for (int b = 0; b < m1; ++b) t1 -= std::conj(F0.conn(b, beta)) * lam_zwbar(b);
    for (int a = 0; a < m1; ++a)
        for (int b = 0; b < m1; ++b)
            t1 += F0.conn(a, alpha) * std::conj(F0.conn(b, beta)) * lam_ww(a, b);

    // right, second term: f^{bbar a} (d_bbar N^c_alpha)(d_a conj N^d_beta) f_{c dbar}
    const auto dNbar = [&](int m, int c, int which) -> cplx {
        return wdzbar(pt.w(m), hw, [&](cplx wm) {
            VectorXcd w = pt.w;
            w(m) = wm;
            return forms_at(pt.base_idx, w).conn(c, which);
        });
    };
    MatrixXcd DNa(m1, m1), DNb(m1, m1);  // (m, c): dN^c_alpha / dwbar^m
    for (int m = 0; m < m1; ++m)
        for (int c = 0; c < m1; ++c) {
            DNa(m, c) = dNbar(m, c, alpha);
            DNb(m, c) = dNbar(m, c, beta);
        }
    cplx t2{0, 0};
    for (int a = 0; a < m1; ++a)
        for (int b = 0; b < m1; ++b)
            for (int c = 0; c < m1; ++c)
                for (int d = 0; d < m1; ++d)
                    t2 += W(b, a) * DNa(b, c) * std::conj(DNb(a, d)) * F0.fs(c, d);

    return std::abs(lhs - (t1 - t2));
}

double pseudoconvexity_scan(const FinslerMetricSpec& spec, int samples, uint64_t seed) {
    Rng rng(seed);
    const std::size_t np = spec.base->points();
    double mn = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const std::size_t idx = rng.next() % np;
        const VectorXcd v = random_fiber_vector(spec.rank, rng);
        const FinslerJet J = jet(spec, idx, v);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitize(J.Gv), Eigen::EigenvaluesOnly);
        mn = std::min(mn, es.eigenvalues()(0));
    }
    return mn;
}

VectorXcd random_fiber_vector(int r, Rng& rng) {
    VectorXcd v(r);
    for (int i = 0; i < r; ++i) v(i) = rng.cgaussian();
    return v / v.norm();
}

} // namespace gf
