#pragma once

#include "gf/finsler.hpp"
#include "gf/grid.hpp"
#include "gf/linalg.hpp"

namespace gf {

/// Chern curvature R_{i jbar a bbar} of a Hermitian metric field, sampled on
/// the field's grid. Component plane ((a*n+b)*r+i)*r+j holds R_{i jbar a bbar}.
struct ChernCurvatureField {
    const ChartGrid* grid = nullptr;
    int r = 0, n = 0;
    Field data;
    MatrixXcd at(std::size_t idx, int a, int b) const {
        MatrixXcd M(r, r);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) M(i, j) = data.at(((a * n + b) * r + i) * r + j, idx);
        return M;
    }
};

/// R = -d_a d_bbar h + (d_a h) h^{-1} (d_bbar h); the Hermitian pairing
/// symmetry R_{i jbar a bbar} = conj(R_{j ibar b abar}) is enforced by
/// averaging. On bounded charts the caller must have synced ghosts.
ChernCurvatureField chern_curvature(const MatrixField& h);

/// R_eff = R + c * delta_{a b} h: curvature after tensoring with the pullback
/// line bundle of constant curvature c (the twist of FinslerMetricSpec)
void add_twist(ChernCurvatureField& R, const MatrixField& h, double c);

/// Ric_{a bbar} = -d2 log det g / dz^a dzbar^b (component plane a*n+b)
Field ricci_form(const MatrixField& g);

/// K = -(1/g) d2 log g /dz dzbar for a positive scalar metric on a curve
Field gaussian_curvature(const Field& g);

struct PositivityReport {
    std::string probe;  // griffiths | bisectional | oneone_form
    int samples = 0;
    double min_value = std::numeric_limits<double>::infinity();
    double field_scale = 0;  // max |entry| of the probed form over the samples
    int argmin_chart = 0;
    std::size_t argmin_index = 0;
    VectorXcd argmin_X, argmin_Y;  // fiber/base directions (or the pencil vector U)
    double time = 0;               // flow time when attached to a run
    std::string to_json() const;
};

struct SampleCfg {
    int fiber_dirs = 256;
    int base_dirs = 256;
    int refine_iters = 50;
    double refine_step = 0.1;
    int point_stride = 1;           // probe every k-th owned grid point
    uint64_t seed = 0x5eed5eedULL;  // recorded in run summaries; Halton core is seedless
};

/// min of R(X, Xbar, Y, Ybar) over h-unit X and g-unit Y, over owned grid
/// points. Low-discrepancy direction sampling plus projected-gradient
/// refinement; when the fiber or base is one-dimensional the direction search
/// is a generalized eigenvalue problem and is solved directly.
PositivityReport griffiths_min(const ChernCurvatureField& R, const MatrixField& h,
                               const MatrixField& g, const SampleCfg& cfg = {});

/// merge per-chart reports (two-chart atlases)
PositivityReport merge_reports(const PositivityReport& a, const PositivityReport& b);

/// re-evaluate the Griffiths pairing at a report's argmin (determinism probe)
double reevaluate_griffiths(const ChernCurvatureField& R, const PositivityReport& rep);

/// min generalized eigenvalue of the full (n+r-1)-dimensional coefficient
/// matrix of sqrt(-1) ddbar log G against Omega = p* omega + omega_FS, over
/// all owned base nodes x a Halton fiber-direction set.
PositivityReport oneone_min_eigen_field(const FinslerMetricSpec& spec,
                                        const MatrixXcd& g_base, int fiber_samples,
                                        uint64_t seed);

/// Mok-term report for E = TM (the Kaehler-Ricci lane): both terms of the
/// horizontal T-form in their index-contraction and orthonormal-basis-sum
/// expressions. The two expressions of each term are equal pointwise; the
/// defining fiber-derivative formula agrees with them at null-eigenvector
/// critical points (see t_form_curve for that evaluation).
struct MokTermReport {
    std::size_t base_idx = 0;
    VectorXcd v, u;
    double term_A = 0, term_B = 0;
    double term_A_basis = 0, term_B_basis = 0;
    double t_value = 0;  // term_A - term_B
};
MokTermReport mok_terms_tm(const MatrixField& g, const ChernCurvatureField& R,
                           std::size_t idx, const VectorXcd& v, const VectorXcd& u);

/// defnT-faithful T(u, ubar) on a curve base: term_B uses the fiber
/// derivative of the jet-based Psi (finite differences in w)
struct CurveTForm {
    double term_A = 0, term_B = 0, t_value = 0;
    double i_u_psi = 0;  // |Psi_{z zbar}| at the point, the null-eigenvector gauge
};
CurveTForm t_form_curve(const FinslerMetricSpec& spec, double g_base, double Rg_zzzz,
                        const ProjectivePoint& pt, cplx u);

/// Kaehlerity residual max_a,b,c |d_a g_{c bbar} - d_c g_{a bbar}| over owned points
double kahler_residual(const MatrixField& g);

} // namespace gf
