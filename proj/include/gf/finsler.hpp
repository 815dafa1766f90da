#pragma once

#include "gf/grid.hpp"
#include "gf/linalg.hpp"

#include <functional>

namespace gf {

/// Complex Finsler metrics on the dual bundle E* over a gridded base.
///
/// Index conventions (see docs/conventions.md): E* carries lower fiber
/// coordinates v_i; the fiber Hessian G_{i jbar} = d^2 G / dv_i dvbar_j is
/// stored as Gv(i,j) in the Q-form convention (coefficient of v_i vbar_j).
/// For the Hermitian-induced family, G(z,v) = h^{i jbar} v_i vbar_j
/// = v^dagger K v with K = (h_{i jbar})^{-1}, so Gv = K^T.
///
/// An optional twist constant c >= 0 represents tensoring with the pullback
/// of a positively curved line bundle whose curvature form is c * sum_a
/// dz^a dzbar^a: the stored field is the periodic part h-hat, and every
/// horizontal curvature block picks up +c on its diagonal. This is how
/// semipositive presets exist over a torus at all (a degree-zero bundle with
/// Griffiths >= 0 is flat).
struct FinslerMetricSpec {
    enum class Family { HermitianInduced, PerturbedHermitian };

    Family family = Family::HermitianInduced;
    int rank = 2;
    double epsilon = 0.0;  ///< quartic perturbation strength (perturbed family)
    double twist = 0.0;    ///< pullback line-bundle curvature constant

    const ChartGrid* base = nullptr;
    MatrixField h;                  ///< h_{i jbar} on E
    MatrixField K;                  ///< pointwise h^{-1}
    std::vector<MatrixField> dK;    ///< dK/dz^a
    std::vector<MatrixField> ddK;   ///< d2K/dz^a dzbar^b, index a*n+b

    int n() const { return base->m; }
};

FinslerMetricSpec make_finsler_spec(FinslerMetricSpec::Family fam, const ChartGrid& base,
                                    MatrixField h, double epsilon = 0.0, double twist = 0.0);

/// All derivatives of G at one point (z on the grid, any v != 0) used by the
/// implemented formulas. Fiber derivatives are closed-form per family; base
/// derivatives come through the finite-differenced K-fields.
struct FinslerJet {
    int r = 0, n = 0;
    double G = 0;
    VectorXcd Gi;                          // G_i
    MatrixXcd Gv;                          // G_{i jbar}
    std::vector<MatrixXcd> Gvk;            // G_{i jbar k}, k indexed
    VectorXcd Gz;                          // G_a (base)
    MatrixXcd Gzz;                         // G_{a bbar}
    MatrixXcd Giz;                         // G_{i a}: (i, a)
    MatrixXcd Gzj;                         // G_{a jbar}: (a, j)
    std::vector<MatrixXcd> Gvz;            // G_{i jbar a}, a indexed
    std::vector<MatrixXcd> Gvzz;           // G_{i jbar a bbar}, index a*n+b

    VectorXcd Gjbar() const { return Gi.conjugate(); }
    /// G_{i jbar bbar} = conj(G_{j ibar b}) (G is real)
    MatrixXcd Gvz_bar(int b) const { return Gvz[b].adjoint(); }
};

FinslerJet jet(const FinslerMetricSpec& spec, std::size_t base_idx, const VectorXcd& v);

/// scalar G (periodic part) at a grid node
double G_value(const FinslerMetricSpec& spec, std::size_t base_idx, const VectorXcd& v);

/// point of P(E*): base node + affine fiber chart (pivot slot has v=1)
struct ProjectivePoint {
    std::size_t base_idx = 0;
    int pivot = 0;
    VectorXcd w;  // size r-1, slots in fiber order with the pivot dropped
    VectorXcd embed() const;
};
ProjectivePoint project(std::size_t base_idx, const VectorXcd& v);

/// Kobayashi curvature Psi_{a bbar} from the jet (twist included)
MatrixXcd kobayashi_curvature(const FinslerMetricSpec& spec, std::size_t base_idx,
                              const VectorXcd& v);

/// the objects of the canonical decomposition at a projective point
struct DecompositionForms {
    MatrixXcd psi;   // Psi_{a bbar}, n x n
    MatrixXcd fs;    // (omega_FS)_{a bbar} = f_{a bbar}, (r-1) x (r-1)
    MatrixXcd conn;  // N^a_alpha stored as conn(a, alpha)
    MatrixXcd f_zw;  // f_{alpha bbar}, n x (r-1)
    MatrixXcd f_zz;  // f_{alpha betabar}, n x n
    double G = 0;
};
DecompositionForms decomposition_forms(const FinslerMetricSpec& spec, const ProjectivePoint& pt);

/// max entrywise residual of sqrt(-1) ddbar log G = -Psi + omega_FS, with the
/// left side assembled by direct finite differences of log G in (z, w) and the
/// right side from the jet-based forms in the horizontal frame
double decomposition_residual(const FinslerMetricSpec& spec, const ProjectivePoint& pt);

/// max coefficient residual of q* omega_FS = omega_V on E^o at (z, v),
/// plus the Euler degeneracy value omega_V(T, Tbar)
struct PullbackResidual {
    double residual = 0;
    double euler = 0;
};
PullbackResidual pullback_residual(const FinslerMetricSpec& spec, std::size_t base_idx,
                                   const VectorXcd& v);

/// vertical Laplacian (log G)^{bbar a} d2 f / dw^a dwbar^b of a fiber-chart function
double vertical_laplacian(const FinslerMetricSpec& spec, const ProjectivePoint& pt,
                          const std::function<double(const VectorXcd&)>& f_of_w);
/// E^o form G G^{i jbar} d2 f / dv_i dvbar_j of a function of v
double vertical_laplacian_eo(const FinslerMetricSpec& spec, std::size_t base_idx,
                             const VectorXcd& v,
                             const std::function<double(const VectorXcd&)>& f_of_v);

/// residual of the vertical-Laplacian-of-Psi identity
///   f^{bbar a} d_a d_bbar (-Psi)_{ab} = ddbar log det(f) (horizontal frame)
///                                       - <dbarV delta/dz^a, dbarV delta/dz^b>
/// both sides evaluated independently (fiber FD of Psi on the left; base/fiber
/// FD of log det and the connection derivative pairing on the right)
double lemma_vertical_psi_residual(const FinslerMetricSpec& spec, const ProjectivePoint& pt,
                                   int alpha, int beta);

/// min eigenvalue of (G_{i jbar}) over a deterministic sample set
double pseudoconvexity_scan(const FinslerMetricSpec& spec, int samples, uint64_t seed);

/// deterministic random fiber vector (unit Euclidean norm)
VectorXcd random_fiber_vector(int r, Rng& rng);

} // namespace gf
