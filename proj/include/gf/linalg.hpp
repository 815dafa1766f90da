#pragma once

#include "gf/core.hpp"

#include <Eigen/Dense>

namespace gf {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Q-form convention used throughout: a sesquilinear form with coefficient
/// matrix M acts as  Q(x, y) = sum_{ij} M(i,j) x_i conj(y_j).
inline cplx pair_form(const MatrixXcd& M, const VectorXcd& x, const VectorXcd& y) {
    return (x.transpose() * M * y.conjugate())(0, 0);
}

inline MatrixXcd hermitize(const MatrixXcd& M) { return 0.5 * (M + M.adjoint()); }

/// Smallest generalized eigenvalue of  form * x = lambda * metric * x  with
/// metric Hermitian positive definite. Direct solve: Cholesky reduction of the
/// pencil followed by a symmetric eigen-solve; deterministic.
double min_eigen_pencil(const MatrixXcd& form, const MatrixXcd& metric);

/// Lemma-1.1-style probe helper: max |entry| of a matrix
inline double max_abs(const MatrixXcd& M) { return M.cwiseAbs().maxCoeff(); }

/// rows e_a form an orthonormal frame for the Q-form metric H,
/// pair_form(H, e_a, e_b) = delta_ab: with H = L L^H, E = L^{-1}.
MatrixXcd orthonormal_rows(const MatrixXcd& H);

} // namespace gf
