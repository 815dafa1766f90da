#include "gf/linalg.hpp"

namespace gf {

double min_eigen_pencil(const MatrixXcd& form, const MatrixXcd& metric) {
    const auto n = form.rows();
    if (n != form.cols() || n != metric.rows() || n != metric.cols())
        fail("min_eigen_pencil: dimension mismatch");
    if (n > 8) fail("min_eigen_pencil: dimension " + std::to_string(n) + " > 8");
    Eigen::LLT<MatrixXcd> llt(metric);
    if (llt.info() != Eigen::Success)
        fail("min_eigen_pencil: metric not positive definite");
    // reduce A x = lambda B x with B = L L^H to the ordinary Hermitian problem
    // L^{-1} A L^{-H} y = lambda y
    const MatrixXcd L = llt.matrixL();
    const MatrixXcd Ared = L.triangularView<Eigen::Lower>().solve(
        MatrixXcd(L.triangularView<Eigen::Lower>().solve(form.adjoint()).adjoint()));
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitize(Ared), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

MatrixXcd orthonormal_rows(const MatrixXcd& H) {
    Eigen::LLT<MatrixXcd> llt(H);
    if (llt.info() != Eigen::Success) fail("orthonormal_rows: metric not positive definite");
    const MatrixXcd L = llt.matrixL();
    return L.triangularView<Eigen::Lower>().solve(MatrixXcd::Identity(H.rows(), H.cols()));
}

} // namespace gf
