#include "sdd/oracle.hpp"

#include "sdd/chol.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace sdd {

namespace oracle {

Matrix assemble(const LinOp& op, int dim, int cap) {
    if (dim > cap)
        throw ConfigError("oracle assembly dimension " + std::to_string(dim) +
                          " exceeds cap " + std::to_string(cap));
    Matrix M(dim, dim);
    Vector e = Vector::Zero(dim);
    for (int j = 0; j < dim; ++j) {
        e[j] = 1.0;
        M.col(j) = op(e);
        e[j] = 0.0;
    }
    return M;
}

std::pair<double, double> gen_eig_extremes(const Matrix& P, const Matrix& Q) {
    require(P.rows() == Q.rows(), "gen_eig_extremes: dimension mismatch");
    const CholFactor F = chol(Q);
    // L⁻¹ P L⁻ᵀ is symmetric with the pencil's eigenvalues
    const Matrix& L = F.dense_factor();
    Matrix X = L.triangularView<Eigen::Lower>().solve(P);
    Matrix Y = L.triangularView<Eigen::Lower>().solve(X.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Y + Y.transpose()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("gen_eig_extremes: eig failed");
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

Vector precond_eigenvalues(const Matrix& K, const Matrix& S) {
    require(K.rows() == S.rows(), "precond_eigenvalues: dimension mismatch");
    const CholFactor F = chol(0.5 * (K + K.transpose()));
    const Matrix& L = F.dense_factor();
    Matrix X = L.transpose() * S * L;  // eig(LᵀSL) = eig(KS)
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (X + X.transpose()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("precond_eigenvalues: eig failed");
    return es.eigenvalues();
}

std::pair<double, double> precond_spectrum(const Matrix& K, const Matrix& S) {
    const Vector w = precond_eigenvalues(K, S);
    return {w.minCoeff(), w.maxCoeff()};
}

} // namespace oracle

DenseOracle DenseOracle::from(const SaddleSystem& sys, int cap) {
    if (sys.n() + sys.m() > cap)
        throw ConfigError("dense oracle: n + m exceeds cap " + std::to_string(cap));
    DenseOracle o;
    o.A = sys.A.to_dense();
    o.B = sys.B.to_dense();
    o.C = sys.C.to_dense();
    return o;
}

Matrix DenseOracle::saddle_matrix() const {
    Matrix M(n() + m(), n() + m());
    M.topLeftCorner(n(), n()) = A;
    M.topRightCorner(n(), m()) = B.transpose();
    M.bottomLeftCorner(m(), n()) = B;
    M.bottomRightCorner(m(), m()) = -C;
    return M;
}

Vector DenseOracle::solve_saddle(const Vector& fu, const Vector& fp) const {
    Vector rhs(n() + m());
    rhs.head(n()) = fu;
    rhs.tail(m()) = fp;
    return saddle_matrix().partialPivLu().solve(rhs);
}

Matrix DenseOracle::schur() const {
    return C + B * A.ldlt().solve(Matrix(B.transpose()));
}

} // namespace sdd
