#include "sdd/chol.hpp"

#include <cmath>

namespace sdd {

namespace {

// unblocked factorization that identifies the failing pivot
int find_bad_pivot(const Matrix& M) {
    const int n = static_cast<int>(M.rows());
    Matrix L = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double d = M(j, j);
        if (j > 0) d -= L.row(j).head(j).squaredNorm();
        if (!(d > 0.0) || !std::isfinite(d)) return j;
        L(j, j) = std::sqrt(d);
        if (j + 1 < n) {
            auto tail = Eigen::seq(j + 1, n - 1);
            Vector col = M(tail, j);
            if (j > 0)
                col.noalias() -= L(tail, Eigen::seq(0, j - 1)) * L.row(j).head(j).transpose();
            L(tail, j) = col / L(j, j);
        }
    }
    return -1;
}

} // namespace

CholFactor CholFactor::dense(const Matrix& M) {
    require(M.rows() == M.cols(), "chol: matrix must be square");
    CholFactor F;
    F.dim_ = static_cast<int>(M.rows());
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) {
        const int piv = find_bad_pivot(M);
        throw NotSpdError(piv, "chol: non-positive pivot at index " + std::to_string(piv));
    }
    F.L_ = llt.matrixL();
    return F;
}

CholFactor CholFactor::sparse(const SparseMat& M) {
    require(M.rows() == M.cols(), "chol: matrix must be square");
    CholFactor F;
    F.dim_ = M.rows();
    F.sp_ = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
    F.sp_->compute(M.to_eigen());
    if (F.sp_->info() != Eigen::Success)
        throw NotSpdError(-1, "sparse chol: factorization failed (matrix not SPD?)");
    return F;
}

Vector CholFactor::solve(const Vector& b) const {
    require(b.size() == dim_, "chol solve: dimension mismatch");
    if (sp_) return sp_->solve(b);
    Vector y = L_.triangularView<Eigen::Lower>().solve(b);
    return L_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix CholFactor::solve_mat(const Matrix& B) const {
    require(B.rows() == dim_, "chol solve: dimension mismatch");
    if (sp_) return sp_->solve(B);
    Matrix Y = L_.triangularView<Eigen::Lower>().solve(B);
    return L_.transpose().triangularView<Eigen::Upper>().solve(Y);
}

Vector CholFactor::lower_solve(const Vector& b) const {
    require(!sp_, "lower_solve: dense factor required");
    return L_.triangularView<Eigen::Lower>().solve(b);
}

Vector CholFactor::lower_solve_t(const Vector& b) const {
    require(!sp_, "lower_solve_t: dense factor required");
    return L_.transpose().triangularView<Eigen::Upper>().solve(b);
}

CholFactor chol(const SparseMat& M, const Tolerances& tol) {
    if (M.rows() <= tol.dense_cutoff) return CholFactor::dense(M.to_dense());
    return CholFactor::sparse(M);
}

CholFactor chol(const Matrix& M) { return CholFactor::dense(M); }

} // namespace sdd
