/// @file chol.hpp
/// @brief Cholesky factorizations (dense in-core, sparse via SimplicialLLT).

#ifndef SDD_CHOL_HPP
#define SDD_CHOL_HPP

#include "sdd/sparse.hpp"
#include "sdd/types.hpp"

#include <Eigen/SparseCholesky>
#include <memory>

namespace sdd {

/// L Lᵀ = P M Pᵀ. The dense path has P = I and exposes the triangular
/// factor for one-sided solves; the sparse path uses AMD ordering.
class CholFactor {
public:
    CholFactor() = default;

    static CholFactor dense(const Matrix& M);       // throws NotSpdError(pivot)
    static CholFactor sparse(const SparseMat& M);   // throws NotSpdError(-1)

    Vector solve(const Vector& b) const;
    Matrix solve_mat(const Matrix& B) const;

    /// L⁻¹ b and L⁻ᵀ b (dense factorizations only).
    Vector lower_solve(const Vector& b) const;
    Vector lower_solve_t(const Vector& b) const;

    const Matrix& dense_factor() const { return L_; }
    bool is_dense() const { return sp_ == nullptr; }
    int dim() const { return dim_; }
    bool empty() const { return dim_ == 0; }

private:
    Matrix L_;
    std::shared_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> sp_;
    int dim_ = 0;
};

/// Factor a symmetric positive definite matrix, dense below the cutoff.
CholFactor chol(const SparseMat& M, const Tolerances& tol = {});
CholFactor chol(const Matrix& M);

} // namespace sdd

#endif
