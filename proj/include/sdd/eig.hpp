/// @file eig.hpp
/// @brief Dense symmetric eigensolvers, PSD pencils with singular right side,
///        and eigendecomposition-based pseudo-inverses.

#ifndef SDD_EIG_HPP
#define SDD_EIG_HPP

#include "sdd/types.hpp"

#include <vector>

namespace sdd {

struct EigPair {
    double value;
    Vector vector;
};

/// Full spectrum of a symmetric matrix, ascending, orthonormal vectors.
/// Throws DimensionError when M is not symmetric to sym_tol (relative).
std::vector<EigPair> sym_eig(const Matrix& M, double sym_tol = 1e-12);

/// Pairs of the pencil (L, Rm) with both sides symmetric PSD and Rm
/// possibly singular. Finite pairs live on range(Rm) (deflated pencil,
/// Rm-orthonormal vectors, ascending). Kernel directions of Rm on which
/// L still acts are reported with value = +inf; directions annihilated
/// by both sides are counted in `excluded`.
struct GenEigResult {
    std::vector<EigPair> finite;
    std::vector<EigPair> infinite;
    int excluded = 0;
    double max_finite() const;  // -inf when no finite pairs
};

GenEigResult gen_sym_eig(const Matrix& L, const Matrix& Rm, double drop_tol = 1e-12);

/// Moore–Penrose apply for a symmetric PSD matrix, eigenvalues below
/// drop_tol·λ_max treated as zero. Reusable across right-hand sides.
class PsdPinv {
public:
    PsdPinv() = default;
    PsdPinv(const Matrix& M, double drop_tol);

    Vector apply(const Vector& g) const;
    Matrix apply_mat(const Matrix& G) const;
    Matrix to_dense() const;

    int rank() const { return rank_; }
    int dim() const { return static_cast<int>(evals_.size()); }
    double lambda_max() const { return lam_max_; }
    const Matrix& eigenvectors() const { return Q_; }
    const Vector& eigenvalues() const { return evals_; }

private:
    Matrix Q_;       // all eigenvectors, ascending eigenvalues
    Vector evals_;
    int rank_ = 0;   // kept eigenvalues are the trailing `rank_`
    double lam_max_ = 0.0;
};

Vector pseudo_apply(const Matrix& M, double drop_tol, const Vector& g);

/// Greedy pivoted Cholesky of a PSD Gram matrix. Returns the (sorted)
/// indices whose residual diagonal stays above drop_tol times the
/// original diagonal; the dropped columns are linearly dependent on the
/// kept ones to that tolerance. This is Gram–Schmidt in the inner
/// product the Gram matrix represents.
std::vector<int> pivoted_gram_keep(Matrix G, double drop_tol);

} // namespace sdd

#endif
